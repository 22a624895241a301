"""Package marker for tests directory."""
