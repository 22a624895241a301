"""Flat ``section.key = value`` configuration files.

Grammar (one assignment per line)::

    # comment
    experiment.space_size = 1000
    experiment.n_grid = 50, 100, 200, 500
    simulate.observation1 = true
    decode.distribution = model.csv

Values stay strings here; pydantic coerces them when the sections are
validated. Comma-separated values become lists for list-typed fields, and
``none`` (or an empty value) clears an optional field. Command-line
overrides use the same ``section.key=value`` form and take precedence.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from mbr_regret.errors import ExperimentConfigError
from mbr_regret.models import DecodeConfig, ExperimentSpec

logger = structlog.get_logger(__name__)

SECTIONS = ("experiment", "simulate", "decode")
# experiment.* and simulate.* both populate the ExperimentSpec
SPEC_SECTIONS = ("experiment", "simulate")

_LINE = re.compile(r"^\s*([A-Za-z_][\w]*)\.([A-Za-z_][\w]*)\s*=\s*(.*?)\s*$")
_LIST_FIELDS = {
    name
    for name, field in ExperimentSpec.model_fields.items()
    if "list" in str(field.annotation)
}
_SECTION_FIELDS = {
    "experiment": ExperimentSpec.model_fields,
    "simulate": ExperimentSpec.model_fields,
    "decode": DecodeConfig.model_fields,
}

ConfigTree = dict[str, dict[str, str]]


def _split_assignment(text: str, origin: str) -> tuple[str, str, str]:
    match = _LINE.match(text)
    if match is None:
        raise ExperimentConfigError(f"{origin}: expected 'section.key = value', got {text.strip()!r}")
    section, key, value = match.groups()
    if section not in SECTIONS:
        raise ExperimentConfigError(f"{origin}: unknown section '{section}' (known: {list(SECTIONS)})")
    return section, key, value


def parse_config_text(text: str, source: str = "<config>") -> ConfigTree:
    """Parse config text into ``{section: {key: raw value}}``."""
    tree: ConfigTree = {section: {} for section in SECTIONS}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        section, key, value = _split_assignment(stripped, f"{source}: line {lineno}")
        tree[section][key] = value
    return tree


def load_config_file(path: str | Path) -> ConfigTree:
    """Read and parse a config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ExperimentConfigError(f"Cannot read config file {path}: {e}") from e
    tree = parse_config_text(text, str(path))
    logger.debug("config_loaded", path=str(path), keys=sum(len(v) for v in tree.values()))
    return tree


def apply_overrides(
    tree: ConfigTree, overrides: list[str], sections: tuple[str, ...] = SECTIONS
) -> ConfigTree:
    """Apply ``section.key=value`` overrides on top of a parsed tree.

    Args:
        tree: Parsed config tree.
        overrides: ``section.key=value`` strings, applied in order.
        sections: Sections the calling command reads.

    Returns:
        A new tree with the overrides applied.

    Raises:
        ExperimentConfigError: If an override is malformed, targets a section
            outside ``sections`` or names an unknown key.
    """
    merged = {section: dict(values) for section, values in tree.items()}
    for section in SECTIONS:
        merged.setdefault(section, {})
    for override in overrides:
        section, key, value = _split_assignment(override, "--set")
        if section not in sections:
            raise ExperimentConfigError(
                f"--set: section '{section}' is not used by this command, expected {list(sections)}"
            )
        if key not in _SECTION_FIELDS[section]:
            raise ExperimentConfigError(f"unknown key '{section}.{key}'")
        merged[section][key] = value
    return merged


def _coerce(key: str, value: str) -> Any:
    if value.lower() in ("", "none", "null"):
        return None
    if key in _LIST_FIELDS:
        return [item.strip() for item in value.strip("[]").split(",") if item.strip()]
    return value


def build_experiment_spec(tree: ConfigTree) -> ExperimentSpec:
    """Validate the experiment sections into an :class:`ExperimentSpec`.

    Args:
        tree: Parsed config tree; only ``experiment`` and ``simulate`` are read.

    Returns:
        The validated experiment spec.

    Raises:
        ExperimentConfigError: On an unknown key or an invalid value.
    """
    values: dict[str, Any] = {}
    for section in SPEC_SECTIONS:
        for key, raw in tree.get(section, {}).items():
            if key not in ExperimentSpec.model_fields:
                raise ExperimentConfigError(f"unknown key '{section}.{key}'")
            coerced = _coerce(key, raw)
            if coerced is not None:
                values[key] = coerced
    try:
        return ExperimentSpec.model_validate(values)
    except ValidationError as e:
        raise ExperimentConfigError(f"Invalid experiment configuration: {e}") from e


def build_decode_config(tree: ConfigTree) -> DecodeConfig:
    """Validate the ``decode`` section."""
    values = {key: _coerce(key, raw) for key, raw in tree.get("decode", {}).items()}
    unknown = [key for key in values if key not in DecodeConfig.model_fields]
    if unknown:
        raise ExperimentConfigError(f"unknown key 'decode.{unknown[0]}'")
    try:
        return DecodeConfig.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise ExperimentConfigError(f"Invalid decode configuration: {e}") from e
