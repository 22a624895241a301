"""Exact Wasserstein distance between discrete distributions.

The transportation LP is solved on the bipartite graph ``support(nu) x
support(mu)`` by the network simplex method: a spanning-tree basis, node
potentials from the tree, Dantzig pricing over all reduced costs, and
Bland's rule as an anti-cycling fallback during long degenerate runs.
Costs that are constant off the diagonal have a closed-form optimum, which
is used directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import structlog
from scipy.optimize import linprog

from mbr_regret.config import config
from mbr_regret.errors import TransportError
from mbr_regret.models import TransportStats
from mbr_regret.space import Categorical
from mbr_regret.utilities.cost import LipschitzCost

logger = structlog.get_logger(__name__)

MARGINAL_TOL = 1e-9
DEGENERATE_RUN_LIMIT = 50


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan over ``rows x cols`` (support indices of nu and mu)."""

    gamma: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        for name in ("gamma", "rows", "cols", "row_marginal", "col_marginal"):
            array = np.array(getattr(self, name), copy=True)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if self.gamma.min(initial=0.0) < -MARGINAL_TOL:
            raise TransportError("Coupling has negative mass")
        if not np.allclose(self.gamma.sum(axis=1), self.row_marginal, rtol=0, atol=MARGINAL_TOL):
            raise TransportError("Coupling row sums do not match nu")
        if not np.allclose(self.gamma.sum(axis=0), self.col_marginal, rtol=0, atol=MARGINAL_TOL):
            raise TransportError("Coupling column sums do not match mu")

    def dense(self, size: int) -> np.ndarray:
        """Coupling embedded in the full ``size x size`` index space."""
        full = np.zeros((size, size))
        full[np.ix_(self.rows, self.cols)] = self.gamma
        return full


@dataclass(frozen=True, eq=False)
class TransportResult:
    """Optimal distance, plan and solver statistics."""

    distance: float
    coupling: Coupling
    stats: TransportStats


def _trimmed_support(dist: Categorical) -> tuple[np.ndarray, np.ndarray]:
    support = np.flatnonzero(dist.probs >= config.support_trim)
    mass = dist.probs[support]
    # Trimmed mass (< 1e-12 in total) is redistributed proportionally.
    return support, mass / mass.sum()


def _check_problem(nu: Categorical, mu: Categorical, cost: LipschitzCost) -> None:
    if nu.space.size != mu.space.size or nu.space.size != cost.size:
        raise TransportError(
            f"space mismatch: nu={nu.space.size}, mu={mu.space.size}, cost={cost.size}"
        )


def _closed_form(
    a_full: np.ndarray, b_full: np.ndarray, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    """Optimal plan for a cost constant off the diagonal: keep the overlap in place."""
    stay = np.minimum(a_full, b_full)
    excess_a = a_full - stay
    excess_b = b_full - stay
    moved = excess_a.sum()
    full = np.diag(stay)
    if moved > 0:
        full += np.outer(excess_a, excess_b) / moved
    return full[np.ix_(rows, cols)]


class _NetworkSimplex:
    """Transportation simplex on a spanning-tree basis.

    Nodes ``0..m-1`` are supply rows, ``m..m+n-1`` demand columns. A basic
    cell ``(i, j)`` is the tree edge between node ``i`` and node ``m + j``.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, C: np.ndarray, tol: float, max_iter: int):
        self.a, self.b, self.C = a, b, C
        self.m, self.n = C.shape
        self.tol = tol
        self.max_iter = max_iter
        self.flow: dict[tuple[int, int], float] = {}
        self.adjacency: list[set[int]] = [set() for _ in range(self.m + self.n)]
        self.iterations = 0
        self.degenerate_pivots = 0

    def _add(self, i: int, j: int, value: float) -> None:
        self.flow[(i, j)] = value
        self.adjacency[i].add(self.m + j)
        self.adjacency[self.m + j].add(i)

    def _remove(self, i: int, j: int) -> None:
        del self.flow[(i, j)]
        self.adjacency[i].discard(self.m + j)
        self.adjacency[self.m + j].discard(i)

    def _initial_basis(self) -> None:
        """Least-cost greedy allocation, completed to a spanning tree with zero cells."""
        m, n = self.m, self.n
        supply = self.a.copy()
        demand = self.b.copy()
        parent = list(range(m + n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        order = np.argsort(self.C, axis=None, kind="stable")
        edges = 0
        for flat in order:
            i, j = divmod(int(flat), n)
            if supply[i] <= 0 or demand[j] <= 0:
                continue
            # Each allocation exhausts a row or a column, so the cells form a forest.
            amount = min(supply[i], demand[j])
            supply[i] -= amount
            demand[j] -= amount
            self._add(i, j, float(amount))
            parent[find(i)] = find(m + j)
            edges += 1
            if edges == m + n - 1:
                break

        if edges < m + n - 1:
            for flat in order:
                i, j = divmod(int(flat), n)
                root_i, root_j = find(i), find(m + j)
                if root_i == root_j:
                    continue
                self._add(i, j, 0.0)
                parent[root_i] = root_j
                edges += 1
                if edges == m + n - 1:
                    break

    def _tree(self) -> tuple[np.ndarray, np.ndarray, list[int], list[int]]:
        """Potentials ``u + v = C`` on basic cells, plus BFS parents and depths."""
        m = self.m
        total = m + self.n
        potential = np.zeros(total)
        parent = [-1] * total
        depth = [0] * total
        seen = [False] * total
        seen[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for other in self.adjacency[node]:
                if seen[other]:
                    continue
                seen[other] = True
                parent[other] = node
                depth[other] = depth[node] + 1
                if node < m:
                    potential[other] = self.C[node, other - m] - potential[node]
                else:
                    potential[other] = self.C[other, node - m] - potential[node]
                queue.append(other)
        return potential[:m], potential[m:], parent, depth

    def _cell(self, x: int, y: int) -> tuple[int, int]:
        return (x, y - self.m) if x < self.m else (y, x - self.m)

    def _cycle(
        self, i: int, j: int, parent: list[int], depth: list[int]
    ) -> list[tuple[int, int]]:
        """Tree path from column ``j`` to row ``i``, as basic cells in order."""
        from_col: list[tuple[int, int]] = []
        from_row: list[tuple[int, int]] = []
        x, y = self.m + j, i
        while depth[x] > depth[y]:
            from_col.append(self._cell(x, parent[x]))
            x = parent[x]
        while depth[y] > depth[x]:
            from_row.append(self._cell(y, parent[y]))
            y = parent[y]
        while x != y:
            from_col.append(self._cell(x, parent[x]))
            from_row.append(self._cell(y, parent[y]))
            x, y = parent[x], parent[y]
        return from_col + from_row[::-1]

    def solve(self) -> np.ndarray:
        self._initial_basis()
        use_bland = False
        degenerate_run = 0

        while True:
            u, v, parent, depth = self._tree()
            reduced = self.C - u[:, None] - v[None, :]
            if use_bland:
                candidates = np.flatnonzero(reduced.ravel() < -self.tol)
                if candidates.size == 0:
                    break
                entering = int(candidates[0])
            else:
                entering = int(np.argmin(reduced))
                if reduced.flat[entering] >= -self.tol:
                    break

            self.iterations += 1
            if self.iterations > self.max_iter:
                raise TransportError(f"Network simplex exceeded {self.max_iter} iterations")

            i, j = divmod(entering, self.n)
            path = self._cycle(i, j, parent, depth)
            minus = path[0::2]
            plus = path[1::2]
            if use_bland:
                leaving = min(minus, key=lambda cell: (self.flow[cell], cell))
            else:
                leaving = min(minus, key=lambda cell: self.flow[cell])
            theta = self.flow[leaving]

            for cell in minus:
                self.flow[cell] -= theta
            for cell in plus:
                self.flow[cell] += theta
            self._remove(*leaving)
            self._add(i, j, theta)

            if theta <= self.tol:
                self.degenerate_pivots += 1
                degenerate_run += 1
                use_bland = use_bland or degenerate_run > DEGENERATE_RUN_LIMIT
            else:
                degenerate_run = 0
                use_bland = False

        gamma = np.zeros((self.m, self.n))
        for (i, j), value in self.flow.items():
            gamma[i, j] = max(value, 0.0)
        return gamma


def wasserstein(nu: Categorical, mu: Categorical, cost: LipschitzCost) -> TransportResult:
    """``WD(nu, mu) = min over couplings of sum gamma_ij C_ij``.

    Costs that are constant off the diagonal use the total-variation closed
    form; any other cost goes through the network simplex over the supports.

    Args:
        nu: Source distribution.
        mu: Target distribution on the same space.
        cost: Ground cost with a zero diagonal.

    Returns:
        The distance, an optimal coupling and solver statistics.

    Raises:
        TransportError: On a space mismatch or when the iteration cap is hit.
    """
    _check_problem(nu, mu, cost)
    rows, a = _trimmed_support(nu)
    cols, b = _trimmed_support(mu)
    C = cost.values[np.ix_(rows, cols)]

    uniform = cost.uniform_off_diagonal
    if uniform is not None:
        a_full = np.zeros(nu.space.size)
        b_full = np.zeros(mu.space.size)
        a_full[rows] = a
        b_full[cols] = b
        gamma = _closed_form(a_full, b_full, rows, cols)
        stats = TransportStats(method="closed_form", rows=rows.size, cols=cols.size)
    else:
        max_iter = config.transport_max_iter or 50 * (rows.size + cols.size) + 1000
        solver = _NetworkSimplex(a, b, C, config.transport_pivot_tol, max_iter)
        gamma = solver.solve()
        stats = TransportStats(
            method="network_simplex",
            iterations=solver.iterations,
            degenerate_pivots=solver.degenerate_pivots,
            rows=rows.size,
            cols=cols.size,
        )

    coupling = Coupling(gamma, rows, cols, a, b)
    distance = float((gamma * C).sum())
    logger.debug(
        "wasserstein_solved",
        distance=distance,
        method=stats.method,
        iterations=stats.iterations,
        rows=stats.rows,
        cols=stats.cols,
    )
    return TransportResult(distance=max(distance, 0.0), coupling=coupling, stats=stats)


def wasserstein_bruteforce(nu: Categorical, mu: Categorical, cost: LipschitzCost) -> float:
    """Dense-LP reference solution for small supports."""
    _check_problem(nu, mu, cost)
    rows, a = _trimmed_support(nu)
    cols, b = _trimmed_support(mu)
    limit = config.bruteforce_support_limit
    if rows.size > limit or cols.size > limit:
        raise TransportError(f"support too large for brute force: {rows.size}x{cols.size} > {limit}")

    m, n = rows.size, cols.size
    C = cost.values[np.ix_(rows, cols)]
    A_eq = np.zeros((m + n, m * n))
    for i in range(m):
        A_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        A_eq[m + j, j::n] = 1.0
    result = linprog(
        C.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs"
    )
    if not result.success:  # pragma: no cover
        raise TransportError(f"Brute-force LP failed: {result.message}")
    return float(result.fun)
