"""Optimal transport between finite distributions, plus scalar
monotone couplings for quadratic cost.

The discrete solver is exact: it hands the transportation LP to the
HiGHS dual simplex (a vertex-following method, deterministic for a
fixed problem), never an entropic approximation. Zero-mass symbols are
dropped before the solve and reinserted afterwards so degenerate
marginals are fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from .info import CapExceeded, Pmf

OT_SIDE_CAP = 4096

# couplings must reproduce their marginals at least this well
MARGINAL_SLACK = 1e-9


@dataclass(frozen=True)
class TransportProblem:
    source: Pmf
    target: Pmf
    costs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.costs, dtype=float)
        if arr.shape != (self.source.size, self.target.size):
            raise ValueError("cost matrix shape does not match the marginals")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ValueError("costs must be finite and >= 0")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "costs", arr)


@dataclass(frozen=True)
class Coupling:
    """Joint table whose marginals match a transport problem's."""

    table: np.ndarray
    cost: float

    def source_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def target_marginal(self) -> np.ndarray:
        return self.table.sum(axis=0)

    def conditional_rows(self) -> np.ndarray:
        """Rows P(y | x); zero-mass rows fall back to the target marginal."""
        rows = self.table.copy()
        sums = rows.sum(axis=1)
        target = self.target_marginal()
        total = target.sum()
        for i in range(rows.shape[0]):
            if sums[i] > 0.0:
                rows[i] /= sums[i]
            else:
                rows[i] = target / total if total > 0 else 1.0 / rows.shape[1]
        return rows


def _transport_lp(mu: np.ndarray, nu: np.ndarray, costs: np.ndarray) -> np.ndarray:
    m, n = costs.shape
    # row-sum and column-sum constraints; last column constraint is
    # redundant given the rest and is dropped for rank
    a_eq = np.zeros((m + n - 1, m * n))
    for i in range(m):
        a_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n - 1):
        a_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([mu, nu[:-1]])
    res = linprog(costs.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.clip(res.x.reshape(m, n), 0.0, None)
    return plan


def solve_ot(problem: TransportProblem, cap: int = OT_SIDE_CAP) -> Coupling:
    """Exact minimum-cost coupling of the two marginals.

    Raises CapExceeded when either side is larger than cap (4096 by
    default). The returned plan reproduces the marginals to 1e-9.
    """
    mu = problem.source.probs
    nu = problem.target.probs
    if mu.size > cap or nu.size > cap:
        raise CapExceeded(f"alphabet sides {mu.size}x{nu.size} exceed cap {cap}")
    su = np.flatnonzero(mu > 0.0)
    sv = np.flatnonzero(nu > 0.0)
    plan_s = _transport_lp(mu[su], nu[sv], problem.costs[np.ix_(su, sv)])
    plan = np.zeros_like(problem.costs)
    plan[np.ix_(su, sv)] = plan_s
    cost = float((plan * problem.costs).sum())
    coupling = Coupling(plan, cost)
    if (np.max(np.abs(coupling.source_marginal() - mu)) > MARGINAL_SLACK
            or np.max(np.abs(coupling.target_marginal() - nu)) > MARGINAL_SLACK):
        raise RuntimeError("transport plan does not reproduce the marginals")
    return coupling


def sample_coupling_conditional(coupling: Coupling, x: int,
                                rng: np.random.Generator,
                                size: int | None = None):
    """Draw y from the coupling's conditional row given x.

    Returns a scalar index when size is None, else an array of draws.
    """
    table = coupling.table
    if not 0 <= x < table.shape[0]:
        raise ValueError(f"conditioning symbol {x} out of range")
    row = table[x]
    mass = row.sum()
    if mass <= 0.0:
        raise ValueError(f"conditioning symbol {x} has zero probability")
    draws = rng.choice(table.shape[1], size=size, p=row / mass)
    return int(draws) if size is None else draws


@dataclass(frozen=True)
class MonotoneMap:
    """Nondecreasing transport map between two scalar laws given by
    their quantile functions, with expected quadratic cost attached.

    The map sends x to target_quantile(u) where u solves
    source_quantile(u) = x; the cost is the quantile-coupling value
    integral_0^1 (Qs(u) - Qt(u))^2 du from a midpoint rule.
    """

    source_quantile: Callable[[float], float]
    target_quantile: Callable[[float], float]
    expected_cost: float
    grid: int

    def __call__(self, x: float) -> float:
        lo, hi = 1e-12, 1.0 - 1e-12
        if self.source_quantile(lo) >= x:
            return float(self.target_quantile(lo))
        if self.source_quantile(hi) <= x:
            return float(self.target_quantile(hi))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.source_quantile(mid) <= x:
                lo = mid
            else:
                hi = mid
        return float(self.target_quantile(0.5 * (lo + hi)))


def _eval_quantile(q: Callable, levels: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(q(levels), dtype=float)
        if vals.shape != levels.shape:
            raise TypeError
    except TypeError:
        vals = np.array([float(q(u)) for u in levels])
    return vals


def monotone_coupling_quadratic(source_quantile: Callable,
                                target_quantile: Callable,
                                grid: int = 100_000) -> MonotoneMap:
    """Comonotone coupling of two scalar laws under squared distance.

    Both arguments are quantile functions on (0, 1) and must be
    nondecreasing; the cost integral uses a midpoint rule on `grid`
    uniformly spaced levels.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    levels = (np.arange(grid) + 0.5) / grid
    qs = _eval_quantile(source_quantile, levels)
    qt = _eval_quantile(target_quantile, levels)
    for name, vals in (("source", qs), ("target", qt)):
        if np.any(np.diff(vals) < -1e-12):
            raise ValueError(f"{name} quantile function is not nondecreasing")
    cost = float(np.mean((qs - qt) ** 2))
    return MonotoneMap(source_quantile, target_quantile, cost, grid)
