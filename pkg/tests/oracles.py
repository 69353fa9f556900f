"""Independent brute-force oracles shared by unit and acceptance tests.

Everything here avoids the library's solver paths on purpose: transport
plans come from enumerating basic solutions of the transportation
polytope, and constrained-information values come from a derivative-free
nested grid.
"""

from itertools import combinations

import numpy as np


def ot_vertex_enumeration(mu: np.ndarray, psi: np.ndarray,
                          costs: np.ndarray) -> float:
    """Minimum transport cost via exhaustive basis enumeration.

    A vertex of the transportation polytope is supported on at most
    m + n - 1 cells; every such support whose equality system is
    nonsingular yields one candidate basic solution.
    """
    m, n = costs.shape
    cells = [(i, j) for i in range(m) for j in range(n)]
    # marginal equations, dropping the last column sum (rank m + n - 1)
    rows = []
    rhs = []
    for i in range(m):
        rows.append([1.0 if c[0] == i else 0.0 for c in cells])
        rhs.append(mu[i])
    for j in range(n - 1):
        rows.append([1.0 if c[1] == j else 0.0 for c in cells])
        rhs.append(psi[j])
    rows = np.array(rows)
    rhs = np.array(rhs)

    best = np.inf
    for basis in combinations(range(len(cells)), m + n - 1):
        sub = rows[:, basis]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        sol = np.linalg.solve(sub, rhs)
        if np.min(sol) < -1e-10:
            continue
        table = np.zeros((m, n))
        for k, idx in enumerate(basis):
            table[cells[idx]] = max(sol[k], 0.0)
        if abs(table.sum() - 1.0) > 1e-9:
            continue
        best = min(best, float(np.sum(table * costs)))
    return best


def grid_mmi_3x3(mu, psi, rho, d, seed_points=(),
                 steps=(0.05, 0.01, 0.002), span=2.5):
    """Nested grid refinement over the 4 free coordinates of a 3x3
    coupling with fixed marginals; derivative-free. Besides the plain
    axis grid, each level adds distortion-face sections: for every
    subgrid over 3 coordinates, the 4th is solved from cost == d, so
    the active constraint surface is sampled exactly. seed_points are
    known-feasible free vectors kept as extra candidates."""
    box_lo = np.zeros(4)
    box_hi = np.array([min(mu[0], psi[0]), min(mu[0], psi[1]),
                       min(mu[1], psi[0]), min(mu[1], psi[1])])
    ref = np.outer(mu, psi).reshape(-1)
    r = rho
    # cost = const + lin . (p11, p12, p21, p22) after eliminating the
    # six dependent cells against the fixed marginals
    lin = np.array([
        r[0, 0] - r[0, 2] - r[2, 0] + r[2, 2],
        r[0, 1] - r[0, 2] - r[2, 1] + r[2, 2],
        r[1, 0] - r[1, 2] - r[2, 0] + r[2, 2],
        r[1, 1] - r[1, 2] - r[2, 1] + r[2, 2],
    ])
    const = (mu[0] * r[0, 2] + mu[1] * r[1, 2] + psi[0] * r[2, 0]
             + psi[1] * r[2, 1] + (psi[2] - mu[0] - mu[1]) * r[2, 2])

    def evaluate(free):
        p11, p12, p21, p22 = free[:, 0], free[:, 1], free[:, 2], free[:, 3]
        p13 = mu[0] - p11 - p12
        p23 = mu[1] - p21 - p22
        p31 = psi[0] - p11 - p21
        p32 = psi[1] - p12 - p22
        p33 = psi[2] - p13 - p23
        cells = np.stack([p11, p12, p13, p21, p22, p23, p31, p32, p33],
                         axis=1)
        ok = np.all(cells >= -1e-12, axis=1)
        cells = np.clip(cells[ok], 0.0, None)
        if cells.shape[0] == 0:
            return None, None
        cells = cells[cells @ rho.reshape(-1) <= d + 1e-12]
        if cells.shape[0] == 0:
            return None, None
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(cells > 0, cells * np.log2(cells / ref), 0.0)
        vals = terms.sum(axis=1)
        k = int(np.argmin(vals))
        return float(vals[k]), cells[k][[0, 1, 3, 4]]

    def face_sections(axes):
        out = []
        for k in range(4):
            if abs(lin[k]) < 1e-12:
                continue
            idx = [i for i in range(4) if i != k]
            grids = np.meshgrid(*[axes[i] for i in idx], indexing="ij")
            sub = np.stack([g.ravel() for g in grids], axis=1)
            solved = (d - const - sub @ lin[idx]) / lin[k]
            keep = ((solved >= box_lo[k] - 1e-12)
                    & (solved <= box_hi[k] + 1e-12))
            pts = np.empty((int(keep.sum()), 4))
            pts[:, idx] = sub[keep]
            pts[:, k] = np.clip(solved[keep], box_lo[k], box_hi[k])
            out.append(pts)
        return out

    seeds = np.array(list(seed_points)).reshape(-1, 4)
    lo, hi = box_lo.copy(), box_hi.copy()
    best_val, best_pt = np.inf, None
    for st in steps:
        axes = [np.arange(lo[i], hi[i] + st / 2, st) for i in range(4)]
        grids = np.meshgrid(*axes, indexing="ij")
        blocks = [np.stack([g.ravel() for g in grids], axis=1)]
        blocks.extend(face_sections(axes))
        if seeds.size:
            blocks.append(seeds)
        val, pt = evaluate(np.vstack(blocks))
        if val is not None and val < best_val:
            best_val, best_pt = val, pt
        if best_pt is None:
            return None
        lo = np.maximum(box_lo, best_pt - span * st)
        hi = np.minimum(box_hi, best_pt + span * st)
    return best_val if np.isfinite(best_val) else None


def random_mmi_instance(rng):
    """One random 3x3 constrained-information instance with a budget
    strictly between the transport minimum and the independent cost,
    plus feasible seed points for the grid."""
    from ocrate import Pmf
    from ocrate.transport import TransportProblem, solve_ot

    mu = rng.dirichlet(np.ones(3))
    psi = rng.dirichlet(np.ones(3))
    rho = rng.uniform(0.0, 1.0, size=(3, 3))
    base = solve_ot(TransportProblem(Pmf(mu), Pmf(psi), rho))
    ind_cost = float(np.outer(mu, psi).ravel() @ rho.ravel())
    beta = rng.uniform(0.2, 0.9)
    d = base.cost + beta * (ind_cost - base.cost)
    alpha = (d - base.cost) / (ind_cost - base.cost)
    feasible = (1 - alpha) * base.table + alpha * np.outer(mu, psi)
    seeds = [base.table[:2, :2].ravel(), feasible[:2, :2].ravel()]
    return mu, psi, rho, d, seeds
