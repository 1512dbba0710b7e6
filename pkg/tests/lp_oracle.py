"""Independent LP oracle: exhaustive enumeration of basic feasible points.

Every vertex of a bounded polyhedron is the intersection of n active
hyperplanes drawn from the row bounds and variable bounds; for the small
instances used in tests we enumerate all such intersections, keep the
feasible ones, and take the best objective. Deliberately shares no code
with the solver under test.
"""

from __future__ import annotations

import itertools

import numpy as np


def vertex_enumeration_minimum(c, a, row_lower, row_upper, var_lower, var_upper,
                               feas_tol: float = 1e-8):
    """(best objective, best vertex) or (None, None) when nothing is feasible."""
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    n = c.size
    m = a.shape[0] if a.size else 0

    planes = []
    offsets = []
    for i in range(m):
        for bound in (row_lower[i], row_upper[i]):
            if np.isfinite(bound):
                planes.append(a[i])
                offsets.append(bound)
    eye = np.eye(n)
    for j in range(n):
        for bound in (var_lower[j], var_upper[j]):
            if np.isfinite(bound):
                planes.append(eye[j])
                offsets.append(bound)
    planes = np.asarray(planes)
    offsets = np.asarray(offsets)

    combos = np.array(list(itertools.combinations(range(planes.shape[0]), n)))
    if combos.size == 0:
        return None, None
    systems = planes[combos]              # (K, n, n)
    rhs = offsets[combos]                 # (K, n)
    dets = np.linalg.det(systems)
    solvable = np.abs(dets) > 1e-10
    if not solvable.any():
        return None, None
    # pinv instead of solve: a near-singular combination must not abort the
    # batch, and any point it fabricates is either infeasible (dropped) or
    # feasible and therefore no better than the true optimum
    points = np.full((combos.shape[0], n), np.nan)
    points[solvable] = np.einsum(
        "kij,kj->ki", np.linalg.pinv(systems[solvable]), rhs[solvable]
    )

    pts = points[solvable]
    feasible = (
        np.all(pts >= var_lower - feas_tol, axis=1)
        & np.all(pts <= var_upper + feas_tol, axis=1)
    )
    if m:
        activity = pts @ a.T
        feasible &= (
            np.all(activity >= row_lower - feas_tol, axis=1)
            & np.all(activity <= row_upper + feas_tol, axis=1)
        )
    if not feasible.any():
        return None, None
    candidates = pts[feasible]
    values = candidates @ c
    best = int(np.argmin(values))
    return float(values[best]), candidates[best]


def random_bounded_lp(rng, max_vars: int = 8, max_rows: int = 6):
    """A random LP with finite variable boxes and a guaranteed interior point.

    Row bounds are placed around the activity of a random point inside the
    box, so the instance is always feasible, and the box keeps it bounded.
    Dimensions are capped so the enumeration stays comfortably small.
    """
    n = int(rng.integers(2, max_vars + 1))
    m_cap = max_rows if n <= 5 else 3
    m = int(rng.integers(1, m_cap + 1))
    a = np.round(rng.normal(size=(m, n)), 3)
    a[rng.random(size=a.shape) < 0.35] = 0.0
    c = np.round(rng.normal(size=n), 3)
    lo = np.round(rng.uniform(-4.0, 0.0, n), 3)
    up = np.round(rng.uniform(0.5, 4.0, n), 3)
    x0 = rng.uniform(lo, up)
    act = a @ x0
    rl = np.where(rng.random(m) < 0.25, -np.inf, np.round(act - rng.uniform(0.1, 2.5, m), 3))
    ru = np.where(rng.random(m) < 0.25, np.inf, np.round(act + rng.uniform(0.1, 2.5, m), 3))
    return c, a, rl, ru, lo, up
