"""Linear-programming kernel for small dense problems.

Two routes into the same geometry: a bounded-variable two-phase simplex for
general equality-form programs, and a closed-form greedy minimizer for linear
objectives over the intersection of a coordinate band with the probability
simplex.  The simplex is deliberately plain (dense tableau, Bland's pivot
rule): every program solved here has a handful of variables, so anti-cycling
and determinism matter more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "FEASIBILITY_TOL",
    "BOUND_TOL",
    "BandBox",
    "BandFeasibility",
    "LinearProgram",
    "LpOutcome",
    "LpStatus",
    "SolverError",
    "band_feasible_with_halfspaces",
    "minimize_over_band",
    "solve_lp",
]

FEASIBILITY_TOL = 1e-9  # residual allowed on equality constraints
BOUND_TOL = 1e-12       # residual allowed on variable bounds
_PIVOT_TOL = 1e-10
_MAX_PIVOTS = 20_000


class SolverError(RuntimeError):
    """The solver produced an internally inconsistent result."""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  subject to  A x = b  and  lower <= x <= upper.

    Lower bounds must be finite (zero or negative is fine); upper bounds may
    be ``np.inf``.  Inequalities are expected to arrive already slacked into
    equality form by the caller.
    """

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, objective, eq_matrix, eq_rhs, lower, upper):
        c = _vector(objective, "objective")
        A = np.asarray(eq_matrix, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"eq_matrix must be two-dimensional, got shape {A.shape}")
        b = _vector(eq_rhs, "eq_rhs")
        lo = _vector(lower, "lower")
        hi = _vector(upper, "upper")
        n = c.size
        if A.shape[1] != n:
            raise ValueError(f"eq_matrix has {A.shape[1]} columns for {n} variables")
        if b.size != A.shape[0]:
            raise ValueError(f"eq_rhs has {b.size} entries for {A.shape[0]} rows")
        if lo.size != n or hi.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("objective, matrix and rhs must be finite")
        if not np.all(np.isfinite(lo)):
            raise ValueError("lower bounds must be finite")
        if np.any(np.isnan(hi)):
            raise ValueError("upper bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("every lower bound must be <= its upper bound")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_matrix", A)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def num_variables(self) -> int:
        return self.objective.size


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: float | None = None
    point: np.ndarray | None = None


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _run_simplex(T: np.ndarray, basis: list[int]) -> LpStatus:
    """Minimize the objective encoded in the last tableau row (Bland's rule)."""
    for _ in range(_MAX_PIVOTS):
        reduced = T[-1, :-1]
        candidates = np.flatnonzero(reduced < -_PIVOT_TOL)
        if candidates.size == 0:
            return LpStatus.OPTIMAL
        enter = int(candidates[0])  # Bland: lowest eligible index
        column = T[:-1, enter]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            return LpStatus.UNBOUNDED
        ratios = T[:-1, -1][rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        leave = int(min(tied, key=lambda r: basis[r]))  # Bland: lowest basic index
        _pivot(T, leave, enter)
        basis[leave] = enter
    raise SolverError("simplex pivot limit exceeded")


def _two_phase(c: np.ndarray, A: np.ndarray, b: np.ndarray):
    """Solve min c.x s.t. A x = b, x >= 0 on a dense tableau."""
    m, n = A.shape
    A = A.copy()
    b = b.copy()
    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0

    # Phase 1: artificial variable per row, minimize their sum.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    T[-1, :] = -T[:m, :].sum(axis=0)
    T[-1, n:n + m] += 1.0
    if _run_simplex(T, basis) is LpStatus.UNBOUNDED:
        raise SolverError("phase-1 objective reported unbounded")
    if -T[-1, -1] > FEASIBILITY_TOL:
        return LpStatus.INFEASIBLE, None, None

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] < n:
            keep.append(r)
            continue
        pivots = np.flatnonzero(np.abs(T[r, :n]) > _PIVOT_TOL)
        if pivots.size:
            _pivot(T, r, int(pivots[0]))
            basis[r] = int(pivots[0])
            keep.append(r)
    if len(keep) < m:
        T = np.vstack([T[keep, :], T[-1:, :]])
        basis = [basis[r] for r in keep]
        m = len(keep)
    T = np.hstack([T[:, :n], T[:, -1:]])

    # Phase 2: original objective, expressed in the current basis.
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        coef = T[-1, basis[r]]
        if coef != 0.0:
            T[-1, :] -= coef * T[r, :]
    if _run_simplex(T, basis) is LpStatus.UNBOUNDED:
        return LpStatus.UNBOUNDED, None, None

    x = np.zeros(n)
    for r in range(m):
        x[basis[r]] = T[r, -1]
    return LpStatus.OPTIMAL, x, float(c @ x)


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve a bounded-variable equality-form program.

    Variables are shifted to start at their lower bounds and finite upper
    bounds become explicit slack rows, which reduces everything to the
    standard x >= 0 form handled by :func:`_two_phase`.  Returns a basic
    optimal solution; the returned point is clipped onto its bounds so bound
    residuals stay below ``BOUND_TOL``.
    """
    n = lp.num_variables
    cap = lp.upper - lp.lower
    rhs = lp.eq_rhs - lp.eq_matrix @ lp.lower
    shift_value = float(lp.objective @ lp.lower)
    bounded = np.flatnonzero(np.isfinite(cap))
    k = bounded.size
    m = lp.eq_matrix.shape[0]

    A = np.zeros((m + k, n + k))
    A[:m, :n] = lp.eq_matrix
    if k:
        A[m + np.arange(k), bounded] = 1.0
        A[m + np.arange(k), n + np.arange(k)] = 1.0
    b = np.concatenate([rhs, cap[bounded]])
    c = np.concatenate([lp.objective, np.zeros(k)])

    status, x, value = _two_phase(c, A, b)
    if status is not LpStatus.OPTIMAL:
        return LpOutcome(status=status)
    point = np.clip(lp.lower + x[:n], lp.lower, lp.upper)
    return LpOutcome(status=LpStatus.OPTIMAL, value=value + shift_value, point=point)


@dataclass(frozen=True)
class BandBox:
    """Coordinate band of radius ``radius`` around a simplex point.

    Effective bounds are clipped to [0, 1]; intersected with the simplex the
    region is never empty because it contains its own center.
    """

    center: np.ndarray
    radius: float
    lower: np.ndarray = field(init=False, compare=False)
    upper: np.ndarray = field(init=False, compare=False)

    def __init__(self, center, radius: float):
        c = _vector(center, "center")
        if c.size == 0:
            raise ValueError("center must be nonempty")
        if np.any(c < 0.0):
            raise ValueError("center must have nonnegative coordinates")
        if abs(c.sum() - 1.0) > 1e-9:
            raise ValueError(f"center mass sums to {c.sum()!r}, not 1")
        r = float(radius)
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"radius must lie in [0, 1], got {r!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)
        object.__setattr__(self, "lower", np.maximum(0.0, c - r))
        object.__setattr__(self, "upper", np.minimum(1.0, c + r))

    @property
    def dimension(self) -> int:
        return self.center.size


def minimize_over_band(direction, band: BandBox) -> tuple[float, np.ndarray]:
    """Exact minimum of <pi, direction> over band-and-simplex.

    Greedy mass allocation: every coordinate starts at its lower bound and
    the leftover mass 1 - sum(lower) is poured into coordinates in ascending
    order of the direction coefficient (ties broken toward the lower index),
    each up to its capacity.  This is the closed-form solution of the
    transportation-style program, so no simplex run is needed.
    """
    d = _vector(direction, "direction")
    if d.size != band.dimension:
        raise ValueError(f"direction has {d.size} entries for dimension {band.dimension}")
    point = band.lower.copy()
    residual = 1.0 - point.sum()
    if residual > 0.0:
        caps = band.upper - band.lower
        for j in np.argsort(d, kind="stable"):
            take = caps[j] if caps[j] < residual else residual
            point[j] += take
            residual -= take
            if residual <= 0.0:
                break
    return float(point @ d), point


@dataclass(frozen=True)
class BandFeasibility:
    feasible: bool
    witness: np.ndarray | None = None


def band_feasible_with_halfspaces(band: BandBox, halfspaces) -> BandFeasibility:
    """Is band-and-simplex compatible with the halfspaces <pi, h> >= 0?

    The band center is tried first (it always lies in band-and-simplex); when
    it fails, a phase-1 simplex run over the slacked system decides
    feasibility and supplies a witness vertex.
    """
    m = band.dimension
    normals = np.asarray(list(halfspaces), dtype=float)
    if normals.size == 0:
        return BandFeasibility(feasible=True, witness=band.center.copy())
    if normals.ndim != 2 or normals.shape[1] != m:
        raise ValueError(f"halfspace normals must be rows of length {m}")
    if np.all(normals @ band.center >= 0.0):
        return BandFeasibility(feasible=True, witness=band.center.copy())

    h = normals.shape[0]
    A = np.zeros((1 + h, m + h))
    A[0, :m] = 1.0
    A[1:, :m] = normals
    A[1 + np.arange(h), m + np.arange(h)] = -1.0
    b = np.zeros(1 + h)
    b[0] = 1.0
    lower = np.concatenate([band.lower, np.zeros(h)])
    upper = np.concatenate([band.upper, np.full(h, np.inf)])
    out = solve_lp(LinearProgram(np.zeros(m + h), A, b, lower, upper))
    if out.status is LpStatus.INFEASIBLE:
        return BandFeasibility(feasible=False)
    if out.status is not LpStatus.OPTIMAL:
        raise SolverError("feasibility program reported unbounded")
    return BandFeasibility(feasible=True, witness=out.point[:m])
