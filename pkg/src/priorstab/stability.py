"""Stability of Bayes-optimal acts under band perturbations of the prior.

For an act that is optimal at the reference prior, the *robustness radius* is
the largest band radius within which it stays optimal for every prior in the
band; for any act, the *contamination need* is the smallest radius at which
some prior in the band makes it optimal.  The first is found by bisection on
the monotone worst-case margin, the second by a single linear program.  When
no prior anywhere makes an act optimal, a mixture of the competing acts
strictly dominates it, and that mixture is returned as a checkable
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DecisionProblem, Prior, bayes_acts
from .lp import BandBox, LinearProgram, LpStatus, SolverError, minimize_over_band, solve_lp

__all__ = [
    "STRICT_DOMINANCE_TOL",
    "BisectionConfig",
    "DominanceCertificate",
    "Need",
    "NeedKind",
    "Radius",
    "RadiusKind",
    "StabilityProfile",
    "StabilityRow",
    "contamination_need",
    "pairwise_margin",
    "robustness_radius",
    "stability_profile",
    "strict_inadmissibility_certificate",
    "worst_case_margin",
]

STRICT_DOMINANCE_TOL = 1e-9  # mixture advantage below this is not "strict"


class RadiusKind(Enum):
    VALUE = "value"
    NOT_BAYES = "not_bayes"


@dataclass(frozen=True)
class Radius:
    """Robustness radius; ``NOT_BAYES`` stands in for the -infinity case."""

    kind: RadiusKind
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind is RadiusKind.VALUE:
            if self.epsilon is None or not 0.0 <= self.epsilon <= 1.0:
                raise ValueError(f"radius value must lie in [0, 1], got {self.epsilon!r}")
        elif self.epsilon is not None:
            raise ValueError("a NOT_BAYES radius carries no epsilon")

    @classmethod
    def value(cls, epsilon: float) -> "Radius":
        return cls(RadiusKind.VALUE, float(epsilon))

    @classmethod
    def not_bayes(cls) -> "Radius":
        return cls(RadiusKind.NOT_BAYES)

    def as_float(self) -> float:
        return self.epsilon if self.kind is RadiusKind.VALUE else -np.inf


@dataclass(frozen=True)
class DominanceCertificate:
    """Mixture of competitors that strictly beats an act in every state.

    ``weights`` maps each competing act to its mixture weight; ``margins``
    holds, per state, the advantage of the mixture over the dominated act.
    """

    weights: dict[str, float]
    margins: np.ndarray

    def __post_init__(self):
        w = np.asarray(list(self.weights.values()), dtype=float)
        if w.size == 0 or np.any(w < -1e-12):
            raise ValueError("certificate weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"certificate weights sum to {w.sum()!r}, not 1")
        margins = np.asarray(self.margins, dtype=float)
        if margins.min() <= STRICT_DOMINANCE_TOL:
            raise ValueError("certificate margins must exceed the strictness threshold")
        object.__setattr__(self, "margins", margins)


class NeedKind(Enum):
    VALUE = "value"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Need:
    """Contamination need; ``INFEASIBLE`` stands in for the +infinity case."""

    kind: NeedKind
    epsilon: float | None = None
    certificate: DominanceCertificate | None = None

    def __post_init__(self):
        if self.kind is NeedKind.VALUE:
            if self.epsilon is None or not 0.0 <= self.epsilon <= 1.0:
                raise ValueError(f"need value must lie in [0, 1], got {self.epsilon!r}")
            if self.certificate is not None:
                raise ValueError("a finite need carries no certificate")
        else:
            if self.certificate is None:
                raise ValueError("an infeasible need requires a dominance certificate")
            if self.epsilon is not None:
                raise ValueError("an infeasible need carries no epsilon")

    @classmethod
    def value(cls, epsilon: float) -> "Need":
        return cls(NeedKind.VALUE, float(epsilon))

    @classmethod
    def infeasible(cls, certificate: DominanceCertificate) -> "Need":
        return cls(NeedKind.INFEASIBLE, certificate=certificate)

    def as_float(self) -> float:
        return self.epsilon if self.kind is NeedKind.VALUE else np.inf


@dataclass(frozen=True)
class BisectionConfig:
    """Tolerance and radius bracket for the robustness-radius search."""

    tolerance: float = 1e-6
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")
        if not (0.0 <= self.lower < self.upper <= 1.0):
            raise ValueError("radius bracket must satisfy 0 <= lower < upper <= 1")


def _difference_rows(problem: DecisionProblem, act: str) -> tuple[list[str], np.ndarray]:
    """Rows u(act, .) - u(b, .) for every competitor b, in act order."""
    i = problem.act_index(act)
    others = [b for b in problem.acts if b != act]
    diffs = problem.utilities[i] - np.delete(problem.utilities, i, axis=0)
    return others, diffs


def pairwise_margin(
    problem: DecisionProblem, a: str, b: str, prior: Prior, epsilon: float
) -> float:
    """Worst advantage of ``a`` over ``b`` across the band of radius epsilon."""
    if a == b:
        raise ValueError("pairwise margin needs two distinct acts")
    d = problem.row(a) - problem.row(b)
    value, _ = minimize_over_band(d, BandBox(prior.mass, epsilon))
    return value


def worst_case_margin(
    problem: DecisionProblem, a: str, prior: Prior, epsilon: float
) -> float:
    """Minimum pairwise margin of ``a`` against all competitors."""
    if problem.num_acts < 2:
        raise ValueError("worst-case margin needs at least two acts")
    band = BandBox(prior.mass, epsilon)
    _, diffs = _difference_rows(problem, a)
    return min(minimize_over_band(d, band)[0] for d in diffs)


def robustness_radius(
    problem: DecisionProblem,
    a: str,
    prior: Prior,
    config: BisectionConfig = BisectionConfig(),
) -> Radius:
    """Largest band radius keeping ``a`` optimal everywhere in the band.

    Bisection on the worst-case margin, which is non-increasing in the
    radius: the bracket [lo, hi] keeps margin(lo) >= 0 > margin(hi) and
    shrinks to the configured tolerance, returning the inner estimate ``lo``.
    An act optimal over the whole simplex short-circuits to radius 1.
    """
    if a not in bayes_acts(problem, prior):
        return Radius.not_bayes()
    if problem.num_acts == 1:
        return Radius.value(config.upper)
    if worst_case_margin(problem, a, prior, config.upper) >= 0.0:
        return Radius.value(config.upper)
    lo, hi = config.lower, config.upper
    while hi - lo > config.tolerance:
        mid = 0.5 * (lo + hi)
        if worst_case_margin(problem, a, prior, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return Radius.value(lo)


def strict_inadmissibility_certificate(
    problem: DecisionProblem, a: str
) -> DominanceCertificate | None:
    """Best strictly dominating mixture of the competitors, if one exists.

    Maximizes the smallest per-state advantage t of a convex combination of
    the other acts over ``a``; the combination certifies strict
    inadmissibility exactly when the optimum exceeds the strictness
    threshold.  Returns ``None`` otherwise (including the weak-domination
    boundary, e.g. a duplicated act).
    """
    if problem.num_acts < 2:
        raise ValueError("a certificate needs at least one competing act")
    others, diffs = _difference_rows(problem, a)
    gains = -diffs  # per competitor: u(b, .) - u(a, .)
    k, m = gains.shape

    # Variables: mixture weights (k), advantage t (1), per-state slack (m).
    t_lo = float(gains.min()) - 1.0
    t_hi = float(gains.max()) + 1.0
    objective = np.zeros(k + 1 + m)
    objective[k] = -1.0  # maximize t
    A = np.zeros((1 + m, k + 1 + m))
    A[0, :k] = 1.0
    A[1:, :k] = gains.T
    A[1:, k] = -1.0
    A[1 + np.arange(m), k + 1 + np.arange(m)] = -1.0
    b = np.zeros(1 + m)
    b[0] = 1.0
    lower = np.concatenate([np.zeros(k), [t_lo], np.zeros(m)])
    upper = np.concatenate([np.ones(k), [t_hi], np.full(m, np.inf)])

    out = solve_lp(LinearProgram(objective, A, b, lower, upper))
    if out.status is not LpStatus.OPTIMAL:
        raise SolverError(f"dominance program ended with status {out.status.value}")
    beta = out.point[:k]
    t_star = out.point[k]
    if t_star <= STRICT_DOMINANCE_TOL:
        return None
    return DominanceCertificate(
        weights={b_act: float(w) for b_act, w in zip(others, beta)},
        margins=beta @ gains,
    )


def contamination_need(problem: DecisionProblem, a: str, prior: Prior) -> Need:
    """Smallest band radius at which some prior in the band makes ``a`` optimal.

    Acts optimal at the reference prior need no contamination.  Otherwise a
    single program minimizes the radius subject to the band, the simplex, and
    the dominance inequalities of ``a``; infeasibility means no prior at all
    works, which is certified by a strictly dominating mixture.
    """
    if a in bayes_acts(problem, prior):
        return Need.value(0.0)
    _, diffs = _difference_rows(problem, a)
    k, m = diffs.shape

    # Variables: pi (m), epsilon (1), band slacks (2m), dominance slacks (k).
    n_vars = m + 1 + 2 * m + k
    objective = np.zeros(n_vars)
    objective[m] = 1.0
    A = np.zeros((1 + 2 * m + k, n_vars))
    b = np.zeros(1 + 2 * m + k)
    A[0, :m] = 1.0
    b[0] = 1.0
    rows = 1 + np.arange(m)
    A[rows, np.arange(m)] = 1.0           # pi_j - eps + s = pi0_j
    A[rows, m] = -1.0
    A[rows, m + 1 + np.arange(m)] = 1.0
    b[rows] = prior.mass
    rows = 1 + m + np.arange(m)
    A[rows, np.arange(m)] = 1.0           # pi_j + eps - s = pi0_j
    A[rows, m] = 1.0
    A[rows, 2 * m + 1 + np.arange(m)] = -1.0
    b[rows] = prior.mass
    rows = 1 + 2 * m + np.arange(k)
    A[rows, :m] = diffs                   # <pi, u_a - u_b> - s = 0
    A[rows, 3 * m + 1 + np.arange(k)] = -1.0

    lower = np.zeros(n_vars)
    upper = np.full(n_vars, np.inf)
    upper[m] = 1.0  # radius 1 already reaches the whole simplex

    out = solve_lp(LinearProgram(objective, A, b, lower, upper))
    if out.status is LpStatus.OPTIMAL:
        return Need.value(out.point[m])
    if out.status is LpStatus.INFEASIBLE:
        certificate = strict_inadmissibility_certificate(problem, a)
        if certificate is None:
            raise SolverError(
                f"contamination program for act {a!r} is infeasible "
                "but no dominance certificate exists"
            )
        return Need.infeasible(certificate)
    raise SolverError("contamination program reported unbounded")


@dataclass(frozen=True)
class StabilityRow:
    prior: str
    act: str
    is_bayes: bool
    expected_utility: float
    radius: Radius
    need: Need


@dataclass(frozen=True)
class StabilityProfile:
    """Radius and need for every (act, prior) pair, in input order."""

    acts: tuple[str, ...]
    priors: tuple[str, ...]
    rows: tuple[StabilityRow, ...]

    def row(self, prior: str, act: str) -> StabilityRow:
        for r in self.rows:
            if r.prior == prior and r.act == act:
                return r
        raise KeyError(f"no row for act {act!r} under prior {prior!r}")

    def for_prior(self, prior: str) -> tuple[StabilityRow, ...]:
        if prior not in self.priors:
            raise KeyError(f"unknown prior {prior!r}")
        return tuple(r for r in self.rows if r.prior == prior)


def stability_profile(
    problem: DecisionProblem,
    priors,
    config: BisectionConfig = BisectionConfig(),
) -> StabilityProfile:
    """Compute radius and need for every (act, prior) pair.

    Pairs are independent pure computations; callers may parallelize freely.
    Failures are re-raised with the offending pair attached.
    """
    priors = list(priors)
    names = [p.name for p in priors]
    if len(set(names)) != len(names):
        raise ValueError("prior names must be unique within a profile")
    rows = []
    for prior in priors:
        bset = bayes_acts(problem, prior)
        for act in problem.acts:
            try:
                radius = robustness_radius(problem, act, prior, config)
                need = contamination_need(problem, act, prior)
            except (SolverError, ValueError) as exc:
                raise type(exc)(
                    f"act {act!r}, prior {prior.name!r}: {exc}"
                ) from exc
            rows.append(
                StabilityRow(
                    prior=prior.name,
                    act=act,
                    is_bayes=act in bset,
                    expected_utility=bset.expected_utilities[act],
                    radius=radius,
                    need=need,
                )
            )
    return StabilityProfile(
        acts=problem.acts, priors=tuple(names), rows=tuple(rows)
    )
