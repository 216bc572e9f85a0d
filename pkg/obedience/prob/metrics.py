"""
Obedience metrics over finite distributions.

Total variation distance, the ideal prior/context mixture, the per-certainty
diagnostic curves and the area-under-curve obedience error.
"""

from dataclasses import dataclass
from typing import Hashable, NamedTuple, Sequence, Tuple

import numpy as np

from ..errors import ContractError, ErrorSource
from .distribution import Certainty, CertaintyLike, CertaintySweep, Distribution

CURVE_TOLERANCE = 1e-12


def tvd(p: Distribution, q: Distribution) -> float:
    """Total variation distance: half the L1 distance between ``p`` and ``q``."""
    p.require_same_support(q)
    return float(0.5 * np.abs(p.vector - q.vector).sum())


def ideal_mixture(prior: Distribution, context_point: Distribution, c: CertaintyLike) -> Distribution:
    """
    The ideal context-certainty-obedient response: ``(1 - c) * prior + c * context_point``.

    At ``c = 0`` the prior is returned bit-for-bit and at ``c = 1`` the point
    mass is returned bit-for-bit.
    """
    prior.require_same_support(context_point)
    if not context_point.is_point_mass():
        raise ContractError("context_point must be a point mass", source=ErrorSource.PROB)
    weight = float(Certainty.of(c))
    if weight == 0.0:
        return prior
    if weight == 1.0:
        return context_point
    mixed = (1.0 - weight) * prior.vector + weight * context_point.vector
    return Distribution(prior.outcomes, tuple(mixed.tolist()), normalize=False)


def obedience_error(deviation_curve: Sequence[Tuple[CertaintyLike, float]]) -> float:
    """
    Trapezoidal area under a deviation curve sampled on a certainty sweep.

    The curve must span [0, 1] on a strictly increasing grid.
    """
    if len(deviation_curve) < 2:
        raise ContractError("a deviation curve needs at least two points", source=ErrorSource.PROB)
    xs = np.asarray([float(x) for x, _ in deviation_curve], dtype=float)
    ys = np.asarray([float(y) for _, y in deviation_curve], dtype=float)
    if xs[0] != 0.0 or xs[-1] != 1.0:
        raise ContractError("deviation curve must span [0, 1]", source=ErrorSource.PROB)
    if np.any(np.diff(xs) <= 0):
        raise ContractError("deviation curve grid must be strictly increasing", source=ErrorSource.PROB)
    if np.any(ys < -CURVE_TOLERANCE) or np.any(ys > 1 + CURVE_TOLERANCE):
        raise ContractError("deviation values must lie in [0, 1]", source=ErrorSource.PROB)
    return float(np.sum(np.diff(xs) * (ys[1:] + ys[:-1]) / 2.0))


class DiagnosticPoint(NamedTuple):
    sim_ctx: float
    sim_prior: float
    deviation: float


def diagnostic_point(
    observed: Distribution,
    prior: Distribution,
    context_point: Distribution,
    c: CertaintyLike,
) -> DiagnosticPoint:
    """Similarity to context, similarity to prior and deviation from ideal at certainty ``c``."""
    return DiagnosticPoint(
        sim_ctx=1.0 - tvd(observed, context_point),
        sim_prior=1.0 - tvd(observed, prior),
        deviation=tvd(observed, ideal_mixture(prior, context_point, c)),
    )


def merge_outcomes(p: Distribution, group: Sequence[Hashable], label: Hashable) -> Distribution:
    """
    Coarsen ``p`` by merging the outcomes in ``group`` into a single ``label``.

    The merged outcome takes the position of the group's first member.
    """
    members = set(group)
    missing = members.difference(p.outcomes)
    if missing:
        raise ContractError(f"unknown outcomes {sorted(map(repr, missing))}", source=ErrorSource.PROB)
    if label in p.outcomes and label not in members:
        raise ContractError(f"label {label!r} collides with an outcome", source=ErrorSource.PROB)
    outcomes = []
    masses = []
    merged_at = None
    for outcome, mass in zip(p.outcomes, p.masses):
        if outcome in members:
            if merged_at is None:
                merged_at = len(outcomes)
                outcomes.append(label)
                masses.append(0.0)
            masses[merged_at] += mass
        else:
            outcomes.append(outcome)
            masses.append(mass)
    return Distribution(tuple(outcomes), tuple(masses), normalize=False)


@dataclass(frozen=True)
class ObedienceRecord:
    """Per-sample diagnostic curves and the obedience error over a sweep."""

    sweep: CertaintySweep
    sim_to_context: Tuple[float, ...]
    sim_to_prior: Tuple[float, ...]
    deviation: Tuple[float, ...]
    epsilon_obey: float

    def __post_init__(self) -> None:
        n = len(self.sweep)
        for name in ("sim_to_context", "sim_to_prior", "deviation"):
            curve = tuple(float(v) for v in getattr(self, name))
            if len(curve) != n:
                raise ContractError(f"{name} has {len(curve)} points, sweep has {n}", source=ErrorSource.PROB)
            if any(v < -CURVE_TOLERANCE or v > 1 + CURVE_TOLERANCE for v in curve):
                raise ContractError(f"{name} values must lie in [0, 1]", source=ErrorSource.PROB)
            object.__setattr__(self, name, curve)

    @classmethod
    def from_points(cls, sweep: CertaintySweep, points: Sequence[DiagnosticPoint]) -> "ObedienceRecord":
        deviation = tuple(p.deviation for p in points)
        return cls(
            sweep=sweep,
            sim_to_context=tuple(p.sim_ctx for p in points),
            sim_to_prior=tuple(p.sim_prior for p in points),
            deviation=deviation,
            epsilon_obey=obedience_error(list(zip(sweep.grid, deviation))),
        )

    def deviation_curve(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(zip(self.sweep.grid, self.deviation))
