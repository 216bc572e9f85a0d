"""
Fitting the certainty recalibration map.

For every target certainty ``c`` the map picks the grid certainty ``c0``
minimizing the mean over samples of ``D[c0][c]``. Ties go to the ``c0``
closest to ``c``, then to the smaller ``c0``, so an uninformative model
fits the identity.
"""

from typing import TYPE_CHECKING, Dict, List, Mapping, Sequence

import numpy as np
import structlog

from ..errors import ContractError, ErrorSource, RecalibrationError
from ..prob import Certainty, CertaintyLike, CertaintySweep, Distribution, ideal_mixture, tvd
from .types import RecalibrationMap, TvdGrid

if TYPE_CHECKING:
    from ..pipeline.types import SampleResult

logger = structlog.get_logger(__name__)

TIE_TOLERANCE = 1e-12


def tvd_grid_from(
    sweep: CertaintySweep,
    prior: Distribution,
    context_point: Distribution,
    observed: Sequence[Distribution],
    sample_id: str = "",
    category: str = "",
) -> TvdGrid:
    """TVD grid from responses observed at every (unrecalibrated) grid certainty."""
    if len(observed) != len(sweep):
        raise ContractError(
            f"{len(observed)} observed distributions for a {len(sweep)}-point sweep",
            source=ErrorSource.RECALIBRATION,
        )
    ideals = [ideal_mixture(prior, context_point, c) for c in sweep]
    matrix = [[tvd(response, ideal) for ideal in ideals] for response in observed]
    return TvdGrid.from_matrix(sweep, matrix, sample_id, category)


def tvd_grid(result: "SampleResult") -> TvdGrid:
    """TVD grid of a sweep result whose expressed certainties equal its targets."""
    if result.distributions is None:
        raise ContractError(f"result {result.sample_id!r} carries no distributions",
                            source=ErrorSource.RECALIBRATION)
    if tuple(result.expressed) != tuple(result.record.sweep.grid):
        raise ContractError(
            f"result {result.sample_id!r} was recalibrated; fit on an unrecalibrated sweep",
            source=ErrorSource.RECALIBRATION,
        )
    dists = result.distributions
    return tvd_grid_from(result.record.sweep, dists.prior, dists.context_point, dists.observed,
                         result.sample_id, result.category)


def _argmin_with_ties(objective: np.ndarray, grid: Sequence[float], target: float) -> float:
    best = float(objective.min())
    tolerance = TIE_TOLERANCE * max(1.0, abs(best))
    candidates = [grid[i] for i in np.flatnonzero(objective <= best + tolerance)]
    return min(candidates, key=lambda c0: (abs(c0 - target), c0))


def fit(grids: Sequence[TvdGrid]) -> RecalibrationMap:
    """Fit one map on all ``grids`` pooled."""
    grids = list(grids)
    if not grids:
        raise RecalibrationError("cannot fit a recalibration map without TVD grids")
    sweep = grids[0].sweep
    if any(g.sweep != sweep for g in grids[1:]):
        raise RecalibrationError("all TVD grids must share one sweep")

    mean = np.mean(np.stack([g.matrix for g in grids]), axis=0)
    expressed = [_argmin_with_ties(mean[:, j], sweep.grid, target) for j, target in enumerate(sweep.grid)]
    categories = tuple(sorted({g.category for g in grids if g.category}))
    fitted = RecalibrationMap(sweep, tuple(expressed), categories, len(grids))
    fitted.metadata["endpoint_violations"] = list(fitted.endpoint_violations)
    fitted.metadata["objective"] = [float(mean[sweep.index_of(e), j]) for j, e in enumerate(fitted.expressed)]
    logger.info("recal.fit", samples=len(grids), categories=list(categories),
                mapping=[f"{t:g}->{e:g}" for t, e in fitted.pairs()],
                endpoint_violations=list(fitted.endpoint_violations))
    return fitted


def fit_held_out(per_category: Mapping[str, Sequence[TvdGrid]]) -> Dict[str, RecalibrationMap]:
    """For each category, a map fitted on the grids of every other category."""
    if len(per_category) < 2:
        raise ContractError("held-out fitting needs at least two categories",
                            source=ErrorSource.RECALIBRATION)
    maps: Dict[str, RecalibrationMap] = {}
    for category in sorted(per_category):
        complement: List[TvdGrid] = [
            g for other, grids in sorted(per_category.items()) if other != category for g in grids
        ]
        if not complement:
            raise ContractError(f"category {category!r} has no held-out data",
                                source=ErrorSource.RECALIBRATION)
        fitted = fit(complement)
        fitted.metadata["held_out"] = category
        maps[category] = fitted
    return maps


def apply(recalibration: RecalibrationMap, c: CertaintyLike) -> Certainty:
    """Expressed certainty for target ``c``; ``c`` must lie on the map's grid."""
    return recalibration.lookup(Certainty.of(c))
