"""
Synthetic-oracle acceptance suite.

Runs the full pipeline (trace, prefix distribution, metrics) against the
built-in synthetic models, where every expected number is known in closed
form, and reports one PASS/FAIL line per check.
"""

import asyncio
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from .backend import BUILTIN_SPECS, SyntheticBackend
from .dataset import Sample
from .errors import ObedienceError
from .pipeline import CachedBackend, Pipeline, ResponseCache, RunConfig, SampleResult
from .prob import CertaintySweep, DiagnosticPoint, ObedienceRecord
from .prompts import ContextForm, PromptMode, ReminderKind, ReminderStyle
from .recalibration import fit, fit_held_out, tvd_grid
from .report import aggregate

logger = structlog.get_logger(__name__)

SQUARE_DEVIATION = (0.0, 0.128, 0.192, 0.192, 0.128, 0.0)
SQUARE_EPSILON = 0.128
SQUARE_MAP = (0.0, 0.4, 0.6, 0.8, 0.8, 1.0)
SIMPLIFIED_MODE = PromptMode(ReminderKind.SELF_PRIOR, ReminderStyle.ANSWER_ONLY, ContextForm.SIMPLIFIED)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def synthetic_samples(count: int = 10, categories: Sequence[str] = ("Locations",)) -> List[Sample]:
    """Samples whose context conveys the synthetic model's less likely answer."""
    return [
        Sample(
            id=f"syn-{i:03d}",
            question=f"Which city hosts archive number {i}?",
            context=f"Archive number {i} is kept in Lyon, according to the registry.",
            context_answer="Lyon",
            gold_answer="Lyon" if i % 2 == 0 else "Paris",
            category=categories[i % len(categories)],
        )
        for i in range(count)
    ]


def _backend(distortion: str = "square") -> SyntheticBackend:
    return SyntheticBackend(BUILTIN_SPECS[distortion], name=f"synthetic:{distortion}")


def _pipeline(distortion: str = "square", config: Optional[RunConfig] = None) -> Pipeline:
    return Pipeline(_backend(distortion), config or RunConfig(unfiltered=True))


def _close(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    return len(a) == len(b) and bool(np.allclose(a, b, rtol=0.0, atol=tol))


async def check_baseline() -> CheckResult:
    results = await _pipeline().run_dataset(synthetic_samples(3))
    worst = max(abs(r.epsilon_obey - SQUARE_EPSILON) for r in results)
    curves_ok = all(_close(r.record.deviation, SQUARE_DEVIATION, 1e-9) for r in results)
    return CheckResult("synthetic baseline deviation and obedience error",
                       curves_ok and worst <= 1e-9, f"max |eps - 0.128| = {worst:.2e}")


def brute_force_map(grids) -> Tuple[float, ...]:
    """Exhaustive argmin over the pooled TVD grids with the same tie rule as ``fit``."""
    sweep = grids[0].sweep.grid
    expressed = []
    for j, target in enumerate(sweep):
        scores = [sum(g.values[i][j] for g in grids) / len(grids) for i in range(len(sweep))]
        best = min(scores)
        tied = [sweep[i] for i, s in enumerate(scores) if s <= best + 1e-12 * max(1.0, abs(best))]
        expressed.append(min(tied, key=lambda c0: (abs(c0 - target), c0)))
    return tuple(expressed)


async def check_recalibration() -> Tuple[CheckResult, CheckResult]:
    results = await _pipeline().run_dataset(synthetic_samples(3))
    grids = [tvd_grid(r) for r in results]
    fitted = fit(grids)
    map_ok = _close(fitted.expressed, SQUARE_MAP, 1e-12) and fitted.expressed == brute_force_map(grids)
    config = RunConfig(mode=PromptMode().with_recalibration(), recalibration=fitted, unfiltered=True)
    recalibrated = await _pipeline(config=config).run_dataset(synthetic_samples(3))
    epsilon = float(np.mean([r.epsilon_obey for r in recalibrated]))
    return (
        CheckResult("recalibration map matches brute force", map_ok,
                    ",".join(f"{t:g}->{e:g}" for t, e in fitted.pairs())),
        CheckResult("recalibration reduces obedience error", epsilon < SQUARE_EPSILON,
                    f"eps {SQUARE_EPSILON} -> {epsilon:.4f}"),
    )


async def check_held_out() -> CheckResult:
    categories = ("Dates", "Locations", "Names")
    results = await _pipeline().run_dataset(synthetic_samples(9, categories))
    per_category: Dict[str, list] = {}
    for result in results:
        per_category.setdefault(result.category, []).append(tvd_grid(result))
    held_out = fit_held_out(per_category)
    in_category = {c: fit(grids) for c, grids in per_category.items()}
    same = all(held_out[c].expressed == in_category[c].expressed for c in categories)
    return CheckResult("held-out maps equal in-category maps", same)


def check_linearity(trials: int = 50, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    sweep = CertaintySweep()
    worst = 0.0
    for _ in range(trials):
        results = []
        for i in range(int(rng.integers(1, 12))):
            deviation = tuple(float(v) for v in rng.random(len(sweep)))
            sims = tuple(float(v) for v in rng.random(len(sweep)))
            record = ObedienceRecord.from_points(sweep, [DiagnosticPoint(s, s, d) for s, d in zip(sims, deviation)])
            results.append(SampleResult(sample_id=f"r{i}", record=record, prior_answer_mass=float(rng.random())))
        curves = aggregate(results)
        worst = max(worst, abs(curves.epsilon_obey - curves.mean_epsilon))
    return CheckResult("obedience error is linear in the curves", worst <= 1e-12, f"max gap {worst:.1e}")


async def check_call_counts() -> CheckResult:
    samples = synthetic_samples(10)
    cache = ResponseCache()
    config = RunConfig(mode=SIMPLIFIED_MODE)
    cold = Pipeline(CachedBackend(_backend(), cache), config)
    await cold.run_dataset(samples)
    scores, generations = cold.model.calls["score"], cold.model.calls["generate"]

    warm = Pipeline(CachedBackend(_backend(), cache), config)
    await warm.run_dataset(samples)
    passed = scores == 70 and generations <= 20 and warm.model.total_calls == 0
    return CheckResult("call economy with a warm cache", passed,
                       f"score={scores} generate={generations} warm={warm.model.total_calls}")


async def run_checks() -> List[CheckResult]:
    checks: List[CheckResult] = []
    steps: Sequence[Tuple[str, Callable]] = (
        ("synthetic baseline", check_baseline),
        ("recalibration", check_recalibration),
        ("held-out invariance", check_held_out),
        ("call economy", check_call_counts),
    )
    for name, step in steps:
        try:
            outcome = await step()
        except ObedienceError as e:
            logger.error("acceptance.error", check=name, error=e.message)
            outcome = CheckResult(name, False, e.message)
        checks.extend(outcome if isinstance(outcome, tuple) else (outcome,))
    checks.append(check_linearity())
    return checks


def run_acceptance() -> List[CheckResult]:
    """Run every check; the caller decides how to report them."""
    checks = asyncio.run(run_checks())
    logger.info("acceptance.done", passed=sum(c.passed for c in checks), total=len(checks))
    return checks


__all__ = ["CheckResult", "brute_force_map", "run_acceptance", "run_checks", "synthetic_samples"]
