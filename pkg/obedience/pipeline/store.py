"""
Result persistence: ``results.jsonl`` with one sample per line plus a
``curves/`` directory holding one CSV table per scored sample.
"""

from pathlib import Path
from typing import Iterable, List, Mapping, Sequence, Union

import pandas as pd
import structlog

from ..dataset import normalize_answer
from ..errors import ReportError
from ..util import canonical_json, safe_json_decode
from .types import SampleResult

logger = structlog.get_logger(__name__)

RESULTS_FILE = "results.jsonl"
CURVES_DIR = "curves"
CURVE_COLUMNS = ("certainty", "expressed", "sim_ctx", "sim_prior", "deviation")


def _safe_name(sample_id: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in sample_id)


class ResultStore:
    """Reads and writes the results of one run directory."""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    @property
    def results_path(self) -> Path:
        return self.directory / RESULTS_FILE

    @property
    def curves_dir(self) -> Path:
        return self.directory / CURVES_DIR

    def write(self, results: Sequence[SampleResult]) -> Path:
        try:
            self.curves_dir.mkdir(parents=True, exist_ok=True)
            with open(self.results_path, "w", encoding="utf-8") as f:
                for result in results:
                    f.write(canonical_json(result.to_dict()) + "\n")
            for result in results:
                if result.record is not None:
                    self._curve_frame(result).to_csv(
                        self.curves_dir / f"{_safe_name(result.sample_id)}.csv",
                        index=False, float_format="%.12g", lineterminator="\n",
                    )
        except OSError as e:
            raise ReportError(f"cannot write results: {e}", path=str(self.directory), cause=e)
        logger.info("results.written", path=str(self.results_path), samples=len(results))
        return self.results_path

    @staticmethod
    def _curve_frame(result: SampleResult) -> pd.DataFrame:
        record = result.record
        return pd.DataFrame({
            "certainty": list(record.sweep.grid),
            "expressed": list(result.expressed),
            "sim_ctx": list(record.sim_to_context),
            "sim_prior": list(record.sim_to_prior),
            "deviation": list(record.deviation),
        }, columns=list(CURVE_COLUMNS))

    def read(self) -> List[SampleResult]:
        if not self.results_path.is_file():
            raise ReportError("results file not found", path=str(self.results_path))
        results = []
        with open(self.results_path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                data = safe_json_decode(line)
                if not isinstance(data, dict):
                    raise ReportError(f"line {lineno}: malformed result", path=str(self.results_path))
                results.append(SampleResult.from_dict(data))
        return results


def _first_line(text: str) -> str:
    return text.strip().splitlines()[0] if text and text.strip() else ""


def same_answer_ids(explained: Mapping[str, str], answer_only: Mapping[str, str]) -> List[str]:
    """
    Ids whose explained prior opens with the same answer as the answer-only prior.

    Only the first line of an explained answer is compared, after normalization.
    """
    return [
        sample_id
        for sample_id, text in explained.items()
        if sample_id in answer_only
        and normalize_answer(_first_line(text)) == normalize_answer(_first_line(answer_only[sample_id]))
        and normalize_answer(_first_line(text))
    ]


def restrict_results(results: Iterable[SampleResult], ids: Iterable[str]) -> List[SampleResult]:
    keep = set(ids)
    return [r for r in results if r.sample_id in keep]


def explained_agreement(results: Sequence[SampleResult]) -> List[SampleResult]:
    """
    Results of an explained-prior run whose explanation opens with the
    answer-only prior; the rest are left out of the analysis.
    """
    ids = same_answer_ids(
        {r.sample_id: r.reminder_text for r in results if r.reminder_text},
        {r.sample_id: r.prior_answer for r in results if r.prior_answer},
    )
    kept = restrict_results(results, ids)
    if len(kept) < len(results):
        logger.info("results.explained_disagreement", kept=len(kept), dropped=len(results) - len(kept))
    return kept
