"""
``obedience`` command-line interface.

Exit codes: 0 on success, 1 when evaluation errors or flagged samples are
present, 2 on usage or configuration errors.
"""

import asyncio
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import structlog

from ..backend import build_backend
from ..core.config import BackendConfig
from ..core.logging import configure_logging
from ..dataset import FilterReport, Sample, filter_categories, load as load_dataset, retrieval_filter
from ..errors import (
    ContractError,
    DatasetError,
    ErrorSource,
    ObedienceError,
    RecalibrationError,
    RenderError,
)
from ..pipeline import Pipeline, ResultStore, RunConfig, SampleResult, explained_agreement
from ..prob import CertaintySweep
from ..prompts import CONTEXT_FLAGS, REMINDER_FLAGS, PromptMode
from ..recalibration import (
    RecalibrationMap,
    fit,
    fit_held_out,
    load_map,
    load_maps,
    save_map,
    save_maps,
    tvd_grid,
)
from ..report import (
    ablation_table,
    aggregate,
    build_manifest,
    emit,
    heatmap,
    split_by_correctness,
    utc_now,
    write_manifest,
)
from ..util import (
    cast_value,
    load_config_file,
    load_config_from_env,
    load_dotenv_file,
    merge_configs,
    safe_json_decode,
    safe_json_encode,
)

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_EVALUATION = 1
EXIT_USAGE = 2

MANIFEST_FILE = "manifest.json"
RECAL_FILE = "recalibration.csv"
RECAL_DIR = "recalibration"

_USAGE_ERRORS = (ContractError, DatasetError, RenderError, RecalibrationError)


def exit_code_for(error: ObedienceError) -> int:
    if isinstance(error, _USAGE_ERRORS) or error.source is ErrorSource.CONFIG:
        return EXIT_USAGE
    return EXIT_EVALUATION


def _fail(ctx: click.Context, error: ObedienceError) -> None:
    click.echo(f"error: {error.message}", err=True)
    logger.error("cli.failed", command=ctx.info_name, **error.to_dict())
    ctx.exit(exit_code_for(error))


# settings


def _settings(ctx: click.Context, **flags: Any) -> Dict[str, Any]:
    """Flags over config file over environment."""
    return merge_configs(ctx.obj["config"], flags)


# config key -> command parameter; flags left at their default take the configured value
RUN_SETTINGS = {
    "sweep": "sweep_text",
    "reminder": "reminder",
    "context": "context_form",
    "unfiltered": "unfiltered",
    "include_sports": "include_sports",
}


def _run_params(ctx: click.Context, params: Dict[str, Any]) -> Dict[str, Any]:
    """Fill run parameters the command line left at their defaults from config or environment."""
    params = dict(params)
    for key, name in RUN_SETTINGS.items():
        value = ctx.obj["config"].get(key)
        if value is None or name not in params:
            continue
        if ctx.get_parameter_source(name) is not click.core.ParameterSource.DEFAULT:
            continue
        if isinstance(params[name], bool):
            params[name] = cast_value(value, bool, False)
        elif isinstance(value, (list, tuple)):
            params[name] = ",".join(str(v) for v in value)
        else:
            params[name] = str(value)
    return params


def _backend_config(settings: Dict[str, Any], model: Optional[str] = None) -> BackendConfig:
    config = BackendConfig.from_mapping(settings)
    return (config.with_model(model) if model else config).validate()


def backend_options(func):
    options = [
        click.option("--endpoint", default=None, show_default="http://localhost:8000/v1",
                     help="Completion endpoint base URL."),
        click.option("--model", default=None, show_default="synthetic:square",
                     help="Model name; synthetic:<identity|square|sqrt> selects a built-in oracle."),
        click.option("--api-key-env", default=None, show_default="OBEDIENCE_API_KEY",
                     help="Environment variable holding the API key."),
        click.option("--top-k", type=int, default=None, show_default="5",
                     help="Named alternatives requested per scored token."),
        click.option("--max-inflight", type=int, default=None, show_default="8",
                     help="Maximum concurrent backend requests."),
        click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
                     show_default="in-memory", help="Response cache directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def dataset_options(func):
    options = [
        click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True,
                     help="Line-delimited JSON samples."),
        click.option("--include-sports", is_flag=True, default=False, show_default=True,
                     help="Keep the sports-records category."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load_samples(dataset: str, include_sports: bool) -> List[Sample]:
    return filter_categories(load_dataset(dataset), include_sports=include_sports)


def _load_recalibration(path: Optional[str]) -> Tuple[Optional[RecalibrationMap], Dict[str, RecalibrationMap]]:
    if not path:
        return None, {}
    if Path(path).is_dir():
        return None, load_maps(path)
    return load_map(path), {}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key = value configuration file supplying defaults.")
@click.option("--log-level", default=None, show_default="INFO", help="Log level.")
@click.option("--log-json", is_flag=True, default=False, show_default=True, help="Log as JSON lines.")
@click.version_option(package_name="obedience-py", prog_name="obedience")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str], log_json: bool) -> None:
    """Measure and improve context-certainty obedience of language models."""
    load_dotenv_file()
    try:
        values = merge_configs(load_config_from_env(), load_config_file(config_path) if config_path else {})
    except ObedienceError as e:
        raise click.UsageError(e.message)
    configure_logging(log_level or values.get("log_level", "INFO"), json=log_json)
    ctx.ensure_object(dict)
    ctx.obj["config"] = values


# filter


@cli.command("filter")
@dataset_options
@backend_options
@click.option("--backend", "models", multiple=True,
              help="Model to extract with; repeat for several backends (default: --model).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the FilterReport JSON here.")
@click.pass_context
def filter_command(ctx: click.Context, dataset: str, include_sports: bool, models: Sequence[str],
                   out: Optional[str], **flags: Any) -> None:
    """Keep samples whose context answer every backend retrieves."""
    try:
        settings = _settings(ctx, **flags)
        samples = _load_samples(dataset, include_sports)
        configs = [_backend_config(settings, m) for m in models] or [_backend_config(settings)]
        report = asyncio.run(_filter(samples, configs, settings.get("cache_dir")))
        if out:
            report.save(out)
    except ObedienceError as e:
        _fail(ctx, e)
        return
    click.echo(safe_json_encode({"rates": report.rates, "survivors": len(report.survivors),
                                 "total": report.total}, pretty=True))
    ctx.exit(EXIT_OK)


async def _filter(samples: Sequence[Sample], configs: Sequence[BackendConfig],
                  cache_dir: Optional[str]) -> FilterReport:
    extracted = {}
    for config in configs:
        pipeline = Pipeline(build_backend(config), RunConfig(backend=config, cache_dir=cache_dir,
                                                              unfiltered=True))
        try:
            extracted[pipeline.backend.identity] = await pipeline.extract_answers(samples)
        finally:
            await pipeline.backend.close()
    return retrieval_filter(samples, extracted)


# sweep / run


def mode_options(reminder: str, context: str):
    def decorate(func):
        options = [
            click.option("--sweep", "sweep_text", default="0,20,40,60,80,100", show_default=True,
                         help="Certainty grid as a comma list of percents."),
            click.option("--reminder", type=click.Choice(sorted(REMINDER_FLAGS)), default=reminder,
                         show_default=True, help="Prior reminder."),
            click.option("--context", "context_form", type=click.Choice(sorted(CONTEXT_FLAGS)),
                         default=context, show_default=True, help="Context form."),
            click.option("--recal-map", type=click.Path(exists=True), default=None,
                         help="Recalibration map file, or a directory of per-category maps."),
            click.option("--unfiltered", is_flag=True, default=False, show_default=True,
                         help="Skip the retrieval-success filter."),
            click.option("--filter-report", type=click.Path(exists=True, dir_okay=False), default=None,
                         help="Reuse a saved FilterReport instead of filtering again."),
            click.option("--out", type=click.Path(file_okay=False), required=True,
                         help="Run directory for results, curves and the manifest."),
        ]
        for option in reversed(options):
            func = option(func)
        return func
    return decorate


@cli.command("sweep")
@dataset_options
@backend_options
@mode_options(reminder="none", context="original")
@click.pass_context
def sweep_command(ctx: click.Context, **params: Any) -> None:
    """Evaluate one prompt mode; recalibrated only when --recal-map is given."""
    try:
        params = _run_params(ctx, params)
        recalibration, per_category = _load_recalibration(params["recal_map"])
        mode = PromptMode.from_flags(params["reminder"], params["context_form"],
                                     recalibrated=bool(params["recal_map"]))
        code = _evaluate(ctx, params, mode, recalibration, per_category, fit_first=False, held_out=False)
    except ObedienceError as e:
        _fail(ctx, e)
        return
    ctx.exit(code)


@cli.command("run")
@dataset_options
@backend_options
@mode_options(reminder="self", context="simplified")
@click.option("--mode", "mode_name", type=click.Choice(["full", "baseline"]), default="full", show_default=True,
              help="full applies --reminder, --context and recalibration; baseline applies none.")
@click.option("--held-out", is_flag=True, default=False, show_default=True,
              help="Fit one map per category on the other categories.")
@click.pass_context
def run_command(ctx: click.Context, mode_name: str, held_out: bool, **params: Any) -> None:
    """
    Full interaction-strategy evaluation.

    Without --recal-map the map is fitted on an unrecalibrated sweep of the
    same mode first.
    """
    try:
        params = _run_params(ctx, params)
        if mode_name == "baseline":
            mode = PromptMode.baseline()
            recalibration, per_category, fit_first = None, {}, False
        else:
            mode = PromptMode.from_flags(params["reminder"], params["context_form"], recalibrated=True)
            recalibration, per_category = _load_recalibration(params["recal_map"])
            fit_first = not params["recal_map"]
        params = dict(params, mode=mode_name, held_out=held_out)
        code = _evaluate(ctx, params, mode, recalibration, per_category, fit_first=fit_first, held_out=held_out)
    except ObedienceError as e:
        _fail(ctx, e)
        return
    ctx.exit(code)


def fit_maps(
    results: Sequence[SampleResult], held_out: bool
) -> Tuple[Optional[RecalibrationMap], Dict[str, RecalibrationMap]]:
    """One pooled map, or per-category held-out maps, from unrecalibrated results."""
    usable = [r for r in results if not r.flagged]
    if not usable:
        raise ContractError("no unflagged results to fit a recalibration map on", source=ErrorSource.RECALIBRATION)
    grids = [tvd_grid(r) for r in usable]
    if not held_out:
        return fit(grids), {}
    per_category: Dict[str, list] = {}
    for grid in grids:
        per_category.setdefault(grid.category, []).append(grid)
    return None, fit_held_out(per_category)


def _evaluate(ctx: click.Context, params: Dict[str, Any], mode: PromptMode,
              recalibration: Optional[RecalibrationMap], per_category: Dict[str, RecalibrationMap],
              fit_first: bool, held_out: bool) -> int:
    started = utc_now()
    backend_flags = {k: params[k] for k in ("endpoint", "model", "api_key_env", "top_k", "max_inflight",
                                             "cache_dir")}
    settings = _settings(ctx, **backend_flags)
    backend_config = _backend_config(settings)
    samples = _load_samples(params["dataset"], params["include_sports"])
    filter_report = FilterReport.load(params["filter_report"]) if params["filter_report"] else None
    sweep = CertaintySweep.parse(params["sweep_text"])
    base = RunConfig(
        mode=mode.with_recalibration(False),
        sweep=sweep,
        backend=backend_config,
        cache_dir=Path(settings["cache_dir"]) if settings.get("cache_dir") else None,
        unfiltered=params["unfiltered"],
    )
    pipeline = Pipeline(build_backend(backend_config), base)

    async def evaluate() -> Tuple[RunConfig, List[SampleResult]]:
        nonlocal recalibration, per_category
        try:
            config = base
            if fit_first:
                fitted_on = await pipeline.run_dataset(samples, config, filter_report)
                recalibration, per_category = fit_maps(fitted_on, held_out)
            if mode.recalibrated:
                config = replace(base, mode=mode, recalibration=recalibration,
                                 category_recalibration=per_category)
            return config, await pipeline.run_dataset(samples, config, filter_report)
        finally:
            await pipeline.backend.close()

    config, results = asyncio.run(evaluate())

    out = Path(params["out"])
    ResultStore(out).write(results)
    if recalibration is not None:
        save_map(recalibration, out / RECAL_FILE)
    if per_category:
        save_maps(per_category, out / RECAL_DIR)

    summary: Dict[str, Any] = {
        "mode": mode.label,
        "backend": pipeline.backend.identity,
        "samples": len(results),
        "flagged": sum(1 for r in results if r.flagged),
        "model_calls": dict(pipeline.model.calls),
    }
    if pipeline.errors.has_errors():
        summary["errors"] = pipeline.errors.to_dict()
    analysed = results
    if mode.explains_prior:
        analysed = explained_agreement(results)
        summary["same_answer"] = len(analysed)
    if any(not r.flagged for r in analysed):
        curves = aggregate(analysed)
        summary.update(epsilon_obey=curves.epsilon_obey, mean_epsilon=curves.mean_epsilon)
    manifest = build_manifest(
        config.to_dict(),
        command=ctx.info_name,
        flags=params,
        backend_identity=pipeline.backend.identity,
        renderer=pipeline.renderer,
        dataset_path=params["dataset"],
        started_at=started,
        summary=summary,
    )
    manifest["mode"] = config.mode.to_dict()
    write_manifest(manifest, out / MANIFEST_FILE)
    click.echo(safe_json_encode(summary, pretty=True))
    return EXIT_EVALUATION if summary["flagged"] else EXIT_OK


# fit-recal


@cli.command("fit-recal")
@click.option("--results", "results_dir", type=click.Path(exists=True, file_okay=False), required=True,
              help="Run directory of an unrecalibrated sweep.")
@click.option("--held-out", is_flag=True, default=False, show_default=True,
              help="Fit one map per category on the other categories.")
@click.option("--out", type=click.Path(), required=True,
              help="Map file, or a directory of per-category maps with --held-out.")
@click.pass_context
def fit_recal_command(ctx: click.Context, results_dir: str, held_out: bool, out: str) -> None:
    """Fit recalibration maps from stored sweep results."""
    try:
        recalibration, per_category = fit_maps(ResultStore(results_dir).read(), held_out)
        if recalibration is not None:
            save_map(recalibration, out)
            maps = {"all": recalibration}
        else:
            save_maps(per_category, out)
            maps = per_category
    except ObedienceError as e:
        _fail(ctx, e)
        return
    for name, fitted in sorted(maps.items()):
        pairs = " ".join(f"{t:g}->{e:g}" for t, e in fitted.pairs())
        click.echo(f"{name}: {pairs}" + (" (identity)" if fitted.is_identity() else ""))
        if fitted.endpoint_violations:
            click.echo(f"{name}: endpoint violations {', '.join(fitted.endpoint_violations)}", err=True)
    ctx.exit(EXIT_OK)


# report


def _read_run(directory: Path) -> Tuple[Dict[str, Any], List[SampleResult]]:
    manifest_path = directory / MANIFEST_FILE
    manifest = safe_json_decode(manifest_path.read_text(encoding="utf-8")) if manifest_path.is_file() else None
    if not isinstance(manifest, dict):
        manifest = {}
    return manifest, _analysed(manifest, ResultStore(directory).read())


def _analysed(manifest: Dict[str, Any], results: List[SampleResult]) -> List[SampleResult]:
    """Explained-prior runs are analysed on samples whose two priors agree."""
    if "mode" in manifest and PromptMode.from_dict(manifest["mode"]).explains_prior:
        return explained_agreement(results)
    return results


@cli.command("report")
@click.option("--run", "runs", type=click.Path(exists=True, file_okay=False), multiple=True, required=True,
              help="Run directory; repeat to tabulate several runs.")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Dataset with gold answers, for the correctness split.")
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Report directory.")
@click.pass_context
def report_command(ctx: click.Context, runs: Sequence[str], dataset: Optional[str], out: str) -> None:
    """Curves, heatmaps, maps and the ablation table from stored runs."""
    out_dir = Path(out)
    try:
        loaded = [(Path(r), *_read_run(Path(r))) for r in runs]
        shared = set.intersection(*({x.sample_id for x in results if not x.flagged} for _, _, results in loaded))
        samples = load_dataset(dataset) if dataset else None
        table: Dict[str, Dict[str, Any]] = {}
        for directory, manifest, results in loaded:
            name = directory.name
            curves = aggregate(results)
            emit(curves, out_dir / name / "curves")
            try:
                emit(heatmap(results), out_dir / name / "heatmap")
            except ContractError as e:
                logger.warning("report.heatmap_skipped", run=name, reason=e.message)
            if samples is not None:
                correct, wrong = split_by_correctness(results, [s for s in samples if s.gold_answer])
                for label, side in (("correct", correct), ("wrong", wrong)):
                    if side is not None:
                        emit(side, out_dir / name / f"curves_{label}")
            if (directory / RECAL_FILE).is_file():
                emit(load_map(directory / RECAL_FILE), out_dir / name / "recalibration")
            label = PromptMode.from_dict(manifest["mode"]).label if "mode" in manifest else name
            backend = manifest.get("backend", "backend")
            table.setdefault(label, {})[backend] = aggregate([r for r in results if r.sample_id in shared])
        emit(ablation_table(table), out_dir / "ablation")
    except ObedienceError as e:
        _fail(ctx, e)
        return
    click.echo(str(out_dir))
    ctx.exit(EXIT_OK)


# synth-check


@cli.command("synth-check")
@click.pass_context
def synth_check_command(ctx: click.Context) -> None:
    """Run the synthetic-oracle acceptance suite."""
    from ..acceptance import run_acceptance

    checks = run_acceptance()
    for check in checks:
        click.echo(check.line())
    ctx.exit(EXIT_OK if all(c.passed for c in checks) else EXIT_EVALUATION)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the exit code instead of exiting."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="obedience",
                          standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_EVALUATION
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(main())
