"""Command-line interface.

Every subcommand reads files, writes one output (a file when ``--out`` is
given, standard output otherwise) and, for file outputs, a
``<out>.manifest.json`` sidecar describing how it was produced.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 numeric
failure.
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from ifra import __version__, svm
from ifra.augmentation import AugmentationConfig, augment_fallers
from ifra.catalog import resolve_catalog
from ifra.dataset import Split, load_dataset, make_splits, split_summary, summary_table
from ifra.errors import DataError, NumericError
from ifra.evaluation import compare_scales, reports_to_json, reports_to_markdown
from ifra.scale import (
    RiskScale,
    assess,
    builtin_clinical_scales,
    derive_scale,
    ifra_published_scale,
    load_scales,
)
from ifra.selection import SelectionConfig, SelectionReport, run_selection

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

DEFAULTS = {
    "seed": 0,
    "catalog": "reference",
    "out": None,
    "iterations": 1000,
    "accuracy_gate": 0.80,
    "alpha": 0.05,
    "relevance_threshold": 0.50,
    "noise_scale": 0.1,
    "count": 15,
    "workers": 1,
}

_GLOBAL_OPTIONS = [
    click.option("--seed", type=int, default=None, help="Master seed (default 0)."),
    click.option("--catalog", default=None,
                 help="Feature catalog: 'reference', 'clinical', 'itug' or a JSON file (default reference)."),
    click.option("--out", type=click.Path(dir_okay=False), default=None,
                 help="Output file; standard output when omitted."),
    click.option("--iterations", type=click.IntRange(min=1), default=None,
                 help="Selection iterations (default 1000)."),
    click.option("--accuracy-gate", type=click.FloatRange(0, 1, min_open=True), default=None,
                 help="Validation accuracy an iteration's SVM must reach (default 0.80)."),
    click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=None,
                 help="Significance level for tests (default 0.05)."),
    click.option("--relevance-threshold", type=click.FloatRange(0, 1, min_open=True), default=None,
                 help="Selection fraction needed to keep a feature (default 0.50)."),
    click.option("--noise-scale", type=click.FloatRange(min=0), default=None,
                 help="Augmentation noise, as a multiple of each feature's faller SD (default 0.1)."),
    click.option("--count", type=click.IntRange(min=1), default=None,
                 help="Number of synthetic fallers to add (default 15)."),
    click.option("--workers", type=click.IntRange(min=1), default=None,
                 help="Worker processes for selection (default 1)."),
]


def global_options(fn):
    for opt in reversed(_GLOBAL_OPTIONS):
        fn = opt(fn)
    return fn


def _settings(ctx: click.Context, local: dict) -> dict:
    """Subcommand flags override group flags, which override defaults."""
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in (ctx.obj or {}).items() if v is not None})
    merged.update({k: local.pop(k) for k in list(local) if k in DEFAULTS and local[k] is not None})
    for k in DEFAULTS:
        local.pop(k, None)
    return merged


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(text: str, out: str | None, command: str, config: dict, inputs, seed) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    Path(out).write_text(text, encoding="utf-8", newline="")
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": seed,
        "version": __version__,
        "outputs": [str(out)],
    }
    Path(f"{out}.manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline=""
    )


def _load(data: str, catalog: str):
    cat = resolve_catalog(catalog)
    dataset, log = load_dataset(data, cat)
    for e in log.exclusions:
        click.echo(f"excluded line {e.line} ({e.subject_id}): {e.reason}", err=True)
    return dataset, log


def _slice(dataset, split: str):
    return dataset if split == "all" else dataset.select(split=split)


BUNDLED_SCALES = {
    "ifra": lambda: [ifra_published_scale()],
    "ifra_published.json": lambda: [ifra_published_scale()],
    "clinical": builtin_clinical_scales,
    "clinical_published.json": builtin_clinical_scales,
}


def _scale_file(spec: str) -> tuple[list[RiskScale], list[str]]:
    """Scales from a file, or from a bundled set when no such file exists.

    Returns the scales and the input paths to digest.
    """
    if Path(spec).is_file():
        return load_scales(spec), [spec]
    if spec in BUNDLED_SCALES:
        return BUNDLED_SCALES[spec](), []
    raise DataError(f"scale file {spec!r} not found")


def _single_scale(spec: str, name: str | None) -> tuple[RiskScale, list[str]]:
    scales, inputs = _scale_file(spec)
    if name is not None:
        for sc in scales:
            if sc.name == name:
                return sc, inputs
        raise DataError(f"{spec}: no scale named {name!r}")
    if len(scales) != 1:
        raise DataError(f"{spec} holds {len(scales)} scales; pick one with --name")
    return scales[0], inputs


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected NON_FALLERS,FALLERS, got {text!r}") from None
    if a < 0 or b < 0:
        raise click.BadParameter("counts must be non-negative")
    return a, b


DATA = click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False),
                    help="Cohort CSV.")
SPLIT = click.option("--split", type=click.Choice(["train", "validation", "test", "all"]),
                     default="test", show_default=True, help="Slice of the dataset to use.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="ifra")
@global_options
@click.pass_context
def cli(ctx, **flags):
    """Fall-risk scale derivation and evaluation."""
    ctx.obj = flags


@cli.command()
@DATA
@global_options
@click.pass_context
def ingest(ctx, data, **flags):
    """Validate a cohort CSV and write it back in canonical form."""
    s = _settings(ctx, flags)
    dataset, log = _load(data, s["catalog"])
    click.echo(json.dumps({"ingestion": log.to_dict(), "splits": summary_table(split_summary(dataset))},
                          indent=2), err=True)
    _emit(dataset.to_csv_text(), s["out"], "ingest", {"catalog": s["catalog"]}, [data], None)


@cli.command()
@DATA
@global_options
@click.pass_context
def augment(ctx, data, **flags):
    """Append Gaussian-perturbed copies of real training fallers."""
    s = _settings(ctx, flags)
    dataset, _ = _load(data, s["catalog"])
    cfg = AugmentationConfig(count=s["count"], noise_scale=s["noise_scale"], seed=s["seed"])
    out = augment_fallers(dataset, cfg)
    config = {"catalog": s["catalog"], "count": cfg.count, "noise_scale": cfg.noise_scale}
    _emit(out.to_csv_text(), s["out"], "augment", config, [data], s["seed"])


@cli.command("make-splits")
@DATA
@click.option("--validation", "validation", default="12,5", show_default=True,
              help="Validation NON_FALLERS,FALLERS drawn from real subjects.")
@click.option("--test", "test", default="22,10", show_default=True,
              help="Test NON_FALLERS,FALLERS drawn from real subjects.")
@global_options
@click.pass_context
def make_splits_cmd(ctx, data, validation, test, **flags):
    """Assign train/validation/test splits, stratified by outcome."""
    s = _settings(ctx, flags)
    val, tst = _pair(validation), _pair(test)
    dataset, _ = _load(data, s["catalog"])
    out = make_splits(dataset, val, tst, s["seed"])
    config = {"catalog": s["catalog"], "validation": list(val), "test": list(tst)}
    _emit(out.to_csv_text(), s["out"], "make-splits", config, [data], s["seed"])


@cli.command()
@DATA
@click.option("--feature-kind", type=click.Choice(["itug", "clinical", "all"]), default="itug",
              show_default=True, help="Which catalog features are candidates.")
@click.option("--denominator", type=click.Choice(["gated", "total"]), default="gated", show_default=True,
              help="Divide relevance counts by gate-passing or by all iterations.")
@global_options
@click.pass_context
def select(ctx, data, feature_kind, denominator, **flags):
    """Run SVM-gated subsampled feature selection."""
    s = _settings(ctx, flags)
    dataset, _ = _load(data, s["catalog"])
    cfg = SelectionConfig(
        iterations=s["iterations"],
        accuracy_gate=s["accuracy_gate"],
        alpha=s["alpha"],
        relevance_fraction=s["relevance_threshold"],
        seed=s["seed"],
        feature_kind=feature_kind,
        denominator=denominator,
    )
    report = run_selection(
        dataset.select(split=Split.TRAIN), dataset.select(split=Split.VALIDATION),
        svm_config=svm.SvmConfig(), config=cfg, workers=s["workers"],
    )
    if report.no_gated_iterations:
        click.echo("warning: no iteration passed the accuracy gate", err=True)
    config = {"catalog": s["catalog"], **report.to_dict()["config"], "svm": report.svm_config.to_dict()}
    _emit(report.to_json(), s["out"], "select", config, [data], s["seed"])


@cli.command()
@DATA
@click.option("--selection", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Selection report JSON.")
@click.option("--name", default="IFRA (derived)", show_default=True, help="Name of the derived scale.")
@global_options
@click.pass_context
def derive(ctx, data, selection, name, **flags):
    """Derive tertile thresholds for the selected features from the train split."""
    s = _settings(ctx, flags)
    dataset, _ = _load(data, s["catalog"])
    report = SelectionReport.from_json(Path(selection).read_text(encoding="utf-8"))
    scale = derive_scale(dataset.select(split=Split.TRAIN), report, name=name)
    _emit(scale.to_json(), s["out"], "derive", {"catalog": s["catalog"], "name": name},
          [data, selection], None)


@cli.command("assess")
@DATA
@click.option("--scale", "scale_path", required=True,
              help="Scale JSON file, or a bundled set: 'ifra' or 'clinical'.")
@click.option("--name", default=None, help="Scale to use when the file holds several.")
@click.option("--split", type=click.Choice(["train", "validation", "test", "all"]),
              default="all", show_default=True, help="Slice of the dataset to assess.")
@global_options
@click.pass_context
def assess_cmd(ctx, data, scale_path, name, split, **flags):
    """Stratify subjects; one JSON line per subject."""
    s = _settings(ctx, flags)
    dataset, _ = _load(data, s["catalog"])
    scale, scale_inputs = _single_scale(scale_path, name)
    lines = [
        json.dumps(assess(subj, scale).to_dict(subj.subject_id), ensure_ascii=False)
        for subj in _slice(dataset, split)
    ]
    text = "".join(line + "\n" for line in lines)
    _emit(text, s["out"], "assess", {"catalog": s["catalog"], "scale": scale.name, "split": split},
          [data, *scale_inputs], None)


def _run_compare(s, data, scales, split, markdown, command, inputs):
    dataset, _ = _load(data, s["catalog"])
    reports = compare_scales(_slice(dataset, split), scales, s["alpha"])
    md = reports_to_markdown(reports)
    if markdown:
        Path(markdown).write_text(md, encoding="utf-8", newline="")
    else:
        click.echo(md, err=s["out"] is None, nl=False)
    config = {"catalog": s["catalog"], "alpha": s["alpha"], "split": split, "scales": [sc.name for sc in scales]}
    _emit(reports_to_json(reports), s["out"], command, config, inputs, None)


MARKDOWN = click.option("--markdown", type=click.Path(dir_okay=False), default=None,
                        help="Also write the Markdown table here.")


@cli.command()
@DATA
@click.option("--scale", "scale_path", required=True,
              help="Scale JSON file, or a bundled set: 'ifra' or 'clinical'.")
@click.option("--name", default=None, help="Scale to use when the file holds several.")
@SPLIT
@MARKDOWN
@global_options
@click.pass_context
def evaluate(ctx, data, scale_path, name, split, markdown, **flags):
    """Contingency table and exact test for one scale."""
    s = _settings(ctx, flags)
    scale, scale_inputs = _single_scale(scale_path, name)
    _run_compare(s, data, [scale], split, markdown, "evaluate", [data, *scale_inputs])


@cli.command()
@DATA
@click.option("--scale", "scale_paths", multiple=True,
              help="Scale JSON file or bundled set ('ifra', 'clinical'); repeatable, files may hold several scales.")
@SPLIT
@MARKDOWN
@global_options
@click.pass_context
def compare(ctx, data, scale_paths, split, markdown, **flags):
    """Evaluate several scales on the same slice, in the order given."""
    s = _settings(ctx, flags)
    if not scale_paths:
        raise click.UsageError("give at least one --scale")
    scales: list[RiskScale] = []
    inputs = [data]
    for p in scale_paths:
        found, digested = _scale_file(p)
        scales.extend(found)
        inputs.extend(digested)
    _run_compare(s, data, scales, split, markdown, "compare", inputs)


@cli.command()
@click.option("--write-data", type=click.Path(dir_okay=False), default=None,
              help="Also write the split, augmented synthetic cohort as CSV.")
@global_options
@click.pass_context
def demo(ctx, write_data, **flags):
    """Run the whole pipeline on a seeded synthetic cohort."""
    from ifra.pipeline import run_demo

    s = _settings(ctx, flags)
    result = run_demo(
        s["seed"],
        iterations=s["iterations"],
        accuracy_gate=s["accuracy_gate"],
        alpha=s["alpha"],
        relevance_fraction=s["relevance_threshold"],
        noise_scale=s["noise_scale"],
        count=s["count"],
        workers=s["workers"],
    )
    if write_data:
        result.dataset.to_csv(write_data)
    click.echo(reports_to_markdown([result.report]), err=True, nl=False)
    payload = {
        "splits": summary_table(split_summary(result.dataset)),
        "selection": result.selection.to_dict(),
        "scale": result.scale.to_dict(),
        "evaluation": result.report.to_dict(),
    }
    config = {k: s[k] for k in DEFAULTS if k not in ("catalog", "out", "workers")}
    _emit(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", s["out"], "demo", config, [], s["seed"])


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="ifra", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except NumericError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_NUMERIC
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
