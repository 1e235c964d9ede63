"""Command-line surface: features, segment, score, eval, analyze.

Flags override values from an optional YAML config file (``--config``).
Exit codes: 0 success, 1 input error, 2 scorer backend error, 3 internal
error.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click

from .errors import BackendError, DisfactError, InputError
from .corpus import load_manifest
from .features import compute_edu_features
from .pipeline import (RunConfig, plan_for, read_report_header, run_analyze,
                       run_eval, run_score)
from .scoring import BUILTIN_SCORER_ID
from .tree import load_tree


def _parse_scorer(value: str) -> tuple[str, str]:
    if value == "builtin":
        return "builtin_overlap", ""
    if value.startswith("subprocess:"):
        return "subprocess", value[len("subprocess:"):]
    if value.startswith(("http://", "https://")):
        return "http", value
    raise InputError(
        f"bad --scorer {value!r}: expected 'builtin', 'subprocess:<command>' "
        f"or an http(s) URL")


def _build_config(config_path: str | None, **overrides) -> RunConfig:
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    scorer = overrides.pop("scorer", None)
    if scorer is not None:
        cfg.scorer_kind, cfg.scorer_locator = _parse_scorer(scorer)
        if cfg.scorer_kind == "builtin_overlap":
            cfg.scorer_id = BUILTIN_SCORER_ID
    data = cfg.to_dict()
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return RunConfig.from_dict(data)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log at INFO level.")
def cli(verbose: bool):
    """Discourse-aware factual consistency scoring for long documents."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("tree_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write JSONL here instead of stdout.")
def features(tree_files, out):
    """Dump per-EDU discourse features for canonical tree documents."""
    lines = []
    for path in tree_files:
        tree = load_tree(path)
        table = compute_edu_features(tree)
        for i, row in enumerate(table.rows, start=1):
            lines.append(json.dumps(
                {"source_id": tree.source_id, "edu_index": i,
                 "ono": row.ono_penalty, "depth": row.depth_score,
                 "promo": row.promotion_score, "ono_norm": row.ono_norm,
                 "depth_norm": row.depth_norm, "promo_norm": row.promo_norm,
                 "D": table.tree_depth}, sort_keys=True))
    _emit(lines, out)


@cli.command()
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--level", type=int, default=None,
              help="Tree frontier depth; 0 forces window fallback.")
@click.option("--capacity", type=int, default=None, help="Word budget per segment.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def segment(manifest, config_path, level, capacity, out):
    """Dump segmentation plans for every document in a manifest."""
    cfg = _build_config(config_path, manifest=manifest, level=level,
                        capacity=capacity)
    lines = []
    for record in load_manifest(cfg.manifest):
        plan = plan_for(record, cfg)
        for seg in plan.segments:
            lines.append(json.dumps(
                {"doc_id": record.pair_id, "segment_index": seg.segment_index,
                 "first_sentence": seg.first_sentence,
                 "last_sentence": seg.last_sentence,
                 "word_count": seg.word_count,
                 "provenance": seg.provenance}, sort_keys=True))
    _emit(lines, out)


@cli.command()
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--scorer", default=None,
              help="'builtin', 'subprocess:<command>', or an http(s) URL.")
@click.option("--scorer-id", default=None,
              help="Stable identity for caching (kind + locator + model version).")
@click.option("--strategy", default=None,
              type=click.Choice(["mean", "min", "reweighted_mean"]))
@click.option("--alpha", type=float, default=None,
              help="Subtree-height tuning factor.")
@click.option("--level", type=int, default=None)
@click.option("--capacity", type=int, default=None)
@click.option("--cache", type=click.Path(dir_okay=False), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--outdir", type=click.Path(file_okay=False), default=None)
def score(manifest, config_path, scorer, scorer_id, strategy, alpha, level,
          capacity, cache, seed, workers, outdir):
    """Segment, score, re-weight and aggregate every manifest pair."""
    cfg = _build_config(config_path, manifest=manifest, scorer=scorer,
                        scorer_id=scorer_id, strategy=strategy, alpha=alpha,
                        level=level, capacity=capacity, cache=cache, seed=seed,
                        workers=workers, outdir=outdir)
    report = run_score(cfg)
    click.echo(f"report written to {report}")


@cli.command(name="eval")
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--report", "report_a", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--report-b", "report_b", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Baseline report for the paired bootstrap test.")
@click.option("--metric", default=None, type=click.Choice(["auto", "auc", "tau"]))
@click.option("--bootstrap", type=int, default=None, help="Bootstrap resamples.")
@click.option("--seed", type=int, default=None)
@click.option("--macro", is_flag=True, help="Add the macro-average row.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
def eval_cmd(manifest, config_path, report_a, report_b, metric, bootstrap,
             seed, macro, csv_path):
    """Evaluate a score report (optionally against a baseline report)."""
    cfg = _build_config(config_path, manifest=manifest, metric=metric,
                        bootstrap=bootstrap, seed=seed)
    rows = run_eval(cfg, report_a, report_b, macro=macro)
    scored = read_report_header(report_a).get("scorer_id", "unknown")
    click.echo(f"# config_hash={cfg.semantic_hash()} seed={cfg.seed} "
               f"scorer_id={scored}")
    has_p = any("p_vs_baseline" in r for r in rows)
    header = ["dataset_tag", "metric", "value"] + (["p_vs_baseline"] if has_p else [])
    widths = [max(len(h), 12) for h in header]
    click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        cells = [str(row["dataset_tag"]), row["metric"], f"{row['value']:.4f}"]
        if has_p:
            cells.append(f"{row['p_vs_baseline']:.4f}" if "p_vs_baseline" in row else "-")
        click.echo("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=header)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: row.get(k, "") for k in header})


@cli.command()
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the full analysis as JSON.")
@click.option("--alignments", "alignments_path",
              type=click.Path(dir_okay=False), default=None,
              help="Write per-sentence alignment rows (JSONL) here.")
def analyze(manifest, config_path, out, alignments_path):
    """Sentence-structure histogram and per-feature significance tests."""
    cfg = _build_config(config_path, manifest=manifest)
    result = run_analyze(cfg)
    if alignments_path:
        with open(alignments_path, "w", encoding="utf-8", newline="\n") as f:
            for row in result["alignments"]:
                f.write(json.dumps(row, sort_keys=True) + "\n")
    click.echo(f"sentences analyzed: {result['sentences']}")
    click.echo("depth category histogram (-1 split / 0 single-EDU / 1 subtree):")
    for key in ("-1", "0", "1"):
        click.echo(f"  {key:>2}: {result['histogram'][key]:.4f}")
    if result["t_tests"]:
        click.echo("feature              t-stat      p-value")
        for row in result["t_tests"]:
            click.echo(f"{row['feature']:<20} {row['t_stat']:>8.3f} "
                       f"{row['p_value']:>12.6f}")
    if out:
        Path(out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        sys.exit(2)
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except DisfactError as exc:
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(3)
    except Exception as exc:  # noqa: BLE001 - invariant violations map to exit 3
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
