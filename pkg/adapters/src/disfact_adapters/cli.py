"""disfact-adapt: export discourse trees and serve wire-protocol scorers."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .parsers import ParserUnavailable
from .serve import make_scorer, serve_http, serve_stdio
from .treeexport import AdapterConfig, export_trees


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def cli(verbose: bool):
    """Bridges between neural models and the scoring pipeline."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("text_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--parser", "parser_model", default="heuristic",
              help="'heuristic' or an importable neural parser module.")
@click.option("--device", default="cpu")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
def export(text_files, parser_model, device, outdir):
    """Write one canonical tree document (or absent marker) per text file."""
    config = AdapterConfig(parser_model=parser_model, device=device)
    texts = [(Path(f).stem, Path(f).read_text(encoding="utf-8"))
             for f in text_files]
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for (source_id, _), document in zip(texts, export_trees(texts, config)):
        suffix = ".absent.json" if json.loads(document).get("tree_absent") \
            else ".json"
        (out / f"{source_id}{suffix}").write_text(document + "\n",
                                                  encoding="utf-8")
        click.echo(f"{source_id}{suffix}")


@cli.command()
@click.option("--scorer", "scorer_model", default="echo",
              help="'echo', 'shuffle', 'f1', or a hosted NLI model id.")
@click.option("--device", default="cpu")
@click.option("--batch-size", type=int, default=8)
@click.option("--http", "http_port", type=int, default=None,
              help="Serve POST /v1/score on this port instead of stdio.")
@click.option("--host", default="127.0.0.1")
def serve(scorer_model, device, batch_size, http_port, host):
    """Run a scorer over the stdin/stdout protocol (default) or HTTP."""
    try:
        scorer = make_scorer(scorer_model, device=device,
                             batch_size=batch_size)
    except RuntimeError as exc:
        raise click.ClickException(f"scorer startup failed: {exc}") from None
    if http_port is not None:
        server = serve_http(scorer, host=host, port=http_port)
        click.echo(f"scoring on http://{host}:{server.server_port}/v1/score",
                   err=True)
        server.serve_forever()
    else:
        serve_stdio(scorer, shuffle=(scorer_model == "shuffle"))


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except ParserUnavailable as exc:
        click.echo(f"parser startup failed: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
