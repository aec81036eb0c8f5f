"""Thin CLI client over the FastAPI service.

Every verb builds a request and posts it to the service app - through an
in-process ASGI transport by default, or to a running server with
``--server URL`` / ``VETRA_SERVER``.  Exit codes partition by stage: 2 cpg,
3 discovery, 4 expansion, 5 verification, 6 audit, 7 eval, 1 anything else.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Optional

import click
import httpx


def _client(server: Optional[str]) -> httpx.Client:
    server = server or os.environ.get("VETRA_SERVER")
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # In-process mode: drive the ASGI app through a sync portal.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail")
    except json.JSONDecodeError:
        detail = response.text
    if isinstance(detail, dict):
        click.echo(f"error [{detail.get('stage', '?')}]: {detail.get('error')}", err=True)
        sys.exit(int(detail.get("exit_code", 1)))
    click.echo(f"error: {detail}", err=True)
    sys.exit(1)


def _config_payload(k, depth_limit, expansion_cap, model, max_retries,
                    parallelism, cassette, live, mode) -> dict:
    return {
        "k": k,
        "depth_limit": depth_limit,
        "expansion_cap": expansion_cap,
        "model": model,
        "max_retries": max_retries,
        "parallelism": parallelism,
        "backend": "live" if live else ("replay" if cassette else None),
        "cassette": cassette,
        "mode": mode,
    }


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Send requests to a running service instead of in-process.")
@click.pass_context
def main(ctx, server):
    """Clue-anchored vulnerability triage over code property graphs."""
    ctx.obj = server


def common_run_options(fn):
    fn = click.option("--k", type=int, default=None, help="Top-k clues to analyze.")(fn)
    fn = click.option("--depth-limit", type=int, default=None)(fn)
    fn = click.option("--expansion-cap", type=int, default=None)(fn)
    fn = click.option("--model", default=None)(fn)
    fn = click.option("--max-retries", type=int, default=None)(fn)
    fn = click.option("--parallel", "parallelism", type=int, default=None)(fn)
    fn = click.option("--cassette", type=click.Path(), default=None,
                      help="Replay responses from this cassette.")(fn)
    fn = click.option("--live", is_flag=True, default=False,
                      help="Use the live endpoint from VETRA_ENDPOINT.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="JSON config file; flags override it.")(fn)
    return fn


@main.command()
@click.argument("repo_path", type=click.Path(exists=True))
@click.option("--file", "-f", required=True, help="Target file, repo-relative.")
@click.option("--function", "-F", required=True, help="Target function name.")
@click.option("--sample-id", default=None)
@click.option("--out-dir", type=click.Path(), default=None,
              help="Write verdict/trace/context/log artifacts here.")
@click.option("--mode", type=click.Choice(["Full", "NoDialectics", "NoAudit"]),
              default=None)
@common_run_options
@click.pass_obj
def run(server, repo_path, file, function, sample_id, out_dir, mode, k,
        depth_limit, expansion_cap, model, max_retries, parallelism,
        cassette, live, config_path):
    """Run the four-phase pipeline on one function."""
    with _client(server) as client:
        payload = {
            "repo_path": str(Path(repo_path).resolve()),
            "file": file,
            "function": function,
            "sample_id": sample_id,
            "out_dir": str(Path(out_dir).resolve()) if out_dir else None,
            "config_path": config_path,
            "config": _config_payload(k, depth_limit, expansion_cap, model,
                                      max_retries, parallelism, cassette, live, mode),
        }
        result = _post(client, "/analyze", payload)
    click.echo(json.dumps(result["verdict"], indent=2, sort_keys=True))
    if "artifacts_dir" in result:
        click.echo(f"artifacts: {result['artifacts_dir']}", err=True)


@main.command("eval")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--predictions", type=click.Path(exists=True), default=None,
              help="Score these predictions instead of running the pipeline.")
@click.option("--run-all", is_flag=True, default=False,
              help="Run the pipeline over every pair side.")
@click.option("--sweep-k", default=None, metavar="A..B",
              help="Emit one report per k in the range, e.g. 1..3.")
@click.option("--ablation", type=click.Choice(["Full", "NoDialectics", "NoAudit"]),
              default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--mode", type=click.Choice(["Full", "NoDialectics", "NoAudit"]),
              default=None)
@common_run_options
@click.pass_obj
def eval_cmd(server, dataset, predictions, run_all, sweep_k, ablation, out_dir,
             mode, k, depth_limit, expansion_cap, model, max_retries,
             parallelism, cassette, live, config_path):
    """Pair-wise + standard metrics and cost report for a dataset."""
    with _client(server) as client:
        if predictions and not run_all:
            result = _post(client, "/eval/metrics", {
                "dataset_path": str(Path(dataset).resolve()),
                "predictions_path": str(Path(predictions).resolve()),
                "mode": mode or "Full",
            })
            click.echo(result["rendered"])
            click.echo(json.dumps(result["report"], indent=2, sort_keys=True))
            return
        if not run_all:
            click.echo("pass --predictions FILE or --run-all", err=True)
            sys.exit(7)
        sweep = None
        if sweep_k:
            try:
                lo, hi = sweep_k.split("..")
                sweep = list(range(int(lo), int(hi) + 1))
            except ValueError:
                click.echo(f"bad --sweep-k {sweep_k!r}; expected A..B", err=True)
                sys.exit(7)
        result = _post(client, "/eval/run", {
            "dataset_path": str(Path(dataset).resolve()),
            "out_dir": str(Path(out_dir).resolve()) if out_dir else None,
            "config_path": config_path,
            "config": _config_payload(k, depth_limit, expansion_cap, model,
                                      max_retries, parallelism, cassette, live, mode),
            "sweep_k": sweep,
            "ablation": ablation,
        })
    if "sweep" in result:
        for kk, payload in result["sweep"].items():
            click.echo(f"== k={kk} ==")
            click.echo(payload["rendered"])
    else:
        click.echo(result["rendered"])
        click.echo(json.dumps(result["report"], indent=2, sort_keys=True))


@main.group()
def cpg():
    """Parse, validate, and normalize graph interchange documents."""


@cpg.command("parse")
@click.argument("source_file", type=click.Path(exists=True))
@click.option("--out", "-o", type=click.Path(), default=None)
@click.pass_obj
def cpg_parse(server, source_file, out):
    """Parse a C file and emit its interchange document."""
    with _client(server) as client:
        result = _post(client, "/cpg/parse", {
            "source": Path(source_file).read_text(),
            "file_path": str(source_file),
        })
    text = json.dumps(result["document"], indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@cpg.command("validate")
@click.argument("document", type=click.Path(exists=True))
@click.pass_obj
def cpg_validate(server, document):
    """Validate an interchange document; nonzero exit on schema violations."""
    with _client(server) as client:
        result = _post(client, "/cpg/validate", {
            "document": Path(document).read_text()})
    click.echo(json.dumps(result, indent=2, sort_keys=True))


@cpg.command("normalize")
@click.argument("document", type=click.Path(exists=True))
@click.option("--out", "-o", type=click.Path(), default=None)
@click.pass_obj
def cpg_normalize(server, document, out):
    """Import then deterministically re-export a document."""
    with _client(server) as client:
        result = _post(client, "/cpg/normalize", {
            "document": Path(document).read_text()})
    text = json.dumps(result["document"], indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8199)
def serve(host, port):
    """Start the analysis service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
