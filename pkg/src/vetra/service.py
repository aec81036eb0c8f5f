"""FastAPI service wrapping the analysis pipeline.

Endpoints mirror the CLI verbs: CPG parse/validate/normalize, single-sample
analysis, and dataset evaluation.  Stage failures map to HTTP 422 carrying
the stage tag and its process exit code so thin clients can propagate them.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .agents import verdict_record
from .config import (
    MODE_FULL,
    PipelineConfig,
    endpoint_from_env,
    load_config,
)
from .cpg.interchange import DanglingEdge, SchemaViolation, export_cpg, import_cpg
from .cpg.model import CpgError
from .cpg.parser import parse_translation_unit
from .evaluation import (
    EvalError,
    build_report,
    load_pair_dataset,
    load_predictions,
    run_ablation,
    run_dataset,
    save_predictions,
)
from .llm import ChatClient, LiveBackend, LlmError, UsageLedger, load_cassette
from .pipeline import StageError, run_repository_sample, write_artifacts

app = FastAPI(title="vetra", version=__version__)


class ConfigOverrides(BaseModel):
    k: Optional[int] = None
    depth_limit: Optional[int] = None
    expansion_cap: Optional[int] = None
    model: Optional[str] = None
    max_retries: Optional[int] = None
    parallelism: Optional[int] = None
    backend: Optional[str] = None
    cassette: Optional[str] = None
    mode: Optional[str] = None


class ParseRequest(BaseModel):
    source: str
    file_path: str = "input.c"


class DocumentRequest(BaseModel):
    document: str


class AnalyzeRequest(BaseModel):
    repo_path: str
    file: str
    function: str
    sample_id: Optional[str] = None
    out_dir: Optional[str] = None
    config_path: Optional[str] = None
    config: ConfigOverrides = Field(default_factory=ConfigOverrides)


class EvalMetricsRequest(BaseModel):
    dataset_path: str
    predictions_path: str
    mode: str = MODE_FULL


class EvalRunRequest(BaseModel):
    dataset_path: str
    out_dir: Optional[str] = None
    config_path: Optional[str] = None
    config: ConfigOverrides = Field(default_factory=ConfigOverrides)
    sweep_k: Optional[list[int]] = None
    ablation: Optional[str] = None


def _resolve_config(config_path: Optional[str], overrides: ConfigOverrides) -> PipelineConfig:
    try:
        return load_config(config_path, **overrides.model_dump())
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        raise HTTPException(status_code=400, detail=f"bad configuration: {exc}")


def _build_client(config: PipelineConfig) -> ChatClient:
    if config.backend == "replay":
        if not config.cassette:
            raise HTTPException(
                status_code=400,
                detail="replay backend requires a cassette path (or pass backend=live)")
        try:
            backend = load_cassette(config.cassette)
        except LlmError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    else:
        endpoint, api_key = endpoint_from_env()
        if not endpoint:
            raise HTTPException(
                status_code=400,
                detail="live backend requires VETRA_ENDPOINT (and usually VETRA_API_KEY)")
        backend = LiveBackend(endpoint, api_key)
    return ChatClient(backend, UsageLedger())


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__}


@app.post("/cpg/parse")
def cpg_parse(request: ParseRequest) -> dict[str, Any]:
    try:
        cpg = parse_translation_unit(request.source, request.file_path)
    except CpgError as exc:
        raise HTTPException(status_code=422, detail={"stage": "cpg", "error": str(exc),
                                                     "exit_code": 2})
    return {"document": json.loads(export_cpg(cpg))}


@app.post("/cpg/validate")
def cpg_validate(request: DocumentRequest) -> dict[str, Any]:
    try:
        cpg = import_cpg(request.document)
    except (SchemaViolation, DanglingEdge) as exc:
        raise HTTPException(status_code=422, detail={"stage": "cpg", "error": str(exc),
                                                     "exit_code": 2})
    return {
        "file": cpg.file,
        "nodes": len(cpg.nodes),
        "edges": len(cpg.edges),
        "functions": sorted(cpg.functions),
    }


@app.post("/cpg/normalize")
def cpg_normalize(request: DocumentRequest) -> dict[str, Any]:
    try:
        cpg = import_cpg(request.document)
    except (SchemaViolation, DanglingEdge) as exc:
        raise HTTPException(status_code=422, detail={"stage": "cpg", "error": str(exc),
                                                     "exit_code": 2})
    return {"document": json.loads(export_cpg(cpg))}


@app.post("/analyze")
def analyze(request: AnalyzeRequest) -> dict[str, Any]:
    config = _resolve_config(request.config_path, request.config)
    client = _build_client(config)
    try:
        run = run_repository_sample(request.repo_path, request.file,
                                    request.function, config, client,
                                    sample_id=request.sample_id or "")
    except StageError as exc:
        raise HTTPException(status_code=422, detail={
            "stage": exc.stage, "error": str(exc), "exit_code": exc.exit_code})
    except LlmError as exc:
        raise HTTPException(status_code=422, detail={
            "stage": "backend", "error": str(exc), "exit_code": 1})
    response: dict[str, Any] = {
        "verdict": verdict_record(run.final),
        "expansion_logs": [a.expansion_log for a in run.artifacts],
        "ledger": client.ledger.to_records(),
    }
    if request.out_dir:
        path = write_artifacts(run, config, request.out_dir,
                               client.ledger.to_records())
        response["artifacts_dir"] = str(path)
    return response


@app.post("/eval/metrics")
def eval_metrics(request: EvalMetricsRequest) -> dict[str, Any]:
    try:
        pairs = load_pair_dataset(request.dataset_path)
        predictions = load_predictions(request.predictions_path)
        report = build_report(predictions, pairs, mode=request.mode)
    except EvalError as exc:
        raise HTTPException(status_code=422, detail={
            "stage": "eval", "error": str(exc), "exit_code": 7})
    return {"report": report.to_record(), "rendered": report.render()}


@app.post("/eval/run")
def eval_run(request: EvalRunRequest) -> dict[str, Any]:
    config = _resolve_config(request.config_path, request.config)
    try:
        pairs = load_pair_dataset(request.dataset_path)
    except EvalError as exc:
        raise HTTPException(status_code=422, detail={
            "stage": "eval", "error": str(exc), "exit_code": 7})
    out_dir = Path(request.out_dir) if request.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    def one_run(cfg: PipelineConfig, tag: str) -> dict[str, Any]:
        client = _build_client(cfg)
        try:
            if request.ablation:
                report = run_ablation(request.ablation, pairs, cfg, client,
                                      workdir=out_dir / f"work-{tag}" if out_dir else None)
                predictions = None
            else:
                predictions, report = run_dataset(
                    pairs, cfg, client,
                    workdir=out_dir / f"work-{tag}" if out_dir else None)
        except StageError as exc:
            raise HTTPException(status_code=422, detail={
                "stage": exc.stage, "error": str(exc), "exit_code": exc.exit_code})
        except (EvalError, LlmError) as exc:
            raise HTTPException(status_code=422, detail={
                "stage": "eval", "error": str(exc), "exit_code": 7})
        payload: dict[str, Any] = {"report": report.to_record(),
                                   "rendered": report.render(),
                                   "ledger_totals": list(client.ledger.totals())}
        if predictions is not None and out_dir:
            pred_path = out_dir / f"predictions-{tag}.json"
            save_predictions(predictions, pred_path)
            payload["predictions_path"] = str(pred_path)
        return payload

    if request.sweep_k:
        from dataclasses import replace

        sweeps = {}
        for k in request.sweep_k:
            sweeps[str(k)] = one_run(replace(config, k=k), f"k{k}")
        return {"sweep": sweeps}
    return one_run(config, f"k{config.k}")
