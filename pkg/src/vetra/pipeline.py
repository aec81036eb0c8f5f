"""Four-phase orchestration for one target function.

Phase I discovers clues over the numbered function text, Phase II expands
each of the top-k clues into a stitched evidence trace, Phase III verifies
each clue-trace pair dialectically, Phase IV audits the verifier and may
veto.  Per-clue verification failures are recorded as inconclusive and
excluded from aggregation; stage-level failures raise StageError so callers
can map them to exit codes.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import agents
from .agents import FinalVerdict, PerClueOutcome, verdict_record
from .config import MODE_FULL, MODE_NO_AUDIT, MODE_NO_DIALECTICS, PipelineConfig
from .cpg.index import FunctionIndex, build_function_index
from .cpg.model import CpgError
from .expansion import Budgets, OracleProtocolError, expand_iteratively
from .llm import ChatClient, ChatRequest, Stage
from .slicing import Clue, NoStatementAtLine
from .trace import build_evidence_trace, render_context, render_trace, trace_to_record

log = logging.getLogger(__name__)

STAGE_EXIT_CODES = {
    "cpg": 2,
    "discovery": 3,
    "expansion": 4,
    "verification": 5,
    "audit": 6,
    "eval": 7,
}


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = STAGE_EXIT_CODES.get(stage, 1)


@dataclass
class ClueArtifacts:
    clue: Clue
    trace_text: str = ""
    context_text: str = ""
    trace_record: dict = field(default_factory=dict)
    expansion_log: str = ""
    covered_lines: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class SampleRun:
    sample_id: str
    final: FinalVerdict
    clues: list[Clue]
    artifacts: list[ClueArtifacts]
    target_file: str
    target_function: str

    def phase1_lines(self) -> set[tuple[str, int]]:
        return {(self.target_file, a.clue.line) for a in self.artifacts}

    def phase2_lines(self) -> set[tuple[str, int]]:
        lines = set(self.phase1_lines())
        for a in self.artifacts:
            lines.update(a.covered_lines)
        return lines


def numbered_function_text(index: FunctionIndex, file: str, function: str) -> str:
    cpg = index.load_cpg(file)
    if function not in cpg.functions:
        raise StageError("cpg", f"function {function!r} not found in {file}")
    first, last = cpg.function_span(function)
    lines = []
    for line in range(first, last + 1):
        lines.append(f"{line}: {cpg.line_text(line) or ''}")
    return "\n".join(lines)


def run_sample(index: FunctionIndex, file: str, function: str,
               config: PipelineConfig, client: ChatClient,
               sample_id: str = "") -> SampleRun:
    sample_id = sample_id or f"{file}::{function}"
    try:
        cpg = index.load_cpg(file)
    except (OSError, CpgError) as exc:
        raise StageError("cpg", f"cannot parse {file}: {exc}")
    if function not in cpg.functions:
        raise StageError("cpg", f"function {function!r} not found in {file}")
    fn_id = cpg.functions[function]

    # Phase I: clue discovery over the numbered function text.
    function_text = numbered_function_text(index, file, function)
    try:
        clues = agents.discover_clues(
            function_text, client, model=config.model,
            temperature=config.temperatures.discovery, sample_id=sample_id,
            max_retries=config.max_retries)
    except agents.Exhausted as exc:
        raise StageError("discovery", str(exc))
    top = agents.select_top_k(clues, config.k) if clues else []

    budgets = Budgets(depth_limit=config.depth_limit,
                      expansion_cap=config.expansion_cap, k=config.k)

    def oracle(prompt: str) -> str:
        request = ChatRequest(system="", user=prompt, stage=Stage.EXPANSION,
                              model=config.model,
                              temperature=config.temperatures.expansion)
        return client.complete(request, sample_id).text

    outcomes: list[PerClueOutcome] = []
    artifacts: list[ClueArtifacts] = []
    for clue in top:
        art = ClueArtifacts(clue=clue)
        artifacts.append(art)
        # Phase II: graph-guided context augmentation.
        try:
            result = expand_iteratively(cpg, fn_id, clue, index, budgets, oracle)
        except NoStatementAtLine as exc:
            outcomes.append(PerClueOutcome(clue, status="inconclusive",
                                           error=f"anchor: {exc}"))
            continue
        except OracleProtocolError as exc:
            raise StageError("expansion", str(exc))
        trace = build_evidence_trace(result)
        art.trace_text = render_trace(trace)
        art.context_text = render_context(result)
        art.trace_record = trace_to_record(trace)
        art.expansion_log = result.log_lines()
        art.covered_lines = sorted(
            {(s["file"], s["line"]) for chain in art.trace_record["chains"]
             for s in chain["steps"]})
        # Phase III: dialectical verification (single-pass under NoDialectics).
        try:
            verifier = agents.verify(
                clue, art.context_text, art.trace_text, client,
                model=config.model, temperature=config.temperatures.verification,
                file_path=file, sample_id=sample_id,
                max_retries=config.max_retries,
                dialectical=(config.mode != MODE_NO_DIALECTICS))
        except agents.Exhausted as exc:
            outcomes.append(PerClueOutcome(clue, status="inconclusive",
                                           error=f"verification: {exc}"))
            continue
        # Phase IV: meta-audit (skipped under NoAudit; verifier verdict final).
        if config.mode == MODE_NO_AUDIT:
            outcomes.append(PerClueOutcome(clue, verifier=verifier))
            continue
        try:
            decision = agents.audit(
                clue, art.context_text, art.trace_text, verifier, client,
                model=config.model, temperature=config.temperatures.audit,
                file_path=file, sample_id=sample_id,
                max_retries=config.max_retries)
        except agents.Exhausted as exc:
            outcomes.append(PerClueOutcome(clue, verifier=verifier,
                                           status="inconclusive",
                                           error=f"audit: {exc}"))
            continue
        outcomes.append(PerClueOutcome(clue, verifier=verifier, audit=decision))

    final = agents.finalize_verdict(outcomes, sample_id)
    return SampleRun(sample_id=sample_id, final=final, clues=clues,
                     artifacts=artifacts, target_file=file,
                     target_function=function)


def run_directory_name(sample_id: str, config: PipelineConfig) -> str:
    payload = json.dumps(
        [sample_id, config.k, config.depth_limit, config.expansion_cap,
         config.model, config.mode],
        sort_keys=True)
    digest = hashlib.sha256(payload.encode()).hexdigest()[:10]
    safe = "".join(c if c.isalnum() or c in "-._" else "_" for c in sample_id)
    return f"{safe}-{digest}"


def write_artifacts(run: SampleRun, config: PipelineConfig, out_dir: str | Path,
                    ledger_records: Optional[list[dict]] = None) -> Path:
    """All artifacts for one run under a deterministic directory."""
    base = Path(out_dir) / run_directory_name(run.sample_id, config)
    base.mkdir(parents=True, exist_ok=True)
    record = verdict_record(run.final)
    (base / "verdict.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    for i, art in enumerate(run.artifacts, start=1):
        (base / f"trace-{i}.txt").write_text(art.trace_text)
        (base / f"trace-{i}.json").write_text(
            json.dumps(art.trace_record, indent=2, sort_keys=True) + "\n")
        (base / f"context-{i}.txt").write_text(art.context_text)
        (base / f"expansion-{i}.log").write_text(art.expansion_log + "\n")
    coverage = {
        "phase1_lines": sorted([list(t) for t in run.phase1_lines()]),
        "phase1_plus_2_lines": sorted([list(t) for t in run.phase2_lines()]),
    }
    (base / "coverage.json").write_text(json.dumps(coverage, indent=2) + "\n")
    if ledger_records is not None:
        (base / "ledger.json").write_text(
            json.dumps(ledger_records, indent=2) + "\n")
    return base


def run_repository_sample(repo_path: str | Path, file: str, function: str,
                          config: PipelineConfig, client: ChatClient,
                          sample_id: str = "") -> SampleRun:
    try:
        index = build_function_index(repo_path)
    except CpgError as exc:
        raise StageError("cpg", str(exc))
    return run_sample(index, file, function, config, client, sample_id)
