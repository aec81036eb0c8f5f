"""Agent roles: clue discovery, expansion persona, verifier, auditor.

Each role builds its prompt, sends it at the right temperature (the auditor
is pinned to 0), and parses the LAST fenced block of the reply against a
schema.  Malformed replies - missing fields, out-of-range values, enum
violations, or non-ASCII bytes inside the structured block - are re-queried
with the same prompt up to max_retries times before Exhausted is raised.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .llm import ChatClient, ChatRequest, Stage
from .prompts import AUDIT_SYSTEM, CLUE_DISCOVERY_SYSTEM, SINGLE_PASS_SYSTEM, VERIFIER_SYSTEM
from .slicing import Clue

DEFAULT_MAX_RETRIES = 3

_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)
_CWE_RE = re.compile(r"^CWE-\d+$")


class AgentError(Exception):
    pass


class OutputSchemaViolation(AgentError):
    """Reply's structured block failed validation."""


class ConsistencyViolation(OutputSchemaViolation):
    """Audit reply violated the judgment rule."""


class Exhausted(AgentError):
    """No valid reply within the retry budget."""

    def __init__(self, attempts: list[str], last_error: str):
        super().__init__(f"exhausted after {len(attempts)} attempts: {last_error}")
        self.attempts = attempts


class Verdict(str, Enum):
    VULNERABLE = "VULNERABLE"
    NOT_VULNERABLE = "NOT_VULNERABLE"


class AuditAction(str, Enum):
    AGREE = "AGREE"
    DISAGREE = "DISAGREE"
    DEFER = "DEFER"


class SampleVerdict(str, Enum):
    SAFE = "Safe"
    VULNERABLE = "Vulnerable"


CANONICAL_FLAWS = (
    "Phantom Mitigation",
    "Speculation",
    "Anchoring",
    "Over-Trust",
    "Pattern-Matching",
    "Semantic Misunderstanding",
    "Absence-as-Evidence",
    "Scope Creep",
    "Incomplete Protection",
    "Evidence Fabrication",
)


@dataclass(frozen=True)
class FlawLabel:
    """A reasoning-flaw tag; non-canonical labels are kept verbatim and
    reported under Other."""

    value: str

    @property
    def canonical_name(self) -> str:
        name = self.value.strip()
        if name.endswith(" Flaw"):
            name = name[: -len(" Flaw")]
        return name

    @property
    def canonical(self) -> bool:
        return self.canonical_name in CANONICAL_FLAWS


@dataclass(frozen=True)
class VerifierVerdict:
    verdict: Verdict
    confidence: float
    cwe_id: Optional[str]
    vulnerability_type: Optional[str]
    key_evidence: str
    reasoning_text: str = ""


@dataclass(frozen=True)
class AuditDecision:
    audit_verdict: AuditAction
    original_verdict: Verdict
    final_verdict: Verdict
    confidence: float
    audit_rationale: str
    reasoning_flaws_found: tuple[str, ...] = ()
    reasoning_text: str = ""

    def flaw_labels(self) -> list[FlawLabel]:
        return [FlawLabel(v) for v in self.reasoning_flaws_found]


@dataclass
class PerClueOutcome:
    clue: Clue
    verifier: Optional[VerifierVerdict] = None
    audit: Optional[AuditDecision] = None
    status: str = "ok"  # ok | inconclusive
    error: str = ""

    def final_verdict(self) -> Optional[Verdict]:
        if self.status != "ok":
            return None
        if self.audit is not None:
            return self.audit.final_verdict
        if self.verifier is not None:
            return self.verifier.verdict
        return None


@dataclass
class FinalVerdict:
    sample_id: str
    verdict: SampleVerdict
    per_clue: list[PerClueOutcome] = field(default_factory=list)


# ---- structured block parsing -------------------------------------------


def extract_structured_block(raw: str) -> str:
    """Last fenced block of a reply (agents sometimes echo examples first)."""
    matches = _FENCE_RE.findall(raw)
    if not matches:
        raise OutputSchemaViolation("no fenced structured block in reply")
    return matches[-1]


def _reject_non_ascii(block: str) -> None:
    try:
        block.encode("ascii")
    except UnicodeEncodeError as exc:
        raise OutputSchemaViolation(
            f"structured block contains illegal (non-ASCII) characters: {exc}")


def _load_json(block: str):
    try:
        return json.loads(block)
    except json.JSONDecodeError as exc:
        raise OutputSchemaViolation(f"structured block is not valid JSON: {exc}")


def parse_clues(raw: str) -> list[Clue]:
    block = extract_structured_block(raw)
    _reject_non_ascii(block)
    data = _load_json(block)
    if not isinstance(data, list):
        raise OutputSchemaViolation("clue block must be a JSON array")
    clues = []
    for obj in data:
        if not isinstance(obj, dict):
            raise OutputSchemaViolation("clue entries must be objects")
        for required in ("line_number", "code_line", "suspicion_reason",
                         "confidence_score"):
            if required not in obj:
                raise OutputSchemaViolation(f"clue missing field {required}")
        line = obj["line_number"]
        conf = obj["confidence_score"]
        if not isinstance(line, int) or line < 1:
            raise OutputSchemaViolation(f"bad line_number {line!r}")
        if not isinstance(conf, (int, float)) or not (0.1 <= conf <= 1.0):
            raise OutputSchemaViolation(f"confidence_score {conf!r} outside [0.1, 1.0]")
        if not str(obj["code_line"]).strip():
            raise OutputSchemaViolation("code_line must be non-empty")
        clues.append(Clue(line, str(obj["code_line"]),
                          str(obj["suspicion_reason"]), float(conf)))
    return clues


def _reasoning_between(raw: str, tag: str) -> str:
    match = re.search(rf"<{tag}>(.*?)</{tag}>", raw, re.DOTALL)
    return match.group(1).strip() if match else raw.strip()


def parse_verifier(raw: str) -> VerifierVerdict:
    block = extract_structured_block(raw)
    _reject_non_ascii(block)
    data = _load_json(block)
    if not isinstance(data, dict):
        raise OutputSchemaViolation("verdict block must be a JSON object")
    for required in ("verdict", "confidence", "key_evidence"):
        if required not in data:
            raise OutputSchemaViolation(f"verdict missing field {required}")
    try:
        verdict = Verdict(data["verdict"])
    except ValueError:
        raise OutputSchemaViolation(f"unknown verdict {data['verdict']!r}")
    conf = data["confidence"]
    if not isinstance(conf, (int, float)) or not (0.0 <= conf <= 1.0):
        raise OutputSchemaViolation(f"confidence {conf!r} outside [0, 1]")
    cwe = data.get("cwe_id")
    if cwe is not None and not _CWE_RE.match(str(cwe)):
        raise OutputSchemaViolation(f"cwe_id {cwe!r} does not match CWE-<digits>")
    if not str(data["key_evidence"]).strip():
        raise OutputSchemaViolation("key_evidence must be non-empty")
    return VerifierVerdict(
        verdict=verdict,
        confidence=float(conf),
        cwe_id=str(cwe) if cwe is not None else None,
        vulnerability_type=(str(data["vulnerability_type"])
                            if data.get("vulnerability_type") is not None else None),
        key_evidence=str(data["key_evidence"]),
        reasoning_text=_reasoning_between(raw, "thinking"),
    )


def parse_audit(raw: str, expected_original: Optional[Verdict] = None) -> AuditDecision:
    block = extract_structured_block(raw)
    _reject_non_ascii(block)
    data = _load_json(block)
    if not isinstance(data, dict):
        raise OutputSchemaViolation("audit block must be a JSON object")
    for required in ("audit_verdict", "original_verdict", "final_verdict",
                     "confidence", "audit_rationale", "reasoning_flaws_found"):
        if required not in data:
            raise OutputSchemaViolation(f"audit missing field {required}")
    try:
        action = AuditAction(data["audit_verdict"])
        original = Verdict(data["original_verdict"])
        final = Verdict(data["final_verdict"])
    except ValueError as exc:
        raise OutputSchemaViolation(f"bad enum value: {exc}")
    conf = data["confidence"]
    if not isinstance(conf, (int, float)) or not (0.0 <= conf <= 1.0):
        raise OutputSchemaViolation(f"confidence {conf!r} outside [0, 1]")
    flaws = data["reasoning_flaws_found"]
    if not isinstance(flaws, list) or not all(isinstance(f, str) for f in flaws):
        raise OutputSchemaViolation("reasoning_flaws_found must be a list of strings")
    decision = AuditDecision(
        audit_verdict=action,
        original_verdict=original,
        final_verdict=final,
        confidence=float(conf),
        audit_rationale=str(data["audit_rationale"]),
        reasoning_flaws_found=tuple(flaws),
        reasoning_text=_reasoning_between(raw, "audit_reasoning"),
    )
    validate_audit_consistency(decision, expected_original)
    return decision


def validate_audit_consistency(decision: AuditDecision,
                               expected_original: Optional[Verdict] = None) -> None:
    """Judgment rule: AGREE/DEFER preserve the verdict, DISAGREE flips it and
    must name at least one flaw."""
    if expected_original is not None and decision.original_verdict != expected_original:
        raise ConsistencyViolation(
            f"original_verdict {decision.original_verdict.value} does not match "
            f"the verifier's {expected_original.value}")
    if decision.audit_verdict in (AuditAction.AGREE, AuditAction.DEFER):
        if decision.final_verdict != decision.original_verdict:
            raise ConsistencyViolation(
                f"{decision.audit_verdict.value} must preserve the original verdict")
    else:
        if decision.final_verdict == decision.original_verdict:
            raise ConsistencyViolation("DISAGREE must flip the verdict")
        if not decision.reasoning_flaws_found:
            raise ConsistencyViolation("DISAGREE requires at least one reasoning flaw")


def validate_and_retry(query: Callable[[], str], parse: Callable[[str], object],
                       max_retries: int = DEFAULT_MAX_RETRIES):
    """Issue the query, parse+validate, and re-query the same prompt on
    failure.  Returns (value, attempts); raises Exhausted after
    max_retries + 1 failed attempts."""
    attempts: list[str] = []
    last_error = ""
    for _ in range(max_retries + 1):
        raw = query()
        attempts.append(raw)
        try:
            return parse(raw), attempts
        except OutputSchemaViolation as exc:
            last_error = str(exc)
    raise Exhausted(attempts, last_error)


# ---- agent operations -----------------------------------------------------


def discover_clues(function_text: str, client: ChatClient, *,
                   model: str, temperature: Optional[float] = None,
                   sample_id: str = "", max_retries: int = DEFAULT_MAX_RETRIES) -> list[Clue]:
    if not function_text.strip():
        raise ValueError("function_text must be non-empty")
    request = ChatRequest(system=CLUE_DISCOVERY_SYSTEM, user=function_text,
                          stage=Stage.DISCOVERY, model=model, temperature=temperature)
    value, _ = validate_and_retry(
        lambda: client.complete(request, sample_id).text, parse_clues, max_retries)
    return value


def select_top_k(clues: list[Clue], k: int) -> list[Clue]:
    """k highest-confidence clues; ties break toward the smaller line number."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sorted(clues, key=lambda c: (-c.confidence, c.line))[:k]


def _analysis_sections(clue: Clue, context_text: str, trace_text: str,
                       file_path: str) -> str:
    return (
        "[Suspicious Code Line]\n"
        f"File: {file_path}\n"
        f"Line: {clue.line}\n"
        f"Code: `{clue.code_line}`\n"
        "\n"
        "[Suspicion Reason]\n"
        f"{clue.suspicion_reason}\n"
        "\n"
        "[Project-level Code Context]\n"
        f"{context_text}\n"
        "\n"
        "[Data Flow Trace]\n"
        f"{trace_text}"
    )


def verify(clue: Clue, context_text: str, trace_text: str, client: ChatClient, *,
           model: str, temperature: Optional[float] = None, file_path: str = "",
           sample_id: str = "", max_retries: int = DEFAULT_MAX_RETRIES,
           dialectical: bool = True) -> VerifierVerdict:
    system = VERIFIER_SYSTEM if dialectical else SINGLE_PASS_SYSTEM
    user = _analysis_sections(clue, context_text, trace_text, file_path)
    request = ChatRequest(system=system, user=user, stage=Stage.VERIFICATION,
                          model=model, temperature=temperature)
    value, _ = validate_and_retry(
        lambda: client.complete(request, sample_id).text, parse_verifier, max_retries)
    return value


def audit(clue: Clue, context_text: str, trace_text: str,
          verifier_verdict: VerifierVerdict, client: ChatClient, *,
          model: str, temperature: float = 0.0, file_path: str = "",
          sample_id: str = "", max_retries: int = DEFAULT_MAX_RETRIES) -> AuditDecision:
    user = (
        "# Part 1: Original Analysis Input\n"
        + _analysis_sections(clue, context_text, trace_text, file_path)
        + "\n\n# Part 2: Verifier's Reasoning\n"
        + verifier_verdict.reasoning_text
        + "\n\n```json\n"
        + json.dumps(
            {
                "verdict": verifier_verdict.verdict.value,
                "confidence": verifier_verdict.confidence,
                "cwe_id": verifier_verdict.cwe_id,
                "vulnerability_type": verifier_verdict.vulnerability_type,
                "key_evidence": verifier_verdict.key_evidence,
            },
            indent=2,
        )
        + "\n```"
    )
    request = ChatRequest(system=AUDIT_SYSTEM, user=user, stage=Stage.AUDIT,
                          model=model, temperature=temperature)
    value, _ = validate_and_retry(
        lambda: client.complete(request, sample_id).text,
        lambda raw: parse_audit(raw, expected_original=verifier_verdict.verdict),
        max_retries)
    return value


def finalize_verdict(per_clue: list[PerClueOutcome], sample_id: str = "") -> FinalVerdict:
    """Vulnerable iff any clue's final verdict is VULNERABLE; Safe otherwise
    (including the zero-clue short-circuit).  Inconclusive clues are excluded
    from aggregation."""
    verdict = SampleVerdict.SAFE
    for outcome in per_clue:
        if outcome.final_verdict() is Verdict.VULNERABLE:
            verdict = SampleVerdict.VULNERABLE
            break
    return FinalVerdict(sample_id=sample_id, verdict=verdict, per_clue=list(per_clue))


def verdict_record(final: FinalVerdict) -> dict:
    """Machine form of one sample's verdict (transcripts excluded)."""
    return {
        "sample_id": final.sample_id,
        "verdict": final.verdict.value,
        "per_clue": [
            {
                "clue": {
                    "line_number": o.clue.line,
                    "code_line": o.clue.code_line,
                    "suspicion_reason": o.clue.suspicion_reason,
                    "confidence_score": o.clue.confidence,
                },
                "status": o.status,
                "verifier": None if o.verifier is None else {
                    "verdict": o.verifier.verdict.value,
                    "confidence": o.verifier.confidence,
                    "cwe_id": o.verifier.cwe_id,
                    "vulnerability_type": o.verifier.vulnerability_type,
                    "key_evidence": o.verifier.key_evidence,
                },
                "audit": None if o.audit is None else {
                    "audit_verdict": o.audit.audit_verdict.value,
                    "original_verdict": o.audit.original_verdict.value,
                    "final_verdict": o.audit.final_verdict.value,
                    "confidence": o.audit.confidence,
                    "audit_rationale": o.audit.audit_rationale,
                    "reasoning_flaws_found": list(o.audit.reasoning_flaws_found),
                },
            }
            for o in final.per_clue
        ],
    }
