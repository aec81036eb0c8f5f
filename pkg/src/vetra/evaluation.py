"""Pair-wise and standard metrics, localization recall, cost reports.

Pair-wise counters operate on vulnerable/patched pairs: P-C counts pairs
with both sides right, P-R counts reversed pairs (patch flagged, flaw
missed), and their difference is the prediction score.  FPR is computed
over patched (benign) functions only.  Ground-truth locations for
localization recall come from the fixing commit's unified diff in
pre-image (vulnerable-side) coordinates.
"""

from __future__ import annotations

import json
import re
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

from .config import MODES, PipelineConfig, PricingConfig
from .llm import ChatClient, Stage, UsageLedger


class EvalError(Exception):
    pass


class DatasetSchemaViolation(EvalError):
    pass


class DuplicateId(EvalError):
    pass


class MissingPrediction(EvalError):
    pass


class MalformedDiff(EvalError):
    pass


class Side(str, Enum):
    VULN = "VulnSide"
    PATCH = "PatchSide"


class Label(str, Enum):
    SAFE = "Safe"
    VULNERABLE = "Vulnerable"


@dataclass(frozen=True)
class FunctionUnderTest:
    file: str
    function: str
    source: str


@dataclass(frozen=True)
class PairSample:
    pair_id: str
    vulnerable_fn: FunctionUnderTest
    patched_fn: FunctionUnderTest
    repo_ref: Optional[str] = None
    diff_text: Optional[str] = None
    cwe: Optional[str] = None


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    target: Side
    verdict: Label


@dataclass
class PairwiseCounts:
    n_pairs: int
    pc_count: int
    pr_count: int
    vps_count: int
    pc_rate: float


@dataclass
class StandardMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    fpr: float
    degenerate_precision: bool = False  # no positive predictions at all


@dataclass
class CostReport:
    per_stage_cost: dict[str, float]
    total_cost: float
    avg_cost_per_sample: float


@dataclass
class MetricsReport:
    mode: str
    n_pairs: int
    pc_count: int
    pr_count: int
    vps_count: int
    pc_rate: float
    accuracy: float
    precision: float
    recall: float
    f1: float
    fpr: float
    per_stage_cost: dict[str, float] = field(default_factory=dict)
    total_cost: float = 0.0
    avg_cost_per_sample: float = 0.0
    degenerate_precision: bool = False

    def to_record(self) -> dict:
        return {
            "mode": self.mode,
            "n_pairs": self.n_pairs,
            "pc_count": self.pc_count,
            "pr_count": self.pr_count,
            "vps_count": self.vps_count,
            "pc_rate": round(self.pc_rate, 4),
            "accuracy": round(self.accuracy, 4),
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f1": round(self.f1, 4),
            "fpr": round(self.fpr, 4),
            "per_stage_cost": {k: round(v, 6) for k, v in self.per_stage_cost.items()},
            "total_cost": round(self.total_cost, 6),
            "avg_cost_per_sample": round(self.avg_cost_per_sample, 6),
            "degenerate_precision": self.degenerate_precision,
        }

    def render(self) -> str:
        rows = [
            ("pairs", str(self.n_pairs)),
            ("P-C", str(self.pc_count)),
            ("P-R", str(self.pr_count)),
            ("VP-S", str(self.vps_count)),
            ("P-C rate", f"{self.pc_rate:.4f}"),
            ("accuracy", f"{self.accuracy:.4f}"),
            ("precision", f"{self.precision:.4f}" +
             (" (degenerate)" if self.degenerate_precision else "")),
            ("recall", f"{self.recall:.4f}"),
            ("f1", f"{self.f1:.4f}"),
            ("fpr", f"{self.fpr:.4f}"),
            ("total cost", f"${self.total_cost:.4f}"),
            ("avg cost/sample", f"${self.avg_cost_per_sample:.4f}"),
        ]
        width = max(len(name) for name, _ in rows)
        lines = [f"mode: {self.mode}"]
        lines += [f"{name.ljust(width)}  {value}" for name, value in rows]
        return "\n".join(lines)


# ---- dataset / predictions io ---------------------------------------------


def load_pair_dataset(path: str | Path) -> list[PairSample]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetSchemaViolation(f"cannot load dataset {path}: {exc}")
    if not isinstance(data, list):
        raise DatasetSchemaViolation("dataset must be a JSON array")
    samples = []
    seen: set[str] = set()
    for obj in data:
        if not isinstance(obj, dict) or "pair_id" not in obj:
            raise DatasetSchemaViolation("pair entries must be objects with pair_id")
        pair_id = str(obj["pair_id"])
        if pair_id in seen:
            raise DuplicateId(f"duplicate pair_id {pair_id}")
        seen.add(pair_id)
        sides = {}
        for key in ("vulnerable", "patched"):
            side = obj.get(key)
            if not isinstance(side, dict):
                raise DatasetSchemaViolation(f"pair {pair_id} missing {key}")
            for required in ("file", "function", "source"):
                if required not in side:
                    raise DatasetSchemaViolation(
                        f"pair {pair_id} {key} missing {required}")
            if not str(side["source"]).strip():
                raise DatasetSchemaViolation(f"pair {pair_id} {key} source empty")
            sides[key] = FunctionUnderTest(side["file"], side["function"],
                                           side["source"])
        samples.append(PairSample(
            pair_id=pair_id,
            vulnerable_fn=sides["vulnerable"],
            patched_fn=sides["patched"],
            repo_ref=obj.get("repo_ref"),
            diff_text=obj.get("diff_text"),
            cwe=obj.get("cwe"),
        ))
    return samples


def load_predictions(path: str | Path) -> list[Prediction]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetSchemaViolation(f"cannot load predictions {path}: {exc}")
    if not isinstance(data, list):
        raise DatasetSchemaViolation("predictions must be a JSON array")
    out = []
    for obj in data:
        try:
            out.append(Prediction(str(obj["sample_id"]), Side(obj["target"]),
                                  Label(obj["verdict"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetSchemaViolation(f"bad prediction entry {obj!r}: {exc}")
    return out


def save_predictions(predictions: Iterable[Prediction], path: str | Path) -> None:
    Path(path).write_text(json.dumps(
        [{"sample_id": p.sample_id, "target": p.target.value,
          "verdict": p.verdict.value} for p in predictions],
        indent=2) + "\n")


# ---- metrics ---------------------------------------------------------------


def _prediction_map(predictions: Iterable[Prediction]) -> dict[tuple[str, Side], Label]:
    return {(p.sample_id, p.target): p.verdict for p in predictions}


def pairwise_metrics(predictions: Iterable[Prediction],
                     pairs: Iterable[PairSample]) -> PairwiseCounts:
    by_key = _prediction_map(predictions)
    pairs = list(pairs)
    pc = pr = 0
    for pair in pairs:
        try:
            vuln = by_key[(pair.pair_id, Side.VULN)]
            patch = by_key[(pair.pair_id, Side.PATCH)]
        except KeyError as exc:
            raise MissingPrediction(f"pair {pair.pair_id} missing side: {exc}")
        if vuln is Label.VULNERABLE and patch is Label.SAFE:
            pc += 1
        elif vuln is Label.SAFE and patch is Label.VULNERABLE:
            pr += 1
    n = len(pairs)
    return PairwiseCounts(n_pairs=n, pc_count=pc, pr_count=pr,
                          vps_count=pc - pr, pc_rate=(pc / n if n else 0.0))


def labels_from_pairs(pairs: Iterable[PairSample]) -> dict[tuple[str, Side], Label]:
    labels = {}
    for pair in pairs:
        labels[(pair.pair_id, Side.VULN)] = Label.VULNERABLE
        labels[(pair.pair_id, Side.PATCH)] = Label.SAFE
    return labels


def standard_metrics(predictions: Iterable[Prediction],
                     labels: dict[tuple[str, Side], Label]) -> StandardMetrics:
    by_key = _prediction_map(predictions)
    tp = fp = fn = tn = 0
    for key, truth in labels.items():
        if key not in by_key:
            raise MissingPrediction(f"no prediction for {key}")
        predicted = by_key[key]
        if truth is Label.VULNERABLE:
            if predicted is Label.VULNERABLE:
                tp += 1
            else:
                fn += 1
        else:
            if predicted is Label.VULNERABLE:
                fp += 1
            else:
                tn += 1
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    degenerate = (tp + fp) == 0
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if (precision + recall) else 0.0)
    fpr = fp / (fp + tn) if (fp + tn) else 0.0
    return StandardMetrics(accuracy, precision, recall, f1, fpr, degenerate)


def confusion_metrics(tp: int, fp: int, fn: int, tn: int) -> StandardMetrics:
    """Same formulas straight from a confusion matrix."""
    labels = {}
    preds = []
    i = 0
    for count, truth, predicted in ((tp, Label.VULNERABLE, Label.VULNERABLE),
                                    (fp, Label.SAFE, Label.VULNERABLE),
                                    (fn, Label.VULNERABLE, Label.SAFE),
                                    (tn, Label.SAFE, Label.SAFE)):
        for _ in range(count):
            side = Side.VULN if truth is Label.VULNERABLE else Side.PATCH
            key = (f"s{i}", side)
            labels[key] = truth
            preds.append(Prediction(f"s{i}", side, predicted))
            i += 1
    return standard_metrics(preds, labels)


# ---- localization ----------------------------------------------------------

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


def ground_truth_lines(diff_text: str) -> set[tuple[str, int]]:
    """Pre-image coordinates of removed/modified lines per hunk arithmetic.

    Added-only hunks contribute the old-side line immediately preceding the
    insertion point (the hunk's old start when the insertion leads it)."""
    out: set[tuple[str, int]] = set()
    current_file: Optional[str] = None
    old_line = 0
    in_hunk = False
    hunk_had_minus = False
    hunk_had_plus = False
    hunk_anchor: Optional[int] = None
    hunk_start = 0

    def close_hunk():
        nonlocal in_hunk
        if in_hunk and hunk_had_plus and not hunk_had_minus and current_file:
            anchor = hunk_anchor if hunk_anchor is not None else max(hunk_start, 1)
            out.add((current_file, max(anchor, 1)))
        in_hunk = False

    for raw in diff_text.splitlines():
        if raw.startswith("--- "):
            close_hunk()
            name = raw[4:].strip()
            if name.startswith("a/"):
                name = name[2:]
            current_file = None if name == "/dev/null" else name
            continue
        if raw.startswith("+++ "):
            continue
        match = _HUNK_RE.match(raw)
        if match:
            close_hunk()
            if current_file is None and not raw.startswith("@@ -0"):
                raise MalformedDiff("hunk header before any file header")
            old_line = int(match.group(1))
            hunk_start = old_line
            in_hunk = True
            hunk_had_minus = hunk_had_plus = False
            hunk_anchor = None
            continue
        if not in_hunk:
            continue
        if raw.startswith("-"):
            hunk_had_minus = True
            if current_file:
                out.add((current_file, old_line))
            old_line += 1
        elif raw.startswith("+"):
            if not hunk_had_plus and hunk_anchor is None:
                hunk_anchor = max(old_line - 1, hunk_start)
            hunk_had_plus = True
        elif raw.startswith(" ") or raw == "":
            old_line += 1
        elif raw.startswith("\\"):
            continue  # "\ No newline at end of file"
        else:
            raise MalformedDiff(f"unexpected diff line: {raw[:40]!r}")
    close_hunk()
    return out


def localization_recall(covered_lines: set[tuple[str, int]],
                        gt_lines: set[tuple[str, int]]) -> Optional[float]:
    """|covered ∩ gt| / |gt|; None (undefined) when there is no ground truth."""
    if not gt_lines:
        return None
    return len(covered_lines & gt_lines) / len(gt_lines)


# ---- cost ------------------------------------------------------------------


def cost_report(ledger: UsageLedger, pricing: PricingConfig) -> CostReport:
    per_stage: dict[str, float] = {}
    for stage, (in_tokens, out_tokens) in ledger.per_stage().items():
        per_stage[stage.value] = (
            in_tokens * pricing.input_price_per_million / 1_000_000
            + out_tokens * pricing.output_price_per_million / 1_000_000)
    total = sum(per_stage.values())
    n_samples = len(ledger.sample_ids())
    return CostReport(per_stage_cost=per_stage, total_cost=total,
                      avg_cost_per_sample=(total / n_samples if n_samples else 0.0))


# ---- dataset runs ----------------------------------------------------------


def build_report(predictions: list[Prediction], pairs: list[PairSample],
                 ledger: Optional[UsageLedger] = None,
                 pricing: Optional[PricingConfig] = None,
                 mode: str = "Full") -> MetricsReport:
    counts = pairwise_metrics(predictions, pairs)
    std = standard_metrics(predictions, labels_from_pairs(pairs))
    costs = (cost_report(ledger, pricing or PricingConfig())
             if ledger is not None else CostReport({}, 0.0, 0.0))
    return MetricsReport(
        mode=mode, n_pairs=counts.n_pairs, pc_count=counts.pc_count,
        pr_count=counts.pr_count, vps_count=counts.vps_count,
        pc_rate=counts.pc_rate, accuracy=std.accuracy, precision=std.precision,
        recall=std.recall, f1=std.f1, fpr=std.fpr,
        per_stage_cost=costs.per_stage_cost, total_cost=costs.total_cost,
        avg_cost_per_sample=costs.avg_cost_per_sample,
        degenerate_precision=std.degenerate_precision)


def run_dataset(pairs: list[PairSample], config: PipelineConfig,
                client: ChatClient,
                runner: Optional[Callable[..., Label]] = None,
                workdir: Optional[str | Path] = None) -> tuple[list[Prediction], MetricsReport]:
    """Run the pipeline over every function of every pair.

    Each side is materialized as a one-file repository under ``workdir`` so
    the frontend and prompts see stable relative paths.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .pipeline import run_repository_sample

    base = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="vetra-eval-"))
    base.mkdir(parents=True, exist_ok=True)

    jobs = []
    for pair in pairs:
        for side, fut in ((Side.VULN, pair.vulnerable_fn),
                          (Side.PATCH, pair.patched_fn)):
            jobs.append((pair, side, fut))

    def default_runner(pair: PairSample, side: Side, fut: FunctionUnderTest) -> Label:
        repo = base / f"{pair.pair_id}-{side.value}"
        target = repo / fut.file
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(fut.source)
        run = run_repository_sample(repo, fut.file, fut.function, config, client,
                                    sample_id=f"{pair.pair_id}:{side.value}")
        return Label(run.final.verdict.value)

    call = runner or default_runner
    predictions: list[Prediction] = []
    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            verdicts = list(pool.map(lambda j: call(*j), jobs))
    else:
        verdicts = [call(*j) for j in jobs]
    for (pair, side, _), verdict in zip(jobs, verdicts):
        predictions.append(Prediction(pair.pair_id, side, verdict))
    report = build_report(predictions, pairs, client.ledger, config.pricing,
                          mode=config.mode)
    return predictions, report


def run_ablation(mode: str, pairs: list[PairSample], config: PipelineConfig,
                 client: ChatClient,
                 workdir: Optional[str | Path] = None) -> MetricsReport:
    """Re-run the dataset under an ablated reasoning configuration."""
    if mode not in MODES:
        raise EvalError(f"unknown ablation mode {mode!r}")
    from dataclasses import replace

    ablated = replace(config, mode=mode)
    _, report = run_dataset(pairs, ablated, client, workdir=workdir)
    return report
