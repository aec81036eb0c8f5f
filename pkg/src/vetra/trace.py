"""Evidence trace assembly and rendering.

A trace is organized per variable: each anchor variable gets a chain built by
re-traversing the stitched composite graph from the anchor on that variable
alone, and each expanded callee contributes a chain under its synthetic
return key (``callee()``).  Steps cite (file, line, verbatim code) and carry
one marker:

* TARGET - the clue statement
* SOURCE - terminal definitions (parameters, bare declarations, entry
  definitions of globals)
* COND   - control-structure guards
* RET    - return statements and callee entries reached through stitching
* CALL   - statements containing a call
* PROP   - every other dataflow step

Both renderers are pure; identical inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .cpg.model import Cpg, NodeKind, STATEMENT_KINDS
from .expansion import CompositeView, ExpansionResult, StitchedGraph
from .slicing import Clue, Direction, LocalSlice, SliceStep, bidirectional_reach

RENDER_LINE_LIMIT = 400


class Marker(str, Enum):
    SOURCE = "SOURCE"
    PROP = "PROP"
    COND = "COND"
    CALL = "CALL"
    RET = "RET"
    TARGET = "TARGET"
    SINK = "SINK"      # reserved: accepted in inputs, never emitted
    ALIAS = "ALIAS"    # reserved: accepted in inputs, never emitted

    def rendered(self) -> str:
        return f"[{self.value}]"


#: Dedup priority when several steps land on one (file, line).
_PRIORITY = {
    Marker.TARGET: 0,
    Marker.SOURCE: 1,
    Marker.RET: 2,
    Marker.COND: 3,
    Marker.CALL: 4,
    Marker.PROP: 5,
}


@dataclass(frozen=True)
class TraceStep:
    marker: Marker
    file: str
    line: int
    code: str


@dataclass
class VariableChain:
    variable: str
    steps: list[TraceStep] = field(default_factory=list)


@dataclass
class EvidenceTrace:
    clue: Clue
    chains: list[VariableChain] = field(default_factory=list)
    files_crossed: list[str] = field(default_factory=list)


def classify_marker(cpg: Cpg, node_id: int, *, is_target: bool = False,
                    variable: str = "", direction: Direction = Direction.FORWARD,
                    has_incoming: bool = True, via_stitch: bool = False) -> Marker:
    """Deterministic marker for one step.

    Rule order: clue statement, terminal definitions, guards, returns and
    stitched callee entries, call statements, then plain propagation.
    SINK and ALIAS are reserved and never returned.
    """
    node = cpg.node(node_id)
    if is_target:
        return Marker.TARGET
    if node.kind is NodeKind.PARAMETER:
        return Marker.SOURCE
    if node.kind is NodeKind.FUNCTION_DEF:
        return Marker.SOURCE if variable else Marker.RET
    if node.kind is NodeKind.STATEMENT and direction is Direction.BACKWARD \
            and not has_incoming:
        return Marker.SOURCE
    if node.kind is NodeKind.CONTROL_STRUCTURE:
        return Marker.COND
    if node.kind is NodeKind.RETURN:
        return Marker.RET
    if via_stitch:
        return Marker.RET
    if node.kind in STATEMENT_KINDS and cpg.calls_in(node_id):
        return Marker.CALL
    return Marker.PROP


def _expand_step(cpg: Cpg, step: SliceStep, marker: Marker) -> list[TraceStep]:
    """One slice step -> per-line trace steps."""
    node = cpg.node(step.node)
    out: list[TraceStep] = []
    if node.kind is NodeKind.PARAMETER:
        fn = cpg.enclosing_function(node.id)
        fn_node = cpg.node(fn) if fn is not None else node
        out.append(TraceStep(marker, cpg.file, fn_node.line,
                             (cpg.line_text(fn_node.line) or fn_node.code)))
        if node.line != fn_node.line:
            out.append(TraceStep(Marker.PROP, cpg.file, node.line,
                                 (cpg.line_text(node.line) or node.code)))
        return out
    if node.kind is NodeKind.FUNCTION_DEF:
        out.append(TraceStep(marker, cpg.file, node.line,
                             (cpg.line_text(node.line) or node.code.split("\n")[0])))
        return out
    for line in range(node.line, node.end_line + 1):
        text = cpg.line_text(line)
        if text is None:
            text = node.code.split("\n")[min(line - node.line, node.code.count("\n"))]
        out.append(TraceStep(marker, cpg.file, line, text.rstrip()))
    return out


def _dedup_and_order(steps: list[TraceStep]) -> list[TraceStep]:
    """Dedup per (file, line) keeping the highest-priority marker; group by
    file ordered by the group's minimum line, lines ascending within."""
    best: dict[tuple[str, int], TraceStep] = {}
    for s in steps:
        key = (s.file, s.line)
        if key not in best or _PRIORITY[s.marker] < _PRIORITY[best[key].marker]:
            best[key] = s
    group_min: dict[str, int] = {}
    for (f, line) in best:
        group_min[f] = min(group_min.get(f, line), line)
    return sorted(best.values(), key=lambda s: (group_min[s.file], s.file, s.line))


class _ChainBuilder:
    def __init__(self, result: ExpansionResult):
        self.result = result
        self.stitched: StitchedGraph = result.stitched
        self.view = CompositeView(self.stitched)
        base = self.stitched.member_cpgs[0]
        self.anchor_cid = self.stitched.to_composite(base.file, result.anchor)
        self.stitched_targets = {e.dst for e in self.stitched.virtual_edges}

    def chain_for_variable(self, variable: str) -> VariableChain:
        steps = bidirectional_reach(self.view, self.anchor_cid, [variable],
                                    self.result.depth_limit)
        return VariableChain(variable, self._finalize(steps))

    def chain_for_slice(self, name: str, file: str, local_slice: LocalSlice) -> VariableChain:
        offset = self.stitched.offset(file)
        composite_steps = [
            SliceStep(offset + s.node, s.variable, s.direction, s.hop)
            for s in local_slice.steps
        ]
        return VariableChain(name, self._finalize(composite_steps))

    def _finalize(self, steps: list[SliceStep]) -> list[TraceStep]:
        out: list[TraceStep] = []
        for step in steps:
            cpg, node = self.stitched.resolve(step.node)
            local = SliceStep(node.id, step.variable, step.direction, step.hop)
            marker = classify_marker(
                cpg, node.id,
                is_target=(step.node == self.anchor_cid),
                variable=step.variable,
                direction=step.direction,
                has_incoming=bool(self.view.dataflow_in(step.node)),
                via_stitch=(step.node in self.stitched_targets
                            and node.kind is NodeKind.FUNCTION_DEF),
            )
            out.extend(_expand_step(cpg, local, marker))
        return _dedup_and_order(out)


def build_evidence_trace(result: ExpansionResult, clue: Optional[Clue] = None) -> EvidenceTrace:
    """Assemble per-variable chains: anchor variables first, then one chain
    per expanded function keyed by its synthetic return key."""
    clue = clue or result.clue
    if clue is None:
        raise ValueError("expansion result carries no clue")
    builder = _ChainBuilder(result)
    chains = [builder.chain_for_variable(v) for v in result.anchor_variables]
    for (file, fn_name), local_slice in result.slices.items():
        if (file, fn_name) == result.target:
            continue
        chains.append(builder.chain_for_slice(f"{fn_name}()", file, local_slice))
    files: list[str] = []
    for chain in chains:
        for step in chain.steps:
            if step.file not in files:
                files.append(step.file)
    return EvidenceTrace(clue=clue, chains=chains, files_crossed=files)


def _render_code(code: str) -> str:
    text = code.strip()
    if len(text) > RENDER_LINE_LIMIT:
        text = text[:RENDER_LINE_LIMIT] + "…"
    return text


def render_trace(trace: EvidenceTrace) -> str:
    """By-variable text form: a `Variable:` header per chain, one
    ``[MARKER] file:line (`code`)`` line per step."""
    blocks = []
    for chain in trace.chains:
        lines = [f"Variable: {chain.variable}"]
        for step in chain.steps:
            lines.append(
                f"{step.marker.rendered()} {step.file}:{step.line} "
                f"(`{_render_code(step.code)}`)")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def trace_to_record(trace: EvidenceTrace) -> dict:
    return {
        "clue": {
            "line_number": trace.clue.line,
            "code_line": trace.clue.code_line,
            "suspicion_reason": trace.clue.suspicion_reason,
            "confidence_score": trace.clue.confidence,
        },
        "chains": [
            {
                "variable": chain.variable,
                "steps": [
                    {"marker": s.marker.value, "file": s.file,
                     "line": s.line, "code": s.code}
                    for s in chain.steps
                ],
            }
            for chain in trace.chains
        ],
        "files_crossed": list(trace.files_crossed),
    }


def render_context(result: ExpansionResult) -> str:
    """Annotated sliced source, one block per sliced function: the function
    entry line carries ``// [FUNCTION ENTRY]``, the clue line ``// [TARGET]``
    and approved cross-file call sites ``// [CROSS-FILE CALL]``."""
    approved_sites: set[tuple[str, int]] = set()
    for entry in result.expansion_log:
        if entry.decision == "YES" and entry.site_file:
            owner = result.stitched.member(entry.site_file)
            if owner is not None and entry.call_site in owner.nodes:
                approved_sites.add((entry.site_file, owner.node(entry.call_site).line))
    blocks = []
    anchor_line: Optional[int] = None
    base_file = result.target[0]
    base = result.stitched.member(base_file)
    if base is not None and result.anchor in base.nodes:
        anchor_line = base.node(result.anchor).line
    for (file, fn_name), local_slice in result.slices.items():
        cpg = result.stitched.member(file)
        if cpg is None:
            continue
        fn_id = cpg.functions.get(fn_name)
        lines: set[int] = set()
        if fn_id is not None:
            fn_node = cpg.node(fn_id)
            lines.update(range(fn_node.line, fn_node.end_line + 1))
        for step in local_slice.steps:
            node = cpg.nodes.get(step.node)
            if node is None or node.kind is NodeKind.TRANSLATION_UNIT:
                continue
            if node.kind is NodeKind.PARAMETER:
                lines.add(node.line)
                continue
            lines.update(range(node.line, node.end_line + 1))
        rendered = []
        fn_first = cpg.node(fn_id).line if fn_id is not None else None
        for line in sorted(lines):
            text = (cpg.line_text(line) or "").rstrip()
            suffix = ""
            if line == fn_first:
                suffix = "  // [FUNCTION ENTRY]"
            elif (file, fn_name) == result.target and anchor_line == line:
                suffix = "  // [TARGET]"
            elif (file, line) in approved_sites:
                suffix = "  // [CROSS-FILE CALL]"
            rendered.append(text + suffix)
        blocks.append("\n".join(rendered))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
