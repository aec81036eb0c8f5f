"""Iterative, demand-driven cross-function expansion.

Starting from a clue's bidirectional slice, every call in the sliced region
becomes a candidate: same-file callees expand directly, cross-file callees go
through a YES/NO oracle decision, unresolvable names are logged and skipped.
Approved callees are parsed on demand, stitched to the call site with virtual
argument->parameter and return->call-site dataflow edges, and forward-sliced;
newly sliced calls are enqueued (FIFO) until the worklist drains or the
expansion budget is exhausted.

Stitched members share one composite id space (per-member offsets) so virtual
edges are ordinary integer edges and traversals can run across files.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .cpg.index import FunctionIndex
from .cpg.model import Cpg, CpgEdge, CpgError, EdgeKind, NodeKind, STATEMENT_KINDS
from .prompts import EXPANSION_DECISION_TEMPLATE
from .slicing import (
    DEFAULT_DEPTH_LIMIT,
    Clue,
    GraphView,
    LocalSlice,
    anchor_clue,
    slice_bidirectional,
    slice_forward,
)

log = logging.getLogger(__name__)

#: An expansion oracle maps a filled decision prompt to a raw reply.
ExpansionOracle = Callable[[str], str]


class OracleProtocolError(CpgError):
    """Oracle produced neither YES nor NO within the retry budget."""


@dataclass(frozen=True)
class Budgets:
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    expansion_cap: int = 50
    k: int = 2

    def __post_init__(self):
        for name in ("depth_limit", "expansion_cap", "k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


class CallKind(str, Enum):
    INTERNAL = "Internal"
    EXTERNAL = "External"


@dataclass(frozen=True)
class ExpansionCandidate:
    callee_name: str
    callee_file: str
    call_site: int  # Call node id, local to the file the call appears in
    kind: CallKind


@dataclass
class StitchedGraph:
    """Composite over member graphs; per-member offsets give every node a
    unique composite id (base member keeps its local ids)."""

    member_cpgs: list[Cpg] = field(default_factory=list)
    virtual_edges: list[CpgEdge] = field(default_factory=list)
    expansions_used: int = 0
    _offsets: dict[str, int] = field(default_factory=dict)

    def add_member(self, cpg: Cpg) -> int:
        if cpg.file in self._offsets:
            return self._offsets[cpg.file]
        offset = 0
        for member in self.member_cpgs:
            offset = max(offset, self._offsets[member.file] +
                         (max(member.nodes) + 1 if member.nodes else 0))
        self.member_cpgs.append(cpg)
        self._offsets[cpg.file] = offset
        return offset

    def member(self, file: str) -> Optional[Cpg]:
        for cpg in self.member_cpgs:
            if cpg.file == file:
                return cpg
        return None

    def offset(self, file: str) -> int:
        return self._offsets[file]

    def to_composite(self, file: str, local_id: int) -> int:
        return self._offsets[file] + local_id

    def resolve(self, composite_id: int):
        """composite id -> (cpg, local node)."""
        best = None
        for cpg in self.member_cpgs:
            off = self._offsets[cpg.file]
            if off <= composite_id and (best is None or off > self._offsets[best.file]):
                if composite_id - off in cpg.nodes:
                    best = cpg
        if best is None:
            raise KeyError(f"composite id {composite_id} resolves to no member")
        return best, best.nodes[composite_id - self._offsets[best.file]]

    def stitch(self, caller: Cpg, callee: Cpg, call_site: int, callee_def: int) -> list[CpgEdge]:
        """Create virtual edges for one call: one ArgParam edge per positionally
        matched (argument, parameter) pair and one ReturnSite edge per return
        statement in the callee.  Arity mismatches skip unmatched positions."""
        self.add_member(caller)
        self.add_member(callee)
        call_cid = self.to_composite(caller.file, call_site)
        created: list[CpgEdge] = []
        params = [callee.node(p) for p in callee.children_of(callee_def)
                  if callee.node(p).kind is NodeKind.PARAMETER]
        args = [caller.node(a) for a in caller.children_of(call_site)
                if caller.node(a).kind is NodeKind.EXPRESSION]
        matched = min(len(args), len(params))
        if len(args) != len(params):
            log.debug("arity mismatch stitching %s: %d args vs %d params",
                      callee.node(callee_def).name, len(args), len(params))
        for i in range(matched):
            created.append(CpgEdge(call_cid,
                                   self.to_composite(callee.file, params[i].id),
                                   EdgeKind.VIRTUAL_ARG_PARAM,
                                   params[i].name))
        callee_name = callee.node(callee_def).name or "callee"
        for nid in sorted(callee.descendants(callee_def)):
            node = callee.node(nid)
            if node.kind is NodeKind.RETURN:
                created.append(CpgEdge(self.to_composite(callee.file, nid),
                                       call_cid,
                                       EdgeKind.VIRTUAL_RETURN_SITE,
                                       f"{callee_name}()"))
        self.virtual_edges.extend(created)
        return created


def stitch(caller: Cpg, callee: Cpg, call_site: int, callee_def: int) -> list[CpgEdge]:
    """Standalone stitching over a fresh two-member composite."""
    graph = StitchedGraph()
    graph.add_member(caller)
    return graph.stitch(caller, callee, call_site, callee_def)


class CompositeView(GraphView):
    """GraphView over a stitched composite: local edges shifted into the
    composite id space plus virtual edges.  Virtual edges attach to Call
    nodes; statement-level traversal sees them through the statement's call
    children."""

    def __init__(self, stitched: StitchedGraph):
        self.stitched = stitched
        self._virt_out: dict[int, list[tuple[int, str]]] = {}
        self._virt_in: dict[int, list[tuple[int, str]]] = {}
        for e in stitched.virtual_edges:
            self._virt_out.setdefault(e.src, []).append((e.dst, e.variable or ""))
            self._virt_in.setdefault(e.dst, []).append((e.src, e.variable or ""))

    def _with_calls(self, composite_id: int) -> list[int]:
        cpg, node = self.stitched.resolve(composite_id)
        ids = [composite_id]
        if node.kind in STATEMENT_KINDS:
            off = self.stitched.offset(cpg.file)
            ids.extend(off + c.id for c in cpg.calls_in(node.id))
        return ids

    def dataflow_in(self, node: int) -> list[tuple[int, str]]:
        cpg, local = self.stitched.resolve(node)
        off = self.stitched.offset(cpg.file)
        out = [(off + e.src, e.variable or "") for e in cpg.in_edges(local.id)
               if e.kind is EdgeKind.REACHING_DEF]
        for cid in self._with_calls(node):
            out.extend(self._virt_in.get(cid, []))
        return out

    def dataflow_out(self, node: int) -> list[tuple[int, str]]:
        cpg, local = self.stitched.resolve(node)
        off = self.stitched.offset(cpg.file)
        out = [(off + e.dst, e.variable or "") for e in cpg.out_edges(local.id)
               if e.kind is EdgeKind.REACHING_DEF]
        for cid in self._with_calls(node):
            out.extend(self._virt_out.get(cid, []))
        return out

    def control_in(self, node: int) -> list[int]:
        cpg, local = self.stitched.resolve(node)
        off = self.stitched.offset(cpg.file)
        return [off + e.src for e in cpg.in_edges(local.id)
                if e.kind is EdgeKind.CONTROL_DEP]


@dataclass
class ExpansionLogEntry:
    callee_name: str
    callee_file: str
    call_site: int
    decision: str  # YES | NO | INTERNAL | BUDGET | NOTFOUND | SKIP
    reason: str = ""
    site_file: str = ""

    def render(self) -> str:
        where = self.callee_file or "?"
        return f"EXPAND {where}:{self.callee_name} decision={self.decision}"


@dataclass
class ExpansionResult:
    stitched: StitchedGraph
    slices: dict[tuple[str, str], LocalSlice] = field(default_factory=dict)
    expansion_log: list[ExpansionLogEntry] = field(default_factory=list)
    anchor: int = -1
    anchor_variables: list[str] = field(default_factory=list)
    target: tuple[str, str] = ("", "")
    clue: Optional[Clue] = None
    depth_limit: int = DEFAULT_DEPTH_LIMIT

    def log_lines(self) -> str:
        return "\n".join(entry.render() for entry in self.expansion_log)


def classify_call(call_site: int, index: FunctionIndex, current_file: str,
                  cpg: Optional[Cpg] = None) -> Optional[ExpansionCandidate]:
    """Internal when the callee is defined in the current file, External when
    the index locates it elsewhere, None (NotFound) for library calls."""
    if cpg is None:
        cpg = index.load_cpg(current_file)
    node = cpg.node(call_site)
    name = node.name or ""
    if name in cpg.functions:
        return ExpansionCandidate(name, current_file, call_site, CallKind.INTERNAL)
    hits = index.lookup(name)
    hits = [h for h in hits if h[0] != current_file]
    if hits:
        callee_file = sorted(hits)[0][0]
        return ExpansionCandidate(name, callee_file, call_site, CallKind.EXTERNAL)
    return None


def decide_expansion(clue: Clue, trace_so_far: str, candidate: ExpansionCandidate,
                     oracle: ExpansionOracle, *, file_path: str = "",
                     max_retries: int = 3) -> bool:
    """Fill the decision prompt and interpret the oracle's YES/NO reply.

    The first non-whitespace token of the reply decides; anything else is
    retried with the same prompt up to max_retries times."""
    prompt = EXPANSION_DECISION_TEMPLATE.format(
        file_path=file_path,
        line_number=clue.line,
        code_line=clue.code_line,
        suspicion_reason=clue.suspicion_reason,
        current_context=trace_so_far,
        target_func_name=candidate.callee_name,
        target_file_path=candidate.callee_file,
    )
    attempts = 0
    while attempts <= max_retries:
        attempts += 1
        reply = oracle(prompt)
        token = reply.strip().split()[0].upper().strip('"\'.,!:;') if reply.strip() else ""
        if token == "YES":
            return True
        if token == "NO":
            return False
    raise OracleProtocolError(
        f"no YES/NO for {candidate.callee_name} after {attempts} attempts")


def _call_argument_bases(cpg: Cpg, call_id: int) -> list[list[str]]:
    """Per-argument base identifier lists, positional."""
    out = []
    for cid in cpg.children_of(call_id):
        child = cpg.node(cid)
        if child.kind is not NodeKind.EXPRESSION:
            continue
        idents = []
        for d in sorted(cpg.descendants(cid)):
            n = cpg.node(d)
            if n.kind is NodeKind.IDENTIFIER and n.name and n.name not in idents:
                idents.append(n.name)
        out.append(idents)
    return out


def _matched_entry_vars(caller: Cpg, call_site: int, callee: Cpg, callee_def: int) -> list[str]:
    """Callee parameter names positionally matched to call arguments."""
    params = [callee.node(p) for p in callee.children_of(callee_def)
              if callee.node(p).kind is NodeKind.PARAMETER]
    n_args = len(_call_argument_bases(caller, call_site))
    return [p.name for p in params[:min(n_args, len(params))] if p.name]


def expand_iteratively(cpg: Cpg, function: int, clue: Clue, index: FunctionIndex,
                       budgets: Budgets, oracle: ExpansionOracle) -> ExpansionResult:
    """Run the full demand-driven expansion for one clue."""
    anchor, variables = anchor_clue(cpg, function, clue)
    stitched = StitchedGraph()
    stitched.add_member(cpg)
    fn_name = cpg.node(function).name or "<anonymous>"
    base_slice = slice_bidirectional(cpg, anchor, variables, budgets.depth_limit)
    result = ExpansionResult(stitched=stitched, anchor=anchor,
                             anchor_variables=variables,
                             target=(cpg.file, fn_name), clue=clue,
                             depth_limit=budgets.depth_limit)
    result.slices[(cpg.file, fn_name)] = base_slice

    seen: set[tuple[str, str, int]] = set()
    worklist: list[tuple[Cpg, ExpansionCandidate]] = []

    def enqueue_from(owner: Cpg, local_slice: LocalSlice):
        for step in local_slice.steps:
            node = owner.nodes.get(step.node)
            if node is None:
                continue
            for call in owner.calls_in(node.id):
                candidate = classify_call(call.id, index, owner.file, cpg=owner)
                site_key = (owner.file, call.name or "", call.id)
                if site_key in seen:
                    continue
                seen.add(site_key)
                if candidate is None:
                    result.expansion_log.append(ExpansionLogEntry(
                        call.name or "?", "", call.id, "NOTFOUND",
                        "no definition in repository", site_file=owner.file))
                    continue
                worklist.append((owner, candidate))

    def perform(owner: Cpg, candidate: ExpansionCandidate) -> None:
        callee_cpg = owner if candidate.kind is CallKind.INTERNAL else \
            index.load_cpg(candidate.callee_file)
        callee_def = callee_cpg.functions[candidate.callee_name]
        stitched.add_member(callee_cpg)
        stitched.stitch(owner, callee_cpg, candidate.call_site, callee_def)
        stitched.expansions_used += 1
        key = (candidate.callee_file, candidate.callee_name)
        if key not in result.slices:
            entry_vars = _matched_entry_vars(owner, candidate.call_site,
                                             callee_cpg, callee_def)
            callee_slice = slice_forward(callee_cpg, entry_vars,
                                         budgets.depth_limit, function=callee_def)
            result.slices[key] = callee_slice
            enqueue_from(callee_cpg, callee_slice)

    enqueue_from(cpg, base_slice)
    while worklist:
        owner, candidate = worklist.pop(0)
        if stitched.expansions_used >= budgets.expansion_cap:
            result.expansion_log.append(ExpansionLogEntry(
                candidate.callee_name, candidate.callee_file,
                candidate.call_site, "BUDGET", "expansion cap reached",
                site_file=owner.file))
            continue
        if candidate.kind is CallKind.INTERNAL:
            perform(owner, candidate)
            result.expansion_log.append(ExpansionLogEntry(
                candidate.callee_name, candidate.callee_file,
                candidate.call_site, "INTERNAL", "same-file callee",
                site_file=owner.file))
            continue
        from .trace import render_context  # deferred: trace renders over expansion types

        context = render_context(result)
        approved = decide_expansion(clue, context, candidate, oracle,
                                    file_path=cpg.file)
        if not approved:
            result.expansion_log.append(ExpansionLogEntry(
                candidate.callee_name, candidate.callee_file,
                candidate.call_site, "NO", "oracle declined",
                site_file=owner.file))
            continue
        try:
            perform(owner, candidate)
        except CpgError as exc:
            result.expansion_log.append(ExpansionLogEntry(
                candidate.callee_name, candidate.callee_file,
                candidate.call_site, "SKIP", f"parse failure: {exc}",
                site_file=owner.file))
            continue
        result.expansion_log.append(ExpansionLogEntry(
            candidate.callee_name, candidate.callee_file,
            candidate.call_site, "YES", "oracle approved",
            site_file=owner.file))
    return result
