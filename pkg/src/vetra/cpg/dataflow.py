"""Statement-level CFG, reaching definitions, and control dependence.

Runs once per parsed function and appends Cfg/ReachingDef/ControlDep/CallTo
edges to the parser's edge list.  Definitions are tracked per variable key
(full member path); a strong definition kills the key and any extension of
it, weak definitions (address-of call arguments) only generate.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable

from .model import CpgEdge, EdgeKind, base_variable, key_prefixes

if TYPE_CHECKING:
    from .parser import Parser, Stmt

ENTRY = -1  # virtual predecessor carrying parameter/global definitions


def flatten(stmts: Iterable["Stmt"]) -> list["Stmt"]:
    out = []
    for s in stmts:
        out.append(s)
        out.extend(flatten(s.body))
        out.extend(flatten(s.else_body))
    return out


class _CfgBuilder:
    def __init__(self):
        self.succ: dict[int, list[int]] = {}
        self.break_stack: list[list[int]] = []
        self.continue_stack: list[int] = []
        self.gotos: list[tuple[int, str]] = []
        self.labels: dict[str, int] = {}

    def edge(self, src: int, dst: int):
        if dst not in self.succ.setdefault(src, []):
            self.succ[src].append(dst)

    def seq(self, stmts: list["Stmt"]) -> tuple[int | None, list[int]]:
        entry = None
        exits: list[int] = []
        for s in stmts:
            s_entry, s_exits = self.one(s)
            if s_entry is None:
                continue
            if entry is None:
                entry = s_entry
            for e in exits:
                self.edge(e, s_entry)
            exits = s_exits
        return entry, exits

    def one(self, s: "Stmt") -> tuple[int | None, list[int]]:
        if s.label:
            self.labels[s.label] = s.node_id
        nid = s.node_id
        if s.ctype == "if":
            then_entry, then_exits = self.seq(s.body)
            exits = list(then_exits)
            if then_entry is not None:
                self.edge(nid, then_entry)
            else:
                exits.append(nid)
            if s.else_body:
                else_entry, else_exits = self.seq(s.else_body)
                if else_entry is not None:
                    self.edge(nid, else_entry)
                    exits += else_exits
                else:
                    exits.append(nid)
            else:
                exits.append(nid)
            return nid, exits
        if s.ctype in ("while", "for"):
            self.break_stack.append([])
            self.continue_stack.append(nid)
            body_entry, body_exits = self.seq(s.body)
            if body_entry is not None:
                self.edge(nid, body_entry)
            for e in body_exits:
                self.edge(e, nid)
            breaks = self.break_stack.pop()
            self.continue_stack.pop()
            return nid, [nid] + breaks
        if s.ctype == "do":
            self.break_stack.append([])
            self.continue_stack.append(nid)
            body_entry, body_exits = self.seq(s.body)
            for e in body_exits:
                self.edge(e, nid)
            if body_entry is not None:
                self.edge(nid, body_entry)
            breaks = self.break_stack.pop()
            self.continue_stack.pop()
            return (body_entry or nid), [nid] + breaks
        if s.ctype == "switch":
            self.break_stack.append([])
            body_entry, body_exits = self.seq(s.body)
            has_default = False
            for child in s.body:
                if child.is_case_label:
                    self.edge(nid, child.node_id)
                    if self._case_code(child).startswith("default"):
                        has_default = True
            breaks = self.break_stack.pop()
            exits = breaks + body_exits
            if not has_default:
                exits.append(nid)
            return nid, exits
        if s.is_return:
            return nid, []
        if s.is_break:
            if self.break_stack:
                self.break_stack[-1].append(nid)
            return nid, []
        if s.is_continue:
            if self.continue_stack:
                self.edge(nid, self.continue_stack[-1])
            return nid, []
        if s.goto_target is not None:
            self.gotos.append((nid, s.goto_target))
            return nid, []
        return nid, [nid]

    def _case_code(self, stmt: "Stmt") -> str:
        return getattr(stmt, "_case_code", "") or ""


def build_cfg(parser: "Parser", body: list["Stmt"]) -> tuple[int | None, dict[int, list[int]]]:
    builder = _CfgBuilder()
    # Collect labels up front so forward gotos resolve.
    for s in flatten(body):
        if s.label:
            builder.labels[s.label] = s.node_id
    entry, _exits = builder.seq(body)
    for src, target in builder.gotos:
        if target in builder.labels:
            builder.edge(src, builder.labels[target])
    return entry, builder.succ


def emit_function_dataflow(parser: "Parser", fn_id: int,
                           params: list[tuple[str, int]], body: list["Stmt"]):
    stmts = flatten(body)

    # Patch the _case_code lookup used for default detection.
    for s in stmts:
        if s.is_case_label:
            s._case_code = parser.nodes[s.node_id].code

    entry, succ = build_cfg(parser, body)

    for src, dsts in succ.items():
        for dst in dsts:
            parser.edges.append(CpgEdge(src, dst, EdgeKind.CFG))

    # Control dependence: guard -> directly nested statements.
    def walk(container: list["Stmt"]):
        for s in container:
            if s.ctype is not None:
                for child in s.body + s.else_body:
                    parser.edges.append(
                        CpgEdge(s.node_id, child.node_id, EdgeKind.CONTROL_DEP))
                walk(s.body)
                walk(s.else_body)

    walk(body)

    # CallTo edges for same-file callees.
    fn_ids = {f_name: f_id for _body, f_id, f_name in parser._pending_bodies}
    for s in stmts:
        for call in s.calls:
            if call.name in fn_ids:
                parser.edges.append(
                    CpgEdge(call.node_id, fn_ids[call.name], EdgeKind.CALL_TO))

    # Entry definitions: parameters, then globals (any referenced base that is
    # neither declared locally nor a parameter).
    param_names = {name for name, _pid in params}
    local_names = set()
    referenced: list[str] = []
    for s in stmts:
        local_names.update(s.declares)
        for key in s.strong_defs + s.weak_defs + s.uses:
            referenced.append(base_variable(key))
    entry_defs: dict[str, frozenset[int]] = {}
    for name, pid in params:
        entry_defs[name] = frozenset({pid})
    seen = set()
    for base in referenced:
        if base in param_names or base in local_names or base in seen or not base:
            continue
        seen.add(base)
        entry_defs[base] = frozenset({fn_id})

    if entry is None:
        return

    # Reaching definitions fixpoint.
    by_id = {s.node_id: s for s in stmts}
    preds: dict[int, list[int]] = {s.node_id: [] for s in stmts}
    for src, dsts in succ.items():
        for dst in dsts:
            preds.setdefault(dst, []).append(src)
    preds.setdefault(entry, []).insert(0, ENTRY)

    def transfer(facts: dict[str, frozenset[int]], s: "Stmt") -> dict[str, frozenset[int]]:
        out = dict(facts)
        for key in s.strong_defs:
            for existing in list(out):
                if existing == key or _extends(existing, key):
                    del out[existing]
        for key in s.strong_defs + s.weak_defs:
            out[key] = out.get(key, frozenset()) | {s.node_id}
        return out

    ins: dict[int, dict[str, frozenset[int]]] = {s.node_id: {} for s in stmts}
    outs: dict[int, dict[str, frozenset[int]]] = {ENTRY: entry_defs}
    worklist = [s.node_id for s in stmts]
    iterations = 0
    limit = 10000 + 500 * len(stmts)
    while worklist:
        iterations += 1
        if iterations > limit:
            break  # safety valve; the lattice is finite so this never fires
        nid = worklist.pop(0)
        merged: dict[str, frozenset[int]] = {}
        for p in preds.get(nid, []):
            for key, defs in outs.get(p, {}).items():
                merged[key] = merged.get(key, frozenset()) | defs
        ins[nid] = merged
        new_out = transfer(merged, by_id[nid])
        if new_out != outs.get(nid):
            outs[nid] = new_out
            for succ_id in succ.get(nid, []):
                if succ_id not in worklist:
                    worklist.append(succ_id)

    # Def-use edges.
    emitted = set()
    for s in stmts:
        facts = ins.get(s.node_id, {})
        for use in s.uses:
            for prefix in key_prefixes(use):
                for def_node in sorted(facts.get(prefix, ())):
                    var = use if prefix == use else base_variable(use)
                    sig = (def_node, s.node_id, var)
                    if sig in emitted:
                        continue
                    emitted.add(sig)
                    parser.edges.append(
                        CpgEdge(def_node, s.node_id, EdgeKind.REACHING_DEF, var))


def _extends(key: str, prefix: str) -> bool:
    """True when key is a strict member/index extension of prefix."""
    stripped = key.lstrip("*&")
    return (stripped != prefix and stripped.startswith(prefix)
            and stripped[len(prefix):][:1] in ("-", ".", "["))
