"""Clue-anchored intra-procedural slicing.

A slice is a bidirectional reach set over dataflow edges:

* the anchor statement is hop 0;
* backward: def-use edges are followed use->def transitively, the first hop
  restricted to the anchor's variable set;
* forward: def-use edges are followed def->use; seeds are the anchor's own
  definitions (variable-matched) and the hop-1 reaching definitions of anchor
  variables (continuing on the same variable); any node reached forward
  continues forward on all of its outgoing dataflow edges;
* every reached statement pulls in its transitive control-dependence guards
  (guards do not consume depth) and each guard contributes exactly one
  backward data hop which is not traversed further.

Hops count dataflow edges and never exceed depth_limit.  Nodes keep the
minimum hop at which any traversal reached them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .cpg.model import (
    Cpg,
    CpgError,
    EdgeKind,
    NodeKind,
    STATEMENT_KINDS,
    base_variable,
)

DEFAULT_DEPTH_LIMIT = 10


class NoStatementAtLine(CpgError):
    """The clue line maps to no statement (blank line, brace, comment)."""


@dataclass(frozen=True)
class Clue:
    """A suspicious location: line, verbatim statement, rationale, confidence."""

    line: int
    code_line: str
    suspicion_reason: str
    confidence: float

    def __post_init__(self):
        if not (0.1 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0.1, 1.0]")
        if not self.code_line.strip():
            raise ValueError("code_line must be non-empty")


class Direction(str, Enum):
    BACKWARD = "Backward"
    FORWARD = "Forward"
    CONTROL = "Control"


@dataclass(frozen=True)
class SliceStep:
    node: int
    variable: str
    direction: Direction
    hop: int


class BoundaryReason(str, Enum):
    PARAMETER = "Parameter"
    GLOBAL = "Global"
    EXTERNAL_CALL_RETURN = "ExternalCallReturn"
    EXTERNAL_CALL_ARGUMENT = "ExternalCallArgument"


@dataclass(frozen=True)
class BoundaryVariable:
    variable: str
    reason: BoundaryReason
    site: int


@dataclass
class LocalSlice:
    anchor: int
    steps: list[SliceStep] = field(default_factory=list)
    boundary: list[BoundaryVariable] = field(default_factory=list)

    def node_ids(self) -> set[int]:
        return {s.node for s in self.steps}

    def step_for(self, node: int) -> Optional[SliceStep]:
        for s in self.steps:
            if s.node == node:
                return s
        return None


class GraphView:
    """Dataflow adjacency over one Cpg; the composite view in the expansion
    module implements the same protocol across stitched graphs."""

    def __init__(self, cpg: Cpg):
        self.cpg = cpg

    def dataflow_in(self, node: int) -> list[tuple[int, str]]:
        return [(e.src, e.variable or "") for e in self.cpg.in_edges(node)
                if e.kind is EdgeKind.REACHING_DEF]

    def dataflow_out(self, node: int) -> list[tuple[int, str]]:
        return [(e.dst, e.variable or "") for e in self.cpg.out_edges(node)
                if e.kind is EdgeKind.REACHING_DEF]

    def control_in(self, node: int) -> list[int]:
        return [e.src for e in self.cpg.in_edges(node)
                if e.kind is EdgeKind.CONTROL_DEP]


class _Reach:
    """Rule saturation for the traversals.

    Four monotone rules run to a joint fixpoint, so the reach set and hops
    are order-independent minimal values:

    * backward members expand over incoming dataflow edges while their hop
      is below the depth limit;
    * forward members expand over outgoing dataflow edges likewise;
    * every member pulls in its control-dependence guards, a guard's hop
      being the minimum hop over what it guards (control consumes no depth);
    * every guard contributes one backward data hop (its own reaching
      definitions) whose results are plain members with no expansion rights.
    """

    def __init__(self, view: GraphView, depth_limit: int):
        self.view = view
        self.depth = depth_limit
        self.steps: dict[int, SliceStep] = {}
        self.hops: dict[int, int] = {}
        self.in_b: set[int] = set()
        self.in_f: set[int] = set()
        self.guards: set[int] = set()

    def record(self, node: int, var: str, direction: Direction, hop: int) -> bool:
        """Record a visit; True when the node is new or its hop improved."""
        if node in self.hops:
            if hop < self.hops[node]:
                self.hops[node] = hop
                prior = self.steps[node]
                self.steps[node] = SliceStep(node, prior.variable, prior.direction, hop)
                return True
            return False
        self.hops[node] = hop
        self.steps[node] = SliceStep(node, var, direction, hop)
        return True

    def saturate(self):
        changed = True
        while changed:
            changed = False
            for node in sorted(self.in_b):
                hop = self.hops[node]
                if hop >= self.depth:
                    continue
                for src, var in sorted(self.view.dataflow_in(node)):
                    if self.record(src, var, Direction.BACKWARD, hop + 1):
                        changed = True
                    if src not in self.in_b:
                        self.in_b.add(src)
                        changed = True
            for node in sorted(self.in_f):
                hop = self.hops[node]
                if hop >= self.depth:
                    continue
                for dst, var in sorted(self.view.dataflow_out(node)):
                    if self.record(dst, var, Direction.FORWARD, hop + 1):
                        changed = True
                    if dst not in self.in_f:
                        self.in_f.add(dst)
                        changed = True
            for node in sorted(self.hops):
                node_hop = self.hops[node]
                for guard in sorted(self.view.control_in(node)):
                    if self.record(guard, "", Direction.CONTROL, node_hop):
                        changed = True
                    if guard not in self.guards:
                        self.guards.add(guard)
                        changed = True
            for guard in sorted(self.guards):
                g_hop = self.hops[guard]
                if g_hop + 1 > self.depth:
                    continue
                for src, var in sorted(self.view.dataflow_in(guard)):
                    if self.record(src, var, Direction.BACKWARD, g_hop + 1):
                        changed = True

    def ordered_steps(self) -> list[SliceStep]:
        return sorted(self.steps.values(), key=lambda s: (s.hop, s.node))


def bidirectional_reach(view: GraphView, anchor: int, variables: Iterable[str],
                        depth_limit: int) -> list[SliceStep]:
    """The raw traversal; also used over stitched composites for traces."""
    vars_set = set(variables)

    def matches(var: str) -> bool:
        return var in vars_set or base_variable(var) in vars_set

    reach = _Reach(view, depth_limit)
    reach.record(anchor, "", Direction.FORWARD, 0)

    # Backward seeds: hop-1 definitions of anchor variables.
    for src, var in sorted(view.dataflow_in(anchor)):
        if matches(var):
            reach.record(src, var, Direction.BACKWARD, 1)
            reach.in_b.add(src)
    # Forward seeds: the anchor's own variable-matched definitions, plus each
    # hop-1 definition's other uses of the same variable.
    for dst, var in sorted(view.dataflow_out(anchor)):
        if matches(var):
            reach.record(dst, var, Direction.FORWARD, 1)
            reach.in_f.add(dst)
    if depth_limit >= 2:
        for src, var in sorted(view.dataflow_in(anchor)):
            if not matches(var):
                continue
            for dst, out_var in sorted(view.dataflow_out(src)):
                if out_var == var:
                    reach.record(dst, out_var, Direction.FORWARD, 2)
                    reach.in_f.add(dst)
    reach.saturate()
    ordered = reach.ordered_steps()
    # Anchor leads regardless of sort position.
    ordered.remove(reach.steps[anchor])
    return [reach.steps[anchor]] + ordered


def anchor_clue(cpg: Cpg, function: int, clue: Clue) -> tuple[int, list[str]]:
    """Map a clue to its anchor statement and the variables it mentions.

    The anchor is the statement whose span covers the clue line; ties on one
    line go to the statement whose column span contains the line's first
    non-whitespace character.
    """
    fn = cpg.node(function)
    first, last = cpg.function_span(fn.name) if fn.name else (fn.line, fn.end_line)
    if not (first <= clue.line <= last):
        raise NoStatementAtLine(
            f"clue line {clue.line} outside function {fn.name} ({first}-{last})")
    candidates = []
    for nid in cpg.descendants(function):
        node = cpg.node(nid)
        if node.kind in STATEMENT_KINDS and node.line <= clue.line <= node.end_line:
            candidates.append(node)
    if not candidates:
        raise NoStatementAtLine(f"no statement covers {cpg.file}:{clue.line}")
    line_text = cpg.line_text(clue.line) or ""
    first_col = len(line_text) - len(line_text.lstrip()) + 1

    def rank(node):
        covers_first = node.line == clue.line and node.column <= first_col
        return (not covers_first, node.id)

    anchor = min(candidates, key=rank)
    return anchor.id, _mentioned_variables(cpg, anchor.id)


def _mentioned_variables(cpg: Cpg, stmt_id: int) -> list[str]:
    """Base identifiers the statement defines or uses: definition targets
    first, then the remaining identifiers in appearance order."""
    out: list[str] = []
    for var in sorted(cpg.defined_variables(stmt_id)):
        base = base_variable(var)
        if base and base not in out:
            out.append(base)
    for nid in sorted(cpg.descendants(stmt_id)):
        node = cpg.node(nid)
        if node.kind is NodeKind.IDENTIFIER and node.name and node.name not in out:
            out.append(node.name)
    return out


def expand_to_statement_boundary(cpg: Cpg, node: int) -> int:
    """Nearest enclosing statement-level node; idempotent."""
    found = cpg.enclosing_statement(node)
    return node if found is None else found


def slice_bidirectional(cpg: Cpg, anchor: int, variables: Iterable[str],
                        depth_limit: int = DEFAULT_DEPTH_LIMIT,
                        view: Optional[GraphView] = None) -> LocalSlice:
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    view = view or GraphView(cpg)
    steps = bidirectional_reach(view, anchor, variables, depth_limit)
    result = LocalSlice(anchor=anchor, steps=steps)
    result.boundary = find_boundary_variables(cpg, result)
    return result


def slice_forward(cpg: Cpg, entry_vars: Iterable[str],
                  depth_limit: int = DEFAULT_DEPTH_LIMIT,
                  function: Optional[int] = None,
                  view: Optional[GraphView] = None) -> LocalSlice:
    """Forward-only slice of a function from its parameter definitions.

    ``function`` defaults to the file's single function and is required for
    multi-function files.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    view = view or GraphView(cpg)
    if function is None:
        if len(cpg.functions) != 1:
            raise ValueError("function id required for multi-function files")
        function = next(iter(cpg.functions.values()))
    entry = set(entry_vars)
    reach = _Reach(view, depth_limit)
    reach.record(function, "", Direction.FORWARD, 0)
    for pid in cpg.children_of(function):
        node = cpg.node(pid)
        if node.kind is NodeKind.PARAMETER and node.name in entry:
            reach.record(pid, node.name, Direction.FORWARD, 0)
            for dst, var in sorted(view.dataflow_out(pid)):
                if var == node.name or base_variable(var) == node.name:
                    reach.record(dst, var, Direction.FORWARD, 1)
                    reach.in_f.add(dst)
    reach.saturate()
    ordered = reach.ordered_steps()
    result = LocalSlice(anchor=function, steps=ordered)
    result.boundary = find_boundary_variables(cpg, result)
    return result


def find_boundary_variables(cpg: Cpg, local_slice: LocalSlice) -> list[BoundaryVariable]:
    """Variables whose origins or destinations lie outside the function:
    parameter/global terminals, and values returned from or passed to calls
    whose callee is not defined in this file."""
    out: set[BoundaryVariable] = set()
    for step in local_slice.steps:
        node = cpg.nodes.get(step.node)
        if node is None:
            continue
        if node.kind is NodeKind.PARAMETER and node.name:
            out.add(BoundaryVariable(node.name, BoundaryReason.PARAMETER, node.id))
        elif node.kind is NodeKind.FUNCTION_DEF and step.variable:
            out.add(BoundaryVariable(base_variable(step.variable),
                                     BoundaryReason.GLOBAL, node.id))
        if node.kind in STATEMENT_KINDS:
            for call in cpg.calls_in(node.id):
                if call.name in cpg.functions:
                    continue
                for var in sorted(cpg.defined_variables(node.id)):
                    out.add(BoundaryVariable(
                        var, BoundaryReason.EXTERNAL_CALL_RETURN, node.id))
                for arg_base in _call_arg_bases(cpg, call.id):
                    out.add(BoundaryVariable(
                        arg_base, BoundaryReason.EXTERNAL_CALL_ARGUMENT, node.id))
    return sorted(out, key=lambda b: (b.site, b.reason.value, b.variable))


def _call_arg_bases(cpg: Cpg, call_id: int) -> list[str]:
    bases = []
    for nid in sorted(cpg.descendants(call_id)):
        node = cpg.node(nid)
        if node.kind is NodeKind.IDENTIFIER and node.name and node.name not in bases:
            bases.append(node.name)
    return bases
