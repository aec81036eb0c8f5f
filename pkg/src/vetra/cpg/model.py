"""Core Code Property Graph data model.

A Cpg bundles the AST, intra-procedural control flow, reaching-definition
(def-use) edges and control-dependence edges for one translation unit.
Graphs are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class NodeKind(str, Enum):
    TRANSLATION_UNIT = "TranslationUnit"
    FUNCTION_DEF = "FunctionDef"
    PARAMETER = "Parameter"
    STATEMENT = "Statement"
    EXPRESSION = "Expression"
    CALL = "Call"
    RETURN = "Return"
    IDENTIFIER = "Identifier"
    LITERAL = "Literal"
    CONTROL_STRUCTURE = "ControlStructure"


class EdgeKind(str, Enum):
    AST = "Ast"
    CFG = "Cfg"
    REACHING_DEF = "ReachingDef"
    CONTROL_DEP = "ControlDep"
    CALL_TO = "CallTo"
    VIRTUAL_ARG_PARAM = "VirtualArgParam"
    VIRTUAL_RETURN_SITE = "VirtualReturnSite"


#: Statement-level node kinds, i.e. the units slicing operates on.
STATEMENT_KINDS = frozenset(
    {NodeKind.STATEMENT, NodeKind.CONTROL_STRUCTURE, NodeKind.RETURN}
)

#: Edge kinds that carry dataflow and participate in slice traversals.
DATAFLOW_KINDS = frozenset(
    {EdgeKind.REACHING_DEF, EdgeKind.VIRTUAL_ARG_PARAM, EdgeKind.VIRTUAL_RETURN_SITE}
)


class CpgError(Exception):
    """Base class for graph construction/consumption errors."""


class LexError(CpgError):
    """Source contains a token outside the supported character set."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class NestingOverflow(CpgError):
    """AST depth exceeded the configured maximum."""


@dataclass(frozen=True)
class CpgNode:
    id: int
    kind: NodeKind
    file: str
    line: int
    column: int
    code: str
    name: Optional[str] = None

    @property
    def end_line(self) -> int:
        """Last source line covered by this node's code text."""
        return self.line + self.code.count("\n")


@dataclass(frozen=True)
class CpgEdge:
    src: int
    dst: int
    kind: EdgeKind
    variable: Optional[str] = None

    def sort_key(self):
        return (self.kind.value, self.src, self.dst, self.variable or "")


def base_variable(key: str) -> str:
    """Base identifier of a variable key (``conn->cq.buf`` -> ``conn``)."""
    key = key.lstrip("*&")
    for sep in ("->", ".", "["):
        idx = key.find(sep)
        if idx >= 0:
            key = key[:idx]
    return key


def key_prefixes(key: str) -> list[str]:
    """All dataflow-relevant prefixes of a variable key, longest first.

    ``a->b.c`` yields ``["a->b.c", "a->b", "a"]``.  Deref/address sigils
    are kept on the full key only; shorter prefixes are plain paths.
    """
    sigils = ""
    stripped = key
    while stripped[:1] in ("*", "&"):
        sigils += stripped[0]
        stripped = stripped[1:]
    cuts = [len(stripped)]
    i = 0
    while i < len(stripped):
        if stripped.startswith("->", i):
            cuts.append(i)
            i += 2
        elif stripped[i] in ".[":
            cuts.append(i)
            i += 1
        else:
            i += 1
    out = []
    for cut in sorted(set(cuts), reverse=True):
        prefix = stripped[:cut]
        if prefix:
            out.append(sigils + prefix if cut == len(stripped) else prefix)
    return out


class Cpg:
    """Immutable per-file code property graph.

    ``functions`` maps every function name defined in the file to its
    FunctionDef node id.  Auxiliary accessors (parents, adjacency) are
    derived from the edge list so imported graphs behave identically to
    freshly parsed ones.
    """

    def __init__(
        self,
        file: str,
        nodes: Iterable[CpgNode],
        edges: Iterable[CpgEdge],
        source_lines: Optional[list[str]] = None,
        function_spans: Optional[dict[str, tuple[int, int]]] = None,
    ):
        self.file = file
        self.nodes: dict[int, CpgNode] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise CpgError(f"duplicate node id {node.id} in {file}")
            self.nodes[node.id] = node
        self.edges: list[CpgEdge] = sorted(edges, key=CpgEdge.sort_key)
        self.functions: dict[str, int] = {
            n.name: n.id
            for n in sorted(self.nodes.values(), key=lambda n: n.id)
            if n.kind is NodeKind.FUNCTION_DEF and n.name
        }
        self._source_lines = source_lines
        self._function_spans = function_spans or {}
        # Derived indices.
        self._parent: dict[int, int] = {}
        self._children: dict[int, list[int]] = {}
        self._out: dict[int, list[CpgEdge]] = {}
        self._in: dict[int, list[CpgEdge]] = {}
        for e in self.edges:
            if e.kind is EdgeKind.AST:
                self._parent[e.dst] = e.src
                self._children.setdefault(e.src, []).append(e.dst)
            self._out.setdefault(e.src, []).append(e)
            self._in.setdefault(e.dst, []).append(e)

    def __repr__(self) -> str:
        return f"Cpg({self.file!r}, {len(self.nodes)} nodes, {len(self.edges)} edges)"

    def node(self, node_id: int) -> CpgNode:
        return self.nodes[node_id]

    def parent_of(self, node_id: int) -> Optional[int]:
        return self._parent.get(node_id)

    def children_of(self, node_id: int) -> list[int]:
        return self._children.get(node_id, [])

    def out_edges(self, node_id: int, kinds: Optional[frozenset] = None) -> list[CpgEdge]:
        edges = self._out.get(node_id, [])
        if kinds is None:
            return edges
        return [e for e in edges if e.kind in kinds]

    def in_edges(self, node_id: int, kinds: Optional[frozenset] = None) -> list[CpgEdge]:
        edges = self._in.get(node_id, [])
        if kinds is None:
            return edges
        return [e for e in edges if e.kind in kinds]

    def descendants(self, node_id: int) -> list[int]:
        """All AST descendants of a node, preorder."""
        out, stack = [], [node_id]
        while stack:
            cur = stack.pop()
            kids = self.children_of(cur)
            out.extend(kids)
            stack.extend(reversed(kids))
        return out

    def function_span(self, name: str) -> tuple[int, int]:
        """(first, last) source line of a function definition.

        Parsed graphs record the exact span including the closing brace;
        imported graphs fall back to the max line over descendants.
        """
        if name in self._function_spans:
            return self._function_spans[name]
        fn_id = self.functions[name]
        fn = self.nodes[fn_id]
        last = fn.end_line
        for d in self.descendants(fn_id):
            last = max(last, self.nodes[d].end_line)
        return (fn.line, last)

    def line_text(self, line: int) -> Optional[str]:
        """Verbatim source text of a line, trailing whitespace stripped.

        Reconstructed from node code when the raw source is unavailable
        (imported graphs), so only lines covered by some node resolve.
        """
        if self._source_lines is not None:
            if 1 <= line <= len(self._source_lines):
                return self._source_lines[line - 1].rstrip()
            return None
        best = None
        for node in self.nodes.values():
            if node.line <= line <= node.end_line:
                if best is None or node.end_line - node.line < best.end_line - best.line:
                    best = node
        if best is None:
            return None
        return best.code.split("\n")[line - best.line].rstrip()

    def statements(self) -> list[CpgNode]:
        return [n for n in sorted(self.nodes.values(), key=lambda n: n.id) if n.kind in STATEMENT_KINDS]

    def enclosing_statement(self, node_id: int) -> Optional[int]:
        """Nearest self-or-ancestor that is a statement-level node."""
        cur: Optional[int] = node_id
        while cur is not None:
            if self.nodes[cur].kind in STATEMENT_KINDS:
                return cur
            cur = self.parent_of(cur)
        return None

    def enclosing_function(self, node_id: int) -> Optional[int]:
        cur: Optional[int] = node_id
        while cur is not None:
            if self.nodes[cur].kind is NodeKind.FUNCTION_DEF:
                return cur
            cur = self.parent_of(cur)
        return None

    def calls_in(self, stmt_id: int) -> list[CpgNode]:
        """Call nodes within a statement (the statement's own subtree)."""
        out = []
        if self.nodes[stmt_id].kind is NodeKind.CALL:
            out.append(self.nodes[stmt_id])
        for d in self.descendants(stmt_id):
            node = self.nodes[d]
            if node.kind is NodeKind.CALL:
                out.append(node)
        return out

    def defined_variables(self, stmt_id: int) -> set[str]:
        """Variable keys this statement defines, per outgoing def-use edges."""
        return {
            e.variable
            for e in self.out_edges(stmt_id, DATAFLOW_KINDS)
            if e.kind is EdgeKind.REACHING_DEF and e.variable
        }

    def used_variables(self, stmt_id: int) -> set[str]:
        """Variable keys whose definitions reach and are used by this statement."""
        return {
            e.variable
            for e in self.in_edges(stmt_id, DATAFLOW_KINDS)
            if e.kind is EdgeKind.REACHING_DEF and e.variable
        }
