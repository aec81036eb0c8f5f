"""C-subset frontend: source text -> Cpg.

Supported: function definitions, local declarations, assignments (plain and
compound), calls (macro invocations parse as ordinary calls), if/else,
while/for/do, switch/case, return, goto/labels, member access, array index,
casts, sizeof, unary/binary/ternary expressions.  Anything else inside a
function body degrades to an opaque statement; unsupported top-level
constructs are skipped.

Dataflow: reaching definitions are computed flow-sensitively over the
statement-level CFG with kill-on-assignment per variable key.  Variable keys
are full member paths; a use of ``a->b.c`` is linked to definitions of the
full path and of any shorter prefix (ultimately the base identifier).
Parameters and globals get synthetic definitions at function entry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .lexer import Token, tokenize
from .model import (
    Cpg,
    CpgEdge,
    CpgNode,
    EdgeKind,
    NestingOverflow,
    NodeKind,
    base_variable,
    key_prefixes,
)

QUALIFIERS = {"const", "volatile", "static", "inline", "register", "extern", "__inline__"}
PRIMITIVES = {"void", "int", "char", "long", "short", "float", "double", "bool",
              "unsigned", "signed", "_Bool"}
TAG_KEYWORDS = {"struct", "union", "enum"}
STMT_KEYWORDS = {"if", "else", "while", "for", "do", "switch", "case", "default",
                 "return", "break", "continue", "goto", "sizeof", "typedef"}
TYPEDEF_RE = re.compile(r"^(?:[us](?:8|16|32|64)|__\w+|\w+_t|size_t|uintptr|intptr)$")

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}
BINARY_LEVELS = [
    {"||"}, {"&&"}, {"|"}, {"^"}, {"&"},
    {"==", "!="}, {"<", ">", "<=", ">="}, {"<<", ">>"},
    {"+", "-"}, {"*", "/", "%"},
]


def _is_type_token(tok: Token, after_tag: bool) -> bool:
    if tok.is_punct("*"):
        return True
    if tok.kind != "ident":
        return False
    if after_tag:
        return True
    return (tok.text in QUALIFIERS or tok.text in PRIMITIVES
            or tok.text in TAG_KEYWORDS or bool(TYPEDEF_RE.match(tok.text)))


def _is_type_sequence(toks: list[Token]) -> bool:
    if not toks:
        return False
    saw_type = False
    expect_tag = False
    for t in toks:
        if t.is_punct("*"):
            continue
        if t.kind != "ident" or t.text in STMT_KEYWORDS:
            return False
        if expect_tag:
            expect_tag = False
            saw_type = True
            continue
        if t.text in TAG_KEYWORDS:
            expect_tag = True
            continue
        if t.text in QUALIFIERS:
            continue
        if t.text in PRIMITIVES or TYPEDEF_RE.match(t.text):
            saw_type = True
            continue
        return False
    return saw_type and not expect_tag


@dataclass
class CallSite:
    name: str
    node_id: int
    args: list[tuple[str, list[str]]]  # (verbatim arg text, read keys in arg)


@dataclass
class Stmt:
    """Parser-internal statement with dataflow facts and structure."""

    node_id: int
    kind: NodeKind
    strong_defs: list[str] = field(default_factory=list)
    weak_defs: list[str] = field(default_factory=list)
    uses: list[str] = field(default_factory=list)
    calls: list[CallSite] = field(default_factory=list)
    declares: list[str] = field(default_factory=list)
    ctype: Optional[str] = None  # if/while/for/do/switch for guards
    body: list["Stmt"] = field(default_factory=list)
    else_body: list["Stmt"] = field(default_factory=list)
    is_return: bool = False
    is_break: bool = False
    is_continue: bool = False
    is_case_label: bool = False
    goto_target: Optional[str] = None
    label: Optional[str] = None  # label attached to this statement


class _ExprResult:
    """Accumulates reads/writes/calls while an expression parses."""

    def __init__(self):
        self.reads: list[str] = []
        self.writes: list[str] = []
        self.weak_writes: list[str] = []
        self.calls: list[CallSite] = []
        self.path: Optional[str] = None  # lvalue path of the last primary, if any

    def merge(self, other: "_ExprResult"):
        self.reads += other.reads
        self.writes += other.writes
        self.weak_writes += other.weak_writes
        self.calls += other.calls


class Parser:
    def __init__(self, source: str, file: str, max_depth: int = 80):
        self.source = source
        self.file = file
        self.max_depth = max_depth
        self.tokens = tokenize(source)
        self.pos = 0
        self.depth = 0
        self.nodes: list[CpgNode] = []
        self.edges: list[CpgEdge] = []
        self.function_spans: dict[str, tuple[int, int]] = {}
        self._pending_bodies: list = []
        self._fn_params: dict[int, list[tuple[str, int]]] = {}
        self._expr_children: list[int] = []
        self._line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self._line_starts.append(i + 1)

    # ---- token helpers -------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect_punct(self, text: str) -> Token:
        tok = self.next()
        if not tok.is_punct(text):
            raise _StmtError(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    def _offset(self, tok: Token) -> int:
        return self._line_starts[tok.line - 1] + tok.column - 1

    def text_between(self, start: Token, end: Token) -> str:
        return self.source[self._offset(start): self._offset(end) + len(end.text)]

    # ---- node/edge builders --------------------------------------------

    def new_node(self, kind: NodeKind, tok: Token, code: str, name: Optional[str],
                 parent: Optional[int]) -> int:
        nid = len(self.nodes)
        self.nodes.append(CpgNode(nid, kind, self.file, tok.line, tok.column, code, name))
        if parent is not None:
            self.edges.append(CpgEdge(parent, nid, EdgeKind.AST))
        return nid

    # ---- top level -------------------------------------------------------

    def parse(self) -> Cpg:
        tu = self.new_node(NodeKind.TRANSLATION_UNIT, Token("punct", "", 1, 1),
                           "", None, None)
        while self.peek().kind != "eof":
            if not self._try_function(tu):
                self._skip_top_level()
        for stmts, fn_id, _name in self._pending_bodies:
            self._emit_dataflow(fn_id, stmts)
        cpg = Cpg(
            self.file,
            self.nodes,
            self.edges,
            source_lines=self.source.split("\n"),
            function_spans=self.function_spans,
        )
        return cpg

    _pending_bodies: list

    def _skip_top_level(self):
        """Skip one unsupported top-level construct (decl, typedef, struct...)."""
        depth = 0
        while True:
            tok = self.next()
            if tok.kind == "eof":
                return
            if tok.is_punct("{"):
                depth += 1
            elif tok.is_punct("}"):
                depth -= 1
                if depth <= 0 and not self.peek().is_punct(";"):
                    return
            elif tok.is_punct(";") and depth <= 0:
                return

    def _try_function(self, tu: int) -> bool:
        """Parse a function definition if one starts here; else leave pos unchanged."""
        start = self.pos
        i = self.pos
        # Scan a plausible declaration prefix: idents/qualifiers/stars, then NAME ( ... ) {
        name_idx = None
        while i < len(self.tokens) - 1:
            tok = self.tokens[i]
            if tok.kind == "ident" and self.tokens[i + 1].is_punct("("):
                name_idx = i
                break
            if tok.kind == "ident" or tok.is_punct("*"):
                i += 1
                continue
            return False
        if name_idx is None or self.tokens[name_idx].text in STMT_KEYWORDS:
            return False
        # Find matching close paren.
        j = name_idx + 1
        depth = 0
        while j < len(self.tokens):
            if self.tokens[j].is_punct("("):
                depth += 1
            elif self.tokens[j].is_punct(")"):
                depth -= 1
                if depth == 0:
                    break
            j += 1
        if j >= len(self.tokens) or not self.tokens[j + 1].is_punct("{"):
            return False

        name_tok = self.tokens[name_idx]
        sig_code = self.text_between(self.tokens[start], self.tokens[j])
        fn_id = self.new_node(NodeKind.FUNCTION_DEF, self.tokens[start], sig_code,
                              name_tok.text, tu)
        params = self._parse_params(name_idx + 2, j, fn_id)
        self.pos = j + 1  # at '{'
        body_open = self.next()
        assert body_open.is_punct("{")
        stmts, close_tok = self._parse_block(fn_id)
        end_line = close_tok.line if close_tok else self.tokens[j].line
        self.function_spans[name_tok.text] = (self.tokens[start].line, end_line)
        self._pending_bodies.append((stmts, fn_id, name_tok.text))
        self._fn_params[fn_id] = params
        return True

    def _parse_params(self, start: int, end: int, fn_id: int) -> list[tuple[str, int]]:
        """Parameters between token indices (exclusive of parens)."""
        groups: list[list[Token]] = [[]]
        depth = 0
        for idx in range(start, end):
            tok = self.tokens[idx]
            if tok.is_punct("(", "["):
                depth += 1
            elif tok.is_punct(")", "]"):
                depth -= 1
            if tok.is_punct(",") and depth == 0:
                groups.append([])
            else:
                groups[-1].append(tok)
        params = []
        for group in groups:
            idents = [t for t in group if t.kind == "ident" and t.text not in QUALIFIERS
                      and t.text not in TAG_KEYWORDS]
            if not idents:
                continue
            if len(idents) == 1 and idents[0].text == "void":
                continue
            name_tok = idents[-1]
            code = self.text_between(group[0], group[-1])
            pid = self.new_node(NodeKind.PARAMETER, name_tok, code, name_tok.text, fn_id)
            params.append((name_tok.text, pid))
        return params

    # ---- statements ------------------------------------------------------

    def _parse_block(self, parent: int) -> tuple[list[Stmt], Optional[Token]]:
        """Statements until the matching '}' (already past '{')."""
        self.depth += 1
        if self.depth > self.max_depth:
            raise NestingOverflow(f"nesting deeper than {self.max_depth} in {self.file}")
        stmts: list[Stmt] = []
        close = None
        pending_label: Optional[str] = None
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.is_punct("}"):
                close = self.next()
                break
            parsed = self._parse_statement(parent)
            if parsed is None:
                continue
            if isinstance(parsed, str):
                pending_label = parsed
                continue
            if isinstance(parsed, list):
                for s in parsed:
                    if pending_label and s is parsed[0]:
                        s.label = pending_label
                stmts.extend(parsed)
            else:
                if pending_label:
                    parsed.label = pending_label
                stmts.append(parsed)
            pending_label = None
        self.depth -= 1
        return stmts, close

    def _parse_statement(self, parent: int):
        """One statement; returns Stmt, list[Stmt] (flattened block), a label
        string, or None (empty statement)."""
        tok = self.peek()
        try:
            return self._parse_statement_inner(parent, tok)
        except _StmtError:
            return self._recover_opaque(tok, parent)

    def _parse_statement_inner(self, parent: int, tok: Token):
        if tok.is_punct(";"):
            self.next()
            return None
        if tok.is_punct("{"):
            self.next()
            stmts, _ = self._parse_block(parent)
            return stmts
        if tok.is_ident("case", "default"):
            return self._parse_case_label(parent)
        if tok.kind == "ident" and self.peek(1).is_punct(":") and tok.text not in STMT_KEYWORDS:
            label_tok = self.next()
            self.next()  # ':'
            return label_tok.text
        if tok.is_ident("if"):
            return self._parse_if(parent)
        if tok.is_ident("while"):
            return self._parse_while(parent)
        if tok.is_ident("for"):
            return self._parse_for(parent)
        if tok.is_ident("do"):
            return self._parse_do(parent)
        if tok.is_ident("switch"):
            return self._parse_switch(parent)
        if tok.is_ident("return"):
            return self._parse_return(parent)
        if tok.is_ident("break", "continue"):
            kw = self.next()
            self._consume_semi()
            stmt = Stmt(self.new_node(NodeKind.STATEMENT, kw, kw.text + ";", None, parent),
                        NodeKind.STATEMENT)
            stmt.is_break = kw.text == "break"
            stmt.is_continue = kw.text == "continue"
            return stmt
        if tok.is_ident("goto"):
            kw = self.next()
            target = self.next()
            self._consume_semi()
            stmt = Stmt(self.new_node(NodeKind.STATEMENT, kw,
                                      f"goto {target.text};", None, parent),
                        NodeKind.STATEMENT)
            stmt.goto_target = target.text if target.kind == "ident" else None
            return stmt
        if self._at_declaration():
            return self._parse_declaration(parent)
        return self._parse_expression_statement(parent)

    def _recover_opaque(self, start_tok: Token, parent: int) -> Stmt:
        """Swallow a malformed statement as an opaque node (graceful degrade)."""
        self._expr_children = []
        depth = 0
        last = start_tok
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.is_punct("}") and depth == 0:
                break
            tok = self.next()
            last = tok
            if tok.is_punct("{", "(", "["):
                depth += 1
            elif tok.is_punct(")", "]"):
                depth -= 1
            elif tok.is_punct("}"):
                depth -= 1
                if depth <= 0:
                    break
            elif tok.is_punct(";") and depth == 0:
                break
        code = self.text_between(start_tok, last)
        return Stmt(self.new_node(NodeKind.STATEMENT, start_tok, code, None, parent),
                    NodeKind.STATEMENT)

    def _consume_semi(self):
        if self.peek().is_punct(";"):
            self.next()

    def _guard_stmt(self, kw: Token, end_tok: Token, parent: int, ctype: str,
                    expr: _ExprResult) -> Stmt:
        code = self.text_between(kw, end_tok)
        nid = self.new_node(NodeKind.CONTROL_STRUCTURE, kw, code, None, parent)
        stmt = Stmt(nid, NodeKind.CONTROL_STRUCTURE, ctype=ctype)
        self._apply_expr(stmt, expr, nid)
        return stmt

    def _reparent_expr_children(self, nid: int):
        """Expression child nodes are created before their statement node
        exists; they are created with the enclosing parent and re-pointed
        here via the _expr_children buffer."""
        for child in self._expr_children:
            for idx, e in enumerate(self.edges):
                if e.kind is EdgeKind.AST and e.dst == child:
                    self.edges[idx] = CpgEdge(nid, child, EdgeKind.AST)
                    break
        self._expr_children = []

    def _parse_if(self, parent: int) -> Stmt:
        kw = self.next()
        self.expect_punct("(")
        expr, end_tok = self._parse_paren_expr(parent)
        guard = self._guard_stmt(kw, end_tok, parent, "if", expr)
        body = self._parse_statement_as_block(guard.node_id)
        guard.body = body
        if self.peek().is_ident("else"):
            self.next()
            guard.else_body = self._parse_statement_as_block(guard.node_id)
        return guard

    def _parse_while(self, parent: int) -> Stmt:
        kw = self.next()
        self.expect_punct("(")
        expr, end_tok = self._parse_paren_expr(parent)
        guard = self._guard_stmt(kw, end_tok, parent, "while", expr)
        guard.body = self._parse_statement_as_block(guard.node_id)
        return guard

    def _parse_do(self, parent: int) -> Stmt:
        kw = self.next()
        # Guard node code covers just the 'do'; condition merged after body.
        guard = Stmt(self.new_node(NodeKind.CONTROL_STRUCTURE, kw, "do", None, parent),
                     NodeKind.CONTROL_STRUCTURE, ctype="do")
        guard.body = self._parse_statement_as_block(guard.node_id)
        if self.peek().is_ident("while"):
            self.next()
            self.expect_punct("(")
            expr, _ = self._parse_paren_expr(guard.node_id)
            self._apply_expr(guard, expr, guard.node_id)
            self._consume_semi()
        return guard

    def _parse_for(self, parent: int) -> Stmt:
        kw = self.next()
        self.expect_punct("(")
        combined = _ExprResult()
        declared: list[str] = []
        # init
        if not self.peek().is_punct(";"):
            if self._at_declaration():
                self._skip_type_prefix()
                declared.append(self.peek().text)
            combined.merge(self._parse_expr(parent))
        self.expect_punct(";")
        if not self.peek().is_punct(";"):
            combined.merge(self._parse_expr(parent))
        self.expect_punct(";")
        if not self.peek().is_punct(")"):
            combined.merge(self._parse_expr(parent))
        end_tok = self.expect_punct(")")
        guard = self._guard_stmt(kw, end_tok, parent, "for", combined)
        guard.declares += declared
        guard.body = self._parse_statement_as_block(guard.node_id)
        return guard

    def _skip_type_prefix(self):
        """Consume declaration type tokens up to the first declarator name."""
        while True:
            tok = self.peek()
            if tok.kind == "ident" and (tok.text in QUALIFIERS or tok.text in PRIMITIVES):
                self.next()
                continue
            if tok.kind == "ident" and tok.text in TAG_KEYWORDS:
                self.next()
                if self.peek().kind == "ident":
                    self.next()
                continue
            break
        if (self.peek().kind == "ident" and
                (self.peek(1).is_punct("*") or self.peek(1).kind == "ident")):
            self.next()
        while self.peek().is_punct("*"):
            self.next()

    def _parse_switch(self, parent: int) -> Stmt:
        kw = self.next()
        self.expect_punct("(")
        expr, end_tok = self._parse_paren_expr(parent)
        guard = self._guard_stmt(kw, end_tok, parent, "switch", expr)
        if self.peek().is_punct("{"):
            self.next()
            guard.body, _ = self._parse_block(guard.node_id)
        return guard

    def _parse_case_label(self, parent: int) -> Stmt:
        kw = self.next()
        last = kw
        depth = 0
        while not (self.peek().is_punct(":") and depth == 0):
            tok = self.next()
            if tok.kind == "eof":
                break
            if tok.is_punct("(", "["):
                depth += 1
            elif tok.is_punct(")", "]"):
                depth -= 1
            last = tok
        colon = self.next() if self.peek().is_punct(":") else last
        code = self.text_between(kw, colon if colon.is_punct(":") else last)
        stmt = Stmt(self.new_node(NodeKind.STATEMENT, kw, code, None, parent),
                    NodeKind.STATEMENT)
        stmt.is_case_label = True
        return stmt

    def _parse_return(self, parent: int) -> Stmt:
        kw = self.next()
        expr = _ExprResult()
        last = kw
        if not self.peek().is_punct(";"):
            expr = self._parse_expr(parent)
            last = self.tokens[self.pos - 1]
        semi = self.peek()
        if semi.is_punct(";"):
            self.next()
            last = semi
        code = self.text_between(kw, last)
        nid = self.new_node(NodeKind.RETURN, kw, code, None, parent)
        stmt = Stmt(nid, NodeKind.RETURN, is_return=True)
        self._apply_expr(stmt, expr, nid)
        return stmt

    def _parse_statement_as_block(self, parent: int) -> list[Stmt]:
        parsed = self._parse_statement(parent)
        if parsed is None:
            return []
        if isinstance(parsed, str):
            # Dangling label; attach to a following statement if any.
            follow = self._parse_statement(parent)
            if isinstance(follow, Stmt):
                follow.label = parsed
                return [follow]
            return follow if isinstance(follow, list) else []
        if isinstance(parsed, list):
            return parsed
        return [parsed]

    def _at_declaration(self) -> bool:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in STMT_KEYWORDS:
            return False
        i = self.pos
        saw_qual = False
        while self.tokens[i].kind == "ident" and self.tokens[i].text in QUALIFIERS:
            i += 1
            saw_qual = True
        t = self.tokens[i]
        if t.kind != "ident":
            return False
        if t.text in TAG_KEYWORDS:
            return self.tokens[i + 1].kind == "ident"
        if t.text in PRIMITIVES:
            return True
        nxt = self.tokens[i + 1]
        if TYPEDEF_RE.match(t.text) and (nxt.kind == "ident" or nxt.is_punct("*")):
            return True
        if saw_qual:
            return True
        # IDENT IDENT is a declaration with a custom typedef.
        return nxt.kind == "ident" and nxt.text not in STMT_KEYWORDS and \
            self.tokens[i + 2].is_punct(";", ",", "=", "[")

    def _parse_declaration(self, parent: int, consume_semi: bool = True) -> Stmt:
        start = self.peek()
        expr = _ExprResult()
        # Type prefix.
        while True:
            tok = self.peek()
            if tok.kind == "ident" and (tok.text in QUALIFIERS or tok.text in PRIMITIVES):
                self.next()
                continue
            if tok.kind == "ident" and tok.text in TAG_KEYWORDS:
                self.next()
                if self.peek().kind == "ident":
                    self.next()
                continue
            break
        if self.peek().kind == "ident" and not self.peek(1).is_punct("=", ";", ",", "[", "("):
            # Typedef name before declarators (u32 i / __be16 *p).
            if self.peek(1).is_punct("*") or self.peek(1).kind == "ident":
                self.next()
        # Declarators.
        last = start
        declared: list[str] = []
        while True:
            while self.peek().is_punct("*"):
                self.next()
            name_tok = self.peek()
            if name_tok.kind != "ident":
                raise _StmtError("expected declarator", name_tok)
            self.next()
            expr.writes.append(name_tok.text)
            declared.append(name_tok.text)
            last = name_tok
            while self.peek().is_punct("["):
                self.next()
                if not self.peek().is_punct("]"):
                    expr.merge(self._parse_expr(parent))
                last = self.expect_punct("]")
            if self.peek().is_punct("="):
                self.next()
                init = self._parse_assignment_expr(parent)
                expr.merge(init)
                last = self.tokens[self.pos - 1]
            if self.peek().is_punct(","):
                self.next()
                continue
            break
        end = self.peek()
        if consume_semi and end.is_punct(";"):
            self.next()
            last = end
        code = self.text_between(start, last)
        nid = self.new_node(NodeKind.STATEMENT, start, code, None, parent)
        stmt = Stmt(nid, NodeKind.STATEMENT)
        stmt.declares = declared
        self._apply_expr(stmt, expr, nid)
        return stmt

    def _parse_expression_statement(self, parent: int) -> Stmt:
        start = self.peek()
        expr = self._parse_expr(parent)
        last = self.tokens[self.pos - 1]
        if self.peek().is_punct(";"):
            last = self.next()
        code = self.text_between(start, last)
        nid = self.new_node(NodeKind.STATEMENT, start, code, None, parent)
        stmt = Stmt(nid, NodeKind.STATEMENT)
        self._apply_expr(stmt, expr, nid)
        return stmt

    def _apply_expr(self, stmt: Stmt, expr: _ExprResult, nid: int):
        stmt.strong_defs += expr.writes
        stmt.weak_defs += expr.weak_writes
        stmt.uses += expr.reads
        stmt.calls += expr.calls
        self._reparent_expr_children(nid)

    # ---- expressions -----------------------------------------------------

    def _parse_paren_expr(self, parent: int) -> tuple[_ExprResult, Token]:
        """Expression up to the matching ')' (open paren already consumed)."""
        expr = self._parse_expr(parent)
        end = self.expect_punct(")")
        return expr, end

    def _parse_expr(self, parent: int) -> _ExprResult:
        result = self._parse_assignment_expr(parent)
        while self.peek().is_punct(","):
            self.next()
            result.merge(self._parse_assignment_expr(parent))
        return result

    def _parse_assignment_expr(self, parent: int) -> _ExprResult:
        self.depth += 1
        if self.depth > self.max_depth:
            raise NestingOverflow(f"expression deeper than {self.max_depth}")
        try:
            lhs = self._parse_ternary(parent)
            tok = self.peek()
            if tok.kind == "punct" and tok.text in ASSIGN_OPS:
                self.next()
                rhs = self._parse_assignment_expr(parent)
                out = _ExprResult()
                out.merge(rhs)
                out.calls = lhs.calls + out.calls
                out.reads = [r for r in lhs.reads if r != lhs.path] + out.reads
                if lhs.path is not None:
                    out.writes.append(lhs.path)
                    base = base_variable(lhs.path)
                    if base != lhs.path.lstrip("*&"):
                        out.reads.append(base)
                    if tok.text != "=":
                        out.reads.append(lhs.path)
                else:
                    out.reads = lhs.reads + out.reads
                out.writes += lhs.writes
                out.weak_writes += lhs.weak_writes
                return out
            return lhs
        finally:
            self.depth -= 1

    def _parse_ternary(self, parent: int) -> _ExprResult:
        cond = self._parse_binary(parent, 0)
        if self.peek().is_punct("?"):
            self.next()
            then = self._parse_expr(parent)
            self.expect_punct(":")
            other = self._parse_assignment_expr(parent)
            cond.merge(then)
            cond.merge(other)
            cond.path = None
        return cond

    def _parse_binary(self, parent: int, level: int) -> _ExprResult:
        if level >= len(BINARY_LEVELS):
            return self._parse_cast(parent)
        result = self._parse_binary(parent, level + 1)
        ops = BINARY_LEVELS[level]
        while self.peek().kind == "punct" and self.peek().text in ops:
            self.next()
            rhs = self._parse_binary(parent, level + 1)
            result.merge(rhs)
            result.path = None
        return result

    def _parse_cast(self, parent: int) -> _ExprResult:
        tok = self.peek()
        if tok.is_punct("("):
            # Lookahead: collect tokens to the matching ')'.
            i = self.pos + 1
            depth = 1
            inner: list[Token] = []
            while i < len(self.tokens) and depth > 0:
                t = self.tokens[i]
                if t.is_punct("("):
                    depth += 1
                elif t.is_punct(")"):
                    depth -= 1
                    if depth == 0:
                        break
                inner.append(t)
                i += 1
            after = self.tokens[min(i + 1, len(self.tokens) - 1)]
            operand_start = (after.kind in ("ident", "number", "string", "char")
                             or after.is_punct("(", "*", "&", "!", "~", "-", "+", "{"))
            if _is_type_sequence(inner) and operand_start:
                self.next()  # (
                while not self.peek().is_punct(")"):
                    self.next()
                self.next()  # )
                return self._parse_cast(parent)
        return self._parse_unary(parent)

    def _parse_unary(self, parent: int) -> _ExprResult:
        tok = self.peek()
        if tok.is_ident("sizeof"):
            self.next()
            if self.peek().is_punct("("):
                i = self.pos + 1
                depth = 1
                inner: list[Token] = []
                while i < len(self.tokens) and depth > 0:
                    t = self.tokens[i]
                    if t.is_punct("("):
                        depth += 1
                    elif t.is_punct(")"):
                        depth -= 1
                        if depth == 0:
                            break
                    inner.append(t)
                    i += 1
                if _is_type_sequence(inner):
                    self.pos = i + 1
                    return _ExprResult()
                self.next()
                expr, _ = self._parse_paren_expr(parent)
                expr.path = None
                return expr
            return self._parse_unary(parent)
        if tok.is_punct("!", "~", "-", "+"):
            self.next()
            expr = self._parse_cast(parent)
            expr.path = None
            return expr
        if tok.is_punct("++", "--"):
            self.next()
            expr = self._parse_cast(parent)
            if expr.path is not None:
                expr.writes.append(expr.path)
                expr.reads.append(expr.path)
            return expr
        if tok.is_punct("*"):
            self.next()
            expr = self._parse_cast(parent)
            if expr.path is not None:
                expr.reads.append(expr.path)
                expr.path = "*" + expr.path
            return expr
        if tok.is_punct("&"):
            self.next()
            expr = self._parse_cast(parent)
            if expr.path is not None:
                expr.path = "&" + expr.path.lstrip("&")
            return expr
        return self._parse_postfix(parent)

    def _parse_postfix(self, parent: int) -> _ExprResult:
        result = self._parse_primary(parent)
        while True:
            tok = self.peek()
            if tok.is_punct("->") or tok.is_punct("."):
                sep = self.next().text
                member = self.next()
                if member.kind == "ident" and result.path is not None:
                    prev = result.path
                    result.path = f"{prev}{sep}{member.text}"
                    if result.reads and result.reads[-1] == prev:
                        result.reads[-1] = result.path
                    else:
                        result.reads.append(result.path)
                continue
            if tok.is_punct("["):
                self.next()
                if not self.peek().is_punct("]"):
                    idx = self._parse_expr(parent)
                    result.merge(idx)
                self.expect_punct("]")
                # Path identity degrades past an index; the element key still
                # prefixes back to the indexed path for def-use matching.
                if result.path is not None:
                    result.path = result.path + "[]"
                continue
            if tok.is_punct("("):
                call_name = result.path if result.path else None
                name_tok = self._call_name_tok
                is_simple = (call_name is not None and "->" not in call_name
                             and "." not in call_name
                             and not call_name.startswith(("*", "&"))
                             and not call_name.endswith("]"))
                self.next()
                args: list[tuple[str, list[str]]] = []
                arg_marks: list[tuple[Token, int]] = []
                if is_simple and result.reads and result.reads[-1] == call_name:
                    result.reads.pop()  # callee name is not a variable use
                arg_children_before = len(self._expr_children)
                while not self.peek().is_punct(")"):
                    arg_start = self.peek()
                    mark = len(self._expr_children)
                    arg = self._parse_assignment_expr(parent)
                    arg_end = self.tokens[self.pos - 1]
                    arg_text = self.text_between(arg_start, arg_end)
                    if arg.path is not None and arg.path.startswith("&"):
                        key = arg.path.lstrip("&")
                        arg.weak_writes.append(key)
                        if key not in arg.reads:
                            arg.reads.append(key)
                    args.append((arg_text, list(arg.reads)))
                    arg_marks.append((arg_start, mark))
                    result.merge(arg)
                    if self.peek().is_punct(","):
                        self.next()
                end = self.expect_punct(")")
                if is_simple:
                    code = self.text_between(name_tok, end) if name_tok else call_name
                    nid = self.new_node(NodeKind.CALL, name_tok or tok, code,
                                        call_name, parent)
                    # One Expression node per argument under the call, with the
                    # argument's identifier/literal nodes re-homed beneath it;
                    # keeps arity and argument variables graph-derivable.
                    marks = [m for _, m in arg_marks] + [len(self._expr_children)]
                    arg_nodes = []
                    for i, (arg_tok, _) in enumerate(arg_marks):
                        arg_nid = self.new_node(NodeKind.EXPRESSION, arg_tok,
                                                args[i][0], None, nid)
                        arg_nodes.append(arg_nid)
                        for child in self._expr_children[marks[i]:marks[i + 1]]:
                            for idx, e in enumerate(self.edges):
                                if e.kind is EdgeKind.AST and e.dst == child:
                                    self.edges[idx] = CpgEdge(arg_nid, child, EdgeKind.AST)
                                    break
                    del self._expr_children[arg_children_before:]
                    self._expr_children.append(nid)
                    result.calls.append(CallSite(call_name, nid, args))
                result.path = None
                continue
            if tok.is_punct("++", "--"):
                self.next()
                if result.path is not None:
                    result.writes.append(result.path)
                    result.reads.append(result.path)
                continue
            break
        return result

    _call_name_tok: Optional[Token] = None

    def _parse_primary(self, parent: int) -> _ExprResult:
        tok = self.peek()
        result = _ExprResult()
        if tok.kind == "ident":
            if tok.text in STMT_KEYWORDS and not tok.is_ident("sizeof"):
                raise _StmtError(f"unexpected keyword {tok.text!r}", tok)
            self.next()
            result.path = tok.text
            result.reads.append(tok.text)
            self._call_name_tok = tok
            if not self.peek().is_punct("("):
                nid = self.new_node(NodeKind.IDENTIFIER, tok, tok.text, tok.text, parent)
                self._expr_children.append(nid)
            return result
        if tok.kind in ("number", "string", "char"):
            self.next()
            nid = self.new_node(NodeKind.LITERAL, tok, tok.text, None, parent)
            self._expr_children.append(nid)
            return result
        if tok.is_punct("("):
            self.next()
            expr, _ = self._parse_paren_expr(parent)
            return expr
        if tok.is_punct("{"):
            # Brace initializer.
            self.next()
            depth = 1
            while depth > 0:
                t = self.next()
                if t.kind == "eof":
                    break
                if t.is_punct("{"):
                    depth += 1
                elif t.is_punct("}"):
                    depth -= 1
            return result
        raise _StmtError(f"unexpected token {tok.text!r}", tok)

    # ---- dataflow ----------------------------------------------------------

    def _emit_dataflow(self, fn_id: int, stmts: list[Stmt]):
        from .dataflow import emit_function_dataflow

        params = getattr(self, "_fn_params", {}).get(fn_id, [])
        emit_function_dataflow(self, fn_id, params, stmts)


class _StmtError(Exception):
    def __init__(self, message: str, tok: Token):
        super().__init__(f"{message} at {tok.line}:{tok.column}")
        self.tok = tok


def parse_translation_unit(source_text: str, file_path: str, max_depth: int = 80) -> Cpg:
    """Parse one source file into a Cpg.

    Raises LexError for illegal tokens and NestingOverflow past max_depth;
    anything structurally unsupported degrades to opaque statements.
    """
    parser = Parser(source_text, str(file_path), max_depth=max_depth)
    return parser.parse()
