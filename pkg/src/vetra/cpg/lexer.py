"""Tokenizer for the supported C subset.

Comments and preprocessor directives are skipped (directives including
backslash continuations); everything else must lex or LexError is raised.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import LexError

IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
IDENT_CONT = IDENT_START | set("0123456789")
DIGITS = set("0123456789")

# Longest-match-first operator/punctuation set.
PUNCT = [
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "(", ")", "{", "}", "[", "]", ";", ",", ".", "?", ":",
    "+", "-", "*", "/", "%", "<", ">", "=", "&", "|", "^", "!", "~",
]


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | punct | eof
    text: str
    line: int
    column: int

    def is_punct(self, *texts: str) -> bool:
        return self.kind == "punct" and self.text in texts

    def is_ident(self, *texts: str) -> bool:
        return self.kind == "ident" and (not texts or self.text in texts)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(count: int):
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    at_line_start = True
    while i < n:
        ch = source[i]
        if ch in " \t\r":
            advance(1)
            continue
        if ch == "\n":
            advance(1)
            at_line_start = True
            continue
        if ch == "#" and at_line_start:
            # Preprocessor directive: skip to end of line, honoring \-continuations.
            while i < n and source[i] != "\n":
                if source[i] == "\\" and i + 1 < n and source[i + 1] == "\n":
                    advance(2)
                else:
                    advance(1)
            continue
        at_line_start = False
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if source.startswith("/*", i):
            advance(2)
            while i < n and not source.startswith("*/", i):
                advance(1)
            if i >= n:
                raise LexError("unterminated block comment", line, col)
            advance(2)
            continue
        if ch in IDENT_START:
            start, sl, sc = i, line, col
            while i < n and source[i] in IDENT_CONT:
                advance(1)
            tokens.append(Token("ident", source[start:i], sl, sc))
            continue
        if ch in DIGITS or (ch == "." and i + 1 < n and source[i + 1] in DIGITS):
            start, sl, sc = i, line, col
            while i < n and (source[i] in IDENT_CONT or source[i] == "." or
                             (source[i] in "+-" and source[i - 1] in "eEpP")):
                advance(1)
            tokens.append(Token("number", source[start:i], sl, sc))
            continue
        if ch == '"' or ch == "'":
            quote, start, sl, sc = ch, i, line, col
            advance(1)
            while i < n and source[i] != quote:
                if source[i] == "\\" and i + 1 < n:
                    advance(2)
                else:
                    advance(1)
            if i >= n:
                raise LexError("unterminated literal", sl, sc)
            advance(1)
            kind = "string" if quote == '"' else "char"
            tokens.append(Token(kind, source[start:i], sl, sc))
            continue
        matched = None
        for p in PUNCT:
            if source.startswith(p, i):
                matched = p
                break
        if matched:
            tokens.append(Token("punct", matched, line, col))
            advance(len(matched))
            continue
        if ch == "\\" and i + 1 < n and source[i + 1] == "\n":
            advance(2)
            continue
        raise LexError(f"illegal character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens
