"""Tokenizer for RML source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError

KEYWORDS = frozenset("""
    AVG DIV ELSE ENDL EX EXEC EXIT FA FOR IF IN MAX MIN MOD NUMBER PRINT
    RELINFO STDERR STRING SUM TC TCFAST TO WHILE
""".split())

# longest match first
OPERATORS = [
    "<->", ":=", "->", "!=", "<=", ">=",
    ";", ",", "(", ")", "{", "}", "[", "]",
    "&", "|", "!", "=", "<", ">", "+", "-", "*", "/", "^", "$", "@", "#",
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


@dataclass(frozen=True)
class Token:
    kind: str  # ident keyword str num op anon eof
    text: str
    pos: tuple  # (line, col)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(span: str):
        nonlocal line, col
        newlines = span.count("\n")
        if newlines:
            line += newlines
            col = len(span) - span.rfind("\n")
        else:
            col += len(span)

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(ch)
            i += 1
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            end = n if end < 0 else end
            advance(text[i:end])
            i = end
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated comment", (line, col))
            advance(text[i:end + 2])
            i = end + 2
            continue
        pos = (line, col)
        if ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise LexError("unterminated string literal", pos)
            literal = text[i + 1:end]
            tokens.append(Token("str", literal, pos))
            advance(text[i:end + 1])
            i = end + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER_RE.match(text, i)
            tokens.append(Token("num", m.group(0), pos))
            advance(m.group(0))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            if word == "_":
                kind = "anon"
            elif word in KEYWORDS:
                kind = "keyword"
            else:
                kind = "ident"
            tokens.append(Token(kind, word, pos))
            advance(word)
            i = m.end()
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, pos))
                advance(op)
                i += len(op)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", pos)
    tokens.append(Token("eof", "", (line, col)))
    return tokens
