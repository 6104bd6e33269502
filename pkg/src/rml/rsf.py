"""Reading and writing relations in RSF, a line-oriented tuple format.

Each non-comment line holds one tuple: a relation name followed by
whitespace-separated elements.  An element enclosed in double quotes may
contain whitespace; whether an element was quoted is remembered, because
quoted input elements are quoted again on output.  A line starting with
``.`` ends the stream early, a line starting with ``#`` is a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import RmlRuntimeError, RsfError
from .relation import Universe

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_WS = " \t"


@dataclass(frozen=True)
class RsfTuple:
    relation_name: str
    elements: tuple  # of (text, was_quoted) pairs


@dataclass
class RsfStream:
    tuples: list[RsfTuple] = field(default_factory=list)
    terminated_by_dot: bool = False


def _split_line(line: str, lineno: int) -> list[tuple[str, bool]]:
    fields = []
    i = 0
    n = len(line)
    while i < n:
        if line[i] in _WS:
            i += 1
            continue
        if line[i] == '"':
            end = line.find('"', i + 1)
            if end < 0:
                raise RsfError("unterminated quote", lineno)
            fields.append((line[i + 1:end], True))
            i = end + 1
        else:
            j = i
            while j < n and line[j] not in _WS:
                j += 1
            fields.append((line[i:j], False))
            i = j
    return fields


def parse_rsf(source: Iterable[str] | str) -> RsfStream:
    """Parse RSF lines up to end of input or a line starting with a dot.

    Duplicate lines collapse to one tuple; blank and comment lines are
    skipped.  ``source`` is a string or an iterable of lines."""
    if isinstance(source, str):
        source = source.splitlines()
    stream = RsfStream()
    seen = set()
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("."):
            stream.terminated_by_dot = True
            break
        if line.startswith("#"):
            continue
        fields = _split_line(line, lineno)
        if not fields:
            continue
        name = fields[0][0]
        if not IDENTIFIER_RE.match(name):
            raise RsfError(f"invalid relation name {name!r}", lineno)
        tup = RsfTuple(name, tuple(fields[1:]))
        if tup not in seen:
            seen.add(tup)
            stream.tuples.append(tup)
    return stream


def serialize_tuple(prefix: str | None, elements) -> str:
    """One RSF line: optional prefix, then elements single-space
    separated; an element is quoted iff its flag is set or it contains
    whitespace.  Ends with a newline."""
    parts = [prefix] if prefix is not None else []
    for text, quoted in elements:
        if "\n" in text or "\r" in text:
            raise RmlRuntimeError("tuple element contains a line break")
        if quoted or text == "" or any(c in _WS for c in text):
            parts.append(f'"{text}"')
        else:
            parts.append(text)
    return " ".join(parts) + "\n"


def collect_universe(stream: RsfStream, program_lhs_literals) -> Universe:
    """Universe of all tuple elements plus the program's left-hand-side
    string literals, byte-wise sorted; the quote flag of a string is set
    iff some RSF occurrence was quoted."""
    pairs = [(s, False) for s in program_lhs_literals]
    for tup in stream.tuples:
        pairs.extend(tup.elements)
    return Universe(pairs)


def relations_from_stream(stream: RsfStream) -> dict[str, list[tuple]]:
    """Group tuples by relation name; a name used at two arities is an
    error, since a relation variable holds one relation."""
    grouped: dict[str, list[tuple]] = {}
    for tup in stream.tuples:
        row = tuple(text for text, _ in tup.elements)
        rows = grouped.setdefault(tup.relation_name, [])
        if rows and len(rows[0]) != len(row):
            raise RmlRuntimeError(
                f"relation {tup.relation_name} has tuples of different arity "
                f"in the RSF input")
        rows.append(row)
    return grouped


def read_stdin_rsf(stdin) -> Iterator[str]:
    """Line iterator over stdin that stops reading after a dot line, so
    interactive input does not block past the terminator."""
    for line in stdin:
        yield line
        if line.startswith("."):
            return
