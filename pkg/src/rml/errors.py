"""Error types shared across the interpreter.

Every user-visible failure is an RmlError.  Errors that can be pinned to a
place in the program carry a (line, column) position; the CLI renders them
as ``file:line:col: message``.
"""

from __future__ import annotations

OUT_OF_MEMORY_MESSAGE = "Error: BDD package out of memory."


class RmlError(Exception):
    def __init__(self, message: str, pos=None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def render(self, filename: str | None = None) -> str:
        if self.pos is not None:
            line, col = self.pos
            prefix = f"{filename}:" if filename else ""
            return f"{prefix}{line}:{col}: {self.message}"
        return self.message


class RsfError(RmlError):
    """Malformed RSF input (carries the 1-based input line number)."""

    def __init__(self, message: str, line: int):
        super().__init__(f"RSF line {line}: {message}")
        self.line = line


class LexError(RmlError):
    pass


class RmlParseError(RmlError):
    pass


class StaticError(RmlError):
    """Violated context condition or identifier-kind conflict."""


class RmlRuntimeError(RmlError):
    pass


class BddInternalError(RmlError):
    """Broken engine invariant (ordering violation etc.); always a bug."""


class BddOutOfMemoryError(RmlError):
    """Node arena exhausted even after garbage collection."""

    def __init__(self):
        super().__init__(OUT_OF_MEMORY_MESSAGE)
