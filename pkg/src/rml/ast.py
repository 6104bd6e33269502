"""AST node types and an unparser.

Value expressions (string / numerical / attribute positions) share one
node family; the analysis pass fills in their kind, since RML determines
an identifier's kind at its first occurrence rather than syntactically.
Node equality ignores positions and analysis annotations, so a tree can
be unparsed and reparsed to an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


def _pos_field():
    return field(default=None, compare=False, repr=False)


def _anno_field():
    return field(default=None, compare=False, repr=False)


@dataclass
class Node:
    pass


# ---------------------------------------------------------------------
# value expressions (kind in {'str', 'num', 'attr'} after analysis)

@dataclass
class StrLit(Node):
    text: str
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class NumLit(Node):
    value: float
    text: str
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class Name(Node):
    name: str
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class BinaryValue(Node):
    op: str  # + - * / DIV MOD ^   ('+' concatenates when kind is 'str')
    left: Node
    right: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class Negative(Node):
    operand: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class ArgRef(Node):
    index: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class StringOf(Node):
    operand: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class NumberOf(Node):
    operand: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class CardinalityOf(Node):
    rel: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class AggregateOf(Node):
    func: str  # MIN MAX SUM AVG
    rel: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class Anon(Node):
    """The anonymous term ``_``."""
    pos: tuple = _pos_field()


# ---------------------------------------------------------------------
# relational expressions

@dataclass
class Atom(Node):
    name: str
    terms: list
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class Predef(Node):
    value: bool  # TRUE / FALSE
    terms: list
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class RelNot(Node):
    operand: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class RelBinary(Node):
    op: str  # & | -> <->
    left: Node
    right: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class Quantifier(Node):
    op: str  # EX FA
    attr: str
    body: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class Closure(Node):
    op: str  # TC TCFAST
    operand: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class RegexTest(Node):
    pattern: Node  # string expression
    term: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class TermCompare(Node):
    """~(term, term) or ~(num, num); mode 'lex' or 'num' after analysis."""
    op: str
    left: Node
    right: Node
    pos: tuple = _pos_field()
    mode: Optional[str] = _anno_field()
    free: Optional[frozenset] = _anno_field()


@dataclass
class RelCompare(Node):
    op: str
    left: Node
    right: Node
    pos: tuple = _pos_field()
    free: Optional[frozenset] = _anno_field()


# ---------------------------------------------------------------------
# statements

@dataclass
class RelAssign(Node):
    name: str
    lhs_terms: list
    rhs: Node
    pos: tuple = _pos_field()


@dataclass
class VarAssign(Node):
    """str_var or num_var assignment; kind resolved by analysis."""
    name: str
    rhs: Node
    pos: tuple = _pos_field()
    kind: Optional[str] = _anno_field()


@dataclass
class If(Node):
    cond: Node
    then: list
    orelse: Optional[list]
    pos: tuple = _pos_field()


@dataclass
class While(Node):
    cond: Node
    body: list
    pos: tuple = _pos_field()


@dataclass
class For(Node):
    var: str
    expr: Node
    body: list
    pos: tuple = _pos_field()


@dataclass
class PrintRel(Node):
    rel: Node
    prefix: Optional[Node]
    pos: tuple = _pos_field()


@dataclass
class PrintValue(Node):
    value: Node
    pos: tuple = _pos_field()


@dataclass
class PrintEndl(Node):
    pos: tuple = _pos_field()


@dataclass
class PrintRelInfo(Node):
    rel: Node
    pos: tuple = _pos_field()


@dataclass
class Print(Node):
    items: list
    sink: object  # None (stdout), 'stderr', or a string expression node
    pos: tuple = _pos_field()


@dataclass
class Exec(Node):
    command: Node
    pos: tuple = _pos_field()


@dataclass
class Exit(Node):
    status: Node
    pos: tuple = _pos_field()


@dataclass
class Block(Node):
    body: list
    pos: tuple = _pos_field()


@dataclass
class Program(Node):
    body: list
    pos: tuple = _pos_field()


# ---------------------------------------------------------------------
# unparser: emits fully parenthesized source that reparses to an equal tree

def unparse(node) -> str:
    u = unparse
    if isinstance(node, Program):
        return "".join(u(s) for s in node.body)
    if isinstance(node, StrLit):
        return f'"{node.text}"'
    if isinstance(node, NumLit):
        return node.text
    if isinstance(node, Name):
        return node.name
    if isinstance(node, BinaryValue):
        return f"({u(node.left)} {node.op} {u(node.right)})"
    if isinstance(node, Negative):
        return f"(- {u(node.operand)})"
    if isinstance(node, ArgRef):
        return f"($ {u(node.index)})"
    if isinstance(node, StringOf):
        return f"STRING({u(node.operand)})"
    if isinstance(node, NumberOf):
        return f"NUMBER({u(node.operand)})"
    if isinstance(node, CardinalityOf):
        return f"#({u(node.rel)})"
    if isinstance(node, AggregateOf):
        return f"{node.func}({u(node.rel)})"
    if isinstance(node, Anon):
        return "_"
    if isinstance(node, Atom):
        return f"{node.name}({', '.join(u(t) for t in node.terms)})"
    if isinstance(node, Predef):
        name = "TRUE" if node.value else "FALSE"
        return f"{name}({', '.join(u(t) for t in node.terms)})"
    if isinstance(node, RelNot):
        return f"(! {u(node.operand)})"
    if isinstance(node, RelBinary):
        return f"({u(node.left)} {node.op} {u(node.right)})"
    if isinstance(node, Quantifier):
        return f"{node.op}({node.attr}, {u(node.body)})"
    if isinstance(node, Closure):
        return f"{node.op}({u(node.operand)})"
    if isinstance(node, RegexTest):
        return f"@{u(node.pattern)}({u(node.term)})"
    if isinstance(node, (TermCompare, RelCompare)):
        return f"({u(node.left)} {node.op} {u(node.right)})"
    if isinstance(node, RelAssign):
        lhs = ", ".join(u(t) for t in node.lhs_terms)
        return f"{node.name}({lhs}) := {u(node.rhs)};\n"
    if isinstance(node, VarAssign):
        return f"{node.name} := {u(node.rhs)};\n"
    if isinstance(node, If):
        text = f"IF {u(node.cond)} {{\n{_block(node.then)}}}"
        if node.orelse is not None:
            text += f" ELSE {{\n{_block(node.orelse)}}}"
        return text + "\n"
    if isinstance(node, While):
        return f"WHILE {u(node.cond)} {{\n{_block(node.body)}}}\n"
    if isinstance(node, For):
        return f"FOR {node.var} IN {u(node.expr)} {{\n{_block(node.body)}}}\n"
    if isinstance(node, Print):
        items = ", ".join(u(i) for i in node.items)
        if node.sink is None:
            return f"PRINT {items};\n"
        if node.sink == "stderr":
            return f"PRINT {items} TO STDERR;\n"
        return f"PRINT {items} TO {u(node.sink)};\n"
    if isinstance(node, PrintRel):
        if node.prefix is None:
            return u(node.rel)
        return f"[{u(node.prefix)}] {u(node.rel)}"
    if isinstance(node, PrintValue):
        return u(node.value)
    if isinstance(node, PrintEndl):
        return "ENDL"
    if isinstance(node, PrintRelInfo):
        return f"RELINFO({u(node.rel)})"
    if isinstance(node, Exec):
        return f"EXEC {u(node.command)};\n"
    if isinstance(node, Exit):
        return f"EXIT {u(node.status)};\n"
    if isinstance(node, Block):
        return f"{{\n{_block(node.body)}}}\n"
    raise TypeError(f"cannot unparse {type(node).__name__}")


def _block(stmts) -> str:
    return "".join(unparse(s) for s in stmts)
