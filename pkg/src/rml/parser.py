"""Recursive-descent parser for RML.

Operator precedence, from low to high: comparisons; -> and <->; |; &; !;
binary + and -; * / DIV MOD; ^; unary -; $.  Comparisons between terms
or numerical expressions form atomic relational expressions (they cannot
apply to a bare attribute chain), while comparisons between relational
expressions bind loosest; the parser resolves the overlap by trying the
value-expression reading of an operand first and falling back to the
relational reading.  Comparisons do not chain.
"""

from __future__ import annotations

from . import ast
from .errors import RmlParseError
from .lexer import Token, tokenize

CMP_OPS = ("=", "!=", "<=", "<", ">=", ">")

_PREDEFINED = {"TRUE": True, "FALSE": False}


def parse_program(source: str) -> ast.Program:
    return Parser(tokenize(source)).parse_program()


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token plumbing -------------------------------------------------

    def tok(self, ahead: int = 0) -> Token:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok()
        return t.kind == kind and (text is None or t.text == text)

    def at_op(self, text: str) -> bool:
        return self.at("op", text)

    def at_keyword(self, text: str) -> bool:
        return self.at("keyword", text)

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.error(f"expected '{text}'")
        return self.advance()

    def expect_keyword(self, text: str) -> Token:
        if not self.at_keyword(text):
            raise self.error(f"expected '{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if not self.at("ident"):
            raise self.error("expected an identifier")
        return self.advance()

    def error(self, message: str) -> RmlParseError:
        t = self.tok()
        found = t.text if t.kind != "eof" else "end of input"
        return RmlParseError(f"{message}, found {found!r}", t.pos)

    def _try(self, fn):
        mark = self.i
        try:
            return fn()
        except RmlParseError:
            self.i = mark
            return None

    # -- program and statements ------------------------------------------

    def parse_program(self) -> ast.Program:
        body = []
        while not self.at("eof"):
            body.append(self.parse_stmt())
        return ast.Program(body, pos=(1, 1))

    def parse_block(self) -> list:
        self.expect_op("{")
        body = []
        while not self.at_op("}"):
            if self.at("eof"):
                raise self.error("expected '}'")
            body.append(self.parse_stmt())
        self.advance()
        return body

    def parse_stmt(self) -> ast.Node:
        t = self.tok()
        if t.kind == "keyword":
            if t.text == "IF":
                self.advance()
                cond = self.parse_rel()
                then = self.parse_block()
                orelse = None
                if self.at_keyword("ELSE"):
                    self.advance()
                    orelse = self.parse_block()
                return ast.If(cond, then, orelse, pos=t.pos)
            if t.text == "WHILE":
                self.advance()
                cond = self.parse_rel()
                return ast.While(cond, self.parse_block(), pos=t.pos)
            if t.text == "FOR":
                self.advance()
                var = self.expect_ident().text
                self.expect_keyword("IN")
                expr = self.parse_rel()
                return ast.For(var, expr, self.parse_block(), pos=t.pos)
            if t.text == "PRINT":
                self.advance()
                return self.parse_print(t.pos)
            if t.text == "EXEC":
                self.advance()
                command = self.parse_value()
                self.expect_op(";")
                return ast.Exec(command, pos=t.pos)
            if t.text == "EXIT":
                self.advance()
                status = self.parse_value()
                self.expect_op(";")
                return ast.Exit(status, pos=t.pos)
            raise self.error("expected a statement")
        if t.kind == "op" and t.text == "{":
            return ast.Block(self.parse_block(), pos=t.pos)
        if t.kind == "ident":
            if self.tok(1).kind == "op" and self.tok(1).text == "(":
                name = self.advance().text
                self.advance()
                terms = self.parse_term_list()
                if self.at_op(":="):
                    self.advance()
                    rhs = self.parse_rel()
                    self.expect_op(";")
                    return ast.RelAssign(name, terms, rhs, pos=t.pos)
                self.expect_op(";")
                # fact: shortcut for an assignment of TRUE over the same terms
                rhs = ast.Predef(True, list(terms), pos=t.pos)
                return ast.RelAssign(name, terms, rhs, pos=t.pos)
            if self.tok(1).kind == "op" and self.tok(1).text == ":=":
                name = self.advance().text
                self.advance()
                rhs = self.parse_value()
                self.expect_op(";")
                return ast.VarAssign(name, rhs, pos=t.pos)
        raise self.error("expected a statement")

    def parse_print(self, pos) -> ast.Print:
        items = [self.parse_print_item()]
        while self.at_op(","):
            self.advance()
            items.append(self.parse_print_item())
        sink = None
        if self.at_keyword("TO"):
            self.advance()
            if self.at_keyword("STDERR"):
                self.advance()
                sink = "stderr"
            else:
                sink = self.parse_value()
        self.expect_op(";")
        return ast.Print(items, sink, pos=pos)

    def parse_print_item(self) -> ast.Node:
        t = self.tok()
        if self.at_keyword("ENDL"):
            self.advance()
            return ast.PrintEndl(pos=t.pos)
        if self.at_keyword("RELINFO"):
            self.advance()
            self.expect_op("(")
            rel = self.parse_rel()
            self.expect_op(")")
            return ast.PrintRelInfo(rel, pos=t.pos)
        if self.at_op("["):
            self.advance()
            prefix = self.parse_value()
            self.expect_op("]")
            rel = self.parse_rel()
            return ast.PrintRel(rel, prefix, pos=t.pos)
        rel = self._try(self.parse_rel)
        if rel is not None:
            return ast.PrintRel(rel, None, pos=t.pos)
        return ast.PrintValue(self.parse_value(), pos=t.pos)

    # -- relational expressions -------------------------------------------

    def parse_rel(self) -> ast.Node:
        left = self.parse_rel_implication()
        t = self.tok()
        if t.kind == "op" and t.text in CMP_OPS:
            self.advance()
            right = self.parse_rel_implication()
            node = ast.RelCompare(t.text, left, right, pos=t.pos)
            if self.tok().kind == "op" and self.tok().text in CMP_OPS:
                raise self.error("comparisons do not chain")
            return node
        return left

    def parse_rel_implication(self) -> ast.Node:
        left = self.parse_rel_or()
        while self.at_op("->") or self.at_op("<->"):
            t = self.advance()
            right = self.parse_rel_or()
            left = ast.RelBinary(t.text, left, right, pos=t.pos)
        return left

    def parse_rel_or(self) -> ast.Node:
        left = self.parse_rel_and()
        while self.at_op("|"):
            t = self.advance()
            left = ast.RelBinary("|", left, self.parse_rel_and(), pos=t.pos)
        return left

    def parse_rel_and(self) -> ast.Node:
        left = self.parse_rel_not()
        while self.at_op("&"):
            t = self.advance()
            left = ast.RelBinary("&", left, self.parse_rel_not(), pos=t.pos)
        return left

    def parse_rel_not(self) -> ast.Node:
        if self.at_op("!"):
            t = self.advance()
            return ast.RelNot(self.parse_rel_not(), pos=t.pos)
        return self.parse_rel_atom()

    def parse_rel_atom(self) -> ast.Node:
        t = self.tok()
        if t.kind == "keyword" and t.text in ("EX", "FA"):
            self.advance()
            self.expect_op("(")
            names = []
            while self.at("ident") and self.tok(1).kind == "op" \
                    and self.tok(1).text == ",":
                names.append(self.advance().text)
                self.advance()
            if not names:
                raise self.error(f"expected an attribute after {t.text}(")
            body = self.parse_rel()
            self.expect_op(")")
            for name in reversed(names):
                body = ast.Quantifier(t.text, name, body, pos=t.pos)
            return body
        if t.kind == "keyword" and t.text in ("TC", "TCFAST"):
            self.advance()
            self.expect_op("(")
            operand = self.parse_rel()
            self.expect_op(")")
            return ast.Closure(t.text, operand, pos=t.pos)
        if t.kind == "op" and t.text == "@":
            self.advance()
            pattern = self.parse_value()
            self.expect_op("(")
            term = self.parse_term()
            self.expect_op(")")
            return ast.RegexTest(pattern, term, pos=t.pos)
        if t.kind == "op" and t.text in CMP_OPS:
            # prefix form of the predefined order relations
            self.advance()
            self.expect_op("(")
            left = self.parse_term()
            self.expect_op(",")
            right = self.parse_term()
            self.expect_op(")")
            return ast.TermCompare(t.text, left, right, pos=t.pos)
        if t.kind == "ident" and self.tok(1).kind == "op" \
                and self.tok(1).text == "(":
            name = self.advance().text
            self.advance()
            terms = self.parse_term_list()
            if name in _PREDEFINED:
                return ast.Predef(_PREDEFINED[name], terms, pos=t.pos)
            return ast.Atom(name, terms, pos=t.pos)
        if t.kind == "anon":
            self.advance()
            return self._finish_term_led_atom(ast.Anon(pos=t.pos), t.pos)
        node = self._try(self._value_led_atom)
        if node is not None:
            return node
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_rel()
            self.expect_op(")")
            return inner
        raise self.error("expected a relational expression")

    def _value_led_atom(self) -> ast.Node:
        pos = self.tok().pos
        value = self.parse_value()
        return self._finish_term_led_atom(value, pos)

    def _finish_term_led_atom(self, first, pos) -> ast.Node:
        t = self.tok()
        if t.kind == "op" and t.text in CMP_OPS:
            self.advance()
            right = self.parse_term()
            return ast.TermCompare(t.text, first, right, pos=t.pos)
        if t.kind == "ident":
            # infix atom: term rel_var term
            name = self.advance().text
            second = self.parse_term()
            if name in _PREDEFINED:
                return ast.Predef(_PREDEFINED[name], [first, second], pos=pos)
            return ast.Atom(name, [first, second], pos=pos)
        raise self.error("expected a relational expression")

    def parse_term_list(self) -> list:
        terms = []
        if not self.at_op(")"):
            terms.append(self.parse_term())
            while self.at_op(","):
                self.advance()
                terms.append(self.parse_term())
        self.expect_op(")")
        return terms

    def parse_term(self) -> ast.Node:
        if self.at("anon"):
            t = self.advance()
            return ast.Anon(pos=t.pos)
        return self.parse_value()

    # -- string / numerical expressions -------------------------------------

    def parse_value(self) -> ast.Node:
        left = self.parse_mul()
        while self.at_op("+") or self.at_op("-"):
            t = self.advance()
            left = ast.BinaryValue(t.text, left, self.parse_mul(), pos=t.pos)
        return left

    def parse_mul(self) -> ast.Node:
        left = self.parse_pow()
        while True:
            t = self.tok()
            if t.kind == "op" and t.text in ("*", "/"):
                self.advance()
                left = ast.BinaryValue(t.text, left, self.parse_pow(), pos=t.pos)
            elif t.kind == "keyword" and t.text in ("DIV", "MOD"):
                self.advance()
                left = ast.BinaryValue(t.text, left, self.parse_pow(), pos=t.pos)
            else:
                return left

    def parse_pow(self) -> ast.Node:
        base = self.parse_unary()
        if self.at_op("^"):
            t = self.advance()
            return ast.BinaryValue("^", base, self.parse_pow(), pos=t.pos)
        return base

    def parse_unary(self) -> ast.Node:
        if self.at_op("-"):
            t = self.advance()
            return ast.Negative(self.parse_unary(), pos=t.pos)
        return self.parse_dollar()

    def parse_dollar(self) -> ast.Node:
        if self.at_op("$"):
            t = self.advance()
            return ast.ArgRef(self.parse_dollar(), pos=t.pos)
        return self.parse_primary()

    def parse_primary(self) -> ast.Node:
        t = self.tok()
        if t.kind == "num":
            self.advance()
            return ast.NumLit(float(t.text), t.text, pos=t.pos)
        if t.kind == "str":
            self.advance()
            return ast.StrLit(t.text, pos=t.pos)
        if t.kind == "ident":
            self.advance()
            return ast.Name(t.text, pos=t.pos)
        if t.kind == "keyword":
            if t.text == "NUMBER":
                self.advance()
                self.expect_op("(")
                inner = self.parse_value()
                self.expect_op(")")
                return ast.NumberOf(inner, pos=t.pos)
            if t.text == "STRING":
                self.advance()
                self.expect_op("(")
                inner = self.parse_value()
                self.expect_op(")")
                return ast.StringOf(inner, pos=t.pos)
            if t.text in ("MIN", "MAX", "SUM", "AVG"):
                self.advance()
                self.expect_op("(")
                rel = self.parse_rel()
                self.expect_op(")")
                return ast.AggregateOf(t.text, rel, pos=t.pos)
        if t.kind == "op" and t.text == "#":
            self.advance()
            self.expect_op("(")
            rel = self.parse_rel()
            self.expect_op(")")
            return ast.CardinalityOf(rel, pos=t.pos)
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_value()
            self.expect_op(")")
            return inner
        raise self.error("expected an expression")
