"""Lexer and recursive-descent parser for the skill language.

Total: any input either parses to a Program or raises SkillSyntaxError with a
line, column and what was expected. Nothing else escapes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import nodes as n

KEYWORDS = {
    "skill", "doc", "let", "if", "elif", "else", "for", "in", "match", "case",
    "return", "raise", "true", "false", "and", "or", "not", "list",
}

_MAX_DEPTH = 200


class SkillSyntaxError(Exception):
    """Parse failure with position and expectation."""

    def __init__(self, message: str, line: int, col: int, expected: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f"{message} at line {line}, column {col}")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, number, string, op, eof
    text: str
    value: object
    line: int
    col: int


_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = "()[]{}<>=+-*/%.,:"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    length = len(source)
    while i < length:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < length and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isdigit() or (ch == "." and i + 1 < length and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            seen_exp = False
            while j < length:
                c = source[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j > i:
                    seen_exp = True
                    j += 1
                    if j < length and source[j] in "+-":
                        j += 1
                else:
                    break
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise SkillSyntaxError(f"bad number literal {text!r}", start_line, start_col, "number")
            tokens.append(Token("number", text, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < length and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            tokens.append(Token("ident", text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while True:
                if j >= length:
                    raise SkillSyntaxError("unterminated string", start_line, start_col, '"')
                c = source[j]
                if c == "\n":
                    raise SkillSyntaxError("unterminated string", start_line, start_col, '"')
                if c == "\\":
                    if j + 1 >= length:
                        raise SkillSyntaxError("unterminated escape", start_line, start_col, "escape")
                    esc = source[j + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise SkillSyntaxError(
                            f"unknown escape \\{esc}", line, col + (j - i), "escape"
                        )
                    out.append(mapped)
                    j += 2
                    continue
                if c == '"':
                    j += 1
                    break
                out.append(c)
                j += 1
            tokens.append(Token("string", source[i:j], "".join(out), start_line, start_col))
            col += j - i
            i = j
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("op", ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise SkillSyntaxError(f"unexpected character {ch!r}", start_line, start_col, "token")
    tokens.append(Token("eof", "", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- token plumbing ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _check_op(self, text: str) -> bool:
        return self.cur.kind == "op" and self.cur.text == text

    def _check_kw(self, word: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text == word

    def _expect_op(self, text: str) -> Token:
        if not self._check_op(text):
            raise SkillSyntaxError(
                f"expected {text!r}, found {self.cur.text or self.cur.kind!r}",
                self.cur.line,
                self.cur.col,
                text,
            )
        return self._advance()

    def _expect_kw(self, word: str) -> Token:
        if not self._check_kw(word):
            raise SkillSyntaxError(
                f"expected {word!r}, found {self.cur.text or self.cur.kind!r}",
                self.cur.line,
                self.cur.col,
                word,
            )
        return self._advance()

    def _expect_ident(self, what: str = "identifier") -> Token:
        tok = self.cur
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise SkillSyntaxError(
                f"expected {what}, found {tok.text or tok.kind!r}", tok.line, tok.col, what
            )
        return self._advance()

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            tok = self.cur
            raise SkillSyntaxError("nesting too deep", tok.line, tok.col, "shallower nesting")

    def _exit(self) -> None:
        self.depth -= 1

    # -- grammar ----------------------------------------------------------------

    def program(self) -> n.Program:
        skills: list[n.SkillDef] = []
        statements: list[n.Stmt] = []
        names: set[str] = set()
        while self.cur.kind != "eof":
            if self._check_kw("skill"):
                skill = self.skill_def()
                if skill.name in names:
                    raise SkillSyntaxError(
                        f"duplicate skill name {skill.name!r}", skill.line, skill.col, "unique name"
                    )
                names.add(skill.name)
                skills.append(skill)
            else:
                statements.append(self.statement())
        return n.Program(skills=skills, statements=statements)

    def skill_def(self) -> n.SkillDef:
        kw = self._expect_kw("skill")
        name = self._expect_ident("skill name")
        self._expect_op("(")
        params: list[n.Param] = []
        seen: set[str] = set()
        if not self._check_op(")"):
            while True:
                params.append(self.param(seen))
                if self._check_op(","):
                    self._advance()
                    continue
                break
        self._expect_op(")")
        self._expect_kw("doc")
        doc_tok = self.cur
        if doc_tok.kind != "string":
            raise SkillSyntaxError("expected docstring", doc_tok.line, doc_tok.col, "string")
        self._advance()
        if not str(doc_tok.value).strip():
            raise SkillSyntaxError("docstring must be nonempty", doc_tok.line, doc_tok.col, "text")
        body = self.block()
        return n.SkillDef(
            name=name.text,
            params=params,
            docstring=str(doc_tok.value),
            body=body,
            line=kw.line,
            col=kw.col,
        )

    def param(self, seen: set[str]) -> n.Param:
        name = self._expect_ident("parameter name")
        if name.text in seen:
            raise SkillSyntaxError(
                f"duplicate parameter {name.text!r}", name.line, name.col, "unique name"
            )
        seen.add(name.text)
        self._expect_op(":")
        type_str = self.type_name()
        default: Optional[n.Expr] = None
        if self._check_op("="):
            self._advance()
            default = self.literal()
        return n.Param(name=name.text, type=type_str, default=default)

    def type_name(self) -> str:
        tok = self.cur
        if tok.kind != "ident":
            raise SkillSyntaxError("expected type", tok.line, tok.col, "type")
        if tok.text == "list":
            self._advance()
            self._expect_op("<")
            inner = self.type_name()
            self._expect_op(">")
            return f"list<{inner}>"
        if tok.text not in n.VALUE_TYPE_NAMES:
            raise SkillSyntaxError(f"unknown type {tok.text!r}", tok.line, tok.col, "type")
        self._advance()
        return tok.text

    def literal(self) -> n.Expr:
        tok = self.cur
        if tok.kind == "number":
            self._advance()
            return n.Num(float(tok.value), tok.line, tok.col)
        if tok.kind == "string":
            self._advance()
            return n.Str(str(tok.value), tok.line, tok.col)
        if self._check_kw("true") or self._check_kw("false"):
            self._advance()
            return n.Bool(tok.text == "true", tok.line, tok.col)
        if self._check_op("-"):
            self._advance()
            num = self.cur
            if num.kind != "number":
                raise SkillSyntaxError("expected number after '-'", num.line, num.col, "number")
            self._advance()
            return n.Num(-float(num.value), tok.line, tok.col)
        if self._check_op("["):
            self._advance()
            items: list[n.Expr] = []
            if not self._check_op("]"):
                while True:
                    items.append(self.literal())
                    if self._check_op(","):
                        self._advance()
                        continue
                    break
            self._expect_op("]")
            return n.ListLit(items, tok.line, tok.col)
        raise SkillSyntaxError("expected literal default", tok.line, tok.col, "literal")

    def block(self) -> list[n.Stmt]:
        self._enter()
        try:
            self._expect_op("{")
            body: list[n.Stmt] = []
            while not self._check_op("}"):
                if self.cur.kind == "eof":
                    raise SkillSyntaxError(
                        "unterminated block", self.cur.line, self.cur.col, "}"
                    )
                body.append(self.statement())
            self._expect_op("}")
            return body
        finally:
            self._exit()

    def statement(self) -> n.Stmt:
        tok = self.cur
        if self._check_kw("let"):
            self._advance()
            name = self._expect_ident("variable name")
            self._expect_op("=")
            value = self.expression()
            return n.Let(name.text, value, tok.line, tok.col)
        if self._check_kw("if"):
            return self.if_stmt()
        if self._check_kw("for"):
            self._advance()
            var = self._expect_ident("loop variable")
            self._expect_kw("in")
            iterable = self.expression()
            body = self.block()
            return n.For(var.text, iterable, body, tok.line, tok.col)
        if self._check_kw("match"):
            return self.match_stmt()
        if self._check_kw("return"):
            self._advance()
            if self._check_op("}"):
                return n.Return(None, tok.line, tok.col)
            return n.Return(self.expression(), tok.line, tok.col)
        if self._check_kw("raise"):
            self._advance()
            return n.Raise(self.expression(), tok.line, tok.col)
        if self._check_kw("skill"):
            raise SkillSyntaxError(
                "skill definitions cannot be nested", tok.line, tok.col, "statement"
            )
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "op" and nxt.text == "=":
                self._advance()
                self._advance()
                value = self.expression()
                return n.Assign(tok.text, value, tok.line, tok.col)
            if nxt.kind == "op" and nxt.text == "(":
                call = self.call_expr()
                return n.ExprStmt(call, tok.line, tok.col)
            raise SkillSyntaxError(
                f"expected statement, found bare {tok.text!r}", tok.line, tok.col, "'=' or '('"
            )
        raise SkillSyntaxError(
            f"expected statement, found {tok.text or tok.kind!r}", tok.line, tok.col, "statement"
        )

    def if_stmt(self) -> n.If:
        tok = self._expect_kw("if")
        branches: list[tuple[n.Expr, list[n.Stmt]]] = []
        cond = self.expression()
        branches.append((cond, self.block()))
        orelse: Optional[list[n.Stmt]] = None
        while self._check_kw("elif"):
            self._advance()
            cond = self.expression()
            branches.append((cond, self.block()))
        if self._check_kw("else"):
            self._advance()
            orelse = self.block()
        return n.If(branches, orelse, tok.line, tok.col)

    def match_stmt(self) -> n.Match:
        tok = self._expect_kw("match")
        subject = self.expression()
        self._expect_op("{")
        cases: list[tuple[str, list[n.Stmt]]] = []
        default: Optional[list[n.Stmt]] = None
        while not self._check_op("}"):
            if self._check_kw("case"):
                self._advance()
                lit = self.cur
                if lit.kind != "string":
                    raise SkillSyntaxError(
                        "match cases are string literals", lit.line, lit.col, "string"
                    )
                self._advance()
                cases.append((str(lit.value), self.block()))
            elif self._check_kw("else"):
                if default is not None:
                    raise SkillSyntaxError(
                        "duplicate else in match", self.cur.line, self.cur.col, "}"
                    )
                self._advance()
                default = self.block()
            else:
                raise SkillSyntaxError(
                    "expected 'case' or 'else'", self.cur.line, self.cur.col, "case"
                )
        self._expect_op("}")
        return n.Match(subject, cases, default, tok.line, tok.col)

    # -- expressions ------------------------------------------------------------

    def expression(self) -> n.Expr:
        self._enter()
        try:
            return self.or_expr()
        finally:
            self._exit()

    def or_expr(self) -> n.Expr:
        left = self.and_expr()
        while self._check_kw("or"):
            tok = self._advance()
            right = self.and_expr()
            left = n.Binary("or", left, right, tok.line, tok.col)
        return left

    def and_expr(self) -> n.Expr:
        left = self.not_expr()
        while self._check_kw("and"):
            tok = self._advance()
            right = self.not_expr()
            left = n.Binary("and", left, right, tok.line, tok.col)
        return left

    def not_expr(self) -> n.Expr:
        if self._check_kw("not"):
            tok = self._advance()
            self._enter()
            try:
                operand = self.not_expr()
            finally:
                self._exit()
            return n.Unary("not", operand, tok.line, tok.col)
        return self.comparison()

    def comparison(self) -> n.Expr:
        left = self.additive()
        if self.cur.kind == "op" and self.cur.text in ("==", "!=", "<", "<=", ">", ">="):
            tok = self._advance()
            right = self.additive()
            return n.Binary(tok.text, left, right, tok.line, tok.col)
        return left

    def additive(self) -> n.Expr:
        left = self.term()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            tok = self._advance()
            right = self.term()
            left = n.Binary(tok.text, left, right, tok.line, tok.col)
        return left

    def term(self) -> n.Expr:
        left = self.unary()
        while self.cur.kind == "op" and self.cur.text in ("*", "/", "%"):
            tok = self._advance()
            right = self.unary()
            left = n.Binary(tok.text, left, right, tok.line, tok.col)
        return left

    def unary(self) -> n.Expr:
        if self._check_op("-"):
            tok = self._advance()
            self._enter()
            try:
                operand = self.unary()
            finally:
                self._exit()
            if isinstance(operand, n.Num):
                # fold so "-3" round-trips as a literal
                return n.Num(-operand.value, tok.line, tok.col)
            return n.Unary("-", operand, tok.line, tok.col)
        return self.postfix()

    def postfix(self) -> n.Expr:
        expr = self.primary()
        while True:
            if self._check_op("."):
                self._advance()
                name = self.cur
                if name.kind != "ident":
                    raise SkillSyntaxError(
                        "expected field name", name.line, name.col, "field"
                    )
                self._advance()
                expr = n.Field(expr, name.text, name.line, name.col)
                continue
            if self._check_op("["):
                tok = self._advance()
                lo: Optional[n.Expr] = None
                hi: Optional[n.Expr] = None
                if self._check_op(":"):
                    self._advance()
                    if not self._check_op("]"):
                        hi = self.expression()
                    self._expect_op("]")
                    expr = n.Slice(expr, lo, hi, tok.line, tok.col)
                    continue
                first = self.expression()
                if self._check_op(":"):
                    self._advance()
                    if not self._check_op("]"):
                        hi = self.expression()
                    self._expect_op("]")
                    expr = n.Slice(expr, first, hi, tok.line, tok.col)
                    continue
                self._expect_op("]")
                expr = n.Index(expr, first, tok.line, tok.col)
                continue
            break
        return expr

    def primary(self) -> n.Expr:
        tok = self.cur
        if tok.kind == "number":
            self._advance()
            return n.Num(float(tok.value), tok.line, tok.col)
        if tok.kind == "string":
            self._advance()
            return n.Str(str(tok.value), tok.line, tok.col)
        if self._check_kw("true") or self._check_kw("false"):
            self._advance()
            return n.Bool(tok.text == "true", tok.line, tok.col)
        if self._check_op("("):
            self._advance()
            inner = self.expression()
            self._expect_op(")")
            return inner
        if self._check_op("["):
            self._advance()
            items: list[n.Expr] = []
            if not self._check_op("]"):
                while True:
                    items.append(self.expression())
                    if self._check_op(","):
                        self._advance()
                        continue
                    break
            self._expect_op("]")
            return n.ListLit(items, tok.line, tok.col)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "op" and nxt.text == "(":
                return self.call_expr()
            self._advance()
            return n.Name(tok.text, tok.line, tok.col)
        raise SkillSyntaxError(
            f"expected expression, found {tok.text or tok.kind!r}",
            tok.line,
            tok.col,
            "expression",
        )

    def call_expr(self) -> n.Call:
        name = self._expect_ident("function name")
        self._expect_op("(")
        args: list[n.Expr] = []
        if not self._check_op(")"):
            while True:
                args.append(self.expression())
                if self._check_op(","):
                    self._advance()
                    continue
                break
        self._expect_op(")")
        return n.Call(name.text, args, name.line, name.col)


def parse(source: str) -> n.Program:
    """Parse UTF-8 text into a Program or raise SkillSyntaxError."""
    if not isinstance(source, str):
        raise SkillSyntaxError("source must be text", 1, 1, "text")
    try:
        return _Parser(tokenize(source)).program()
    except SkillSyntaxError:
        raise
    except RecursionError:
        raise SkillSyntaxError("nesting too deep", 1, 1, "shallower nesting") from None
    except Exception as exc:  # totality: no other exception escapes the parser
        raise SkillSyntaxError(f"internal parse failure: {exc}", 1, 1, "valid program") from exc


def parse_skill(source: str) -> n.SkillDef:
    """Parse a source containing exactly one skill definition and nothing else."""
    program = parse(source)
    if len(program.skills) != 1 or program.statements:
        raise SkillSyntaxError("expected exactly one skill definition", 1, 1, "skill")
    return program.skills[0]
