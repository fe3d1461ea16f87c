"""Canonical pretty-printer for the skill language.

format() is deterministic and idempotent; parsing its output yields a
structurally equal AST. Stored skills, diffs and golden files all use this
single layout.
"""

from __future__ import annotations

from . import nodes as n

_INDENT = "    "

# precedence: or < and < not < comparison < additive < multiplicative < unary- < postfix
_BIN_PREC = {
    "or": 1,
    "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = {"not": 3, "-": 7}
_ATOM_PREC = 9


def format_number(value: float) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("non-finite number in AST")
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def format_string(value: str) -> str:
    out = ['"']
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _prec(expr: n.Expr) -> int:
    if isinstance(expr, n.Binary):
        return _BIN_PREC[expr.op]
    if isinstance(expr, n.Unary):
        return _UNARY_PREC[expr.op]
    return _ATOM_PREC


def format_expr(expr: n.Expr) -> str:
    if isinstance(expr, n.Num):
        return format_number(expr.value)
    if isinstance(expr, n.Str):
        return format_string(expr.value)
    if isinstance(expr, n.Bool):
        return "true" if expr.value else "false"
    if isinstance(expr, n.ListLit):
        return "[" + ", ".join(format_expr(item) for item in expr.items) + "]"
    if isinstance(expr, n.Name):
        return expr.ident
    if isinstance(expr, n.Field):
        return f"{_format_postfix_base(expr.base)}.{expr.name}"
    if isinstance(expr, n.Index):
        return f"{_format_postfix_base(expr.base)}[{format_expr(expr.index)}]"
    if isinstance(expr, n.Slice):
        lo = format_expr(expr.lo) if expr.lo is not None else ""
        hi = format_expr(expr.hi) if expr.hi is not None else ""
        return f"{_format_postfix_base(expr.base)}[{lo}:{hi}]"
    if isinstance(expr, n.Call):
        return f"{expr.name}(" + ", ".join(format_expr(a) for a in expr.args) + ")"
    if isinstance(expr, n.Unary):
        operand = format_expr(expr.operand)
        if _prec(expr.operand) < _UNARY_PREC[expr.op]:
            operand = f"({operand})"
        return f"not {operand}" if expr.op == "not" else f"-{operand}"
    if isinstance(expr, n.Binary):
        prec = _BIN_PREC[expr.op]
        left = format_expr(expr.left)
        # comparisons are non-associative: a comparison operand always needs
        # parentheses, even on the left
        if _prec(expr.left) < prec or (prec == 4 and _prec(expr.left) == 4):
            left = f"({left})"
        right = format_expr(expr.right)
        if _prec(expr.right) <= prec:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    raise TypeError(f"unknown expression node {expr!r}")


def _format_postfix_base(base: n.Expr) -> str:
    text = format_expr(base)
    if _prec(base) < _ATOM_PREC:
        return f"({text})"
    return text


def _format_block(body: list[n.Stmt], indent: int) -> list[str]:
    lines: list[str] = []
    for stmt in body:
        lines.extend(_format_stmt(stmt, indent))
    return lines


def _format_stmt(stmt: n.Stmt, indent: int) -> list[str]:
    pad = _INDENT * indent
    if isinstance(stmt, n.Let):
        return [f"{pad}let {stmt.name} = {format_expr(stmt.value)}"]
    if isinstance(stmt, n.Assign):
        return [f"{pad}{stmt.name} = {format_expr(stmt.value)}"]
    if isinstance(stmt, n.If):
        lines: list[str] = []
        for i, (cond, body) in enumerate(stmt.branches):
            opener = "if" if i == 0 else "} elif"
            lines.append(f"{pad}{opener} {format_expr(cond)} {{")
            lines.extend(_format_block(body, indent + 1))
        if stmt.orelse is not None:
            lines.append(f"{pad}}} else {{")
            lines.extend(_format_block(stmt.orelse, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, n.For):
        lines = [f"{pad}for {stmt.var} in {format_expr(stmt.iterable)} {{"]
        lines.extend(_format_block(stmt.body, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, n.Match):
        lines = [f"{pad}match {format_expr(stmt.subject)} {{"]
        inner = _INDENT * (indent + 1)
        for literal, body in stmt.cases:
            lines.append(f"{inner}case {format_string(literal)} {{")
            lines.extend(_format_block(body, indent + 2))
            lines.append(f"{inner}}}")
        if stmt.default is not None:
            lines.append(f"{inner}else {{")
            lines.extend(_format_block(stmt.default, indent + 2))
            lines.append(f"{inner}}}")
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, n.Return):
        if stmt.value is None:
            return [f"{pad}return"]
        return [f"{pad}return {format_expr(stmt.value)}"]
    if isinstance(stmt, n.Raise):
        return [f"{pad}raise {format_expr(stmt.value)}"]
    if isinstance(stmt, n.ExprStmt):
        return [f"{pad}{format_expr(stmt.call)}"]
    raise TypeError(f"unknown statement node {stmt!r}")


def _format_params(params: list[n.Param]) -> str:
    parts = []
    for p in params:
        text = f"{p.name}: {p.type}"
        if p.default is not None:
            text += f" = {format_expr(p.default)}"
        parts.append(text)
    return ", ".join(parts)


def format_skill_header(skill: n.SkillDef) -> str:
    return (
        f"skill {skill.name}({_format_params(skill.params)}) "
        f"doc {format_string(skill.docstring)}"
    )


def format_skill(skill: n.SkillDef) -> str:
    lines = [f"{format_skill_header(skill)} {{"]
    lines.extend(_format_block(skill.body, 1))
    lines.append("}")
    return "\n".join(lines)


def format_program(program: n.Program) -> str:
    chunks = [format_skill(s) for s in program.skills]
    if program.statements:
        chunks.append("\n".join(_format_block(program.statements, 0)))
    return "\n\n".join(chunks) + "\n" if chunks else "\n"
