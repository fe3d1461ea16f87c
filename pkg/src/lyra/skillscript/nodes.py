"""AST node types for the skill language.

Source positions are carried on every node but excluded from equality, so
reparsing a formatted program compares structurally equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

VALUE_TYPE_NAMES = ("number", "string", "bool", "point", "rotation", "pose", "object")


def _pos_field() -> int:
    return field(default=0, compare=False, repr=False)  # type: ignore[return-value]


# -- expressions ---------------------------------------------------------------


@dataclass
class Num:
    value: float
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Str:
    value: str
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Bool:
    value: bool
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class ListLit:
    items: list["Expr"]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Name:
    ident: str
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Field:
    base: "Expr"
    name: str
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Index:
    base: "Expr"
    index: "Expr"
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Slice:
    base: "Expr"
    lo: Optional["Expr"]
    hi: Optional["Expr"]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Call:
    name: str  # calls are by literal name; there is no aliasing
    args: list["Expr"]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = _pos_field()
    col: int = _pos_field()


Expr = Union[Num, Str, Bool, ListLit, Name, Field, Index, Slice, Call, Unary, Binary]


# -- statements -------------------------------------------------------------


@dataclass
class Let:
    name: str
    value: Expr
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Assign:
    name: str
    value: Expr
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class If:
    branches: list[tuple[Expr, list["Stmt"]]]  # if + elifs, in order
    orelse: Optional[list["Stmt"]]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class For:
    var: str
    iterable: Expr
    body: list["Stmt"]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Match:
    subject: Expr
    cases: list[tuple[str, list["Stmt"]]]
    default: Optional[list["Stmt"]]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Return:
    value: Optional[Expr]
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class Raise:
    value: Expr
    line: int = _pos_field()
    col: int = _pos_field()


@dataclass
class ExprStmt:
    call: Call
    line: int = _pos_field()
    col: int = _pos_field()


Stmt = Union[Let, Assign, If, For, Match, Return, Raise, ExprStmt]


# -- declarations ------------------------------------------------------------


@dataclass
class Param:
    name: str
    type: str  # canonical type string, e.g. "number" or "list<object>"
    default: Optional[Expr] = None  # literal expression or None


@dataclass
class SkillDef:
    name: str
    params: list[Param]
    docstring: str
    body: list[Stmt]
    line: int = _pos_field()
    col: int = _pos_field()

    def header(self) -> str:
        """Render the callable signature plus docstring (the retrieval surface)."""
        from .formatter import format_skill_header

        return format_skill_header(self)


@dataclass
class Program:
    skills: list[SkillDef]
    statements: list[Stmt]  # flat, task-specific code

    def skill(self, name: str) -> SkillDef:
        for s in self.skills:
            if s.name == name:
                return s
        raise KeyError(name)


def is_valid_type(type_str: str) -> bool:
    if type_str in VALUE_TYPE_NAMES:
        return True
    if type_str.startswith("list<") and type_str.endswith(">"):
        return is_valid_type(type_str[5:-1])
    return False
