"""Static call-graph extraction.

Every call expression contributes an edge, whether or not the branch it sits
in ever runs. Calls are by literal name, so the graph is exact up to dead code.
Flat statements are attributed to the pseudo-caller "<flat>".
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from . import nodes as n

FLAT_CALLER = "<flat>"


def _walk_calls(expr: n.Expr, out: set[str]) -> None:
    if isinstance(expr, n.Call):
        out.add(expr.name)
        for arg in expr.args:
            _walk_calls(arg, out)
    elif isinstance(expr, n.ListLit):
        for item in expr.items:
            _walk_calls(item, out)
    elif isinstance(expr, n.Field):
        _walk_calls(expr.base, out)
    elif isinstance(expr, n.Index):
        _walk_calls(expr.base, out)
        _walk_calls(expr.index, out)
    elif isinstance(expr, n.Slice):
        _walk_calls(expr.base, out)
        if expr.lo is not None:
            _walk_calls(expr.lo, out)
        if expr.hi is not None:
            _walk_calls(expr.hi, out)
    elif isinstance(expr, n.Unary):
        _walk_calls(expr.operand, out)
    elif isinstance(expr, n.Binary):
        _walk_calls(expr.left, out)
        _walk_calls(expr.right, out)


def _walk_stmt_calls(stmt: n.Stmt, out: set[str]) -> None:
    if isinstance(stmt, (n.Let, n.Assign, n.Raise)):
        _walk_calls(stmt.value, out)
    elif isinstance(stmt, n.Return):
        if stmt.value is not None:
            _walk_calls(stmt.value, out)
    elif isinstance(stmt, n.ExprStmt):
        _walk_calls(stmt.call, out)
    elif isinstance(stmt, n.If):
        for cond, body in stmt.branches:
            _walk_calls(cond, out)
            for s in body:
                _walk_stmt_calls(s, out)
        if stmt.orelse is not None:
            for s in stmt.orelse:
                _walk_stmt_calls(s, out)
    elif isinstance(stmt, n.For):
        _walk_calls(stmt.iterable, out)
        for s in stmt.body:
            _walk_stmt_calls(s, out)
    elif isinstance(stmt, n.Match):
        _walk_calls(stmt.subject, out)
        for _, body in stmt.cases:
            for s in body:
                _walk_stmt_calls(s, out)
        if stmt.default is not None:
            for s in stmt.default:
                _walk_stmt_calls(s, out)


def callees_of(body: Iterable[n.Stmt]) -> set[str]:
    out: set[str] = set()
    for stmt in body:
        _walk_stmt_calls(stmt, out)
    return out


def call_graph(
    program: n.Program, library: Optional[Mapping[str, n.SkillDef]] = None
) -> dict[str, tuple[str, ...]]:
    """Edges caller -> sorted callees for the program plus reachable library skills.

    Program-local definitions shadow library entries of the same name.
    """
    local = {s.name: s for s in program.skills}
    graph: dict[str, tuple[str, ...]] = {}
    pending: list[str] = []

    if program.statements:
        flat = callees_of(program.statements)
        graph[FLAT_CALLER] = tuple(sorted(flat))
        pending.extend(flat)
    for skill in program.skills:
        graph[skill.name] = tuple(sorted(callees_of(skill.body)))
        pending.extend(graph[skill.name])

    while pending:
        name = pending.pop()
        if name in graph or name in local:
            continue
        skill = library.get(name) if library else None
        if skill is None:
            continue
        graph[name] = tuple(sorted(callees_of(skill.body)))
        pending.extend(graph[name])
    return graph


def reachable(graph: Mapping[str, tuple[str, ...]], roots: Iterable[str]) -> set[str]:
    """All names reachable from roots, roots excluded unless re-reached."""
    seen: set[str] = set()
    stack = list(roots)
    while stack:
        name = stack.pop()
        for callee in graph.get(name, ()):
            if callee not in seen:
                seen.add(callee)
                stack.append(callee)
    return seen


def transitively_calls(
    program: n.Program, library: Optional[Mapping[str, n.SkillDef]], target: str
) -> bool:
    """Does the program (via any skill it can reach) call `target`?"""
    graph = call_graph(program, library)
    roots = list(graph.keys())
    return target in reachable(graph, roots) or target in graph


def find_cycle(graph: Mapping[str, tuple[str, ...]], skill_names: set[str]) -> Optional[list[str]]:
    """A cycle among skill-to-skill edges, or None. Primitives cannot recurse."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in graph if name in skill_names}
    path: list[str] = []

    def visit(node: str) -> Optional[list[str]]:
        color[node] = GRAY
        path.append(node)
        for callee in graph.get(node, ()):
            if callee not in skill_names:
                continue
            state = color.get(callee, WHITE)
            if state == GRAY:
                return path[path.index(callee):] + [callee]
            if state == WHITE:
                found = visit(callee)
                if found:
                    return found
        path.pop()
        color[node] = BLACK
        return None

    for name in list(color):
        if color[name] == WHITE:
            found = visit(name)
            if found:
                return found
    return None
