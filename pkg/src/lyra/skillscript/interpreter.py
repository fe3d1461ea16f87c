"""Tree-walking interpreter with an execution budget and a hard sandbox.

The only effects a program can have are mutations of the WorldState passed to
execute(). There is no filesystem, network, clock or host-FFI surface in the
language, and execution is deterministic: the same (program, world snapshot,
library) always produces the same trace and post-world.

Failures inside the program (unknown names, type errors, budget exhaustion,
`raise`, world errors) do not raise out of execute(); they are recorded on the
returned ExecutionTrace so callers can feed them back verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from ..geometry import (
    InvalidGeometry,
    Point3D,
    Pose,
    Rotation,
    compose_rotations,
    point_at_distance_and_rotation,
    rotate_vector,
)
from ..world import TaskObject, WorldError, WorldState
from . import nodes as n
from .callgraph import call_graph, find_cycle

MAX_SKILL_DEPTH = 64


@dataclass
class Budget:
    max_primitive_calls: int = 10_000
    max_steps: int = 1_000_000


@dataclass(frozen=True)
class TraceError:
    type: str
    message: str
    line: int = 0

    def render(self) -> str:
        return f"{self.type}: {self.message}"


@dataclass
class ExecutionTrace:
    primitive_calls: list[str] = field(default_factory=list)
    skill_events: list[tuple[str, str]] = field(default_factory=list)  # (enter|exit, name)
    error: Optional[TraceError] = None
    steps: int = 0

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json_obj(self) -> dict:
        return {
            "primitive_calls": self.primitive_calls,
            "skill_events": [list(e) for e in self.skill_events],
            "error": (
                None
                if self.error is None
                else {"type": self.error.type, "message": self.error.message, "line": self.error.line}
            ),
            "steps": self.steps,
        }


@dataclass(frozen=True)
class LazyRange:
    """Integer range value; iterated lazily so huge ranges cannot allocate."""

    start: int
    stop: int

    def __len__(self) -> int:
        return max(0, self.stop - self.start)

    def materialize(self) -> list[float]:
        return [float(v) for v in range(self.start, self.stop)]


Value = Union[None, bool, float, str, list, Point3D, Rotation, Pose, TaskObject, LazyRange]


class _Return(Exception):
    def __init__(self, value: Value):
        self.value = value


class _Err(Exception):
    def __init__(self, type_: str, message: str, line: int = 0):
        self.trace_error = TraceError(type_, message, line)


def _type_name(value: Value) -> str:
    if value is None:
        return "unit"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, (list, LazyRange)):
        return "list"
    if isinstance(value, Point3D):
        return "point"
    if isinstance(value, Rotation):
        return "rotation"
    if isinstance(value, Pose):
        return "pose"
    if isinstance(value, TaskObject):
        return "object"
    return type(value).__name__


def matches_type(value: Value, type_str: str) -> bool:
    if type_str == "number":
        return isinstance(value, float) and not isinstance(value, bool)
    if type_str == "string":
        return isinstance(value, str)
    if type_str == "bool":
        return isinstance(value, bool)
    if type_str == "point":
        return isinstance(value, Point3D)
    if type_str == "rotation":
        return isinstance(value, Rotation)
    if type_str == "pose":
        return isinstance(value, Pose)
    if type_str == "object":
        return isinstance(value, TaskObject)
    if type_str.startswith("list<") and type_str.endswith(">"):
        inner = type_str[5:-1]
        if isinstance(value, LazyRange):
            return inner == "number"
        if not isinstance(value, list):
            return False
        return all(matches_type(item, inner) for item in value)
    return False


def truthy(value: Value) -> bool:
    if value is None:
        return False
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value != 0.0
    if isinstance(value, str):
        return len(value) > 0
    if isinstance(value, (list, LazyRange)):
        return len(value) > 0
    return True


def values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, TaskObject) and isinstance(b, TaskObject):
        return a.id == b.id
    if isinstance(a, LazyRange):
        a = a.materialize()
    if isinstance(b, LazyRange):
        b = b.materialize()
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if type(a) is not type(b) and not (
        isinstance(a, float) and isinstance(b, float)
    ):
        return False
    return a == b


class _Interpreter:
    def __init__(
        self,
        program: n.Program,
        world: WorldState,
        library: Optional[Mapping[str, n.SkillDef]],
        budget: Budget,
        allow_setup: bool,
    ):
        self.program = program
        self.world = world
        self.library = dict(library) if library else {}
        self.budget = budget
        self.allow_setup = allow_setup
        self.trace = ExecutionTrace()
        self.locals_by_skill = {s.name: s for s in program.skills}
        self.depth = 0

    # -- static validation ----------------------------------------------------

    def validate(self) -> None:
        graph = call_graph(self.program, self.library)
        known_skills = set(self.locals_by_skill) | set(self.library)
        builtin_names = set(_ENV_BUILTIN_ARITY) | set(_HELPER_ARITY)
        if self.allow_setup:
            builtin_names |= set(_SETUP_BUILTIN_ARITY)
        for skill_name in self.locals_by_skill:
            if skill_name in set(_ENV_BUILTIN_ARITY) | set(_HELPER_ARITY) | set(_SETUP_BUILTIN_ARITY):
                raise _Err(
                    "NameNotFound",
                    f"skill {skill_name!r} would shadow a builtin; rename it",
                )
        for caller, callees in graph.items():
            for callee in callees:
                if callee not in known_skills and callee not in builtin_names:
                    raise _Err("NameNotFound", f"{caller} calls unknown name {callee!r}")
        cycle = find_cycle(graph, known_skills)
        if cycle:
            raise _Err(
                "CyclicSkillGraph",
                "recursion is not allowed: " + " -> ".join(cycle),
            )

    # -- budget ------------------------------------------------------------------

    def _step(self, line: int) -> None:
        self.trace.steps += 1
        if self.trace.steps > self.budget.max_steps:
            raise _Err("BudgetExceeded", f"step budget {self.budget.max_steps} exhausted", line)

    def _primitive_tick(self, name: str, line: int) -> None:
        self.trace.primitive_calls.append(name)
        if len(self.trace.primitive_calls) > self.budget.max_primitive_calls:
            raise _Err(
                "BudgetExceeded",
                f"primitive-call budget {self.budget.max_primitive_calls} exhausted",
                line,
            )

    # -- execution ------------------------------------------------------------

    def run(self) -> None:
        env: dict[str, Value] = {"pi": math.pi}
        for stmt in self.program.statements:
            self._exec_stmt(stmt, env)

    def _exec_block(self, body: list[n.Stmt], env: dict[str, Value]) -> None:
        for stmt in body:
            self._exec_stmt(stmt, env)

    def _exec_stmt(self, stmt: n.Stmt, env: dict[str, Value]) -> None:
        self._step(stmt.line)
        if isinstance(stmt, n.Let):
            env[stmt.name] = self._eval(stmt.value, env)
            return
        if isinstance(stmt, n.Assign):
            if stmt.name not in env:
                raise _Err(
                    "NameNotFound",
                    f"assignment to undefined variable {stmt.name!r} (use let)",
                    stmt.line,
                )
            env[stmt.name] = self._eval(stmt.value, env)
            return
        if isinstance(stmt, n.If):
            for cond, body in stmt.branches:
                if truthy(self._eval(cond, env)):
                    self._exec_block(body, env)
                    return
            if stmt.orelse is not None:
                self._exec_block(stmt.orelse, env)
            return
        if isinstance(stmt, n.For):
            iterable = self._eval(stmt.iterable, env)
            if isinstance(iterable, LazyRange):
                for i in range(iterable.start, iterable.stop):
                    self._step(stmt.line)
                    env[stmt.var] = float(i)
                    self._exec_block(stmt.body, env)
            elif isinstance(iterable, list):
                for item in iterable:
                    self._step(stmt.line)
                    env[stmt.var] = item
                    self._exec_block(stmt.body, env)
            else:
                raise _Err(
                    "TypeMismatch",
                    f"for-in needs a list or range, got {_type_name(iterable)}",
                    stmt.line,
                )
            return
        if isinstance(stmt, n.Match):
            subject = self._eval(stmt.subject, env)
            if not isinstance(subject, str):
                raise _Err(
                    "TypeMismatch",
                    f"match subject must be a string, got {_type_name(subject)}",
                    stmt.line,
                )
            for literal, body in stmt.cases:
                if subject == literal:
                    self._exec_block(body, env)
                    return
            if stmt.default is not None:
                self._exec_block(stmt.default, env)
            return
        if isinstance(stmt, n.Return):
            value = self._eval(stmt.value, env) if stmt.value is not None else None
            raise _Return(value)
        if isinstance(stmt, n.Raise):
            message = self._eval(stmt.value, env)
            if not isinstance(message, str):
                raise _Err(
                    "TypeMismatch",
                    f"raise needs a string message, got {_type_name(message)}",
                    stmt.line,
                )
            raise _Err("SkillRaised", message, stmt.line)
        if isinstance(stmt, n.ExprStmt):
            self._eval(stmt.call, env)
            return
        raise _Err("TypeMismatch", f"unknown statement {stmt!r}", getattr(stmt, "line", 0))

    # -- expressions ---------------------------------------------------------------

    def _eval(self, expr: n.Expr, env: dict[str, Value]) -> Value:
        if isinstance(expr, n.Num):
            return float(expr.value)
        if isinstance(expr, n.Str):
            return expr.value
        if isinstance(expr, n.Bool):
            return expr.value
        if isinstance(expr, n.ListLit):
            return [self._eval(item, env) for item in expr.items]
        if isinstance(expr, n.Name):
            if expr.ident in env:
                return env[expr.ident]
            raise _Err("NameNotFound", f"undefined variable {expr.ident!r}", expr.line)
        if isinstance(expr, n.Field):
            return self._field(self._eval(expr.base, env), expr.name, expr.line)
        if isinstance(expr, n.Index):
            return self._index(self._eval(expr.base, env), self._eval(expr.index, env), expr.line)
        if isinstance(expr, n.Slice):
            return self._slice(expr, env)
        if isinstance(expr, n.Call):
            return self._call(expr, env)
        if isinstance(expr, n.Unary):
            if expr.op == "not":
                return not truthy(self._eval(expr.operand, env))
            operand = self._eval(expr.operand, env)
            if not matches_type(operand, "number"):
                raise _Err(
                    "TypeMismatch", f"unary '-' needs a number, got {_type_name(operand)}", expr.line
                )
            return -operand
        if isinstance(expr, n.Binary):
            return self._binary(expr, env)
        raise _Err("TypeMismatch", f"unknown expression {expr!r}", getattr(expr, "line", 0))

    def _binary(self, expr: n.Binary, env: dict[str, Value]) -> Value:
        op = expr.op
        if op == "and":
            left = self._eval(expr.left, env)
            if not truthy(left):
                return False
            return truthy(self._eval(expr.right, env))
        if op == "or":
            left = self._eval(expr.left, env)
            if truthy(left):
                return True
            return truthy(self._eval(expr.right, env))
        left = self._eval(expr.left, env)
        right = self._eval(expr.right, env)
        if op == "==":
            return values_equal(left, right)
        if op == "!=":
            return not values_equal(left, right)
        if op in ("+", "-", "*", "/", "%", "<", "<=", ">", ">="):
            if not matches_type(left, "number") or not matches_type(right, "number"):
                raise _Err(
                    "TypeMismatch",
                    f"'{op}' needs numbers, got {_type_name(left)} and {_type_name(right)}",
                    expr.line,
                )
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op == "/":
                if right == 0.0:
                    raise _Err("TypeMismatch", "division by zero", expr.line)
                return left / right
            if op == "%":
                if right == 0.0:
                    raise _Err("TypeMismatch", "modulo by zero", expr.line)
                return math.fmod(left, right)
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        raise _Err("TypeMismatch", f"unknown operator {op!r}", expr.line)

    def _field(self, base: Value, name: str, line: int) -> Value:
        if isinstance(base, Point3D):
            if name in ("x", "y", "z"):
                return float(getattr(base, name))
        elif isinstance(base, Rotation):
            if name in ("qx", "qy", "qz", "qw"):
                return float(getattr(base, name))
        elif isinstance(base, Pose):
            if name == "position":
                return base.position
            if name == "rotation":
                return base.rotation
        elif isinstance(base, TaskObject):
            if name == "id":
                return float(base.id)
            if name == "type":
                return base.object_type
            if name == "color":
                return base.color
            if name == "size":
                return [float(v) for v in base.size]
            if name == "pose":
                return base.pose
        raise _Err(
            "TypeMismatch", f"value of type {_type_name(base)} has no field {name!r}", line
        )

    def _as_int_index(self, value: Value, line: int, what: str = "index") -> int:
        if not matches_type(value, "number") or abs(value - round(value)) > 1e-9:
            raise _Err("TypeMismatch", f"{what} must be an integer, got {value!r}", line)
        return int(round(value))

    def _index(self, base: Value, index: Value, line: int) -> Value:
        if isinstance(base, LazyRange):
            base = base.materialize()
        if not isinstance(base, list):
            raise _Err("TypeMismatch", f"cannot index {_type_name(base)}", line)
        i = self._as_int_index(index, line)
        if i < -len(base) or i >= len(base):
            raise _Err(
                "TypeMismatch", f"list index {i} out of range (length {len(base)})", line
            )
        return base[i]

    def _slice(self, expr: n.Slice, env: dict[str, Value]) -> Value:
        base = self._eval(expr.base, env)
        if isinstance(base, LazyRange):
            base = base.materialize()
        if not isinstance(base, list):
            raise _Err("TypeMismatch", f"cannot slice {_type_name(base)}", expr.line)
        lo = self._as_int_index(self._eval(expr.lo, env), expr.line) if expr.lo else None
        hi = self._as_int_index(self._eval(expr.hi, env), expr.line) if expr.hi else None
        return base[lo:hi]

    # -- calls -----------------------------------------------------------------

    def _call(self, expr: n.Call, env: dict[str, Value]) -> Value:
        name = expr.name
        args = [self._eval(arg, env) for arg in expr.args]
        skill = self.locals_by_skill.get(name) or self.library.get(name)
        if skill is not None:
            return self._call_skill(skill, args, expr.line)
        if name in _ENV_BUILTIN_ARITY or (self.allow_setup and name in _SETUP_BUILTIN_ARITY):
            return self._call_env_builtin(name, args, expr.line)
        if name in _HELPER_ARITY:
            return self._call_helper(name, args, expr.line)
        if name in _SETUP_BUILTIN_ARITY:
            raise _Err(
                "NameNotFound", f"{name!r} is only available in task-setup programs", expr.line
            )
        raise _Err("NameNotFound", f"unknown function {name!r}", expr.line)

    def _call_skill(self, skill: n.SkillDef, args: list[Value], line: int) -> Value:
        required = [p for p in skill.params if p.default is None]
        if len(args) < len(required) or len(args) > len(skill.params):
            raise _Err(
                "TypeMismatch",
                f"{skill.name} expects {len(required)}..{len(skill.params)} arguments, "
                f"got {len(args)}",
                line,
            )
        frame: dict[str, Value] = {"pi": math.pi}
        for i, param in enumerate(skill.params):
            if i < len(args):
                value = args[i]
            else:
                value = self._eval(param.default, frame)  # defaults are literals
            if not matches_type(value, param.type):
                raise _Err(
                    "TypeMismatch",
                    f"{skill.name} parameter {param.name!r} expects {param.type}, "
                    f"got {_type_name(value)}",
                    line,
                )
            frame[param.name] = value
        self.depth += 1
        if self.depth > MAX_SKILL_DEPTH:
            raise _Err("CyclicSkillGraph", f"skill call depth over {MAX_SKILL_DEPTH}", line)
        self.trace.skill_events.append(("enter", skill.name))
        try:
            self._exec_block(skill.body, frame)
            result: Value = None
        except _Return as ret:
            result = ret.value
        finally:
            self.depth -= 1
        self.trace.skill_events.append(("exit", skill.name))
        return result

    def _arity_check(self, name: str, args: list[Value], lo: int, hi: int, line: int) -> None:
        if not (lo <= len(args) <= hi):
            span = str(lo) if lo == hi else f"{lo}..{hi}"
            raise _Err(
                "TypeMismatch", f"{name} expects {span} arguments, got {len(args)}", line
            )

    def _need(self, name: str, value: Value, type_str: str, line: int) -> Value:
        if not matches_type(value, type_str):
            raise _Err(
                "TypeMismatch",
                f"{name} expects {type_str}, got {_type_name(value)}",
                line,
            )
        return value

    def _call_env_builtin(self, name: str, args: list[Value], line: int) -> Value:
        lo, hi = (_ENV_BUILTIN_ARITY.get(name) or _SETUP_BUILTIN_ARITY[name])
        self._arity_check(name, args, lo, hi, line)
        self._primitive_tick(name, line)
        try:
            return self._dispatch_env(name, args, line)
        except (WorldError, InvalidGeometry) as exc:
            raise _Err(type(exc).__name__, str(exc), line) from exc

    def _dispatch_env(self, name: str, args: list[Value], line: int) -> Value:
        w = self.world
        if name == "get_objects":
            return list(w.get_objects())
        if name == "get_object_pose":
            return w.get_object_pose(self._need(name, args[0], "object", line))
        if name == "get_object_size":
            obj = self._need(name, args[0], "object", line)
            return [float(v) for v in w.get_object_size(obj)]
        if name == "get_object_color":
            return w.get_object_color(self._need(name, args[0], "object", line))
        if name == "get_bbox":
            box = w.get_bbox(self._need(name, args[0], "object", line))
            return [box.min, box.max]
        if name == "get_end_effector_pose":
            return w.get_end_effector_pose()
        if name == "put_first_on_second":
            pick = self._need(name, args[0], "pose", line)
            place = self._need(name, args[1], "pose", line)
            w.put_first_on_second(pick, place)
            return None
        if name == "move_end_effector_to":
            pose = self._need(name, args[0], "pose", line)
            speed = self._need(name, args[1], "number", line) if len(args) > 1 else 0.001
            w.move_end_effector_to(pose, speed)
            return None
        if name.startswith("workspace_"):
            return w.workspace.anchor(name[len("workspace_"):])
        if name == "add_block":
            color = self._need(name, args[0], "string", line)
            size = self._need(name, args[1], "list<number>", line) if len(args) > 1 else [0.04, 0.04, 0.04]
            if isinstance(size, LazyRange):
                size = size.materialize()
            if len(size) != 3:
                raise _Err("TypeMismatch", "add_block size must have 3 components", line)
            pose = self._need(name, args[2], "pose", line) if len(args) > 2 else None
            return w.add_block(color, (size[0], size[1], size[2]), pose)
        if name == "add_cylinder":
            color = self._need(name, args[0], "string", line)
            scale = self._need(name, args[1], "number", line) if len(args) > 1 else 0.5
            return w.add_cylinder(color, scale)
        if name == "add_zone":
            color = self._need(name, args[0], "string", line)
            scale = self._need(name, args[1], "number", line) if len(args) > 1 else 1.0
            pose = self._need(name, args[2], "pose", line) if len(args) > 2 else None
            return w.add_zone(color, scale, pose)
        raise _Err("NameNotFound", f"unhandled builtin {name!r}", line)

    def _call_helper(self, name: str, args: list[Value], line: int) -> Value:
        lo, hi = _HELPER_ARITY[name]
        self._arity_check(name, args, lo, hi, line)
        try:
            return self._dispatch_helper(name, args, line)
        except InvalidGeometry as exc:
            raise _Err("InvalidGeometry", str(exc), line) from exc

    def _dispatch_helper(self, name: str, args: list[Value], line: int) -> Value:
        if name == "len":
            value = args[0]
            if isinstance(value, (list, LazyRange, str)):
                return float(len(value))
            raise _Err("TypeMismatch", f"len needs a list or string, got {_type_name(value)}", line)
        if name == "range":
            ints = [self._as_int_index(a, line, "range bound") for a in args]
            if len(ints) == 1:
                return LazyRange(0, ints[0])
            return LazyRange(ints[0], ints[1])
        if name == "abs":
            return abs(self._need(name, args[0], "number", line))
        if name in ("min", "max"):
            picker = min if name == "min" else max
            if len(args) == 1:
                xs = args[0]
                if isinstance(xs, LazyRange):
                    xs = xs.materialize()
                self._need(name, xs, "list<number>", line)
                if not xs:
                    raise _Err("TypeMismatch", f"{name} of an empty list", line)
                return float(picker(xs))
            return float(
                picker(
                    self._need(name, args[0], "number", line),
                    self._need(name, args[1], "number", line),
                )
            )
        if name == "append":
            xs = args[0]
            if isinstance(xs, LazyRange):
                xs = xs.materialize()
            if not isinstance(xs, list):
                raise _Err("TypeMismatch", f"append needs a list, got {_type_name(xs)}", line)
            return list(xs) + [args[1]]
        if name == "reversed":
            xs = args[0]
            if isinstance(xs, LazyRange):
                xs = xs.materialize()
            if not isinstance(xs, list):
                raise _Err("TypeMismatch", f"reversed needs a list, got {_type_name(xs)}", line)
            return list(reversed(xs))
        if name == "sorted_by":
            items = args[0].materialize() if isinstance(args[0], LazyRange) else args[0]
            keys = args[1].materialize() if isinstance(args[1], LazyRange) else args[1]
            if not isinstance(items, list) or not isinstance(keys, list):
                raise _Err("TypeMismatch", "sorted_by needs (list, list<number>)", line)
            self._need(name, keys, "list<number>", line)
            if len(items) != len(keys):
                raise _Err(
                    "TypeMismatch",
                    f"sorted_by needs equal lengths, got {len(items)} and {len(keys)}",
                    line,
                )
            order = sorted(range(len(items)), key=lambda i: (keys[i], i))
            return [items[i] for i in order]
        if name == "point":
            return Point3D(
                self._need(name, args[0], "number", line),
                self._need(name, args[1], "number", line),
                self._need(name, args[2], "number", line),
            )
        if name == "pose":
            return Pose(
                self._need(name, args[0], "point", line),
                self._need(name, args[1], "rotation", line),
            )
        if name == "rotation_from_euler_z":
            return Rotation.from_euler("z", self._need(name, args[0], "number", line))
        if name == "compose_rotations":
            return compose_rotations(
                self._need(name, args[0], "rotation", line),
                self._need(name, args[1], "rotation", line),
            )
        if name == "rotate_vector":
            return rotate_vector(
                self._need(name, args[0], "rotation", line),
                self._need(name, args[1], "point", line),
            )
        if name == "point_at_distance_and_rotation":
            direction = (
                self._need(name, args[3], "point", line) if len(args) > 3 else Point3D(1.0, 0.0, 0.0)
            )
            return point_at_distance_and_rotation(
                self._need(name, args[0], "point", line),
                self._need(name, args[1], "rotation", line),
                self._need(name, args[2], "number", line),
                direction,
            )
        raise _Err("NameNotFound", f"unhandled helper {name!r}", line)


_ENV_BUILTIN_ARITY: dict[str, tuple[int, int]] = {
    "get_objects": (0, 0),
    "get_object_pose": (1, 1),
    "get_object_size": (1, 1),
    "get_object_color": (1, 1),
    "get_bbox": (1, 1),
    "get_end_effector_pose": (0, 0),
    "put_first_on_second": (2, 2),
    "move_end_effector_to": (1, 2),
    "workspace_middle": (0, 0),
    "workspace_back_left": (0, 0),
    "workspace_back_right": (0, 0),
    "workspace_front_left": (0, 0),
    "workspace_front_right": (0, 0),
}

_SETUP_BUILTIN_ARITY: dict[str, tuple[int, int]] = {
    "add_block": (1, 3),
    "add_cylinder": (1, 2),
    "add_zone": (1, 3),
}

_HELPER_ARITY: dict[str, tuple[int, int]] = {
    "len": (1, 1),
    "range": (1, 2),
    "abs": (1, 1),
    "min": (1, 2),
    "max": (1, 2),
    "append": (2, 2),
    "reversed": (1, 1),
    "sorted_by": (2, 2),
    "point": (3, 3),
    "pose": (2, 2),
    "rotation_from_euler_z": (1, 1),
    "compose_rotations": (2, 2),
    "rotate_vector": (2, 2),
    "point_at_distance_and_rotation": (3, 4),
}

ENV_BUILTIN_NAMES = tuple(sorted(_ENV_BUILTIN_ARITY))
SETUP_BUILTIN_NAMES = tuple(sorted(_SETUP_BUILTIN_ARITY))
HELPER_NAMES = tuple(sorted(_HELPER_ARITY))

CORE_PRIMITIVE_NAMES = (
    "get_objects",
    "get_object_pose",
    "get_object_size",
    "get_object_color",
    "get_bbox",
    "get_end_effector_pose",
    "put_first_on_second",
    "move_end_effector_to",
)


def execute(
    program: n.Program,
    world: WorldState,
    library: Optional[Mapping[str, n.SkillDef]] = None,
    budget: Optional[Budget] = None,
    allow_setup: bool = False,
) -> ExecutionTrace:
    """Run a program against a world. In-language failures land on trace.error."""
    interp = _Interpreter(program, world, library, budget or Budget(), allow_setup)
    try:
        interp.validate()
        interp.run()
    except _Err as err:
        interp.trace.error = err.trace_error
    except _Return:
        interp.trace.error = TraceError("InvalidReturn", "return outside a skill")
    return interp.trace
