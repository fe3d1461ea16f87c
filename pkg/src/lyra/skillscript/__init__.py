"""The sandboxed skill language: parser, formatter, interpreter, call graphs."""

from .callgraph import FLAT_CALLER, call_graph, callees_of, reachable, transitively_calls
from .formatter import format_program, format_skill, format_skill_header
from .interpreter import (
    Budget,
    CORE_PRIMITIVE_NAMES,
    ENV_BUILTIN_NAMES,
    ExecutionTrace,
    HELPER_NAMES,
    LazyRange,
    SETUP_BUILTIN_NAMES,
    TraceError,
    execute,
)
from .nodes import Param, Program, SkillDef
from .parser import SkillSyntaxError, parse, parse_skill

__all__ = [
    "Budget",
    "CORE_PRIMITIVE_NAMES",
    "ENV_BUILTIN_NAMES",
    "ExecutionTrace",
    "FLAT_CALLER",
    "HELPER_NAMES",
    "LazyRange",
    "Param",
    "Program",
    "SETUP_BUILTIN_NAMES",
    "SkillDef",
    "SkillSyntaxError",
    "TraceError",
    "call_graph",
    "callees_of",
    "execute",
    "format_program",
    "format_skill",
    "format_skill_header",
    "parse",
    "parse_skill",
    "reachable",
    "transitively_calls",
]
