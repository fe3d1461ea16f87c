"""Seed content: builtin skills, benchmark scenes, evaluators and memory seeding."""

from .evaluators import CheckResult, SuccessReport, evaluate, structure_cells
from .scenes import setup_scene, structure_block_count
from .seeds import SeedingError, seed_examples, seed_memory
from .skills import BUILTIN_SKILL_NAMES, builtin_library, builtin_library_map, skill_source

__all__ = [
    "BUILTIN_SKILL_NAMES",
    "CheckResult",
    "SeedingError",
    "SuccessReport",
    "builtin_library",
    "builtin_library_map",
    "evaluate",
    "seed_examples",
    "seed_memory",
    "setup_scene",
    "skill_source",
    "structure_block_count",
    "structure_cells",
]
