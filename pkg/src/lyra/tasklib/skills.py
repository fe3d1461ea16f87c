"""The builtin skill library, loaded from the canonical .skill sources."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..skillscript import parse
from ..skillscript.nodes import SkillDef

BUILTIN_SKILL_NAMES = (
    "get_blocks_by_color",
    "identify_roof_tiles",
    "identify_beam_block",
    "identify_roof_base",
    "stack_blocks",
    "move_block_next_to_reference",
    "make_line_of_blocks_next_to",
    "make_line_with_blocks",
    "build_structure_from_blocks",
    "place_roof_tiles",
    "assemble_roof",
    "build_house_base",
    "build_house",
)


def skill_source(name: str) -> str:
    ref = resources.files("lyra.tasklib") / "skills" / f"{name}.skill"
    return ref.read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def _library() -> tuple[SkillDef, ...]:
    skills = []
    for name in BUILTIN_SKILL_NAMES:
        program = parse(skill_source(name))
        skills.append(program.skills[0])
    return tuple(skills)


def builtin_library() -> list[SkillDef]:
    """All seed skills, in dependency-friendly declaration order."""
    return list(_library())


def builtin_library_map() -> dict[str, SkillDef]:
    return {s.name: s for s in _library()}
