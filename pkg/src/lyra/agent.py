"""Prompt assembly and agent clients.

Prompt templates keep their fixed wording stable (golden-string tested); the
retrieved examples and skill headers are injected around them under a character
budget. When the budget forces drops, the least similar items go first and
hint-forced items go last.

Two agents share one contract: a deterministic MockAgent that replays a script
(the only agent used in tests), and an HTTP chat-completion client configured
through LYRA_AGENT_URL / LYRA_AGENT_KEY.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .memory import ExampleRecord, RetrievalResult, SkillRecord
from .skillscript import format_skill_header, parse
from .skillscript.nodes import Program, SkillDef
from .skillscript.parser import SkillSyntaxError

ENV_AGENT_URL = "LYRA_AGENT_URL"
ENV_AGENT_KEY = "LYRA_AGENT_KEY"
ENV_EMBED_URL = "LYRA_EMBED_URL"
ENV_MEMORY_DIR = "LYRA_MEMORY_DIR"

DEFAULT_CHAR_BUDGET = 24_000

RESPONSE_KINDS = ("task_code", "skill_plus_code", "skill_header", "setup_code", "hint_items")

PRESERVATION_META_PROMPT = "You should try to preserve the previous functionality."


class AgentError(Exception):
    """Base class for agent failures."""


class PromptOverflow(AgentError):
    """The irreducible prompt (template plus task) exceeds the character budget."""


class TransportError(AgentError):
    """The live endpoint could not be reached or answered abnormally."""


class AgentRefusal(AgentError):
    """The agent returned empty content."""


class ParseFailure(AgentError):
    """The agent's payload does not parse under the expected response kind."""


class ScriptExhausted(AgentError):
    """A mock agent was asked for more responses than its script contains."""


class ScriptMismatch(AgentError):
    """A mock script entry expected a different response kind."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if not self.content:
            raise ValueError("messages must have nonempty content")
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role {self.role!r}")


@dataclass(frozen=True)
class IncludedItem:
    kind: str  # example | skill
    record_id: int
    forced: bool
    score: float


@dataclass
class PromptBundle:
    messages: list[ChatMessage]
    char_budget: int
    included: list[IncludedItem] = field(default_factory=list)

    @property
    def total_chars(self) -> int:
        return sum(len(m.content) for m in self.messages)

    def to_json_obj(self) -> dict:
        return {
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "char_budget": self.char_budget,
            "included": [
                {"kind": i.kind, "record_id": i.record_id, "forced": i.forced, "score": i.score}
                for i in self.included
            ],
        }


ParsedPayload = Union[Program, SkillDef, list, None]


@dataclass
class AgentResponse:
    kind: str
    payload: str
    parsed: ParsedPayload


# -- template text -----------------------------------------------------------------


def core_types_text() -> str:
    return """Values are: number, string, bool, point (fields x, y, z), rotation
(quaternion fields qx, qy, qz, qw), pose (fields position, rotation), object
(fields id, type, color, size, pose) and list<T>.

All code must be written in the skill language, not in a host language:
  skill <name>(<param>: <type>, ...) doc "<docstring>" { <statements> }
followed by flat statements. Statements: let, assignment, if/elif/else,
for-in, match/case on strings, return, raise "message", and calls.
Helpers: len, range, abs, min, max, append, reversed, sorted_by(items, keys),
point(x, y, z), pose(point, rotation), rotation_from_euler_z(radians),
compose_rotations, rotate_vector, point_at_distance_and_rotation, pi.

Environment primitives:
  get_objects() -> list<object>
  get_object_pose(obj) -> pose
  get_object_size(obj) -> list<number>  (width, depth, height)
  get_object_color(obj) -> string
  get_bbox(obj) -> list<point>  (min corner, max corner)
  get_end_effector_pose() -> pose
  put_first_on_second(pick_pose, place_pose)  (the main pick-and-place primitive)
  move_end_effector_to(pose, speed)
  workspace_middle() / workspace_back_left() / workspace_back_right() /
  workspace_front_left() / workspace_front_right() -> point"""


ACTOR_SYSTEM_PROMPT = f"""You write python code to control a robotic arm in a simulated environment, building on an existing API.

You will be given:
- a task for the robotic agent to solve
- api functions you may use to solve the task
- if available, examples of codes that solve prior similar tasks

You are supposed to write flat code to solve the task, i.e. do not write any functions.
DO NOT make any imports.

Adhere to the following basic types:
{core_types_text()}
"""

SKILL_LEARNING_SYSTEM_PROMPT = f"""You write python code to control a robotic arm in a simulated environment, building on an existing API.
We are trying to learn skills, and are using different tasks to test and effectively learn a specific skill.

You will be given:
- a task for the robotic agent to solve
- the skill you are supposed to use to solve the task

You are supposed to complete the function, as well as flat, task-specific code, as follows:

skill given_function(...) doc "..." {{
    ...
}}

<task-specific code>

If the new task requires you to rewrite the function header, you may do so, for example,
to add arguments, or to update the docstring with important usage information.
You should try to preserve the previous functionality though, since the function might
have previously been used to solve other tasks, which should remain solvable after changes.

DO NOT make any imports.
DO NOT write any functions other than the given one.

Adhere to the following basic types:
{core_types_text()}
"""

TASK_SETUP_API_TEXT = """add_block(color: string, size: list<number> = [0.04, 0.04, 0.04], pose: pose)
    adds a block of a given size and color to the environment
    If the pose is left unspecified, a random collision-free pose is selected

add_zone(color: string, scale: number = 1, pose: pose)
    adds a zone of a given size and color to the environment
    If the pose is left unspecified, a random pose in the workspace is selected

add_cylinder(color: string = "red", scale: number = 0.5)
    adds a cylinder of a given scale and color to the environment"""

TASK_SETUP_SYSTEM_PROMPT = f"""You are writing python code to setup a simulated environment, translating user instructions
into executable code, based on an existing API.

You should adhere to the following types:
{core_types_text()}

You may use the following API:
{TASK_SETUP_API_TEXT}

EXAMPLES:
#########

task: add 3 red blocks and 3 blue blocks
response:
for i in range(3) {{
    add_block("red")
}}

for i in range(3) {{
    add_block("blue")
}}

#########

task: add one big block and 4 blocks that are a quarter of the big blocks side length
response:
add_block("gray", [0.08, 0.08, 0.08])
for i in range(4) {{
    add_block("blue", [0.02, 0.02, 0.02])
}}

#########
"""

SKILL_HEADER_SYSTEM_PROMPT = f"""We are working in the context of controlling a robotic arm with python code.
The user proposes a certain skill they would like the robot to learn.
To enable this, you are supposed to translate this skill into a python function,
i.e. choose a clear, descriptive name for the function, choose appropriate arguments,
and write a clear, descriptive docstring.

For example:
USER: "place one block on top of the other"
RESPONSE:
skill place_block_on_other_block(block: object, otherBlock: object) doc "Places one block on top of the other block" {{
}}

Do not try to implement the function yet, that happens later.
You should adhere to the following types:
{core_types_text()}

The functions don't need Workspace as an argument, since there is only one."""

REFINE_HEADER_PROMPT = """Your role is to refine an existing python function, for example by adding a function argument or
changing the name. If the function is implemented (i.e. not just "pass"), you should also alter
the implementation accordingly, making as little changes and assumptions as possible.
Revise the following python function according to the user instructions:
{function_code}
Refinement prompt:
{refinement}
Do not make any assumptions."""

PARSE_HINT_PROMPT = """The user provided a list of tasks that are similar to the one you are currently
trying to solve, in a single string. Retrieve each of the task descriptions from
this string and return them as a list.
This is the string: {hint}"""


# -- retrieved-item rendering -------------------------------------------------------


@dataclass
class _Item:
    kind: str  # example | skill
    record_id: int
    forced: bool
    score: float
    text: str


def _example_items(examples: Optional[RetrievalResult]) -> list[_Item]:
    items: list[_Item] = []
    if examples is None:
        return items
    for forced, pairs in ((True, examples.forced), (False, examples.entries)):
        for record, score in pairs:
            assert isinstance(record, ExampleRecord)
            text = f"task: {record.instruction}\ncode:\n{record.code}"
            items.append(_Item("example", record.record_id, forced, score, text))
    return items


def _skill_items(skills: Optional[RetrievalResult]) -> list[_Item]:
    items: list[_Item] = []
    if skills is None:
        return items
    for forced, pairs in ((True, skills.forced), (False, skills.entries)):
        for record, score in pairs:
            assert isinstance(record, SkillRecord)
            items.append(
                _Item("skill", record.record_id, forced, score, format_skill_header(record.skill))
            )
    return items


def _render_sections(items: Sequence[_Item]) -> tuple[str, str]:
    example_texts = [i.text for i in items if i.kind == "example"]
    skill_texts = [i.text for i in items if i.kind == "skill"]
    examples_block = (
        "Examples of prior solved tasks:\n\n" + "\n\n".join(example_texts)
        if example_texts
        else ""
    )
    skills_block = (
        "You may call these skills:\n" + "\n".join(skill_texts) if skill_texts else ""
    )
    return examples_block, skills_block


def _fit_to_budget(
    build_user_text,
    system_text: str,
    items: list[_Item],
    char_budget: int,
    history: Sequence[ChatMessage] = (),
) -> tuple[str, list[_Item]]:
    kept = list(items)
    base = len(system_text) + sum(len(m.content) for m in history)

    def total(current: list[_Item]) -> int:
        return base + len(build_user_text(current))

    while total(kept) > char_budget and kept:
        # drop the least similar non-forced item first; forced items go last;
        # equal scores drop the later item, preserving the ranked prefix
        drop = min(range(len(kept)), key=lambda i: (kept[i].forced, kept[i].score, -i))
        kept.pop(drop)
    if total(kept) > char_budget:
        raise PromptOverflow(
            f"prompt needs {total(kept)} characters with budget {char_budget}"
        )
    return build_user_text(kept), kept


def _bundle(
    system_text: str,
    user_text: str,
    kept: list[_Item],
    char_budget: int,
    history: Sequence[ChatMessage] = (),
) -> PromptBundle:
    messages = [ChatMessage("system", system_text), *history, ChatMessage("user", user_text)]
    included = [IncludedItem(i.kind, i.record_id, i.forced, i.score) for i in kept]
    return PromptBundle(messages=messages, char_budget=char_budget, included=included)


def build_actor_prompt(
    task: str,
    examples: Optional[RetrievalResult] = None,
    skills: Optional[RetrievalResult] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    history: Sequence[ChatMessage] = (),
) -> PromptBundle:
    if char_budget <= 0:
        raise PromptOverflow("character budget must be positive")
    items = _example_items(examples) + _skill_items(skills)

    def build(current: list[_Item]) -> str:
        examples_block, skills_block = _render_sections(current)
        parts = [p for p in (examples_block, skills_block) if p]
        parts.append(f"The task is: {task}")
        parts.append("Write flat code to solve the task.")
        return "\n\n".join(parts)

    user_text, kept = _fit_to_budget(build, ACTOR_SYSTEM_PROMPT, items, char_budget, history)
    return _bundle(ACTOR_SYSTEM_PROMPT, user_text, kept, char_budget, history)


def build_skill_learning_prompt(
    task: str,
    skill: SkillDef,
    examples: Optional[RetrievalResult] = None,
    other_skills: Optional[RetrievalResult] = None,
    preservation: bool = False,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    history: Sequence[ChatMessage] = (),
) -> PromptBundle:
    if char_budget <= 0:
        raise PromptOverflow("character budget must be positive")
    items = _example_items(examples) + _skill_items(other_skills)
    skill_text = format_skill_header(skill) if not skill.body else None

    def build(current: list[_Item]) -> str:
        examples_block, skills_block = _render_sections(current)
        parts = [
            f"The task is: {task}",
            "The function you are supposed to implement is:\n\n"
            + (skill_text or _render_full_skill(skill)),
        ]
        if examples_block:
            parts.append(examples_block)
        if skills_block:
            parts.append("The following skills may be useful in your implementation:\n" + skills_block)
        closing = "Implement the function and solve the task, while trying to ensure that prior tasks remain solvable."
        if preservation:
            closing = PRESERVATION_META_PROMPT + "\n" + closing
        parts.append(closing)
        return "\n\n".join(parts)

    user_text, kept = _fit_to_budget(
        build, SKILL_LEARNING_SYSTEM_PROMPT, items, char_budget, history
    )
    return _bundle(SKILL_LEARNING_SYSTEM_PROMPT, user_text, kept, char_budget, history)


def _render_full_skill(skill: SkillDef) -> str:
    from .skillscript import format_skill

    return format_skill(skill)


def build_iteration_prompt(
    feedback: str,
    examples: Optional[RetrievalResult] = None,
    system_text: str = ACTOR_SYSTEM_PROMPT,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    history: Sequence[ChatMessage] = (),
) -> PromptBundle:
    items = _example_items(examples)

    def build(current: list[_Item]) -> str:
        examples_block, _ = _render_sections(current)
        parts = [f"Rewrite the previous code to integrate the feedback: {feedback}."]
        if examples_block:
            parts.append(examples_block)
        parts.append("Only make changes that take into account this feedback.")
        return "\n".join(parts)

    user_text, kept = _fit_to_budget(build, system_text, items, char_budget, history)
    return _bundle(system_text, user_text, kept, char_budget, history)


def build_task_setup_prompt(
    description: str, char_budget: int = DEFAULT_CHAR_BUDGET
) -> PromptBundle:
    user_text = f"task: {description}\nresponse:"
    bundle = PromptBundle(
        messages=[ChatMessage("system", TASK_SETUP_SYSTEM_PROMPT), ChatMessage("user", user_text)],
        char_budget=char_budget,
    )
    if bundle.total_chars > char_budget:
        raise PromptOverflow("setup prompt exceeds budget")
    return bundle


def build_skill_header_prompt(
    description: str,
    similar_skills: Optional[RetrievalResult] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> PromptBundle:
    items = _skill_items(similar_skills)

    def build(current: list[_Item]) -> str:
        _, skills_block = _render_sections(current)
        parts = []
        if skills_block:
            parts.append(
                "you may use the following function headers as examples of what you are trying to generate:\n"
                + skills_block
            )
        parts.append(f"write a function header for the prompt: {description}.")
        return "\n\n".join(parts)

    user_text, kept = _fit_to_budget(build, SKILL_HEADER_SYSTEM_PROMPT, items, char_budget)
    return _bundle(SKILL_HEADER_SYSTEM_PROMPT, user_text, kept, char_budget)


def build_refine_header_prompt(
    function_code: str, refinement: str, char_budget: int = DEFAULT_CHAR_BUDGET
) -> PromptBundle:
    user_text = REFINE_HEADER_PROMPT.format(function_code=function_code, refinement=refinement)
    bundle = PromptBundle(
        messages=[ChatMessage("system", SKILL_HEADER_SYSTEM_PROMPT), ChatMessage("user", user_text)],
        char_budget=char_budget,
    )
    if bundle.total_chars > char_budget:
        raise PromptOverflow("refine prompt exceeds budget")
    return bundle


def build_parse_hint_prompt(hint: str, char_budget: int = DEFAULT_CHAR_BUDGET) -> PromptBundle:
    user_text = PARSE_HINT_PROMPT.format(hint=hint)
    return PromptBundle(
        messages=[ChatMessage("system", ACTOR_SYSTEM_PROMPT), ChatMessage("user", user_text)],
        char_budget=char_budget,
    )


# -- response parsing ---------------------------------------------------------------


def parse_response(kind: str, text: str) -> ParsedPayload:
    """Validate a response body against its expected kind; raise ParseFailure."""
    if kind not in RESPONSE_KINDS:
        raise ValueError(f"unknown response kind {kind!r}")
    if kind == "hint_items":
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseFailure(f"hint list is not valid JSON: {exc}") from exc
        if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
            raise ParseFailure("hint list must be a JSON array of strings")
        return items
    try:
        program = parse(text)
    except SkillSyntaxError as exc:
        raise ParseFailure(str(exc)) from exc
    if kind == "task_code" or kind == "setup_code":
        if program.skills:
            raise ParseFailure(f"{kind} must be flat code without skill definitions")
        return program
    if kind == "skill_plus_code":
        if len(program.skills) != 1:
            raise ParseFailure("expected exactly one skill definition plus flat code")
        return program
    if kind == "skill_header":
        if len(program.skills) != 1 or program.statements or program.skills[0].body:
            raise ParseFailure("expected a single empty-bodied skill definition")
        return program.skills[0]
    raise ParseFailure(f"unhandled kind {kind!r}")


# -- agents ---------------------------------------------------------------------


class MockAgent:
    """Replays a scripted list of {expect_kind, response_text} entries in order."""

    def __init__(self, script: Sequence[dict]):
        self.script = list(script)
        self.cursor = 0

    @classmethod
    def from_json(cls, text: str) -> "MockAgent":
        return cls(json.loads(text))

    def complete_text(self, bundle: PromptBundle, expect_kind: str) -> str:
        if self.cursor >= len(self.script):
            raise ScriptExhausted(
                f"script of length {len(self.script)} exhausted at call {self.cursor + 1}"
            )
        entry = self.script[self.cursor]
        if entry.get("expect_kind") != expect_kind:
            raise ScriptMismatch(
                f"script entry {self.cursor + 1} expects kind {entry.get('expect_kind')!r}, "
                f"session asked for {expect_kind!r}"
            )
        self.cursor += 1
        text = entry.get("response_text", "")
        if not text.strip():
            raise AgentRefusal("scripted response is empty")
        return text


class HttpAgent:
    """JSON chat-completion POST client. The key never appears in transcripts."""

    def __init__(self, url: str, key: str = "", model: str = "", timeout: float = 60.0):
        if not url:
            raise TransportError(f"no agent endpoint; set {ENV_AGENT_URL}")
        self.url = url
        self.key = key
        self.model = model
        self.timeout = timeout

    def complete_text(self, bundle: PromptBundle, expect_kind: str) -> str:
        body: dict = {
            "messages": [{"role": m.role, "content": m.content} for m in bundle.messages]
        }
        if self.model:
            body["model"] = self.model
        request = urllib.request.Request(
            self.url,
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        if self.key:
            request.add_header("Authorization", f"Bearer {self.key}")
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except urllib.error.URLError as exc:
            raise TransportError(f"agent endpoint unreachable: {exc}") from exc
        except (json.JSONDecodeError, OSError) as exc:
            raise TransportError(f"bad agent response: {exc}") from exc
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            content = payload.get("content") if isinstance(payload, dict) else None
        if not content or not str(content).strip():
            raise AgentRefusal("agent returned empty content")
        return str(content)


Agent = Union[MockAgent, HttpAgent]

PARSE_RETRY_LIMIT = 3


def complete(
    agent: Agent,
    bundle: PromptBundle,
    expect_kind: str,
    on_attempt=None,
) -> AgentResponse:
    """Run one completion with up to PARSE_RETRY_LIMIT automatic re-asks.

    On a parse failure the agent is re-asked with the parser error appended,
    so syntax trivia never reaches the human reviewer.
    """
    attempt_bundle = bundle
    last_error: Optional[ParseFailure] = None
    for attempt in range(PARSE_RETRY_LIMIT):
        text = agent.complete_text(attempt_bundle, expect_kind)
        if on_attempt is not None:
            on_attempt(attempt, attempt_bundle, text)
        try:
            parsed = parse_response(expect_kind, text)
            return AgentResponse(kind=expect_kind, payload=text, parsed=parsed)
        except ParseFailure as exc:
            last_error = exc
            retry_messages = attempt_bundle.messages + [
                ChatMessage("assistant", text),
                ChatMessage(
                    "user",
                    f"Your previous reply failed to parse: {exc}\n"
                    "Reply again with valid skill-language code only.",
                ),
            ]
            attempt_bundle = PromptBundle(
                messages=retry_messages,
                char_budget=attempt_bundle.char_budget,
                included=attempt_bundle.included,
            )
    raise last_error  # type: ignore[misc]


def propose_skill_header(
    agent: Agent,
    description: str,
    similar_skills: Optional[RetrievalResult] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    on_attempt=None,
) -> SkillDef:
    if not description.strip():
        raise ParseFailure("skill description must be nonempty")
    bundle = build_skill_header_prompt(description, similar_skills, char_budget)
    response = complete(agent, bundle, "skill_header", on_attempt=on_attempt)
    assert isinstance(response.parsed, SkillDef)
    return response.parsed


def refine_skill_header(
    agent: Agent,
    header: SkillDef,
    refinement: str,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    on_attempt=None,
) -> SkillDef:
    bundle = build_refine_header_prompt(format_skill_header(header), refinement, char_budget)
    response = complete(agent, bundle, "skill_header", on_attempt=on_attempt)
    assert isinstance(response.parsed, SkillDef)
    return response.parsed
