"""The interactive session engine: skill acquisition, lifelong extension, task
solving, transcripts and metrics.

The loop structure is fixed: every iteration retrieves from memory before the
agent is invoked, and every rollout starts from a restore of the task's
initial snapshot, never from a mutated world. Acceptance is judged by the
feedback source (a human, a script, or a task evaluator), not by the engine.

A new skill version is gated by a regression check at accept time: all stored
examples that transitively call the skill are re-executed from their recorded
initial snapshots with the candidate substituted, and must reproduce their
outcome digests. A failing candidate is tombstoned and the loop continues.

Transcripts are JSON-lines event logs with logical timestamps only; driven by
a mock agent and a scripted feedback source they replay byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Union

from . import agent as agent_mod
from .agent import (
    Agent,
    AgentError,
    ChatMessage,
    MockAgent,
    ParseFailure,
    PromptBundle,
    build_actor_prompt,
    build_iteration_prompt,
    build_skill_learning_prompt,
    build_task_setup_prompt,
    complete,
    propose_skill_header,
    refine_skill_header,
)
from .memory import MemoryStore
from .skillscript import Budget, ExecutionTrace, execute, format_program, parse, transitively_calls
from .skillscript.nodes import Program, SkillDef
from .world import WorldSnapshot, WorldState, Workspace, outcome_digest

TRANSCRIPT_VERSION = 1


class SessionError(Exception):
    """Session-level failure (bad scripts, missing skills, malformed specs)."""


class MetricsError(Exception):
    """A transcript is malformed; carries the offending event index."""

    def __init__(self, message: str, event_index: int):
        self.event_index = event_index
        super().__init__(f"{message} (event {event_index})")


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str  # accept | reject | correction | hint
    text: str = ""
    turn: int = 0
    timestamp: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("accept", "reject", "correction", "hint"):
            raise ValueError(f"bad feedback kind {self.kind!r}")
        if self.kind in ("correction", "hint") and not self.text.strip():
            raise ValueError(f"{self.kind} feedback needs nonempty text")


@dataclass
class RolloutReport:
    """What the feedback source sees after each rollout."""

    instruction: str
    code: str
    trace: ExecutionTrace
    world: WorldState
    digest: str
    iteration: int


@dataclass(frozen=True)
class TaskRequest:
    instruction: str
    setup_description: str = ""
    hint: Optional[str] = None


class FeedbackSource(Protocol):
    def review(self, report: RolloutReport) -> FeedbackEvent: ...


class LearningFeedbackSource(FeedbackSource, Protocol):
    def next_task(self) -> Optional[TaskRequest]: ...

    def review_header(self, header: SkillDef) -> tuple[str, str]: ...


class ScriptedFeedback:
    """Drives a session from a JSON-able dict; see tests/fixtures for shape."""

    def __init__(self, script: dict):
        self.script = script
        self.task_index = -1
        self.review_index = 0
        self.header_refinements = list(script.get("header", {}).get("refinements", []))

    def next_task(self) -> Optional[TaskRequest]:
        tasks = self.script.get("tasks", [])
        self.task_index += 1
        self.review_index = 0
        if self.task_index >= len(tasks):
            return None
        task = tasks[self.task_index]
        return TaskRequest(
            instruction=task["instruction"],
            setup_description=task.get("setup_description", ""),
            hint=task.get("hint"),
        )

    def review_header(self, header: SkillDef) -> tuple[str, str]:
        if self.header_refinements:
            return ("refine", self.header_refinements.pop(0))
        return ("accept", "")

    def review(self, report: RolloutReport) -> FeedbackEvent:
        tasks = self.script.get("tasks", [])
        if self.task_index == -1 and tasks:
            # solve sessions take the task directly and never call next_task
            self.task_index = 0
        if not 0 <= self.task_index < len(tasks):
            raise SessionError("scripted review requested outside any task")
        reviews = tasks[self.task_index].get("reviews", [])
        if self.review_index >= len(reviews):
            raise SessionError(
                f"feedback script exhausted for task {self.task_index + 1} "
                f"at review {self.review_index + 1}"
            )
        entry = reviews[self.review_index]
        self.review_index += 1
        return FeedbackEvent(kind=entry["kind"], text=entry.get("text", ""))


class EvaluatorFeedback:
    """Accepts iff the named task evaluator reports success (eval mode)."""

    def __init__(self, evaluator: str, params: Optional[dict] = None):
        self.evaluator = evaluator
        self.params = params or {}

    def review(self, report: RolloutReport) -> FeedbackEvent:
        from .tasklib import evaluate

        result = evaluate(self.evaluator, report.world, self.params)
        if result.success:
            return FeedbackEvent(kind="accept")
        failed = "; ".join(
            f"{c.name}: {c.measured}" if c.measured else c.name for c in result.failed_checks()
        )
        return FeedbackEvent(kind="correction", text=f"evaluation failed: {failed}")


@dataclass
class SessionConfig:
    seed: int = 0
    max_iterations: int = 10
    char_budget: int = agent_mod.DEFAULT_CHAR_BUDGET
    k_examples: int = 10
    k_skills: int = 5
    budget: Budget = field(default_factory=Budget)
    count_hints_in_noc: bool = True

    def to_json_obj(self) -> dict:
        return {
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "char_budget": self.char_budget,
            "k_examples": self.k_examples,
            "k_skills": self.k_skills,
            "budget": {
                "max_primitive_calls": self.budget.max_primitive_calls,
                "max_steps": self.budget.max_steps,
            },
            "count_hints_in_noc": self.count_hints_in_noc,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SessionConfig":
        budget = Budget(**obj.get("budget", {}))
        return cls(
            seed=obj.get("seed", 0),
            max_iterations=obj.get("max_iterations", 10),
            char_budget=obj.get("char_budget", agent_mod.DEFAULT_CHAR_BUDGET),
            k_examples=obj.get("k_examples", 10),
            k_skills=obj.get("k_skills", 5),
            budget=budget,
            count_hints_in_noc=obj.get("count_hints_in_noc", True),
        )


class Transcript:
    """Ordered event log; the single source of truth for a session."""

    def __init__(self) -> None:
        self.events: list[dict] = []

    def emit(self, type_: str, **payload) -> dict:
        event = {"seq": len(self.events) + 1, "type": type_}
        event.update(payload)
        self.events.append(event)
        return event

    def render(self) -> str:
        return "".join(json.dumps(e, separators=(",", ":")) + "\n" for e in self.events)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")

    @classmethod
    def read(cls, path: Union[str, Path]) -> "Transcript":
        transcript = cls()
        for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                transcript.events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SessionError(f"transcript line {line_no} is not JSON: {exc}") from exc
        return transcript


@dataclass
class RegressionReport:
    skill_name: str
    total: int = 0
    passed: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_json_obj(self) -> dict:
        return {
            "skill_name": self.skill_name,
            "total": self.total,
            "passed": self.passed,
            "failures": self.failures,
        }


def regression_check(
    skill_name: str,
    candidate: SkillDef,
    memory: MemoryStore,
    budget: Optional[Budget] = None,
) -> RegressionReport:
    """Re-execute every stored example that (transitively) calls the skill.

    Pass iff each rollout completes and reproduces its stored outcome digest.
    """
    report = RegressionReport(skill_name=skill_name)
    library = dict(memory.library_view())
    library[skill_name] = candidate
    for record in memory.examples:
        program = parse(record.code)
        if not transitively_calls(program, library, skill_name):
            continue
        report.total += 1
        world = WorldSnapshot.decode(record.setup_snapshot).restore()
        trace = execute(program, world, library=library, budget=budget or Budget())
        if trace.error is not None:
            report.failures.append(
                {
                    "example_id": record.record_id,
                    "instruction": record.instruction,
                    "reason": trace.error.render(),
                }
            )
        elif outcome_digest(world) != record.outcome_digest:
            report.failures.append(
                {
                    "example_id": record.record_id,
                    "instruction": record.instruction,
                    "reason": "outcome digest mismatch",
                }
            )
        else:
            report.passed += 1
    report.total = report.passed + len(report.failures)
    return report


# -- the engine ----------------------------------------------------------------


class _Runner:
    def __init__(
        self,
        agent: Agent,
        memory: MemoryStore,
        workspace: Workspace,
        config: SessionConfig,
        transcript: Transcript,
        observer=None,
    ):
        self.agent = agent
        self.memory = memory
        self.workspace = workspace
        self.config = config
        self.transcript = transcript
        self.observer = observer  # callable(encoded_world_snapshot) or None

    def _observe(self, world: WorldState) -> None:
        if self.observer is not None:
            self.observer(world.snapshot().encode())

    # -- shared plumbing ------------------------------------------------------

    def _emit(self, type_: str, **payload) -> dict:
        return self.transcript.emit(type_, **payload)

    def _log_attempt(self, iteration: int):
        def on_attempt(attempt: int, bundle: PromptBundle, text: str) -> None:
            self._emit(
                "agent_attempt", iteration=iteration, attempt=attempt + 1, response_text=text
            )

        return on_attempt

    def _setup_world(self, task: TaskRequest, task_index: int) -> Optional[WorldState]:
        world = WorldState(self.workspace, rng_seed=self.config.seed + 1000 * task_index)
        if not task.setup_description:
            return world
        bundle = build_task_setup_prompt(task.setup_description, self.config.char_budget)
        self._emit("setup_prompt", task=task_index, bundle=bundle.to_json_obj())
        try:
            response = complete(
                self.agent, bundle, "setup_code", on_attempt=self._log_attempt(0)
            )
        except AgentError as exc:
            self._emit("agent_error", stage="setup", error=str(exc))
            return None
        assert isinstance(response.parsed, Program)
        trace = execute(
            response.parsed, world, library=self.memory.library_view(),
            budget=self.config.budget, allow_setup=True,
        )
        self._emit(
            "setup_result",
            task=task_index,
            code=response.payload,
            trace=trace.to_json_obj(),
            object_count=len(world.objects),
        )
        if trace.error is not None:
            return None
        self._observe(world)
        return world

    def _retrieve(self, iteration: int, query: str, hint: Optional[str], exclude_skill: Optional[str]):
        examples = self.memory.retrieve_examples(query, self.config.k_examples, hint=hint)
        skills = self.memory.retrieve_skills(query, self.config.k_skills, hint=hint)
        if exclude_skill is not None:
            skills = _drop_skill(skills, exclude_skill)
        self._emit(
            "retrieval",
            iteration=iteration,
            query=query,
            hint=hint,
            examples=[
                {"record_id": r.record_id, "score": round(s, 12), "forced": False}
                for r, s in examples.entries
            ]
            + [
                {"record_id": r.record_id, "score": round(s, 12), "forced": True}
                for r, s in examples.forced
            ],
            skills=[
                {"record_id": r.record_id, "score": round(s, 12), "forced": False}
                for r, s in skills.entries
            ]
            + [
                {"record_id": r.record_id, "score": round(s, 12), "forced": True}
                for r, s in skills.forced
            ],
        )
        return examples, skills

    def _rollout(self, program: Program, base: WorldSnapshot, iteration: int) -> RolloutReport:
        world = base.restore()
        trace = execute(
            program, world, library=self.memory.library_view(), budget=self.config.budget
        )
        digest = outcome_digest(world)
        picks = sum(1 for a in world.action_log if a.kind == "pick_place")
        self._emit(
            "rollout",
            iteration=iteration,
            trace=trace.to_json_obj(),
            digest=digest,
            pick_place_count=picks,
        )
        self._observe(world)
        return RolloutReport(
            instruction="", code="", trace=trace, world=world, digest=digest, iteration=iteration
        )

    # -- the inner loop of the interactive algorithm ---------------------------------

    def run_task(
        self,
        task: TaskRequest,
        task_index: int,
        feedback: FeedbackSource,
        base: WorldSnapshot,
        skill_under_learning: Optional[SkillDef] = None,
        extension: bool = False,
    ) -> tuple[bool, Optional[SkillDef], Optional[Program]]:
        """One task of the interactive loop. Returns (accepted, skill, program)."""
        correction: Optional[str] = None
        hints: list[str] = []
        history: list[ChatMessage] = []
        expect_kind = "skill_plus_code" if skill_under_learning is not None else "task_code"
        accepted_skill: Optional[SkillDef] = None
        accepted_program: Optional[Program] = None
        if task.hint:
            hints.append(task.hint)

        for iteration in range(1, self.config.max_iterations + 1):
            query = task.instruction if correction is None else f"{task.instruction}\n{correction}"
            hint_text = "; ".join(hints) if hints else None
            examples, skills = self._retrieve(
                iteration,
                query,
                hint_text,
                exclude_skill=skill_under_learning.name if skill_under_learning else None,
            )

            try:
                if iteration == 1 or correction is None:
                    if skill_under_learning is not None:
                        bundle = build_skill_learning_prompt(
                            task.instruction,
                            skill_under_learning,
                            examples,
                            skills,
                            preservation=extension,
                            char_budget=self.config.char_budget,
                        )
                    else:
                        bundle = build_actor_prompt(
                            task.instruction, examples, skills, self.config.char_budget
                        )
                else:
                    system_text = (
                        agent_mod.SKILL_LEARNING_SYSTEM_PROMPT
                        if skill_under_learning is not None
                        else agent_mod.ACTOR_SYSTEM_PROMPT
                    )
                    bundle = build_iteration_prompt(
                        correction,
                        examples,
                        system_text=system_text,
                        char_budget=self.config.char_budget,
                        history=history,
                    )
            except agent_mod.PromptOverflow as exc:
                self._emit("agent_error", stage="prompt", error=str(exc))
                return False, accepted_skill, accepted_program

            self._emit("prompt", iteration=iteration, bundle=bundle.to_json_obj())
            try:
                response = complete(
                    self.agent, bundle, expect_kind, on_attempt=self._log_attempt(iteration)
                )
            except ParseFailure as exc:
                self._emit("parse_failure", iteration=iteration, error=str(exc))
                correction = f"PARSE ERROR: {exc}"
                self._emit("auto_correction", iteration=iteration, text=correction)
                continue
            except AgentError as exc:
                self._emit("agent_error", stage="completion", error=str(exc))
                return False, accepted_skill, accepted_program

            program = response.parsed
            assert isinstance(program, Program)
            history = list(bundle.messages[1:]) + [ChatMessage("assistant", response.payload)]

            if skill_under_learning is not None:
                candidate = program.skills[0]
                if candidate.name != skill_under_learning.name:
                    correction = (
                        f"The skill must keep its reserved name "
                        f"{skill_under_learning.name!r}, not {candidate.name!r}."
                    )
                    self._emit("auto_correction", iteration=iteration, text=correction)
                    continue
            else:
                candidate = None

            report = self._rollout(program, base, iteration)
            report.instruction = task.instruction
            report.code = response.payload

            if report.trace.error is not None:
                correction = f"EXECUTION ERROR: {report.trace.error.render()}"
                self._emit("auto_correction", iteration=iteration, text=correction)
                continue

            event = feedback.review(report)
            event = FeedbackEvent(
                kind=event.kind,
                text=event.text,
                turn=iteration,
                timestamp=len(self.transcript.events) + 1,
            )
            self._emit(
                "feedback", iteration=iteration, kind=event.kind, text=event.text
            )

            if event.kind == "accept":
                if candidate is not None:
                    regression = regression_check(
                        candidate.name, candidate, self.memory, self.config.budget
                    )
                    self._emit(
                        "regression", iteration=iteration, report=regression.to_json_obj()
                    )
                    if not regression.ok:
                        rejected = self.memory.reject_skill(candidate)
                        self._emit(
                            "version_rejected",
                            name=rejected.name,
                            version=rejected.version,
                        )
                        correction = "REGRESSION FAILURE: " + "; ".join(
                            f"{f['instruction']}: {f['reason']}" for f in regression.failures
                        )
                        self._emit("auto_correction", iteration=iteration, text=correction)
                        continue
                flat_code = format_program(Program(skills=[], statements=program.statements))
                record = self.memory.add_example(
                    task.instruction, flat_code, report.digest, base.encode()
                )
                self._emit(
                    "example_added", record_id=record.record_id, instruction=task.instruction
                )
                accepted_skill = candidate
                accepted_program = program
                return True, accepted_skill, accepted_program
            if event.kind == "hint":
                hints.append(event.text)
                correction = None
            elif event.kind == "correction":
                correction = event.text
            else:  # reject
                correction = "The previous attempt was rejected; try a different approach."
        return False, accepted_skill, accepted_program


def _drop_skill(result, name: str):
    from .memory import RetrievalResult

    return RetrievalResult(
        entries=tuple((r, s) for r, s in result.entries if r.name != name),
        forced=tuple((r, s) for r, s in result.forced if r.name != name),
    )


def run_skill_learning_session(
    skill_description: str,
    agent: Agent,
    memory: MemoryStore,
    workspace: Workspace,
    feedback_source: LearningFeedbackSource,
    config: Optional[SessionConfig] = None,
    extension: bool = False,
    skill_name: Optional[str] = None,
    transcript: Optional[Transcript] = None,
    run_spec: Optional[dict] = None,
    observer=None,
) -> Transcript:
    """Phase I acquisition or (with extension=True) Phase II extension."""
    config = config or SessionConfig()
    transcript = transcript or Transcript()
    transcript.emit(
        "session_start",
        version=TRANSCRIPT_VERSION,
        mode="extend" if extension else "learn",
        seed=config.seed,
        config=config.to_json_obj(),
        spec=run_spec,
    )
    runner = _Runner(agent, memory, workspace, config, transcript, observer)

    if extension:
        if not skill_name:
            raise SessionError("extension sessions need the skill name")
        existing = memory.latest_accepted_skill(skill_name)
        if existing is None:
            raise SessionError(f"no accepted skill named {skill_name!r} to extend")
        header = existing.skill
        transcript.emit("skill_header_loaded", name=skill_name, version=existing.version)
    else:
        similar = memory.retrieve_skills(skill_description, config.k_skills) if memory.skills else None
        try:
            header = propose_skill_header(
                agent, skill_description, similar, config.char_budget,
                on_attempt=runner._log_attempt(0),
            )
            transcript.emit("skill_header_proposed", header=header.header())
            while True:
                action, text = feedback_source.review_header(header)
                if action == "accept":
                    break
                header = refine_skill_header(
                    agent, header, text, config.char_budget, on_attempt=runner._log_attempt(0)
                )
                transcript.emit("skill_header_refined", refinement=text, header=header.header())
        except AgentError as exc:
            transcript.emit("agent_error", stage="skill_header", error=str(exc))
            transcript.emit("session_end", status="failed")
            return transcript
        transcript.emit("skill_header_accepted", header=header.header())

    current_skill = header
    final_candidate: Optional[SkillDef] = None
    task_index = 0
    while True:
        task = feedback_source.next_task()
        if task is None:
            break
        task_index += 1
        transcript.emit(
            "task_start",
            index=task_index,
            instruction=task.instruction,
            setup_description=task.setup_description,
            hint=task.hint,
        )
        world = runner._setup_world(task, task_index)
        if world is None:
            transcript.emit("task_end", index=task_index, status="failed")
            continue
        base = world.snapshot()
        accepted, skill, _program = runner.run_task(
            task, task_index, feedback_source, base,
            skill_under_learning=current_skill, extension=extension,
        )
        if accepted and skill is not None:
            final_candidate = skill
            current_skill = skill  # later tasks iterate on the accepted definition
        transcript.emit(
            "task_end", index=task_index, status="accepted" if accepted else "failed"
        )

    if final_candidate is not None:
        record = memory.upsert_skill(final_candidate)
        transcript.emit("skill_upserted", name=record.name, version=record.version)
        transcript.emit("session_end", status="ok")
    else:
        transcript.emit("session_end", status="no_accepted_version")
    return transcript


def run_extension_session(
    skill_name: str,
    agent: Agent,
    memory: MemoryStore,
    workspace: Workspace,
    feedback_source: LearningFeedbackSource,
    config: Optional[SessionConfig] = None,
    transcript: Optional[Transcript] = None,
    run_spec: Optional[dict] = None,
) -> Transcript:
    return run_skill_learning_session(
        skill_description="",
        agent=agent,
        memory=memory,
        workspace=workspace,
        feedback_source=feedback_source,
        config=config,
        extension=True,
        skill_name=skill_name,
        transcript=transcript,
        run_spec=run_spec,
    )


def run_task_session(
    instruction: str,
    agent: Agent,
    memory: MemoryStore,
    workspace: Workspace,
    feedback_source: FeedbackSource,
    config: Optional[SessionConfig] = None,
    hint: Optional[str] = None,
    world: Optional[WorldState] = None,
    setup_description: str = "",
    transcript: Optional[Transcript] = None,
    run_spec: Optional[dict] = None,
    observer=None,
) -> Transcript:
    """Phase III: solve one task with retrieval-augmented planning."""
    config = config or SessionConfig()
    transcript = transcript or Transcript()
    transcript.emit(
        "session_start",
        version=TRANSCRIPT_VERSION,
        mode="solve",
        seed=config.seed,
        config=config.to_json_obj(),
        spec=run_spec,
    )
    runner = _Runner(agent, memory, workspace, config, transcript, observer)
    task = TaskRequest(instruction=instruction, setup_description=setup_description, hint=hint)
    transcript.emit(
        "task_start", index=1, instruction=instruction,
        setup_description=setup_description, hint=hint,
    )
    if world is None:
        world = runner._setup_world(task, 1)
    elif observer is not None:
        observer(world.snapshot().encode())
    if world is None:
        transcript.emit("task_end", index=1, status="failed")
        transcript.emit("session_end", status="failed")
        return transcript
    base = world.snapshot()
    accepted, _skill, _program = runner.run_task(task, 1, feedback_source, base)
    transcript.emit("task_end", index=1, status="accepted" if accepted else "failed")
    transcript.emit("session_end", status="ok" if accepted else "task_failed")
    return transcript


# -- metrics ---------------------------------------------------------------------


@dataclass
class TaskAttempt:
    task: str
    accepted: bool
    noc: int


@dataclass
class Metrics:
    attempts: list[TaskAttempt] = field(default_factory=list)

    @property
    def sr(self) -> float:
        """Macro-averaged success rate over distinct tasks."""
        by_task: dict[str, list[TaskAttempt]] = {}
        for attempt in self.attempts:
            by_task.setdefault(attempt.task, []).append(attempt)
        if not by_task:
            return 0.0
        rates = [
            sum(1 for a in attempts if a.accepted) / len(attempts)
            for attempts in by_task.values()
        ]
        return sum(rates) / len(rates)

    @property
    def noc_mean(self) -> float:
        """Mean corrections before acceptance, over accepted attempts."""
        accepted = [a for a in self.attempts if a.accepted]
        if not accepted:
            return 0.0
        return sum(a.noc for a in accepted) / len(accepted)

    def per_task(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for attempt in self.attempts:
            row = out.setdefault(
                attempt.task, {"attempts": 0, "accepted": 0, "noc": []}
            )
            row["attempts"] += 1
            if attempt.accepted:
                row["accepted"] += 1
                row["noc"].append(attempt.noc)
        for row in out.values():
            row["sr"] = row["accepted"] / row["attempts"]
            row["noc_mean"] = (sum(row["noc"]) / len(row["noc"])) if row["noc"] else 0.0
        return out


def compute_metrics(
    transcripts: list[Transcript], count_hints: bool = True
) -> Metrics:
    """SR and NoC over transcripts. Counting follows the feedback events only:
    automatic error corrections are engine events and never count."""
    metrics = Metrics()
    counted = ("correction", "hint") if count_hints else ("correction",)
    for transcript in transcripts:
        task: Optional[str] = None
        noc = 0
        accepted = False
        for index, event in enumerate(transcript.events):
            etype = event.get("type")
            if etype == "task_start":
                if task is not None:
                    raise MetricsError("task_start inside an open task", index)
                task = event.get("instruction", "")
                noc = 0
                accepted = False
            elif etype == "feedback":
                if task is None:
                    raise MetricsError("feedback outside any task", index)
                kind = event.get("kind")
                if kind == "accept":
                    accepted = True
                elif kind in counted and not accepted:
                    noc += 1
            elif etype == "task_end":
                if task is None:
                    raise MetricsError("task_end without task_start", index)
                status_accepted = event.get("status") == "accepted"
                if status_accepted != accepted:
                    raise MetricsError("task_end status contradicts feedback events", index)
                metrics.attempts.append(TaskAttempt(task=task, accepted=accepted, noc=noc))
                task = None
        if task is not None:
            raise MetricsError("transcript ended inside an open task", len(transcript.events) - 1)
    return metrics


# -- scripted runs and replay -----------------------------------------------------


def run_from_spec(
    spec: dict,
    memory: MemoryStore,
    workspace: Optional[Workspace] = None,
    feedback_override: Optional[FeedbackSource] = None,
    agent_override: Optional[Agent] = None,
    observer=None,
    transcript: Optional[Transcript] = None,
) -> Transcript:
    """Execute a self-contained scripted run (the unit of transcript replay)."""
    workspace = workspace or Workspace()
    config = SessionConfig.from_json_obj(spec.get("config", {}))
    config.seed = spec.get("seed", config.seed)
    agent = agent_override or MockAgent(spec.get("agent_script", []))
    mode = spec.get("mode", "solve")

    if spec.get("memory") == "seeded":
        from .tasklib import seed_memory

        seed_memory(memory, workspace)

    if mode == "solve":
        feedback: FeedbackSource
        if feedback_override is not None:
            feedback = feedback_override
        elif "evaluator" in spec:
            feedback = EvaluatorFeedback(spec["evaluator"], spec.get("evaluator_params"))
        else:
            feedback = ScriptedFeedback(spec.get("feedback", {}))
        world = None
        if "scene" in spec:
            from .tasklib import setup_scene

            world = WorldState(workspace, rng_seed=spec["scene"].get("seed", config.seed))
            setup_scene(
                spec["scene"]["name"], world, spec["scene"].get("seed", config.seed),
                spec["scene"].get("params", {}),
            )
        return run_task_session(
            spec["instruction"],
            agent,
            memory,
            workspace,
            feedback,
            config,
            hint=spec.get("hint"),
            world=world,
            setup_description=spec.get("setup_description", ""),
            run_spec=spec,
            observer=observer,
            transcript=transcript,
        )
    if mode in ("learn", "extend"):
        scripted = feedback_override or ScriptedFeedback(spec.get("feedback", {}))
        return run_skill_learning_session(
            spec.get("skill_description", ""),
            agent,
            memory,
            workspace,
            scripted,
            config,
            extension=(mode == "extend"),
            skill_name=spec.get("skill_name"),
            run_spec=spec,
            observer=observer,
            transcript=transcript,
        )
    raise SessionError(f"unknown run mode {mode!r}")


def replay_transcript(path: Union[str, Path]) -> tuple[bool, str, str]:
    """Re-execute a stored transcript from its embedded spec; compare bytes.

    Returns (identical, original_text, replayed_text).
    """
    import tempfile

    original = Transcript.read(path)
    if not original.events or original.events[0].get("type") != "session_start":
        raise SessionError("transcript does not start with session_start")
    spec = original.events[0].get("spec")
    if not spec:
        raise SessionError("transcript has no embedded run spec; cannot replay")
    with tempfile.TemporaryDirectory() as tmp:
        memory = MemoryStore(Path(tmp) / "memory")
        replayed = run_from_spec(spec, memory)
    original_text = Path(path).read_text(encoding="utf-8")
    replayed_text = replayed.render()
    return original_text == replayed_text, original_text, replayed_text
