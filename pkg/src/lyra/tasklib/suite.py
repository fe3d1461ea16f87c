"""Benchmark suite runner: repeated scripted attempts scored by evaluators.

Each attempt is a full task session on a freshly generated scene, driven by a
mock agent that proposes the seed plan and judged by the task's programmatic
evaluator (eval mode stands in for the human reviewer so suites can run in CI).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from ..memory import MemoryStore
from ..session import Transcript, run_from_spec
from ..world import Workspace
from . import plans

DEFAULT_ATTEMPTS = 20


@dataclass(frozen=True)
class TaskSpec:
    id: str
    name: str  # display name, matching the benchmark chart labels
    instruction: str
    scene: str
    scene_params: dict
    evaluator: str
    evaluator_params: dict
    plan: str  # seed plan source (canonical flat code)
    hint: Optional[str] = None


@dataclass
class SuiteResult:
    suite: str
    attempts: int
    rows: list[dict] = field(default_factory=list)
    transcripts: list[Transcript] = field(default_factory=list)

    @property
    def sr_macro(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r["sr"] for r in self.rows) / len(self.rows)

    def table(self) -> str:
        width = max(len(r["name"]) for r in self.rows) if self.rows else 4
        lines = [f"{'task'.ljust(width)}  attempts  successes  SR"]
        for r in self.rows:
            lines.append(
                f"{r['name'].ljust(width)}  {r['attempts']:8d}  {r['successes']:9d}  {r['sr']:.2f}"
            )
        lines.append(f"{'average'.ljust(width)}  {'':8}  {'':9}  {self.sr_macro:.2f}")
        return "\n".join(lines)


def _plan_for(entry: dict) -> str:
    kind = entry["plan"]
    params = entry.get("plan_params", {})
    if kind == "build_house":
        return plans.plan_build_house()
    if kind == "stack_blocks":
        return plans.plan_stack_blocks()
    if kind == "next_to_reference":
        return plans.plan_next_to_reference()
    if kind == "structure":
        return plans.plan_structure(tuple(params["dims"]), params.get("shape", "cuboid"))
    if kind == "jenga":
        return plans.plan_jenga(
            params.get("layers", 4), params.get("per_layer", 3), params.get("alternating", True)
        )
    if kind == "face":
        return plans.plan_face(params.get("outline_count", 12), params.get("radius", 0.10))
    raise KeyError(f"unknown plan kind {kind!r}")


def load_suite(path: Union[str, Path, None] = None) -> tuple[str, int, list[TaskSpec]]:
    """Load a suite manifest; default is the bundled ravens suite."""
    if path is None:
        text = (resources.files("lyra.tasklib") / "suites" / "ravens.json").read_text("utf-8")
        manifest = json.loads(text)
    else:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    tasks = []
    for entry in manifest["tasks"]:
        variants = entry.get("variants", [None])
        for variant in variants:
            merged = dict(entry)
            if variant:
                merged.update(variant)
            suffix = f"_{variant['id']}" if variant and "id" in variant else ""
            tasks.append(
                TaskSpec(
                    id=entry["id"] + suffix,
                    name=entry["name"],
                    instruction=merged["instruction"],
                    scene=merged["scene"],
                    scene_params=merged.get("scene_params", {}),
                    evaluator=merged["evaluator"],
                    evaluator_params=merged.get("evaluator_params", {}),
                    plan=_plan_for(merged),
                    hint=merged.get("hint"),
                )
            )
    return manifest.get("suite", "suite"), manifest.get("attempts", DEFAULT_ATTEMPTS), tasks


def attempt_spec(task: TaskSpec, seed: int) -> dict:
    """A self-contained scripted run for one suite attempt."""
    return {
        "mode": "solve",
        "instruction": task.instruction,
        "hint": task.hint,
        "seed": seed,
        "scene": {"name": task.scene, "seed": seed, "params": task.scene_params},
        "evaluator": task.evaluator,
        "evaluator_params": task.evaluator_params,
        "agent_script": [{"expect_kind": "task_code", "response_text": task.plan}],
    }


def run_suite(
    memory: MemoryStore,
    path: Union[str, Path, None] = None,
    attempts: Optional[int] = None,
    base_seed: int = 500,
    workspace: Optional[Workspace] = None,
) -> SuiteResult:
    suite_name, default_attempts, tasks = load_suite(path)
    attempts = attempts or default_attempts
    result = SuiteResult(suite=suite_name, attempts=attempts)

    by_name: dict[str, list[TaskSpec]] = {}
    for task in tasks:
        by_name.setdefault(task.name, []).append(task)

    for name, variants in by_name.items():
        successes = 0
        total = 0
        for attempt in range(attempts):
            task = variants[attempt % len(variants)]
            seed = base_seed + 7919 * attempt + hash_stable(task.id)
            transcript = run_from_spec(attempt_spec(task, seed), memory, workspace)
            result.transcripts.append(transcript)
            total += 1
            if transcript.events[-1].get("status") == "ok":
                successes += 1
        result.rows.append(
            {
                "name": name,
                "attempts": total,
                "successes": successes,
                "sr": successes / total if total else 0.0,
            }
        )
    return result


def hash_stable(text: str) -> int:
    out = 0
    for ch in text:
        out = (out * 131 + ord(ch)) % 100003
    return out
