"""Command-line interface: learn, extend, solve, evaluate, replay, inspect, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .agent import ENV_AGENT_KEY, ENV_AGENT_URL, HttpAgent
from .config import AppConfig, load_config
from .memory import MemoryStore
from .session import (
    FeedbackEvent,
    RolloutReport,
    SessionError,
    TaskRequest,
    Transcript,
    compute_metrics,
    replay_transcript,
    run_from_spec,
    run_skill_learning_session,
    run_task_session,
)
from .skillscript.nodes import SkillDef

EXIT_OK = 0
EXIT_TASK_FAILED = 1
EXIT_USAGE = 2


class ConsoleFeedback:
    """Interactive feedback source for live terminal sessions."""

    def __init__(self, learn_mode: bool = False):
        self.learn_mode = learn_mode

    def next_task(self) -> Optional[TaskRequest]:
        print("\nNext task instruction (empty line ends the session):")
        instruction = input("> ").strip()
        if not instruction:
            return None
        print("Describe the initial scene (empty keeps the table empty):")
        setup = input("> ").strip()
        return TaskRequest(instruction=instruction, setup_description=setup)

    def review_header(self, header: SkillDef) -> tuple[str, str]:
        print("\nProposed skill header:")
        print(f"  {header.header()}")
        answer = input("accept, or type a refinement> ").strip()
        if not answer or answer.lower() in ("accept", "a", "y", "yes"):
            return ("accept", "")
        return ("refine", answer)

    def review(self, report: RolloutReport) -> FeedbackEvent:
        print(f"\n--- rollout for: {report.instruction}")
        print(report.code.rstrip())
        print(f"--- {len(report.trace.primitive_calls)} primitive calls, digest {report.digest[:12]}")
        for obj in report.world.objects:
            p = obj.pose.position
            print(f"    {obj.color} {obj.object_type} at ({p.x:.3f}, {p.y:.3f}, {p.z:.3f})")
        while True:
            answer = input("[a]ccept / [r]eject / [c]orrection <text> / [h]int <text> > ").strip()
            if answer.lower() in ("a", "accept"):
                return FeedbackEvent(kind="accept")
            if answer.lower() in ("r", "reject"):
                return FeedbackEvent(kind="reject")
            if answer.lower().startswith(("c ", "correction ")):
                return FeedbackEvent(kind="correction", text=answer.split(" ", 1)[1])
            if answer.lower().startswith(("h ", "hint ")):
                return FeedbackEvent(kind="hint", text=answer.split(" ", 1)[1])
            print("unrecognized; try again")


def _load_script(path: Optional[str]) -> Optional[dict]:
    if path is None:
        return None
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _open_memory(args, config: AppConfig) -> MemoryStore:
    directory = Path(args.memory_dir) if args.memory_dir else config.memory_dir
    embed_url = os.environ.get("LYRA_EMBED_URL", "")
    if embed_url:
        from .memory import HttpEmbedder

        return MemoryStore(directory, embedder=HttpEmbedder(embed_url))
    return MemoryStore(directory)


def _live_agent() -> HttpAgent:
    return HttpAgent(os.environ.get(ENV_AGENT_URL, ""), os.environ.get(ENV_AGENT_KEY, ""))


def _write_transcript(transcript: Transcript, out: Optional[str], default_name: str) -> Path:
    path = Path(out) if out else Path("transcripts") / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    transcript.write(path)
    return path


def _scripted_run(args, config: AppConfig, mode: str, extra: dict) -> int:
    script = _load_script(args.script)
    if script is None:
        return -1  # caller falls through to the interactive path
    spec = dict(script)
    spec.setdefault("mode", mode)
    spec.update({k: v for k, v in extra.items() if v is not None})
    if args.seed is not None:
        spec["seed"] = args.seed
    memory = _open_memory(args, config)
    transcript = run_from_spec(spec, memory, config.workspace)
    path = _write_transcript(transcript, args.out, f"{mode}.jsonl")
    status = transcript.events[-1].get("status")
    print(f"transcript written to {path} (status: {status})")
    return EXIT_OK if status == "ok" else EXIT_TASK_FAILED


def cmd_learn(args, config: AppConfig) -> int:
    code = _scripted_run(
        args, config, "learn",
        {"skill_description": args.skill, "setup_description": args.env},
    )
    if code >= 0:
        return code
    memory = _open_memory(args, config)
    session_config = config.session
    if args.seed is not None:
        session_config.seed = args.seed
    transcript = run_skill_learning_session(
        args.skill, _live_agent(), memory, config.workspace,
        ConsoleFeedback(learn_mode=True), session_config,
    )
    path = _write_transcript(transcript, args.out, "learn.jsonl")
    print(f"transcript written to {path}")
    return EXIT_OK if transcript.events[-1].get("status") == "ok" else EXIT_TASK_FAILED


def cmd_extend(args, config: AppConfig) -> int:
    code = _scripted_run(args, config, "extend", {"skill_name": args.skill})
    if code >= 0:
        return code
    memory = _open_memory(args, config)
    session_config = config.session
    if args.seed is not None:
        session_config.seed = args.seed
    transcript = run_skill_learning_session(
        "", _live_agent(), memory, config.workspace,
        ConsoleFeedback(learn_mode=True), session_config,
        extension=True, skill_name=args.skill,
    )
    path = _write_transcript(transcript, args.out, "extend.jsonl")
    print(f"transcript written to {path}")
    return EXIT_OK if transcript.events[-1].get("status") == "ok" else EXIT_TASK_FAILED


def cmd_solve(args, config: AppConfig) -> int:
    code = _scripted_run(
        args, config, "solve", {"instruction": args.instruction, "hint": args.hint}
    )
    if code >= 0:
        return code
    memory = _open_memory(args, config)
    session_config = config.session
    if args.seed is not None:
        session_config.seed = args.seed
    transcript = run_task_session(
        args.instruction, _live_agent(), memory, config.workspace,
        ConsoleFeedback(), session_config,
        hint=args.hint, setup_description=args.env or "",
    )
    path = _write_transcript(transcript, args.out, "solve.jsonl")
    print(f"transcript written to {path}")
    return EXIT_OK if transcript.events[-1].get("status") == "ok" else EXIT_TASK_FAILED


def cmd_eval(args, config: AppConfig) -> int:
    from .tasklib import seed_memory
    from .tasklib.suite import run_suite

    memory = _open_memory(args, config)
    if not memory.skills:
        seed_memory(memory, config.workspace)
    suite_path = None if args.suite in (None, "ravens") else args.suite
    result = run_suite(
        memory, suite_path, attempts=args.attempts, workspace=config.workspace
    )
    print(result.table())
    metrics = compute_metrics(result.transcripts)
    print(f"\nmean NoC over accepted attempts: {metrics.noc_mean:.2f}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(
            json.dumps({"rows": result.rows, "sr_macro": result.sr_macro}, indent=2),
            encoding="utf-8",
        )
    return EXIT_OK if result.sr_macro == 1.0 else EXIT_TASK_FAILED


def cmd_replay(args, config: AppConfig) -> int:
    try:
        identical, _original, replayed = replay_transcript(args.transcript)
    except SessionError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_TASK_FAILED
    if identical:
        print("replay identical")
        return EXIT_OK
    print("replay DIFFERS from the stored transcript", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(replayed, encoding="utf-8")
        print(f"replayed transcript written to {args.out}", file=sys.stderr)
    return EXIT_TASK_FAILED


def cmd_memory(args, config: AppConfig) -> int:
    memory = _open_memory(args, config)
    if args.memory_command == "ls":
        for record in memory.accepted_skills():
            versions = memory.skill_versions(record.name)
            rejected = sum(1 for v in versions if v.status == "rejected")
            note = f" ({rejected} rejected)" if rejected else ""
            print(f"skill  {record.name}  v{record.version}{note}")
        for record in memory.examples:
            print(f"example  #{record.record_id}  {record.instruction}")
        return EXIT_OK
    if args.memory_command == "show":
        versions = memory.skill_versions(args.name)
        if not versions:
            print(f"no skill named {args.name!r}", file=sys.stderr)
            return EXIT_TASK_FAILED
        for record in versions:
            print(f"# version {record.version} ({record.status})")
            print(record.source)
        return EXIT_OK
    if args.memory_command == "export":
        memory.save_to(args.dest)
        print(f"exported to {args.dest}")
        return EXIT_OK
    print("unknown memory command", file=sys.stderr)
    return EXIT_USAGE


def cmd_serve(args, config: AppConfig) -> int:
    from .service import serve

    serve(args.port, config, memory_dir=args.memory_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyra",
        description="Human-in-the-loop lifelong skill learning on a deterministic tabletop.",
    )
    parser.add_argument("--config", default=None, help="path to lyra.toml")
    parser.add_argument("--memory-dir", default=None, help="memory store directory")
    # the same options are accepted after the subcommand; SUPPRESS keeps a
    # subcommand-less occurrence from overriding the top-level value with None
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default=argparse.SUPPRESS)
    shared.add_argument("--memory-dir", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="interactively acquire a new skill", parents=[shared])
    p.add_argument("--skill", required=True, help="natural-language skill description")
    p.add_argument("--env", help="initial environment description")
    p.add_argument("--script", help="scripted run (JSON spec)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="transcript output path")

    p = sub.add_parser("extend", help="extend an existing skill (lifelong learning)", parents=[shared])
    p.add_argument("--skill", required=True, help="name of the skill to extend")
    p.add_argument("--script", help="scripted run (JSON spec)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("solve", help="solve one task with retrieval-augmented planning", parents=[shared])
    p.add_argument("instruction")
    p.add_argument("--hint", help="forces named skills/tasks into the prompt")
    p.add_argument("--env", help="initial environment description")
    p.add_argument("--script", help="scripted run (JSON spec)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("eval", help="run a benchmark suite and print the SR table", parents=[shared])
    p.add_argument("--suite", help="suite manifest path (default: bundled ravens)")
    p.add_argument("--attempts", type=int, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the SR table as JSON")

    p = sub.add_parser("replay", help="re-execute a transcript and verify byte identity", parents=[shared])
    p.add_argument("transcript")
    p.add_argument("--out", help="write the replayed transcript on mismatch")

    p = sub.add_parser("memory", help="inspect or export the memory store", parents=[shared])
    msub = p.add_subparsers(dest="memory_command", required=True)
    msub.add_parser("ls")
    show = msub.add_parser("show")
    show.add_argument("name")
    export = msub.add_parser("export")
    export.add_argument("dest")

    p = sub.add_parser("serve", help="run the JSON-over-HTTP session service", parents=[shared])
    p.add_argument("--port", type=int, default=8300)

    return parser


COMMANDS = {
    "learn": cmd_learn,
    "extend": cmd_extend,
    "solve": cmd_solve,
    "eval": cmd_eval,
    "replay": cmd_replay,
    "memory": cmd_memory,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, config)
    except SessionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TASK_FAILED


if __name__ == "__main__":
    sys.exit(main())
