"""Session engine: the interactive loop, regression gating, metrics, replay."""

from __future__ import annotations

import pytest

from lyra.memory import MemoryStore
from lyra.session import (
    EvaluatorFeedback,
    FeedbackEvent,
    Metrics,
    MetricsError,
    ScriptedFeedback,
    TaskAttempt,
    Transcript,
    compute_metrics,
    regression_check,
    replay_transcript,
    run_from_spec,
)
from lyra.skillscript import parse, parse_skill
from lyra.tasklib.curriculum import breaking_spec, curriculum_specs
from lyra.tasklib.fixtures import (
    SETUP_TWO_BLOCKS,
    capped_failure_spec,
    corrections_then_accept_spec,
    hinted_solve_spec,
    kitchen_noc_specs,
)
from lyra.world import WorldSnapshot, outcome_digest
from lyra.skillscript import execute


SIMPLE_SKILL = (
    'skill wave_gripper(height: number = 0.3) doc "Moves the end effector to a waving height." {\n'
    "    let middle = workspace_middle()\n"
    "    move_end_effector_to(pose(point(middle.x, middle.y, height), rotation_from_euler_z(0)))\n"
    "}\n"
)

HEADER_RESPONSE = 'skill wave_gripper(height: number = 0.3) doc "Moves the end effector to a waving height." {\n}\n'


def learning_spec(reviews_per_task: list[list[dict]], seed: int = 60) -> dict:
    """An acquisition session over len(reviews_per_task) tasks of the wave skill."""
    program = SIMPLE_SKILL + "\nwave_gripper(0.3)\n"
    agent_script = [{"expect_kind": "skill_header", "response_text": HEADER_RESPONSE}]
    tasks = []
    for index, reviews in enumerate(reviews_per_task):
        agent_script.append({"expect_kind": "setup_code", "response_text": SETUP_TWO_BLOCKS})
        rollouts = sum(1 for r in reviews) if reviews else 1
        agent_script.extend(
            {"expect_kind": "skill_plus_code", "response_text": program} for _ in range(rollouts)
        )
        tasks.append(
            {
                "instruction": f"wave the gripper, variant {index}",
                "setup_description": "two blocks",
                "reviews": reviews,
            }
        )
    return {
        "mode": "learn",
        "skill_description": "wave the gripper",
        "seed": seed,
        "agent_script": agent_script,
        "feedback": {"tasks": tasks},
    }


def test_accept_first_try_noc_zero_one_example_version_one(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    spec = learning_spec([[{"kind": "accept"}]])
    transcript = run_from_spec(spec, memory)
    assert transcript.events[-1]["status"] == "ok"
    metrics = compute_metrics([transcript])
    assert metrics.noc_mean == 0
    assert len(memory.examples) == 1
    record = memory.latest_accepted_skill("wave_gripper")
    assert record is not None and record.version == 1


def test_two_corrections_then_accept_noc_two(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    reviews = [
        {"kind": "correction", "text": "wave higher"},
        {"kind": "correction", "text": "higher still"},
        {"kind": "accept"},
    ]
    transcript = run_from_spec(learning_spec([reviews]), memory)
    metrics = compute_metrics([transcript])
    assert [a.noc for a in metrics.attempts] == [2]
    assert metrics.attempts[0].accepted


def test_rejects_do_not_count_toward_noc(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    reviews = [
        {"kind": "reject"},
        {"kind": "correction", "text": "try waving sideways"},
        {"kind": "accept"},
    ]
    transcript = run_from_spec(learning_spec([reviews]), memory)
    metrics = compute_metrics([transcript])
    assert [a.noc for a in metrics.attempts] == [1]


def test_hints_count_toward_noc_unless_disabled(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    reviews = [
        {"kind": "hint", "text": "wave the gripper"},
        {"kind": "accept"},
    ]
    transcript = run_from_spec(learning_spec([reviews]), memory)
    assert compute_metrics([transcript]).noc_mean == 1
    assert compute_metrics([transcript], count_hints=False).noc_mean == 0


def test_retrieval_precedes_agent_and_rollouts_restore_s0(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    reviews = [
        {"kind": "correction", "text": "once more"},
        {"kind": "accept"},
    ]
    transcript = run_from_spec(learning_spec([reviews]), memory)
    types = [e["type"] for e in transcript.events]

    # every prompt is preceded by a retrieval in the same iteration
    for index, event in enumerate(transcript.events):
        if event["type"] == "prompt":
            prior = [e for e in transcript.events[:index] if e["type"] == "retrieval"]
            assert prior and prior[-1]["iteration"] == event["iteration"]

    # both rollouts started from the same initial snapshot: identical digests
    rollouts = [e for e in transcript.events if e["type"] == "rollout"]
    assert len(rollouts) == 2
    assert rollouts[0]["digest"] == rollouts[1]["digest"]
    assert types.index("retrieval") < types.index("prompt") < types.index("rollout")


def test_accept_is_followed_by_example_before_task_end(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    transcript = run_from_spec(learning_spec([[{"kind": "accept"}]]), memory)
    types = [e["type"] for e in transcript.events]
    accept_index = next(
        i for i, e in enumerate(transcript.events)
        if e["type"] == "feedback" and e["kind"] == "accept"
    )
    example_index = types.index("example_added")
    end_index = types.index("task_end")
    assert accept_index < example_index < end_index


def test_execution_error_becomes_automatic_correction(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    bad_then_good = [
        {"expect_kind": "skill_header", "response_text": HEADER_RESPONSE},
        {"expect_kind": "setup_code", "response_text": SETUP_TWO_BLOCKS},
        # parses, but raises at run time
        {
            "expect_kind": "skill_plus_code",
            "response_text": 'skill wave_gripper(height: number = 0.3) doc "waves" {\n    raise "arm jam"\n}\n\nwave_gripper(0.3)\n',
        },
        {
            "expect_kind": "skill_plus_code",
            "response_text": SIMPLE_SKILL + "\nwave_gripper(0.3)\n",
        },
    ]
    spec = {
        "mode": "learn",
        "skill_description": "wave the gripper",
        "seed": 3,
        "agent_script": bad_then_good,
        "feedback": {
            "tasks": [
                {
                    "instruction": "wave",
                    "setup_description": "two blocks",
                    "reviews": [{"kind": "accept"}],
                }
            ]
        },
    }
    transcript = run_from_spec(spec, memory)
    autos = [e for e in transcript.events if e["type"] == "auto_correction"]
    assert autos and autos[0]["text"].startswith("EXECUTION ERROR: SkillRaised: arm jam")
    # the automatic correction is engine-internal: NoC stays zero
    assert compute_metrics([transcript]).noc_mean == 0
    assert transcript.events[-1]["status"] == "ok"


def test_max_iterations_cap_records_failure(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    transcript = run_from_spec(capped_failure_spec(max_iterations=10), memory)
    task_end = next(e for e in transcript.events if e["type"] == "task_end")
    assert task_end["status"] == "failed"
    rollouts = [e for e in transcript.events if e["type"] == "rollout"]
    assert len(rollouts) == 10
    metrics = compute_metrics([transcript])
    assert metrics.attempts[0].accepted is False
    assert metrics.sr == 0.0


# -- regression ------------------------------------------------------------------


def seeded_memory_with_sessions(tmp_path) -> MemoryStore:
    memory = MemoryStore(tmp_path / "mem")
    for spec in curriculum_specs()[:2]:
        run_from_spec(spec, memory)
    return memory


def test_regression_identical_candidate_passes(tmp_path) -> None:
    memory = seeded_memory_with_sessions(tmp_path)
    current = memory.latest_accepted_skill("stack_blocks").skill
    report = regression_check("stack_blocks", current, memory)
    assert report.total == 2 and report.ok


def test_regression_vacuous_without_references(tmp_path) -> None:
    memory = seeded_memory_with_sessions(tmp_path)
    unrelated = parse_skill('skill greet() doc "waves at the operator" { }')
    report = regression_check("greet", unrelated, memory)
    assert report.total == 0 and report.ok


def test_regression_detects_behavioral_perturbation(tmp_path) -> None:
    memory = seeded_memory_with_sessions(tmp_path)
    # same signature, but a constant offset changes every placement
    perturbed = parse_skill(
        'skill stack_blocks(blocks: list<object>, start_pose: pose) doc "Stacks blocks." {\n'
        "    let current_pose = pose(point(start_pose.position.x + 0.02, start_pose.position.y, start_pose.position.z), start_pose.rotation)\n"
        "    for block in blocks {\n"
        "        put_first_on_second(get_object_pose(block), current_pose)\n"
        "        let block_size = get_object_size(block)\n"
        "        current_pose = pose(point(current_pose.position.x, current_pose.position.y, current_pose.position.z + block_size[2]), current_pose.rotation)\n"
        "    }\n"
        "}"
    )
    report = regression_check("stack_blocks", perturbed, memory)
    assert not report.ok
    assert report.total == 2 and report.passed == 0
    assert all(f["reason"] == "outcome digest mismatch" for f in report.failures)


def test_extension_that_breaks_prior_example_is_rejected(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    for spec in curriculum_specs():
        transcript = run_from_spec(spec, memory)
        assert transcript.events[-1]["status"] == "ok"
    latest = memory.latest_accepted_skill("stack_blocks").version
    transcript = run_from_spec(breaking_spec(), memory)
    rejected = [e for e in transcript.events if e["type"] == "version_rejected"]
    assert rejected, "breaking candidate must be tombstoned"
    assert memory.latest_accepted_skill("stack_blocks").version == latest
    statuses = [r.status for r in memory.skill_versions("stack_blocks")]
    assert statuses.count("rejected") == 1


def test_curriculum_all_prior_examples_replay_after_each_step(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    for step, spec in enumerate(curriculum_specs(), start=1):
        transcript = run_from_spec(spec, memory)
        assert transcript.events[-1]["status"] == "ok", f"variant {step} failed"
        library = memory.library_view()
        for record in memory.examples:
            world = WorldSnapshot.decode(record.setup_snapshot).restore()
            trace = execute(parse(record.code), world, library=library)
            assert trace.error is None, (step, record.instruction)
            assert outcome_digest(world) == record.outcome_digest, (step, record.instruction)
    assert memory.latest_accepted_skill("stack_blocks").version == 7
    assert len(memory.examples) == 7


def test_stored_example_code_is_flat(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    run_from_spec(learning_spec([[{"kind": "accept"}]]), memory)
    program = parse(memory.examples[0].code)
    assert program.skills == []
    assert program.statements


# -- metrics -----------------------------------------------------------------------


def test_sr_nineteen_of_twenty() -> None:
    metrics = Metrics(
        attempts=[TaskAttempt("t", True, 0)] * 19 + [TaskAttempt("t", False, 3)]
    )
    assert metrics.sr == pytest.approx(0.95)


def test_kitchen_fixture_mean_noc_275(tmp_path) -> None:
    transcripts = []
    for index, spec in enumerate(kitchen_noc_specs()):
        memory = MemoryStore(tmp_path / f"mem{index}")
        transcripts.append(run_from_spec(spec, memory))
    metrics = compute_metrics(transcripts)
    assert [a.noc for a in metrics.attempts] == [2, 2, 4, 3]
    assert metrics.noc_mean == pytest.approx(2.75)


def test_metrics_error_on_malformed_transcript() -> None:
    transcript = Transcript()
    transcript.events = [
        {"seq": 1, "type": "feedback", "kind": "accept"},
    ]
    with pytest.raises(MetricsError) as excinfo:
        compute_metrics([transcript])
    assert excinfo.value.event_index == 0


def test_metrics_error_on_unclosed_task() -> None:
    transcript = Transcript()
    transcript.events = [{"seq": 1, "type": "task_start", "instruction": "x"}]
    with pytest.raises(MetricsError):
        compute_metrics([transcript])


def test_per_task_breakdown() -> None:
    metrics = Metrics(
        attempts=[
            TaskAttempt("a", True, 1),
            TaskAttempt("a", True, 3),
            TaskAttempt("b", False, 0),
        ]
    )
    table = metrics.per_task()
    assert table["a"]["sr"] == 1.0 and table["a"]["noc_mean"] == 2.0
    assert table["b"]["sr"] == 0.0


# -- hints and replay -----------------------------------------------------------------


def test_hint_forces_skill_into_prompt(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    transcript = run_from_spec(hinted_solve_spec(), memory)
    retrieval = next(e for e in transcript.events if e["type"] == "retrieval")
    assert retrieval["hint"] == "stack blocks"
    forced = [s for s in retrieval["skills"] if s["forced"]]
    assert forced, "hinted skill must be force-included"
    forced_record = forced[0]["record_id"]
    # the forced record is exactly the store's top docstring match for the hint
    expected = memory.retrieve_skills("stack blocks", k=1).entries[0][0]
    assert forced_record == expected.record_id
    prompt = next(e for e in transcript.events if e["type"] == "prompt")
    included = prompt["bundle"]["included"]
    assert any(i["record_id"] == forced_record and i["forced"] for i in included)


def test_mock_driven_transcripts_replay_byte_identically(tmp_path) -> None:
    spec = corrections_then_accept_spec("polish the tabletop", ["more to the left"], seed=91)
    a = run_from_spec(spec, MemoryStore(tmp_path / "a"))
    b = run_from_spec(spec, MemoryStore(tmp_path / "b"))
    assert a.render() == b.render()


def test_replay_transcript_round_trip(tmp_path) -> None:
    spec = corrections_then_accept_spec("polish the tabletop", ["more gloss"], seed=92)
    transcript = run_from_spec(spec, MemoryStore(tmp_path / "mem"))
    path = tmp_path / "run.jsonl"
    transcript.write(path)
    identical, original, replayed = replay_transcript(path)
    assert identical
    assert original == replayed


def test_replay_detects_tampering(tmp_path) -> None:
    spec = corrections_then_accept_spec("polish the tabletop", [], seed=93)
    transcript = run_from_spec(spec, MemoryStore(tmp_path / "mem"))
    path = tmp_path / "run.jsonl"
    text = transcript.render().replace("polish the tabletop", "polish the TABLETOP", 2)
    path.write_text(text, encoding="utf-8")
    identical, _, _ = replay_transcript(path)
    assert not identical


def test_transcript_read_write_round_trip(tmp_path) -> None:
    spec = corrections_then_accept_spec("wipe the table", [], seed=94)
    transcript = run_from_spec(spec, MemoryStore(tmp_path / "mem"))
    path = tmp_path / "t.jsonl"
    transcript.write(path)
    loaded = Transcript.read(path)
    assert loaded.events == transcript.events


# -- feedback sources ------------------------------------------------------------------


def test_scripted_feedback_exhaustion_raises() -> None:
    scripted = ScriptedFeedback({"tasks": [{"instruction": "x", "reviews": []}]})
    scripted.next_task()
    with pytest.raises(Exception):
        scripted.review(None)  # type: ignore[arg-type]


def test_feedback_event_validation() -> None:
    with pytest.raises(ValueError):
        FeedbackEvent(kind="correction", text=" ")
    with pytest.raises(ValueError):
        FeedbackEvent(kind="bogus")


def test_evaluator_feedback_accepts_and_corrects(tmp_path) -> None:
    from lyra.world import WorldState
    from lyra.session import RolloutReport
    from lyra.skillscript import ExecutionTrace

    world = WorldState(rng_seed=5)
    for color in ("red", "green", "blue", "yellow"):
        world.add_block(color)
    feedback = EvaluatorFeedback("tower", {"count": 4})
    report = RolloutReport("stack", "code", ExecutionTrace(), world, "d", 1)
    event = feedback.review(report)
    assert event.kind == "correction" and "tower_chain" in event.text

    target = world.workspace.middle
    from lyra.geometry import Point3D, Pose, Rotation

    for block in list(world.objects):
        world.put_first_on_second(
            block.pose, Pose(Point3D(target.x, target.y, 0), Rotation.identity())
        )
    assert feedback.review(report).kind == "accept"


def test_prompt_overflow_fails_task_gracefully(tmp_path) -> None:
    memory = MemoryStore(tmp_path / "mem")
    spec = {
        "mode": "solve",
        "instruction": "x" * 30_000,  # alone exceeds the default character budget
        "seed": 1,
        "agent_script": [],
        "feedback": {"tasks": [{"instruction": "x", "reviews": []}]},
    }
    transcript = run_from_spec(spec, memory)
    assert transcript.events[-1]["status"] in ("failed", "task_failed")
    errors = [e for e in transcript.events if e["type"] == "agent_error"]
    assert errors and errors[0]["stage"] == "prompt"
