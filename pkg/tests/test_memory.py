"""Memory: embeddings, dual stores, retrieval exactness, hints, persistence."""

from __future__ import annotations

import json
import math
import random

import numpy as np
import pytest

from lyra.memory import (
    DEFAULT_K_EXAMPLES,
    EmbeddingVector,
    EmptyText,
    LOCAL_PROVIDER_ID,
    MemoryStore,
    MissingDocstring,
    ProviderMismatch,
    StoreCorrupt,
    cosine,
    embed_local,
    split_hint,
    trigram_buckets,
)
from lyra.skillscript import parse_skill
from lyra.skillscript.parser import SkillSyntaxError


def make_skill(name: str, doc: str):
    return parse_skill(f'skill {name}() doc "{doc}" {{ }}')


def fill_examples(store: MemoryStore, texts: list[str]) -> None:
    for text in texts:
        store.add_example(text, "move_end_effector_to(pose(point(0.5, 0, 0.3), rotation_from_euler_z(0)))\n", "d" * 8, "{}")


# -- embeddings ----------------------------------------------------------------


def test_embed_deterministic() -> None:
    a = embed_local("Stack the RED block")
    b = embed_local("stack   the red\tblock")  # case and whitespace collapse
    assert a == b
    assert a.provider_id == LOCAL_PROVIDER_ID
    assert a.dims == 512


def test_embed_unit_norm() -> None:
    v = embed_local("arrange the blocks around a circle")
    assert math.isclose(sum(x * x for x in v.values), 1.0, abs_tol=1e-9)


def test_cosine_self_is_one() -> None:
    v = embed_local("build a house")
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)


def test_cosine_disjoint_trigrams_zero() -> None:
    # verified collision-free: the two strings hash into disjoint buckets
    assert set(trigram_buckets("aaaa")).isdisjoint(trigram_buckets("zzzz"))
    assert cosine(embed_local("aaaa"), embed_local("zzzz")) == 0.0


def test_embed_empty_rejected() -> None:
    with pytest.raises(EmptyText):
        embed_local("   ")


def test_embed_short_strings_work() -> None:
    assert cosine(embed_local("a"), embed_local("a")) == pytest.approx(1.0)


def test_embedding_vector_validates() -> None:
    with pytest.raises(ValueError):
        EmbeddingVector("p", 2, (1.0, 1.0))


# -- store basics ---------------------------------------------------------------


def test_add_then_retrieve_verbatim_rank_one() -> None:
    store = MemoryStore()
    fill_examples(store, ["stack the blocks", "open the drawer", "press the button"])
    result = store.retrieve_examples("stack the blocks")
    assert result.entries[0][0].instruction == "stack the blocks"
    assert result.entries[0][1] == pytest.approx(1.0, abs=1e-12)


def test_duplicate_instructions_both_retrievable() -> None:
    store = MemoryStore()
    fill_examples(store, ["press the button", "press the button"])
    result = store.retrieve_examples("press the button", k=10)
    assert len(result.entries) == 2
    assert result.entries[0][0].record_id < result.entries[1][0].record_id


def test_add_example_rejects_unparseable_code() -> None:
    store = MemoryStore()
    with pytest.raises(SkillSyntaxError):
        store.add_example("bad", "let = nonsense {{{", "d", "{}")


def test_k_defaults() -> None:
    assert DEFAULT_K_EXAMPLES == 10
    store = MemoryStore()
    fill_examples(store, [f"task number {i}" for i in range(15)])
    assert len(store.retrieve_examples("task number 1")) == 10
    skills = [make_skill(f"skill_{i}", f"does thing {i}") for i in range(8)]
    for s in skills:
        store.upsert_skill(s)
    assert len(store.retrieve_skills("does thing")) == 5


def test_k_larger_than_store_returns_all_ranked() -> None:
    store = MemoryStore()
    fill_examples(store, ["alpha", "beta", "gamma"])
    result = store.retrieve_examples("alpha", k=50)
    assert len(result.entries) == 3
    scores = [s for _, s in result.entries]
    assert scores == sorted(scores, reverse=True)


def test_empty_store_empty_result() -> None:
    store = MemoryStore()
    assert len(store.retrieve_examples("anything")) == 0
    assert len(store.retrieve_skills("anything")) == 0


def test_empty_query_rejected() -> None:
    store = MemoryStore()
    with pytest.raises(EmptyText):
        store.retrieve_examples(" ")


# -- versioning --------------------------------------------------------------------


def test_upsert_versions_increment() -> None:
    store = MemoryStore()
    first = store.upsert_skill(make_skill("stack_blocks", "stacks blocks"))
    assert (first.version, first.supersedes) == (1, None)
    second = store.upsert_skill(make_skill("stack_blocks", "stacks blocks better"))
    assert (second.version, second.supersedes) == (2, 1)
    assert store.latest_accepted_skill("stack_blocks").version == 2


def test_rejected_version_never_retrievable() -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("wave", "waves the arm around"))
    store.reject_skill(make_skill("wave", "waves the arm around violently"))
    result = store.retrieve_skills("waves the arm")
    assert [r.version for r, _ in result.entries] == [1]
    assert store.latest_accepted_skill("wave").version == 1
    assert [r.status for r in store.skill_versions("wave")] == ["accepted", "rejected"]


def test_superseded_version_not_retrieved() -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("wave", "waves the arm around"))
    store.upsert_skill(make_skill("wave", "waves the arm around"))
    result = store.retrieve_skills("waves the arm")
    assert len(result.entries) == 1
    assert result.entries[0][0].version == 2


def test_missing_docstring_rejected() -> None:
    store = MemoryStore()
    skill = make_skill("quiet", "placeholder")
    skill.docstring = "  "
    with pytest.raises(MissingDocstring):
        store.upsert_skill(skill)


def test_49_skills_and_86_examples_loadable(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    for i in range(49):
        store.upsert_skill(make_skill(f"skill_{i}", f"does operation number {i} on blocks"))
    fill_examples(store, [f"perform task variant {i}" for i in range(86)])
    reloaded = MemoryStore(tmp_path / "mem")
    assert len(reloaded.accepted_skills()) == 49
    assert len(reloaded.examples) == 86


# -- retrieval exactness --------------------------------------------------------------


def brute_force_rank(store: MemoryStore, query: str, k: int) -> list[tuple[int, float]]:
    """Independent oracle: full scan, fsum cosine over normalized vectors, stable sort."""
    q = embed_local(query).values
    scored = []
    for index, record in enumerate(store.examples):
        v = record.instruction_embedding.values
        scored.append((record.record_id, math.fsum(a * b for a, b in zip(q, v)), index))
    scored.sort(key=lambda t: (-round(t[1], 12), t[2]))
    return [(record_id, score) for record_id, score, _ in scored[:k]]


def test_retrieval_matches_brute_force_oracle() -> None:
    rng = random.Random(77)
    words = ["block", "stack", "tower", "red", "move", "rotate", "circle", "wall", "pick", "place"]
    store = MemoryStore()
    texts = [
        " ".join(rng.choice(words) for _ in range(rng.randint(2, 6))) + f" v{i}"
        for i in range(300)
    ]
    fill_examples(store, texts)
    for query in ["stack the red tower", "rotate a block", "place blocks in a circle"]:
        oracle = brute_force_rank(store, query, 10)
        got = [(r.record_id, s) for r, s in store.retrieve_examples(query, 10).entries]
        assert [record_id for record_id, _ in got] == [record_id for record_id, _ in oracle]
        for (_, a), (_, b) in zip(got, oracle):
            assert abs(a - b) <= 1e-12


def test_retrieval_exact_ties_break_by_insertion_order() -> None:
    store = MemoryStore()
    fill_examples(store, ["press the red button", "press the red button", "open the drawer"])
    got = store.retrieve_examples("press the red button", 3)
    ids = [r.record_id for r, _ in got.entries]
    assert ids[0] < ids[1]  # equal scores: older record first
    assert got.entries[0][1] == got.entries[1][1]


def test_monotone_insertion_preserves_relative_order() -> None:
    store = MemoryStore()
    fill_examples(store, ["stack red blocks", "build a wall", "open the door"])
    before = [r.record_id for r, _ in store.retrieve_examples("stack a wall", 10).entries]
    fill_examples(store, ["an unrelated kettle task"])
    after = [r.record_id for r, _ in store.retrieve_examples("stack a wall", 10).entries]
    filtered = [record_id for record_id in after if record_id in set(before)]
    assert filtered == before


# -- hints ---------------------------------------------------------------------------


def test_split_hint_separators() -> None:
    assert split_hint("build jenga layer; stack blocks") == ["build jenga layer", "stack blocks"]
    assert split_hint("a, b and c") == ["a", "b", "c"]
    assert split_hint(" solo ") == ["solo"]


def test_hint_forces_skill_to_front() -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("build_jenga_layer", "builds one jenga layer of three parallel blocks"))
    store.upsert_skill(make_skill("stack_blocks", "stacks blocks into a tower at a pose"))
    store.upsert_skill(make_skill("wave_arm", "waves the arm to greet people"))
    result = store.retrieve_skills("do something impressive", hint="stack blocks")
    assert result.forced
    assert result.forced[0][0].name == "stack_blocks"
    # forced entries precede similarity entries in the combined view
    assert result.records[0].name == "stack_blocks"


def test_hint_items_force_in_hint_order() -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("build_jenga_layer", "builds one jenga layer of three parallel blocks"))
    store.upsert_skill(make_skill("stack_blocks", "stacks blocks into a tower at a pose"))
    forced_skills, _ = store.apply_hint("build jenga layer; stack blocks")
    assert [r.name for r, _ in forced_skills] == ["build_jenga_layer", "stack_blocks"]


def test_forced_bounds_and_dedup() -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("stack_blocks", "stacks blocks into a tower"))
    fill_examples(store, [f"stack blocks style {i}" for i in range(6)])
    forced_skills, forced_examples = store.apply_hint("stack blocks; stack blocks")
    # dedup by record id: the duplicate hint item adds nothing
    assert len(forced_skills) <= 2
    assert len({r.record_id for r, _ in forced_skills}) == len(forced_skills)
    assert len(forced_examples) <= 2 * 3
    assert len({r.record_id for r, _ in forced_examples}) == len(forced_examples)


def test_forced_items_do_not_count_against_k() -> None:
    store = MemoryStore()
    fill_examples(store, [f"assorted task {i}" for i in range(8)])
    result = store.retrieve_examples("assorted task 1", k=3, hint="assorted task 5")
    assert len(result.entries) == 3
    assert all(r.record_id not in {f.record_id for f, _ in result.forced} for r, _ in result.entries)


# -- persistence -------------------------------------------------------------------


def test_round_trip_identity_49_86(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    for i in range(49):
        store.upsert_skill(make_skill(f"skill_{i}", f"skill docstring number {i}"))
    fill_examples(store, [f"example number {i}" for i in range(86)])
    reloaded = MemoryStore.load(tmp_path / "mem")
    assert [(r.record_id, r.name, r.version, r.status) for r in reloaded.skills] == [
        (r.record_id, r.name, r.version, r.status) for r in store.skills
    ]
    assert [(r.record_id, r.instruction, r.outcome_digest) for r in reloaded.examples] == [
        (r.record_id, r.instruction, r.outcome_digest) for r in store.examples
    ]
    # appended records after reload continue the id sequence
    reloaded.add_example("one more", "move_end_effector_to(pose(point(0.5, 0, 0.3), rotation_from_euler_z(0)))\n", "d", "{}")
    assert reloaded.examples[-1].record_id == store._next_record_id


def test_loading_empty_directory(tmp_path) -> None:
    store = MemoryStore(tmp_path / "empty")
    assert store.skills == [] and store.examples == []


def test_truncated_line_fails_with_line_number(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    fill_examples(store, ["alpha", "beta"])
    path = tmp_path / "mem" / "examples.jsonl"
    text = path.read_text(encoding="utf-8")
    path.write_text(text[:-20], encoding="utf-8")  # chop the tail: truncated last line
    with pytest.raises(StoreCorrupt) as excinfo:
        MemoryStore(tmp_path / "mem")
    assert excinfo.value.line_no == 2


def test_corrupt_json_line_reports_position(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    fill_examples(store, ["alpha"])
    path = tmp_path / "mem" / "examples.jsonl"
    path.write_text("this is not json\n", encoding="utf-8")
    with pytest.raises(StoreCorrupt) as excinfo:
        MemoryStore(tmp_path / "mem")
    assert excinfo.value.line_no == 1


def test_meta_file_written_and_checked(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    store.upsert_skill(make_skill("wave", "waves"))
    meta = json.loads((tmp_path / "mem" / "meta.json").read_text())
    assert meta == {"provider_id": LOCAL_PROVIDER_ID, "dims": 512}


def test_provider_mismatch_rejected(tmp_path) -> None:
    class OtherEmbedder:
        provider_id = "other-model-v9"

        def embed(self, text: str) -> EmbeddingVector:
            values = np.zeros(512)
            values[0] = 1.0
            return EmbeddingVector(self.provider_id, 512, tuple(values))

    store = MemoryStore(tmp_path / "mem")
    store.upsert_skill(make_skill("wave", "waves"))
    with pytest.raises(ProviderMismatch):
        MemoryStore(tmp_path / "mem", embedder=OtherEmbedder())


def test_export_round_trip(tmp_path) -> None:
    store = MemoryStore()
    store.upsert_skill(make_skill("wave", "waves the arm"))
    fill_examples(store, ["wave at the camera"])
    store.save_to(tmp_path / "export")
    reloaded = MemoryStore.load(tmp_path / "export")
    assert len(reloaded.skills) == 1 and len(reloaded.examples) == 1


def test_http_embedder_against_loopback_stub() -> None:
    import threading
    from http.server import BaseHTTPRequestHandler, HTTPServer

    from lyra.memory import HttpEmbedder

    class Stub(BaseHTTPRequestHandler):
        def do_POST(self):  # noqa: N802
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length))
            text = body["input"]
            # a toy deterministic embedding: character-code histogram
            values = [0.0] * 8
            for ch in text:
                values[ord(ch) % 8] += 1.0
            payload = json.dumps({"embedding": values}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, fmt, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Stub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        embedder = HttpEmbedder(
            f"http://127.0.0.1:{server.server_address[1]}/embed", provider_id="stub-8"
        )
        a = embedder.embed("stack blocks")
        b = embedder.embed("stack blocks")
        assert a == b
        assert a.provider_id == "stub-8"
        assert math.isclose(sum(v * v for v in a.values), 1.0, abs_tol=1e-9)
        store = MemoryStore(embedder=embedder)
        store.add_example("stack blocks", "move_end_effector_to(pose(point(0.5, 0, 0.3), rotation_from_euler_z(0)))\n", "d", "{}")
        result = store.retrieve_examples("stack blocks")
        assert result.entries[0][1] == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(EmptyText):
            embedder.embed("  ")
    finally:
        server.shutdown()
