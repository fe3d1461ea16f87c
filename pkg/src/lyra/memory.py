"""External memory: a skill store and an example store with cosine retrieval.

Skills are indexed by docstring embeddings, examples by instruction embeddings.
Retrieval is an exact top-k scan (the library stays small; dozens of skills,
tens of examples), ties broken by insertion order. Hints force records into the
result ahead of similarity hits. Persistence is an append-only JSONL log per
store; rejected skill versions are tombstone records, never deletions.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .skillscript import format_skill, parse_skill
from .skillscript.nodes import SkillDef

DEFAULT_K_EXAMPLES = 10
DEFAULT_K_SKILLS = 5
HINT_SKILLS_PER_ITEM = 1
HINT_EXAMPLES_PER_ITEM = 3

EMBED_DIMS = 512
LOCAL_PROVIDER_ID = "trigram-512-v1"

SKILLS_FILE = "skills.jsonl"
EXAMPLES_FILE = "examples.jsonl"
META_FILE = "meta.json"


class MemoryError_(Exception):
    """Base class for memory failures."""


class EmptyText(MemoryError_):
    """Cannot embed empty text: it carries no information."""


class MissingDocstring(MemoryError_):
    """Skills are indexed by docstring; an empty one cannot be stored."""


class StoreCorrupt(MemoryError_):
    """A persisted log line failed to decode; loading is fail-closed."""

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {reason}")


class ProviderMismatch(MemoryError_):
    """Embeddings from different providers cannot share a store."""


# -- embeddings --------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingVector:
    provider_id: str
    dims: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.dims:
            raise ValueError("dims does not match value count")
        norm = math.sqrt(sum(v * v for v in self.values))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"embedding is not L2-normalized (norm {norm})")


def _fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def trigram_buckets(text: str) -> dict[int, int]:
    """Bucket counts for the normalized text's character trigrams."""
    collapsed = " ".join(text.lower().split())
    padded = f" {collapsed} "
    counts: dict[int, int] = {}
    for i in range(len(padded) - 2):
        bucket = _fnv1a32(padded[i : i + 3].encode("utf-8")) % EMBED_DIMS
        counts[bucket] = counts.get(bucket, 0) + 1
    return counts


def embed_local(text: str) -> EmbeddingVector:
    """Deterministic local embedding: hashed character trigrams, L2-normalized."""
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    counts = trigram_buckets(text)
    values = [0.0] * EMBED_DIMS
    for bucket, count in counts.items():
        values[bucket] = float(count)
    norm = math.sqrt(sum(v * v for v in values))
    return EmbeddingVector(LOCAL_PROVIDER_ID, EMBED_DIMS, tuple(v / norm for v in values))


class LocalEmbedder:
    provider_id = LOCAL_PROVIDER_ID

    def embed(self, text: str) -> EmbeddingVector:
        return embed_local(text)


class HttpEmbedder:
    """External embedding endpoint behind the same interface as the local one.

    POSTs {"input": text}; expects {"embedding": [...]} (optionally with
    "provider_id"). Vectors are L2-normalized on receipt. Stores written with
    one provider refuse to open with another.
    """

    def __init__(self, url: str, provider_id: str = "", timeout: float = 30.0):
        if not url:
            raise ValueError("embedding endpoint URL must be nonempty")
        self.url = url
        self.provider_id = provider_id or f"http:{url}"
        self.timeout = timeout
        self._dims: Optional[int] = None

    def embed(self, text: str) -> EmbeddingVector:
        import urllib.request

        if not text or not text.strip():
            raise EmptyText("cannot embed empty text")
        request = urllib.request.Request(
            self.url,
            data=json.dumps({"input": text}).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        with urllib.request.urlopen(request, timeout=self.timeout) as response:
            payload = json.loads(response.read().decode("utf-8"))
        values = payload["embedding"]
        norm = math.sqrt(sum(v * v for v in values))
        if norm == 0:
            raise ValueError("embedding endpoint returned a zero vector")
        if self._dims is None:
            self._dims = len(values)
        elif self._dims != len(values):
            raise ValueError("embedding endpoint changed its dimensionality")
        return EmbeddingVector(self.provider_id, len(values), tuple(v / norm for v in values))


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.provider_id != b.provider_id:
        raise ProviderMismatch(f"{a.provider_id} vs {b.provider_id}")
    return float(np.dot(np.asarray(a.values), np.asarray(b.values)))


# -- records ------------------------------------------------------------------


@dataclass
class SkillRecord:
    record_id: int
    skill: SkillDef
    source: str  # canonical text, the persisted form
    version: int
    supersedes: Optional[int]
    docstring_embedding: EmbeddingVector
    created_at: float
    status: str  # accepted | rejected

    @property
    def name(self) -> str:
        return self.skill.name


@dataclass
class ExampleRecord:
    record_id: int
    instruction: str
    code: str  # canonical program text
    outcome_digest: str
    setup_snapshot: str  # encoded WorldSnapshot of the initial state
    instruction_embedding: EmbeddingVector
    created_at: float


Record = Union[SkillRecord, ExampleRecord]


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked records; forced (hint-included) entries come first."""

    entries: tuple[tuple[Record, float], ...]
    forced: tuple[tuple[Record, float], ...] = ()

    @property
    def records(self) -> tuple[Record, ...]:
        return tuple(r for r, _ in self.forced) + tuple(r for r, _ in self.entries)

    def __len__(self) -> int:
        return len(self.forced) + len(self.entries)


def split_hint(hint: str) -> list[str]:
    """Deterministic hint splitter: semicolons, then commas, then ' and '."""
    items: list[str] = []
    for chunk in hint.split(";"):
        for part in chunk.split(","):
            for piece in part.split(" and "):
                piece = piece.strip()
                if piece:
                    items.append(piece)
    return items


def _embedding_to_json(e: EmbeddingVector) -> list[float]:
    return list(e.values)


class MemoryStore:
    """Dual vector store. If bound to a directory, writes are durable-on-return."""

    def __init__(self, directory: Optional[Union[str, Path]] = None, embedder=None):
        self.embedder = embedder or LocalEmbedder()
        self.directory = Path(directory) if directory is not None else None
        self.skills: list[SkillRecord] = []
        self.examples: list[ExampleRecord] = []
        self._next_record_id = 1
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            self._load_existing()

    # -- provider discipline ----------------------------------------------------

    def _check_provider(self, embedding: EmbeddingVector) -> None:
        if embedding.provider_id != self.embedder.provider_id:
            raise ProviderMismatch(
                f"store uses {self.embedder.provider_id}, record uses {embedding.provider_id}"
            )

    # -- skills ----------------------------------------------------------------

    def upsert_skill(self, skill: SkillDef, status: str = "accepted") -> SkillRecord:
        if not skill.docstring.strip():
            raise MissingDocstring(f"skill {skill.name!r} has an empty docstring")
        if status not in ("accepted", "rejected"):
            raise ValueError(f"bad status {status!r}")
        versions = [r.version for r in self.skills if r.name == skill.name]
        latest = max(versions) if versions else 0
        record = SkillRecord(
            record_id=self._next_record_id,
            skill=skill,
            source=format_skill(skill) + "\n",
            version=latest + 1,
            supersedes=latest or None,
            docstring_embedding=self.embedder.embed(skill.docstring),
            created_at=time.time(),
            status=status,
        )
        self._check_provider(record.docstring_embedding)
        self.skills.append(record)
        self._next_record_id += 1
        self._append_line(SKILLS_FILE, self._skill_to_json(record))
        return record

    def reject_skill(self, skill: SkillDef) -> SkillRecord:
        """Record a rejected (tombstoned) version; the prior accepted one stands."""
        return self.upsert_skill(skill, status="rejected")

    def latest_accepted_skill(self, name: str) -> Optional[SkillRecord]:
        best: Optional[SkillRecord] = None
        for record in self.skills:
            if record.name == name and record.status == "accepted":
                if best is None or record.version > best.version:
                    best = record
        return best

    def accepted_skills(self) -> list[SkillRecord]:
        """Latest accepted version per name, in first-seen name order."""
        by_name: dict[str, SkillRecord] = {}
        order: list[str] = []
        for record in self.skills:
            if record.status != "accepted":
                continue
            if record.name not in by_name:
                order.append(record.name)
                by_name[record.name] = record
            elif record.version > by_name[record.name].version:
                by_name[record.name] = record
        return [by_name[name] for name in order]

    def skill_versions(self, name: str) -> list[SkillRecord]:
        return [r for r in self.skills if r.name == name]

    def library_view(self) -> dict[str, SkillDef]:
        """Latest accepted skill definitions, callable by the interpreter."""
        return {r.name: r.skill for r in self.accepted_skills()}

    # -- examples ------------------------------------------------------------------

    def add_example(
        self,
        instruction: str,
        code: str,
        outcome_digest: str,
        setup_snapshot: str,
    ) -> ExampleRecord:
        from .skillscript import parse  # cycle-free local import

        parse(code)  # reject unparseable code up front (raises SkillSyntaxError)
        if not outcome_digest:
            raise ValueError("outcome digest must be nonempty")
        record = ExampleRecord(
            record_id=self._next_record_id,
            instruction=instruction,
            code=code,
            outcome_digest=outcome_digest,
            setup_snapshot=setup_snapshot,
            instruction_embedding=self.embedder.embed(instruction),
            created_at=time.time(),
        )
        self._check_provider(record.instruction_embedding)
        self.examples.append(record)
        self._next_record_id += 1
        self._append_line(EXAMPLES_FILE, self._example_to_json(record))
        return record

    # -- retrieval ---------------------------------------------------------------

    def _rank(
        self,
        candidates: Sequence[Record],
        embeddings: Sequence[EmbeddingVector],
        query: str,
        k: int,
    ) -> list[tuple[Record, float]]:
        if not candidates:
            return []
        query_vec = np.asarray(self.embedder.embed(query).values)
        matrix = np.asarray([e.values for e in embeddings])
        scores = matrix @ query_vec
        # scores are compared at 1e-12 granularity: records whose cosines agree
        # to that precision are ties, broken by insertion order (older first)
        order = sorted(range(len(candidates)), key=lambda i: (-round(float(scores[i]), 12), i))
        return [(candidates[i], float(scores[i])) for i in order[:k]]

    def retrieve_examples(
        self, query: str, k: int = DEFAULT_K_EXAMPLES, hint: Optional[str] = None
    ) -> RetrievalResult:
        if not query.strip():
            raise EmptyText("retrieval query must be nonempty")
        forced = self._forced_examples(hint) if hint else []
        forced_ids = {r.record_id for r, _ in forced}
        pool = [e for e in self.examples if e.record_id not in forced_ids]
        ranked = self._rank(pool, [e.instruction_embedding for e in pool], query, k)
        return RetrievalResult(entries=tuple(ranked), forced=tuple(forced))

    def retrieve_skills(
        self, query: str, k: int = DEFAULT_K_SKILLS, hint: Optional[str] = None
    ) -> RetrievalResult:
        if not query.strip():
            raise EmptyText("retrieval query must be nonempty")
        forced = self._forced_skills(hint) if hint else []
        forced_ids = {r.record_id for r, _ in forced}
        pool = [s for s in self.accepted_skills() if s.record_id not in forced_ids]
        ranked = self._rank(pool, [s.docstring_embedding for s in pool], query, k)
        return RetrievalResult(entries=tuple(ranked), forced=tuple(forced))

    def _forced_skills(self, hint: str) -> list[tuple[Record, float]]:
        out: list[tuple[Record, float]] = []
        seen: set[int] = set()
        for item in split_hint(hint):
            candidates = self.accepted_skills()
            for record, score in self._rank(
                candidates, [s.docstring_embedding for s in candidates], item, HINT_SKILLS_PER_ITEM
            ):
                if record.record_id not in seen:
                    seen.add(record.record_id)
                    out.append((record, score))
        return out

    def _forced_examples(self, hint: str) -> list[tuple[Record, float]]:
        out: list[tuple[Record, float]] = []
        seen: set[int] = set()
        for item in split_hint(hint):
            for record, score in self._rank(
                self.examples,
                [e.instruction_embedding for e in self.examples],
                item,
                HINT_EXAMPLES_PER_ITEM,
            ):
                if record.record_id not in seen:
                    seen.add(record.record_id)
                    out.append((record, score))
        return out

    def apply_hint(self, hint: str) -> tuple[list[tuple[Record, float]], list[tuple[Record, float]]]:
        """Forced (skills, examples) for a hint, in hint-item order."""
        if not hint.strip():
            raise EmptyText("hint must be nonempty")
        return self._forced_skills(hint), self._forced_examples(hint)

    # -- persistence ---------------------------------------------------------------

    def _skill_to_json(self, r: SkillRecord) -> dict:
        return {
            "record_id": r.record_id,
            "name": r.name,
            "source": r.source,
            "version": r.version,
            "supersedes": r.supersedes,
            "docstring_embedding": _embedding_to_json(r.docstring_embedding),
            "created_at": r.created_at,
            "status": r.status,
        }

    def _example_to_json(self, r: ExampleRecord) -> dict:
        return {
            "record_id": r.record_id,
            "instruction": r.instruction,
            "code": r.code,
            "outcome_digest": r.outcome_digest,
            "setup_snapshot": r.setup_snapshot,
            "instruction_embedding": _embedding_to_json(r.instruction_embedding),
            "created_at": r.created_at,
        }

    def _append_line(self, filename: str, obj: dict) -> None:
        if self.directory is None:
            return
        meta_path = self.directory / META_FILE
        if not meta_path.exists():
            meta_path.write_text(
                json.dumps({"provider_id": self.embedder.provider_id, "dims": EMBED_DIMS})
                + "\n",
                encoding="utf-8",
            )
        with (self.directory / filename).open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(obj, separators=(",", ":")))
            handle.write("\n")
            handle.flush()

    def _load_existing(self) -> None:
        assert self.directory is not None
        meta_path = self.directory / META_FILE
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            if meta.get("provider_id") != self.embedder.provider_id:
                raise ProviderMismatch(
                    f"store written with {meta.get('provider_id')!r}, "
                    f"opened with {self.embedder.provider_id!r}"
                )
        for line_no, obj in self._read_log(SKILLS_FILE):
            skill = parse_skill(obj["source"])
            embedding = EmbeddingVector(
                self.embedder.provider_id, len(obj["docstring_embedding"]),
                tuple(obj["docstring_embedding"]),
            )
            self.skills.append(
                SkillRecord(
                    record_id=obj["record_id"],
                    skill=skill,
                    source=obj["source"],
                    version=obj["version"],
                    supersedes=obj["supersedes"],
                    docstring_embedding=embedding,
                    created_at=obj["created_at"],
                    status=obj["status"],
                )
            )
        for line_no, obj in self._read_log(EXAMPLES_FILE):
            embedding = EmbeddingVector(
                self.embedder.provider_id, len(obj["instruction_embedding"]),
                tuple(obj["instruction_embedding"]),
            )
            self.examples.append(
                ExampleRecord(
                    record_id=obj["record_id"],
                    instruction=obj["instruction"],
                    code=obj["code"],
                    outcome_digest=obj["outcome_digest"],
                    setup_snapshot=obj["setup_snapshot"],
                    instruction_embedding=embedding,
                    created_at=obj["created_at"],
                )
            )
        top = max(
            [r.record_id for r in self.skills] + [r.record_id for r in self.examples],
            default=0,
        )
        self._next_record_id = top + 1

    def _read_log(self, filename: str) -> Iterable[tuple[int, dict]]:
        assert self.directory is not None
        path = self.directory / filename
        if not path.exists():
            return
        with path.open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if line.strip() == "":
                    continue
                if not line.endswith("\n"):
                    raise StoreCorrupt(str(path), line_no, "truncated line (no trailing newline)")
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreCorrupt(str(path), line_no, f"bad JSON: {exc}") from exc
                if not isinstance(obj, dict):
                    raise StoreCorrupt(str(path), line_no, "record is not an object")
                yield line_no, obj

    def save_to(self, directory: Union[str, Path]) -> None:
        """Write the full store to a fresh directory (export path)."""
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        (target / META_FILE).write_text(
            json.dumps({"provider_id": self.embedder.provider_id, "dims": EMBED_DIMS}) + "\n",
            encoding="utf-8",
        )
        with (target / SKILLS_FILE).open("w", encoding="utf-8") as handle:
            for record in self.skills:
                handle.write(json.dumps(self._skill_to_json(record), separators=(",", ":")))
                handle.write("\n")
        with (target / EXAMPLES_FILE).open("w", encoding="utf-8") as handle:
            for record in self.examples:
                handle.write(json.dumps(self._example_to_json(record), separators=(",", ":")))
                handle.write("\n")

    @classmethod
    def load(cls, directory: Union[str, Path], embedder=None) -> "MemoryStore":
        return cls(directory=directory, embedder=embedder)
