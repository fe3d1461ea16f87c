"""Regenerate the bundled replay-fixture transcripts under fixtures/transcripts/."""

from __future__ import annotations

import tempfile
from pathlib import Path

from lyra.memory import MemoryStore
from lyra.session import run_from_spec
from lyra.tasklib.fixtures import replay_fixture_specs

OUT_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "transcripts"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, spec in replay_fixture_specs():
        with tempfile.TemporaryDirectory() as tmp:
            memory = MemoryStore(Path(tmp) / "memory")
            transcript = run_from_spec(spec, memory)
        path = OUT_DIR / f"{name}.jsonl"
        transcript.write(path)
        print(f"wrote {path} ({len(transcript.events)} events)")


if __name__ == "__main__":
    main()
