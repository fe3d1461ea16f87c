"""Build a demo memory store: seed library plus the stack-blocks curriculum.

Usage: python scripts/seed_demo_memory.py <memory-dir>

Leaves the store with the builtin skills and examples, a stack_blocks ladder
of accepted versions from the seven-variant curriculum, and one rejected
tombstone from the deliberately breaking candidate. Handy for demos and for
the console's skill browser.
"""

from __future__ import annotations

import sys

from lyra.memory import MemoryStore
from lyra.session import run_from_spec
from lyra.tasklib import seed_memory
from lyra.tasklib.curriculum import breaking_spec, curriculum_specs


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    store = MemoryStore(sys.argv[1])
    seed_memory(store)
    for spec in curriculum_specs():
        transcript = run_from_spec(spec, store)
        status = transcript.events[-1]["status"]
        if status != "ok":
            print(f"curriculum variant failed: {status}", file=sys.stderr)
            return 1
    run_from_spec(breaking_spec(), store)  # leaves one rejected tombstone
    versions = store.skill_versions("stack_blocks")
    print(
        f"memory at {sys.argv[1]}: {len(store.accepted_skills())} skills, "
        f"{len(store.examples)} examples, stack_blocks versions "
        f"{[(r.version, r.status) for r in versions]}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
