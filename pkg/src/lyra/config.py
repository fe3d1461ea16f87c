"""Configuration: lyra.toml plus environment variables."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agent import ENV_MEMORY_DIR
from .session import SessionConfig
from .skillscript import Budget
from .world import Workspace

DEFAULT_CONFIG_NAME = "lyra.toml"
DEFAULT_MEMORY_DIR = "lyra_memory"


@dataclass
class AppConfig:
    workspace: Workspace
    session: SessionConfig
    memory_dir: Path


def default_memory_dir() -> Path:
    return Path(os.environ.get(ENV_MEMORY_DIR, DEFAULT_MEMORY_DIR))


def load_config(path: Optional[Union[str, Path]] = None) -> AppConfig:
    """Read lyra.toml if present; every key is optional."""
    data: dict = {}
    candidate = Path(path) if path else Path(DEFAULT_CONFIG_NAME)
    if candidate.exists():
        data = tomllib.loads(candidate.read_text(encoding="utf-8"))
    elif path is not None:
        raise FileNotFoundError(f"config file {path} not found")

    ws_data = data.get("workspace", {})
    workspace = Workspace(
        x_min=ws_data.get("x", [0.25, 0.80])[0],
        x_max=ws_data.get("x", [0.25, 0.80])[1],
        y_min=ws_data.get("y", [-0.55, 0.30])[0],
        y_max=ws_data.get("y", [-0.55, 0.30])[1],
        z_min=ws_data.get("z", [0.01, 0.65])[0],
        z_max=ws_data.get("z", [0.01, 0.65])[1],
    )

    session_data = data.get("session", {})
    budget_data = data.get("budget", {})
    session = SessionConfig(
        seed=session_data.get("seed", 0),
        max_iterations=session_data.get("max_iterations", 10),
        char_budget=session_data.get("char_budget", 24_000),
        k_examples=session_data.get("k_examples", 10),
        k_skills=session_data.get("k_skills", 5),
        budget=Budget(
            max_primitive_calls=budget_data.get("max_primitive_calls", 10_000),
            max_steps=budget_data.get("max_steps", 1_000_000),
        ),
        count_hints_in_noc=session_data.get("count_hints_in_noc", True),
    )

    memory_dir = Path(data.get("memory", {}).get("dir", default_memory_dir()))
    return AppConfig(workspace=workspace, session=session, memory_dir=memory_dir)
