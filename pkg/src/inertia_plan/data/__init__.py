"""Packaged planning fixtures."""
from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    fname = name if name.endswith(".json") else f"{name}.json"
    path = Path(str(resources.files(__name__) / fname))
    if not path.exists():
        raise FileNotFoundError(f"no packaged fixture named {name!r}")
    return path


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir() if p.name.endswith(".json"))
