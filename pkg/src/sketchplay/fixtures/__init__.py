"""Bundled demo fixtures (domino canvas, swipe gesture, pipeline config)."""
from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture file."""
    return Path(str(resources.files("sketchplay.fixtures").joinpath(name)))
