"""Verification of singular Lie algebroid constructions on JSON scenes."""

import json
from pathlib import Path

from ._balgebroid import (
    COMMANDS,
    DEFAULT_SCENE_DIR,
    BalgError,
    InvalidSpec,
    IOError,
    ParseError,
    UnknownCoordinate,
    UnknownKind,
    canonical_scene,
    canonical_scene_text,
    list_scenes,
    scene_digest,
)
from . import _balgebroid

__all__ = [
    "COMMANDS",
    "BalgError",
    "InvalidSpec",
    "IOError",
    "ParseError",
    "UnknownCoordinate",
    "UnknownKind",
    "canonical_scene",
    "canonical_scene_text",
    "list_scenes",
    "scene_digest",
    "scene_dir",
    "load_scene",
    "run",
    "verify_all",
]


def scene_dir() -> Path:
    """Bundled scenes: next to the package when installed, the source tree otherwise."""
    local = Path(__file__).with_name("scenes")
    return local if local.is_dir() else Path(DEFAULT_SCENE_DIR)


def _resolve(scene) -> str:
    p = Path(scene)
    if p.suffix != ".json" and not p.exists():
        p = scene_dir() / f"{scene}.json"
    return str(p)


def load_scene(scene) -> dict:
    return json.loads(canonical_scene(_resolve(scene)))


def run(scene, command: str, **options) -> dict:
    """Runs a command on a scene name or path and returns the JSON report with its exit code."""
    text, code = _balgebroid.execute(_resolve(scene), command, format="json", **options)
    report = json.loads(text)
    report["exit_code"] = code
    return report


def verify_all(directory=None) -> dict:
    text, code = _balgebroid.verify_all(str(directory or scene_dir()), "json")
    report = json.loads(text)
    report["exit_code"] = code
    return report
