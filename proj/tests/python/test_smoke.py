import json

import pytest

import balgebroid


def test_bundled_scenes_listed():
    names = [p.rsplit("/", 1)[-1] for p in balgebroid.list_scenes(str(balgebroid.scene_dir()))]
    assert "t3.json" in names
    assert len(names) == 12


def test_load_scene_round_trips():
    s = balgebroid.load_scene("t3")
    assert s["name"] == "t3"
    again = json.loads(balgebroid.canonical_scene_text(json.dumps(s)))
    assert again == s


def test_verify_torus_passes():
    r = balgebroid.run("t3", "verify")
    assert r["pass"] is True
    assert r["exit_code"] == 0
    names = {c["name"] for c in r["checks"]}
    assert "contact.unit_volume" in names
    assert all(c["pass"] for c in r["checks"])


def test_reports_are_deterministic():
    assert balgebroid.run("heisenberg", "verify") == balgebroid.run("heisenberg", "verify")


def test_jacobi_command():
    r = balgebroid.run("darboux_r3", "jacobi", diagram=True)
    assert r["pass"] is True


def test_errors_are_typed(tmp_path):
    with pytest.raises(balgebroid.IOError):
        balgebroid.run(str(tmp_path / "missing.json"), "verify")
    with pytest.raises(balgebroid.ParseError):
        balgebroid.canonical_scene_text("{")
    with pytest.raises(balgebroid.UnknownKind):
        balgebroid.run("t3", "teleport")
    with pytest.raises(balgebroid.InvalidSpec):
        balgebroid.run("heisenberg", "jacobi")
    assert issubclass(balgebroid.ParseError, balgebroid.BalgError)
