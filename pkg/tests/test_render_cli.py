import json
import xml.dom.minidom
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from carpet_forge.cli import main, read_config
from carpet_forge.decomp import Stages
from carpet_forge.geom import Polygon, Rect
from carpet_forge.render import (Scene, SceneError, _decimal, carpet_scene, partition_scene,
                                 render_svg, scene_from_json, scene_to_json)


def test_decimal_exact_and_rounded():
    assert _decimal(F(3, 8)) == ("0.375", True)
    assert _decimal(F(-1, 20)) == ("-0.05", True)
    assert _decimal(F(7)) == ("7", True)
    assert _decimal(F(1, 3)) == ("0.333333333333", False)
    assert _decimal(F(-2, 3)) == ("-0.666666666667", False)


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(0, 12), st.integers(0, 6))
def test_decimal_dyadic_roundtrip(num, a, b):
    v = F(num, 2 ** a * 5 ** b)
    text, exact = _decimal(v)
    assert exact and F(text) == v


def test_carpet_depth2_scene():
    s = carpet_scene(2)
    svg = render_svg(s).decode()
    assert svg.count("<path") == 2
    assert 'class="hole"' in svg and "~ rounded" in svg
    xml.dom.minidom.parseString(svg)


def test_svg_deterministic():
    assert render_svg(carpet_scene(3)) == render_svg(carpet_scene(3))


def test_empty_scene_is_valid_svg():
    svg = render_svg(Scene(Rect(0, 1, 0, 1)))
    doc = xml.dom.minidom.parseString(svg)
    assert doc.documentElement.tagName == "svg"


def test_partition_scene_one_path_per_cell():
    stg = Stages(1, "desk")
    s = partition_scene(stg, 1)
    assert len(s.items) == stg.partition(1).count()
    svg = render_svg(s).decode()
    assert svg.count("<path") == len(s.items)
    kinds = {c.kind for c in stg.partition(1).cells()}
    assert all(f"cell {k}" in svg for k in kinds)


def test_scene_json_roundtrip():
    s = carpet_scene(3)
    s.add(Polygon(((0, 0), (F(1, 3), 0), (0, F(1, 7)))), "element", "tri")
    s.add((F(1, 2), F(2, 3)), "point", "p")
    s.add([(0, 0), (1, F(1, 9))], "line", "seg")
    from carpet_forge.carpet import carpet_approx
    s.add(carpet_approx(2).region, "carpet", "S2")
    text = scene_to_json(s)
    back = scene_from_json(text)
    assert back == s
    assert scene_to_json(back) == text
    assert [it.kind for it in back.items[-4:]] == ["polygon", "point", "polyline", "region"]


def test_scene_labels_unique():
    s = carpet_scene(1)
    with pytest.raises(SceneError, match="duplicate"):
        s.add(Rect(0, 1, 0, 1), "hole", "S")
    d = json.loads(scene_to_json(s))
    d["items"].append(dict(d["items"][0]))
    with pytest.raises(SceneError, match="duplicate"):
        scene_from_json(json.dumps(d))


def test_scene_json_errors():
    with pytest.raises(SceneError):
        scene_from_json("{")
    with pytest.raises(SceneError, match="version"):
        scene_from_json('{"version": 9}')
    with pytest.raises(SceneError):
        scene_from_json('{"version": 1, "viewport": ["0/1", "1/1", "0/1", "1/1"],'
                        ' "items": [{"kind": "blob", "vertices": [], "style": "", "label": "x"}]}')


# CLI

def test_cli_schedule_paper(capsys):
    assert main(["schedule", "--mode", "paper", "--stages", "6"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows and all(r["status"] in ("pass", "info") for r in rows)


def test_cli_paper_needs_window(capsys):
    assert main(["build", "--mode", "paper", "--stages", "5"]) == 2
    assert "--window" in capsys.readouterr().err


def test_cli_unknown_flag(capsys):
    assert main(["build", "--frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_cli_profile_mode_mismatch():
    assert main(["schedule", "--mode", "relaxed", "--profile", "paper"]) == 2
    assert main(["schedule", "--profile", "nosuch"]) == 2


def test_cli_verify_relaxed(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--mode", "relaxed", "--stages", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] and "partition.3" in rep["suites"]


def test_cli_build_render(tmp_path):
    js, svg = tmp_path / "s.json", tmp_path / "s.svg"
    assert main(["build", "--stages", "2", "--window", "3/4,13/16,1,17/16",
                 "--out", str(js)]) == 0
    assert main(["render", "--in", str(js), "--out", str(svg)]) == 0
    scene = scene_from_json(js.read_text())
    assert scene.viewport == Rect(F(3, 4), F(13, 16), 1, F(17, 16))
    assert svg.read_bytes().count(b"<path") == len(scene.items) > 0


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# schedule settings\nmode = paper\nstages=3\n")
    assert main(["schedule", "--config", str(cfg)]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert max(r["stage"] for r in rows) == 3
    # flags win over the file
    assert main(["schedule", "--config", str(cfg), "--stages", "2"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert max(r["stage"] for r in rows) == 2
    cfg.write_text("colour=blue\n")
    assert main(["schedule", "--config", str(cfg)]) == 2


def test_read_config_rejects_garbage(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("stages 3\n")
    with pytest.raises(Exception, match="without '='"):
        read_config(str(p))


def test_cli_quotient(capsys):
    assert main(["quotient", "--depth", "2", "--resolution", "1/54"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["grid_monotone"]["pass"] and rep["T_open_negative_control"]["fails_as_expected"]


def test_cli_lemma8(tmp_path, capsys):
    svg = tmp_path / "g.svg"
    assert main(["lemma8", "--stages", "5", "--point", "11/16,1", "--svg", str(svg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["chains"][0]["case"] == "1'" and svg.exists()
    assert main(["lemma8", "--stages", "5", "--point", "1/2,1/3"]) == 1
    assert main(["lemma8", "--stages", "2"]) == 2
