import csv
import io
import os
import xml.etree.ElementTree as ET

import pytest

from conftest import GOLDEN
from polypin import cli
from polypin.geometry import Domain, PlanarConfig, Point2
from polypin.golden import CROSSED_FILE, SCENERY_FILE, SVG_FILE, crossed_document, scenery_document
from polypin.lines import build_broken_lines
from polypin.render import render_svg
from polypin.textio import FormatError, parse_document, write_document

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = {}
    for line in lines:
        if line.startswith("# ") and " = " in line:
            k, _, v = line[2:].partition(" = ")
            header[k] = v
    rows = list(csv.DictReader(io.StringIO("\n".join(ln for ln in lines if not ln.startswith("#")))))
    return header, rows


def test_pinning_bytes_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "pinning", "--n", 60, "--lambda1", 1, "--lambda2", 1, "--replicas", 20, "--seed", 7]
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert len(rows) == 20
    assert header["seed"] == "7" and header["command"] == "pinning"
    assert a.read_text().startswith(f"# polypin {cli.__version__}\n")


def test_header_round_trip_reproduces_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["run", "sticks", "--kind", "pareto", "--alpha", 0.7, "--lambda", 0.5, "--T", 100,
                "--replicas", 10, "--seed", 5, "--out", a]) == 0
    assert run(["run", "sticks", "--from-header", a, "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_header_of_other_command_rejected(tmp_path, capsys):
    a = tmp_path / "a.csv"
    assert run(["run", "sticks", "--replicas", 2, "--T", 10, "--out", a]) == 0
    assert run(["run", "lines", "--from-header", a]) == 2
    assert "header is for 'sticks'" in capsys.readouterr().err


def test_seed_from_environment(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv(cli.SEED_ENV, "13")
    assert run(["run", "lines", "--n", 10, "--replicas", 3, "--out", a]) == 0
    monkeypatch.delenv(cli.SEED_ENV)
    assert run(["run", "lines", "--n", 10, "--replicas", 3, "--seed", 13, "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.conf"
    cfg.write_text("# comment line\nn = 12   # trailing comment\nreplicas = 4\nseed = 2\n")
    out = tmp_path / "o.csv"
    assert run(["run", "lines", "--config", cfg, "--replicas", 3, "--out", out]) == 0
    header, rows = read_csv(out)
    assert header["n"] == "12.0" and len(rows) == 3


@pytest.mark.parametrize("text, lineno, fragment", [
    ("n = 10\nbogus = 3\n", 2, "unknown key 'bogus'"),
    ("n = 10\n\nreplicas = two\n", 3, "bad value for 'replicas'"),
    ("just words\n", 1, "expected 'key = value'"),
    ("replicas = 2.5\n", 1, "bad value"),
])
def test_config_errors_are_line_precise(tmp_path, capsys, text, lineno, fragment):
    cfg = tmp_path / "bad.conf"
    cfg.write_text(text)
    assert run(["run", "lines", "--config", cfg]) == 2
    err = capsys.readouterr().err
    assert f"{cfg}:{lineno}:" in err and fragment in err


@pytest.mark.parametrize("args", [
    ["run", "pinning", "--n", -5],
    ["run", "pinning", "--replicas", 0],
    ["run", "sticks", "--kind", "gamma"],
    ["run", "lambda-c", "--windows", "10"],
    ["run", "pinning", "--lambda1", 2, "--lambda1-max", 1],
    ["run", "lines", "--n", "abc"],
    ["run", "nosuch"],
])
def test_invalid_values_exit_2(args, capsys):
    assert run(args) == 2


def test_missing_config_file_exits_2(tmp_path):
    assert run(["run", "lines", "--config", tmp_path / "missing.conf"]) == 2


def test_runtime_failure_exits_1(monkeypatch, capsys):
    def boom(params):
        raise RuntimeError("disk on fire")

    monkeypatch.setitem(cli.RUNNERS, "lines", boom)
    assert run(["run", "lines", "--replicas", 1]) == 1
    assert "disk on fire" in capsys.readouterr().err


def test_sticks_above_threshold_spans_often(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["run", "sticks", "--kind", "positive_cauchy", "--c", 1, "--lambda", 2, "--T", "1e4",
                "--replicas", 200, "--out", out]) == 0
    _, rows = read_csv(out)
    assert sum(int(r["spans_window"]) for r in rows) / len(rows) > 0.5


def test_lines_example_chain_per_side(tmp_path):
    out = tmp_path / "l.csv"
    assert run(["run", "lines", "--n", 100, "--lambda2", 1, "--seed", 3, "--replicas", 500, "--out", out]) == 0
    _, rows = read_csv(out)
    mean = sum(float(r["chain_per_n"]) for r in rows) / len(rows)
    assert 1.90 <= mean <= 2.00


def test_lines_with_line_building_and_structured_output(tmp_path):
    out, doc = tmp_path / "l.csv", tmp_path / "l.txt"
    assert run(["run", "lines", "--n", 8, "--replicas", 3, "--build-lines", "--boundary-births",
                "--domain", "triangle", "--structured-out", doc, "--out", out]) == 0
    _, rows = read_csv(out)
    assert all(int(r["lines"]) >= int(r["chain"]) for r in rows)
    parsed = parse_document(doc.read_text())
    assert parsed.domain == Domain.triangle(8)


def test_influence_and_render_pipeline(tmp_path):
    out, doc, svg = tmp_path / "i.csv", tmp_path / "i.txt", tmp_path / "i.svg"
    assert run(["run", "influence", "--n", 8, "--lambda1", 0.5, "--replicas", 2, "--seed", 1,
                "--structured-out", doc, "--out", out]) == 0
    assert run(["render", doc, svg]) == 0
    root = ET.fromstring(svg.read_text())
    groups = {g.get("id") for g in root.iter(f"{SVG_NS}g")}
    assert {"attractors", "axes", "lines", "paths", "points"} <= groups


def test_lambda_c_command(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["run", "lambda-c", "--c", 2, "--windows", "10,100,1000,10000", "--replicas", 100, "--out", out]) == 0
    assert "# result lambda_c:" in out.read_text()


# --- rendering ----------------------------------------------------------------


def _svg(text):
    return ET.fromstring(render_svg(parse_document(text)))


def test_empty_lineset_renders_axes_only():
    d = Domain.triangle(5)
    root = _svg(write_document(domain=d, lineset=build_broken_lines(PlanarConfig(), (), d)))
    by_id = {g.get("id"): g for g in root.iter(f"{SVG_NS}g")}
    assert len(list(by_id["lines"])) == 0
    assert len(list(by_id["axes"])) == 2  # domain outline and the t-axis


def test_single_point_renders_two_rays():
    d = Domain.triangle(5)
    ls = build_broken_lines(PlanarConfig([Point2(2.0, 0.5)]), (), d)
    root = _svg(write_document(domain=d, lineset=ls))
    (poly,) = [e for g in root.iter(f"{SVG_NS}g") if g.get("id") == "lines" for e in g]
    assert len(poly.get("points").split()) == 3  # exit, point, exit


def test_paths_have_distinct_strokes():
    with open(os.path.join(GOLDEN, SCENERY_FILE), encoding="utf-8") as fh:
        root = _svg(fh.read())
    styles = {(p.get("stroke"), p.get("stroke-dasharray")) for g in root.iter(f"{SVG_NS}g")
              if g.get("id") == "paths" for p in g}
    assert len(styles) == 2


def test_golden_files_are_reproduced():
    generated = scenery_document()
    with open(os.path.join(GOLDEN, SCENERY_FILE), encoding="utf-8") as fh:
        assert fh.read() == generated
    with open(os.path.join(GOLDEN, SVG_FILE), encoding="utf-8") as fh:
        assert fh.read() == render_svg(parse_document(generated))
    with open(os.path.join(GOLDEN, CROSSED_FILE), encoding="utf-8") as fh:
        assert fh.read() == crossed_document()


def test_golden_command_writes_identical_files(tmp_path):
    assert run(["golden", tmp_path]) == 0
    for name in (SCENERY_FILE, SVG_FILE, CROSSED_FILE):
        assert (tmp_path / name).read_bytes() == open(os.path.join(GOLDEN, name), "rb").read()


def test_render_rejects_malformed_input(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("LINE 0 1 2 3\n")
    assert run(["render", bad, tmp_path / "o.svg"]) == 2
    bad.write_text("WHAT 1\n")
    assert run(["render", bad, tmp_path / "o.svg"]) == 2
    with pytest.raises(FormatError):
        parse_document("POINT 1\n")
