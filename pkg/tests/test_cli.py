"""Subcommand behavior, exit codes, and file-level determinism."""

import numpy as np
import pytest

from geotex.cli import main
from geotex.graph import DistanceMatrix, floyd_warshall, load_matrix_csv, save_matrix_csv
from geotex.retrieval import load_db


def synth(root, **kw):
    args = ["synth", "--out", str(root)]
    defaults = {"classes": 2, "per_class": 2, "size": 64,
                "seed": 3, "spread": 0.1}
    defaults.update(kw)
    for key, val in defaults.items():
        args += ["--%s" % key.replace("_", "-"), str(val)]
    assert main(args) == 0


def read_tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*.png"))}


def test_synth_deterministic(tmp_path):
    synth(tmp_path / "one")
    synth(tmp_path / "two")
    synth(tmp_path / "other", seed=4)
    t1 = read_tree(tmp_path / "one")
    t2 = read_tree(tmp_path / "two")
    t3 = read_tree(tmp_path / "other")
    assert list(t1) == ["class00/img000.png", "class00/img001.png",
                        "class01/img000.png", "class01/img001.png"]
    assert t1 == t2
    assert t1 != t3


def test_synth_images_load(tmp_path):
    from geotex.features import load_image

    synth(tmp_path, classes=3, per_class=2, size=96)
    img = load_image(tmp_path / "class02" / "img001.png")
    assert img.pixels.shape == (96, 96)
    assert img.pixels.min() >= 0.0 and img.pixels.max() <= 1.0


def test_extract_and_evaluate(tmp_path, capsys):
    data = tmp_path / "data"
    synth(data, classes=2, per_class=3, size=64, spread=0.12)
    db1 = tmp_path / "db1.json"
    db2 = tmp_path / "db2.json"
    rc = main(["extract", "--dataset", str(data), "--out", str(db1),
               "--family", "gamma", "--levels", "2", "--workers", "1"])
    assert rc == 0
    # parallel run must produce the same bytes as serial
    rc = main(["extract", "--dataset", str(data), "--out", str(db2),
               "--family", "gamma", "--levels", "2", "--workers", "2"])
    assert rc == 0
    assert db1.read_bytes() == db2.read_bytes()

    db = load_db(db1)
    assert db.config.levels == 2
    assert sorted(db.classes.values()) == ["class00"] * 3 + ["class01"] * 3

    rep1 = tmp_path / "rep1"
    rep2 = tmp_path / "rep2"
    capsys.readouterr()
    assert main(["evaluate", "--db", str(db1), "--out", str(rep1)]) == 0
    table = capsys.readouterr().out
    for name in ("kld", "skld", "gdskld", "gdfloyd"):
        assert name in table
    assert main(["evaluate", "--db", str(db1), "--out", str(rep2)]) == 0
    for name in ("arr.csv", "pr_kld.csv", "pr_skld.csv", "pr_gdskld.csv",
                 "pr_gdfloyd.csv"):
        assert (rep1 / name).read_bytes() == (rep2 / name).read_bytes()
    header, *rows = (rep1 / "arr.csv").read_text().splitlines()
    assert header == "method,levels,k,arr"
    assert len(rows) == 4
    assert all(row.split(",")[1] == "2" and row.split(",")[2] == "3"
               for row in rows)


def test_extract_failure_exit_code(tmp_path):
    data = tmp_path / "data"
    synth(data, classes=2, per_class=2)
    (data / "class00" / "broken.pgm").write_bytes(b"P5\n4 4\n255\nxx")
    db = tmp_path / "db.json"
    rc = main(["extract", "--dataset", str(data), "--out", str(db),
               "--workers", "1"])
    assert rc == 3
    assert not db.exists()
    rc = main(["extract", "--dataset", str(data), "--out", str(db),
               "--workers", "1", "--skip-bad"])
    assert rc == 0
    assert "class00/broken.pgm" not in load_db(db).signatures
    assert len(load_db(db).signatures) == 4


def test_extract_bad_root_exit_code(tmp_path):
    rc = main(["extract", "--dataset", str(tmp_path / "nope"),
               "--out", str(tmp_path / "db.json")])
    assert rc == 2


def test_evaluate_exit_codes(tmp_path):
    assert main(["evaluate", "--db", str(tmp_path / "missing.json")]) == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["evaluate", "--db", str(bad)]) == 4

    data = tmp_path / "data"
    synth(data)
    db = tmp_path / "db.json"
    assert main(["extract", "--dataset", str(data), "--out", str(db),
                 "--levels", "1", "--workers", "1"]) == 0
    assert main(["evaluate", "--db", str(db), "--levels", "5",
                 "--out", str(tmp_path / "rep")]) == 4


def test_geo_report(tmp_path, capsys):
    assert main(["geo", "--family", "gamma",
                 "--a", "1", "1", "--b", "2", "1"]) == 0
    out = dict(line.split("=") for line in
               capsys.readouterr().out.strip().splitlines())
    assert float(out["kld_ab"]) == pytest.approx(np.log(2.0) - 0.5, abs=1e-6)
    assert float(out["skld"]) == pytest.approx(0.25, abs=1e-9)
    assert float(out["gd_skld"]) == pytest.approx(np.sqrt(0.5), abs=1e-6)
    assert float(out["bvp_distance"]) <= float(out["chord_length"]) + 1e-12

    assert main(["geo", "--family", "weibull",
                 "--a", "1.3", "0.8", "--b", "1.3", "0.8"]) == 0
    out = dict(line.split("=") for line in
               capsys.readouterr().out.strip().splitlines())
    assert all(float(v) == 0.0 for v in out.values())


def test_fw_and_validate(tmp_path, capsys):
    rng = np.random.default_rng(91)
    W = rng.integers(1, 64, size=(6, 6)).astype(np.float64) / 64.0
    W = np.triu(W, 1)
    W = W + W.T
    src = tmp_path / "w.csv"
    save_matrix_csv(src, DistanceMatrix(d=W, labels=None))

    out = tmp_path / "closed.csv"
    assert main(["fw", "--matrix", str(src), "--out", str(out)]) == 0
    closed = load_matrix_csv(out)
    ref = floyd_warshall(DistanceMatrix(d=W, labels=None)).dist
    assert np.array_equal(closed.d, ref)

    capsys.readouterr()
    assert main(["validate", "--matrix", str(out)]) == 0
    report = dict(line.split("=") for line in
                  capsys.readouterr().out.strip().splitlines())
    assert report["is_metric"] == "true"
    assert float(report["max_triangle_violation"]) <= 0.0

    capsys.readouterr()
    assert main(["validate", "--matrix", str(src)]) == 0
    report = dict(line.split("=") for line in
                  capsys.readouterr().out.strip().splitlines())
    # raw weights are generally not metric before the closure
    assert float(report["symmetry_defect"]) == 0.0


def test_fw_exit_codes(tmp_path):
    assert main(["fw", "--matrix", str(tmp_path / "missing.csv"),
                 "--out", str(tmp_path / "o.csv")]) == 2
    bad = tmp_path / "w.txt"
    bad.write_text("x")
    assert main(["fw", "--matrix", str(bad),
                 "--out", str(tmp_path / "o.csv")]) == 4


def test_config_file_merge_and_errors(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("classes=3\nper_class=2\nsize=64\nseed=9\nspread=0.1\n")
    out = tmp_path / "ds"
    assert main(["synth", "--out", str(out), "--config", str(cfg),
                 "--classes", "2"]) == 0
    # flag wins over the file for classes, file supplies the rest
    assert sorted(p.name for p in out.iterdir()) == ["class00", "class01"]
    assert len(list(out.rglob("*.png"))) == 4

    bad = tmp_path / "bad.cfg"
    bad.write_text("not_a_key=1\n")
    assert main(["synth", "--out", str(tmp_path / "x"),
                 "--config", str(bad)]) == 4
