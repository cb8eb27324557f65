import json

import pytest

from uecoverage import cli
from uecoverage.designs import preset_spec


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_eval_writes_cdf(tmp_path, capsys):
    rc, out, _ = run(capsys, "eval", "--design", "edge", "--scheme", "mrc", "--out", str(tmp_path))
    assert rc == 0
    path = tmp_path / "cdf_edge_mrc.csv"
    assert path.read_text().startswith("gain_db,cdf_fraction\n")
    assert '"design": "edge"' in out
    for p in ("95", "75", "50", "30", "5"):
        assert any(line.split()[:1] == [p] for line in out.splitlines())


def test_eval_seeded_runs_byte_identical(tmp_path, capsys):
    args = ["eval", "--design", "face", "--scheme", "cbk", "--blockage", "portrait", "--model", "2",
            "--seed", "7"]
    run(capsys, *args, "--out", str(tmp_path / "a"))
    run(capsys, *args, "--out", str(tmp_path / "b"))
    name = "cdf_face_cbk_portrait_m2_s7.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    run(capsys, *args[:-1], "8", "--out", str(tmp_path / "c"))
    assert (tmp_path / "c" / "cdf_face_cbk_portrait_m2_s8.csv").read_bytes() != (tmp_path / "a" / name).read_bytes()


def test_out_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    assert run(capsys, "eval", "--design", "edge", "--scheme", "antsel")[0] == 0
    assert (tmp_path / "cdf_edge_antsel.csv").exists()


def test_invalid_design_name_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--design", "nope"])
    assert exc.value.code != 0


def test_model2_without_seed(tmp_path, capsys):
    rc, _, err = run(capsys, "eval", "--design", "edge", "--blockage", "portrait", "--model", "2",
                     "--out", str(tmp_path))
    assert rc != 0 and "seed" in err
    assert not list(tmp_path.iterdir())


def test_config_file_and_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"design": "edge", "scheme": "egc", "grid-step": 2}))
    rc, out, _ = run(capsys, "eval", "--config", str(cfg), "--out", str(tmp_path))
    assert rc == 0 and '"grid_step": 2' in out
    cfg.write_text(json.dumps({"design": "edge", "colour": "red"}))
    rc, _, err = run(capsys, "eval", "--config", str(cfg), "--out", str(tmp_path))
    assert rc != 0 and "colour" in err


def test_bad_grid_step(tmp_path, capsys):
    rc, _, err = run(capsys, "eval", "--design", "edge", "--grid-step", "7", "--out", str(tmp_path))
    assert rc != 0 and "divide" in err


def test_design_file(tmp_path, capsys):
    spec = preset_spec("edge")
    spec["name"] = "two-edges"
    spec["modules"] = spec["modules"][:2]
    path = tmp_path / "mine.json"
    path.write_text(json.dumps(spec))
    rc, _, _ = run(capsys, "eval", "--design-file", str(path), "--scheme", "cbk", "--out", str(tmp_path))
    assert rc == 0
    assert (tmp_path / "cdf_mine_cbk.csv").exists()
    spec["modules"][0]["extra"] = 1
    path.write_text(json.dumps(spec))
    rc, _, err = run(capsys, "eval", "--design-file", str(path), "--out", str(tmp_path))
    assert rc != 0 and "extra" in err


def test_compare(tmp_path, capsys):
    rc, out, _ = run(capsys, "compare", "--designs", "face", "edge", "--scheme", "cbk",
                     "--blockage", "portrait", "--model", "2", "--seed", "7", "--out", str(tmp_path))
    assert rc == 0
    files = list(tmp_path.glob("compare_*.csv"))
    assert len(files) == 1
    text = files[0].read_text()
    assert text.startswith("percentile,design_a_db,design_b_db,delta_db\n")
    assert len(text.splitlines()) == 20
    assert "crossovers" in out


def test_compare_runs_and_mismatch(tmp_path, capsys):
    rc, _, _ = run(capsys, "compare", "--design", "edge", "--run", "scheme=mrc", "--run", "scheme=cbk",
                   "--out", str(tmp_path))
    assert rc == 0
    rc, _, err = run(capsys, "compare", "--design", "edge", "--run", "grid_step=1",
                     "--run", "grid_step=2", "--out", str(tmp_path))
    assert rc != 0 and "mismatched" in err
    rc, _, err = run(capsys, "compare", "--designs", "edge", "--out", str(tmp_path))
    assert rc != 0


def test_report(capsys):
    rc, out, _ = run(capsys, "report", "--design", "face")
    assert rc == 0
    assert "codebook 24 beams, acquisition 80 ms" in out
    assert "csi-rs 0.50 ms, ssb 80 ms" in out
    assert "portrait: physical 14.81%, solid-angle 21.10%" in out
    assert "landscape: physical 18.52%, solid-angle 25.42%" in out
    rc, out, _ = run(capsys, "report", "--design", "edge")
    assert "acquisition 60 ms" in out


def test_codebook_export(tmp_path, capsys):
    rc, _, _ = run(capsys, "codebook", "--design", "design4", "--out", str(tmp_path))
    assert rc == 0
    lines = (tmp_path / "codebook_design4.txt").read_text().splitlines()
    assert lines[0] == "# design=design4 phase_bits=5"
    assert len(lines) == 49


def test_sls(tmp_path, capsys):
    args = ["sls", "--design", "edge", "--drops", "20", "--seed", "3", "--distance-m", "50"]
    rc, out, _ = run(capsys, *args, "--out", str(tmp_path / "a"))
    assert rc == 0 and '"distance_m": 50.0' in out
    run(capsys, *args, "--out", str(tmp_path / "b"))
    name = "sls_edge_codebook_s3.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_atomic_outputs_cleanup(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        with cli.atomic_outputs() as pending:
            pending.append((tmp_path / "ok.csv", "a\n"))
            pending.append((blocker / "sub" / "bad.csv", "b\n"))
    assert not (tmp_path / "ok.csv").exists()
