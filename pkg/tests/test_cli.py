import csv

import pytest

from tfgp.cli import (
    RunConfig,
    blob_hash,
    load_config,
    main,
    parse_config_text,
    parse_norm,
    tail_table,
)
from tfgp.errors import ConfigError


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_blob_hash_matches_git():
    # git hash-object of "hello\n"
    assert blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_parse_config_text():
    cfg = parse_config_text("d = 3  # dimension\n\neps=0.1, 0.05,0.025\ncheckpoint=yes\nnorms=L2,Linf@D1\n")
    assert cfg.d == 3 and cfg.eps == (0.1, 0.05, 0.025) and cfg.checkpoint is True
    assert cfg.specs()[1].region == "D1"
    for bad in ("nonsense", "colour=blue", "d=three", "checkpoint=maybe"):
        with pytest.raises(ConfigError):
            parse_config_text(bad)


def test_parse_norm():
    assert parse_norm("L4").p == 4.0
    assert parse_norm("H1w@D2").kind == "H1w"
    for bad in ("L1", "Q2", "L2@D7"):
        with pytest.raises(ConfigError):
            parse_norm(bad)


@pytest.mark.parametrize("text", ["eps=", "eps=0.05,0.1", "beta=0.9", "M=0\nM0=1", "R1=2", "jobs=0", "init=random"])
def test_validation_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text).validate()


def test_missing_config_exit_code(tmp_path, capsys):
    path = tmp_path / "nope.cfg"
    assert main(["painleve", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert str(path) in capsys.readouterr().err


def test_empty_ladder_exit_code(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eps=\n")
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_painleve_command(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("L=2\nd=2\n")
    out = tmp_path / "o"
    assert main(["painleve", "--config", str(cfg), "--out", str(out), "--check-tails"]) == 0
    text = capsys.readouterr().out
    assert "a1 = -1/2" in text and "a2 = -73/8" in text
    for name in ("gamma0.csv", "gamma1.csv", "gamma2.csv", "tails.csv", "manifest.txt"):
        assert (out / name).exists()
    rows = _rows(out / "tails.csv")[1:]
    assert len(rows) == 6
    for n, side, fitted, pred in rows:
        # left rows for n >= 2 are pre-asymptotic on this grid (see tail_table)
        if side == "right" or int(n) == 0:
            assert abs(float(fitted) - float(pred)) < 0.05, (n, side)
    man = (out / "manifest.txt").read_text()
    assert f"input {cfg} {blob_hash(cfg.read_bytes())}" in man
    assert "d=2" in man and "L=2" in man


@pytest.mark.parametrize("d", [1, 2, 3])
def test_tail_table(painleve_by_d, d):
    rows = tail_table(painleve_by_d(d), d)
    assert len(rows) == 8 and rows[0][:2] == (0, "right")
    for n, side, fitted, pred in rows:
        if side == "right":
            assert fitted == pytest.approx(pred, abs=0.05)
        elif n == 0:
            assert fitted == pytest.approx(pred, abs=0.01)
        elif n == 1:
            # pre-asymptotic at |y| = 11, see tail_table
            assert fitted == pytest.approx(pred, abs=0.35)


def test_manifest_is_reproducible(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("L=1\n")
    out = tmp_path / "o"
    seen = []
    for _ in range(2):
        assert main(["painleve", "--config", str(cfg), "--out", str(out)]) == 0
        seen.append(((out / "manifest.txt").read_bytes(), (out / "gamma1.csv").read_bytes()))
    assert seen[0] == seen[1]


def test_approx_command(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["approx", "--out", str(out)]) == 0
    assert (out / "approx_eps0.05.csv").exists() and (out / "residual_eps0.025.csv").exists()
    assert _rows(out / "approx_eps0.1.csv")[0] == ["r", "eta1", "eta2"]
    rows = {r[0]: r for r in _rows(out / "residual_orders.csv")[1:]}
    slope, pred = float(rows["outer"][4]), float(rows["outer"][6])
    assert pred == pytest.approx(2.65) and abs(slope - pred) <= 0.2
    assert "residual order" in capsys.readouterr().out


def test_approx_negative_lambda(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eps=0.5\nN0=1\n")
    assert main(["approx", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "NegativeLambda" in capsys.readouterr().err


def test_solve_command(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eps=0.1,0.07,0.05\ncheckpoint=true\n")
    out = tmp_path / "tf"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    rows = _rows(out / "summary.csv")
    assert rows[0][-2:] == ["positive1", "positive2"]
    assert all(r[-1] == "True" and r[-2] == "True" for r in rows[1:])
    assert (out / "solution_eps0.05.chk").exists()
    out2 = tmp_path / "an"
    assert main(["solve", "--config", str(cfg), "--out", str(out2), "--init", "ansatz"]) == 0
    a = _rows(out / "solution_eps0.05.csv")[1:]
    b = _rows(out2 / "solution_eps0.05.csv")[1:]
    top = max(float(x[1]) for x in a)
    assert max(abs(float(x[1]) - float(y[1])) for x, y in zip(a, b)) <= 1e-8 * top


def test_rates_command(tmp_path):
    out = tmp_path / "o"
    assert main(["rates", "--out", str(out), "--jobs", "2"]) == 0
    rows = _rows(out / "rates.csv")
    assert rows[0] == ["norm", "region", "slope", "r2", "predicted", "verdict"]
    by = {(r[0], r[1]): r for r in rows[1:]}
    assert set(r[5] for r in rows[1:]) <= {"pass", "flag", "fail"}
    # component 1 on D2 decays faster than any power
    assert by[("Linf_eta1", "D2")][4] == "inf" and by[("Linf_eta1", "D2")][5] == "flag"
    dat = (out / "rates.dat").read_text().split("\n\n\n")
    assert len([b for b in dat if b.strip()]) == len(rows) - 1
    assert len(_rows(out / "errors.csv")) == 6


def test_rates_jobs_do_not_change_results(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eps=0.1,0.07,0.05\n")
    for j in (1, 3):
        assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / f"j{j}"), "--jobs", str(j)]) == 0
    assert (tmp_path / "j1" / "errors.csv").read_bytes() == (tmp_path / "j3" / "errors.csv").read_bytes()


def test_rates_need_three_eps(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("eps=0.1,0.05\n")
    assert main(["rates", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_default_config():
    cfg = load_config(None)
    assert cfg == RunConfig() and cfg.validate() is cfg
