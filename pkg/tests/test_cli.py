import csv
import io

import pytest

from coopvanet.cli import emit_csv, main, parse_args


def test_parse_eval():
    cfg = parse_args("eval --scheme mrc --model lsv --lambda 0.1 --p 0.05 --theta 1 --sd 200 --relay-mid".split())
    assert cfg.command == "eval"
    assert cfg.inline["scheme"] == "mrc" and cfg.inline["lam"] == 0.1 and cfg.inline["relay_mid"]


def test_parse_sweep_preset():
    cfg = parse_args("sweep --preset fig3 --out fig3.csv --seed 42".split())
    assert cfg.preset == "fig3" and cfg.out == "fig3.csv" and cfg.seed == 42 and not cfg.inline


def test_parse_validate():
    cfg = parse_args("validate --grid default --trials 100000 --seed 7".split())
    assert cfg.command == "validate" and cfg.trials == 100000 and cfg.seed == 7


@pytest.mark.parametrize("argv", [
    "eval --bogus",
    "eval --lambda",
    "sweep --preset fig3 --seed 1 --lambda 0.1",
    "sweep --preset fig3",
    "eval --scheme sc --lambda 0.1",
    "eval --noise loud",
    "eval --theta 1 --rate 0.5",
    "validate --trials 0 --seed 1",
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv.split())
    assert exc.value.code == 2


def test_noise_flag():
    assert parse_args(["eval", "--noise", "off"]).noise == "off"
    assert parse_args(["eval", "--noise", "-97"]).noise == "-97"


def test_env_thread_default(monkeypatch):
    monkeypatch.setenv("COOPVANET_THREADS", "3")
    assert parse_args(["sweep", "--preset", "fig4"]).workers == 3


def test_emit_empty(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv([], str(p), ["a", "b"])
    assert p.read_bytes() == b"a,b\n"


def test_emit_roundtrip(tmp_path):
    p = tmp_path / "r.csv"
    rows = [{"x": 1 / 3, "name": "mrc", "ok": True}, {"x": 1e-17, "name": "sc", "ok": False}]
    emit_csv(rows, str(p))
    raw = p.read_bytes()
    assert b"\r\n" not in raw
    back = list(csv.DictReader(io.StringIO(raw.decode("utf-8"))))
    assert float(back[0]["x"]) == pytest.approx(1 / 3, rel=1e-11)
    assert float(back[1]["x"]) == pytest.approx(1e-17, rel=1e-11)
    assert back[0]["x"] == "0.333333333333"
    assert [r["name"] for r in back] == ["mrc", "sc"]


def test_main_eval(capsys):
    assert main("eval --scheme mrc --model lsv --lambda 0.1 --p 0.05 --theta 1 --sd 200 --relay-mid".split()) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split(",")[-1] == "op_analytic"
    assert 0 < float(out[1].split(",")[-1]) < 1


def test_main_sweep_file(tmp_path):
    p = tmp_path / "fig4.csv"
    assert main(["sweep", "--preset", "fig4", "--out", str(p)]) == 0
    rows = list(csv.DictReader(p.open()))
    assert rows[0].keys() == {"lambda", "scheme", "model", "op_analytic"}
    assert len(rows) == 11 * 4


def test_main_inline_grid(capsys):
    assert main("sweep --lambda 0.01,0.1 --scheme sc --model lsv --relay-mid".split()) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("lambda,") and len(lines) == 3


def test_main_numeric_error_exit_1(capsys):
    assert main("sweep --lambda 0.05 --sd 0 --scheme direct".split()) == 1


def test_main_io_error():
    assert main(["sweep", "--preset", "fig2a", "--out", "/nonexistent/dir/x.csv"]) == 1


def test_seed_determines_output(capsys):
    argv = "eval --scheme mrc --model hsv --lambda 0.05 --p 0.1 --theta 3 --relay-mid --mc --trials 3000 --seed 5".split()
    main(argv)
    a = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == a
