import shlex
from pathlib import Path

from aever.cli import main
from aever.solver import bundled_solver_command

from conftest import BENCH_DIR

VALID_FILE = str(BENCH_DIR / "gni_flipcoin.ae")
INVALID_FILE = str(BENCH_DIR / "gni_flipcoin_leak.ae")

BUNDLED = shlex.join(bundled_solver_command())


def test_cli_agreeing_file_exits_zero(capsys):
    assert main([VALID_FILE]) == 0
    out = capsys.readouterr().out
    assert "verdict: valid" in out
    assert "expected: valid (agrees)" in out


def test_cli_prints_model_for_invalid(capsys):
    assert main([INVALID_FILE]) == 0  # verdict agrees with the annotation
    out = capsys.readouterr().out
    assert "verdict: invalid" in out
    assert "falsifying model:" in out
    assert "run!1!high" in out


def test_cli_mismatch_exits_one(tmp_path, capsys):
    text = Path(VALID_FILE).read_text().replace("expected: valid;", "expected: invalid;")
    f = tmp_path / "m.ae"
    f.write_text(text)
    assert main([str(f)]) == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_cli_unknown_exits_two(tmp_path, capsys):
    # a square makes the goal nonlinear, which the bundled solver declines
    f = tmp_path / "sq.ae"
    f.write_text(
        """
        exists: p[1];
        pre: true;
        post: (= p!1!r 4);
        prog p(s, r):
          r := s * s;
        endp
        """
    )
    assert main([str(f), "--solver", BUNDLED]) == 2
    out = capsys.readouterr().out
    assert "verdict: unknown" in out


def test_cli_tool_errors_exit_three(tmp_path, capsys):
    assert main([str(tmp_path / "missing.ae")]) == 3
    bad = tmp_path / "bad.ae"
    bad.write_text("prog p(:")
    assert main([str(bad)]) == 3
    assert main([]) == 3


def test_cli_dump_vcs(tmp_path):
    target = tmp_path / "vc.smt2"
    assert main([VALID_FILE, "--dump-vcs", str(target)]) == 0
    assert target.read_text().startswith("(=>")


def test_cli_oracle_check(capsys):
    assert main([VALID_FILE, "--oracle-check", "--domain", "0..1", "--fuel", "12"]) == 0
    assert "oracle: no counterexample" in capsys.readouterr().out


def test_cli_oracle_error_exits_three(tmp_path, capsys):
    # the contract demands a return the oracle's domain cannot supply
    f = tmp_path / "empty_post.ae"
    f.write_text(
        """
        exists: p[1];
        pre: true;
        post: true;
        especs:
          f() { pre: true; post: (= ret! 50); }
        prog p(x):
          x := call f();
        endp
        """
    )
    assert main([str(f), "--oracle-check", "--domain", "0..1"]) == 3
    assert "oracle error:" in capsys.readouterr().err


def test_cli_bench(capsys):
    assert main(["--bench", str(BENCH_DIR)]) == 0
    out = capsys.readouterr().out
    assert "Verified" in out

    assert main(["--bench", str(BENCH_DIR), "--csv"]) == 0
    assert "name,seconds" in capsys.readouterr().out
