import subprocess
import sys

import pytest

from edt0l.cli import main


def run(*args):
    return subprocess.run([sys.executable, "-m", "edt0l", *args], capture_output=True, text=True)


def test_enumerate_fixture(capsys):
    assert main(["enumerate", "--grammar", "example33", "--max-len", "16"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [len(x.split()) for x in lines] == [1, 4, 9, 16]


def test_classify(capsys):
    assert main(["classify", "--grammar", "example33"]) == 0
    assert capsys.readouterr().out.strip() == "infinite"


def test_solve_then_verify(tmp_path, capsys):
    out = tmp_path / "sol"
    assert main(["solve", "--system", "xa_eq_b", "--target", "shortlex", "--out", str(out)]) == 0
    assert main(["enumerate", "--grammar", str(out.with_suffix(".grammar")), "--max-len", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "b a^-1"
    assert main(["verify", "--system", "xa_eq_b", "--grammar", str(out.with_suffix(".grammar"))]) == 0


def test_verify_detects_mismatch(capsys):
    assert main(["verify", "--system", "xa_eq_b", "--grammar", "example33"]) == 1


def test_oracle_and_bundle_gen(tmp_path, capsys):
    assert main(["oracle", "--system", "abx_neq", "--max-len", "2"]) == 0
    assert capsys.readouterr().out.strip() == "b^-1 a^-1"
    assert main(["bundle-gen", "--rank", "1", "--out", str(tmp_path / "f1.bundle")]) == 0
    assert (tmp_path / "f1.bundle").read_text().startswith("name: free1")


def test_closure_command(tmp_path):
    out = tmp_path / "u.grammar"
    assert main(["closure", "union", "--grammar", "example33", "--grammar", "example33", "--out", str(out)]) == 0
    assert main(["classify", "--grammar", str(out)]) == 0


def test_errors_exit_nonzero():
    r = run("enumerate", "--grammar", "missing", "--max-len", "2")
    assert r.returncode == 2 and "error" in r.stderr
    r = run("solve", "--system", "xa_eq_b", "--backend", "structural", "--out", "/tmp/never")
    assert r.returncode == 2


def test_output_is_stable():
    a = run("enumerate", "--grammar", "example33", "--max-len", "9")
    b = run("enumerate", "--grammar", "example33", "--max-len", "9")
    assert a.stdout == b.stdout and a.returncode == 0
