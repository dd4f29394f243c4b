import math
import subprocess
import sys

import pytest


def run(*args):
    proc = subprocess.run([sys.executable, "-m", "selfadjoint_momentum", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def rows(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_momdist_neumann_l7():
    code, out, _ = run("momdist", "--bc", "neumann", "--l", "7", "--L", "1", "--nmin", "-10", "--nmax", "10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,k,probability"
    assert "7,21.9911485751,0.25" in lines
    assert lines[-1].startswith("# sum=") and " tail=" in lines[-1]
    ns = [int(r.split(",")[0]) for r in rows(out)[1:]]
    assert ns == list(range(-10, 11))
    total = float(lines[-1].split("sum=")[1].split()[0]) + float(lines[-1].split("tail=")[1])
    assert abs(total - 1) < 1e-11


def test_momdist_neumann_l0():
    code, out, _ = run("momdist", "--bc", "neumann", "--l", "0", "--nmin", "-3", "--nmax", "3")
    assert code == 0 and "0,0,0.5" in out.splitlines()


@pytest.mark.parametrize("args", [
    ("--bc", "dirichlet", "--l", "0", "--nmin", "-3", "--nmax", "3"),
    ("--bc", "neumann", "--l", "1", "--nmin", "3", "--nmax", "-3"),
    ("--bc", "neumann", "--l", "1", "--nmin", "-3", "--nmax", "3", "--L", "0"),
    ("--bc", "robin", "--l", "1", "--nmin", "-3", "--nmax", "3"),
])
def test_momdist_validation(args):
    code, out, err = run("momdist", *args)
    assert code == 2 and out == ""


def test_momdist_theta():
    code, out, _ = run("momdist", "--bc", "dirichlet", "--l", "2", "--nmin", "-5", "--nmax", "5", "--theta", "1.0")
    assert code == 0
    k0 = float(rows(out)[1 + 5].split(",")[1])
    assert abs(k0 - 0.5) < 1e-11


def test_spectrum_interval():
    code, out, _ = run("spectrum", "--mode", "interval", "--L", "1", "--theta", "0", "--count", "3")
    assert code == 0
    vals = [float(r.split(",")[1]) for r in rows(out)[1:]]
    assert [int(r.split(",")[0]) for r in rows(out)[1:]] == [1, 2, 3]
    assert all(abs(v - math.pi * n) < 1e-10 for n, v in zip((1, 2, 3), vals))


def test_spectrum_circle():
    code, out, _ = run("spectrum", "--mode", "circle", "--theta", str(math.pi), "--count", "2")
    assert code == 0 and rows(out)[1] == "0,0.5"


def test_spectrum_lattice():
    code, out, _ = run("spectrum", "--mode", "lattice", "--N", "3", "--L", "3")
    assert code == 0
    vals = [float(r.split(",")[1]) for r in rows(out)[1:]]
    assert len(vals) == 3
    assert max(abs(a - b) for a, b in zip(vals, [-0.70710678, 0, 0.70710678])) < 1e-8


def test_spectrum_lattice_needs_n():
    assert run("spectrum", "--mode", "lattice")[0] == 2


def test_converge_report_format():
    code, out, _ = run("converge", "--levels", "3", "--sizes", "65,129,257")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split(",")[:3] == ["level", "target", "slope"]
    assert [int(r.split(",")[0]) for r in rows(out)[1:]] == [1, 2, 3]
    first_comment = next(i for i, line in enumerate(lines) if line.startswith("#"))
    assert all(line.startswith("#") for line in lines[first_comment:])


def test_converge_default_slope():
    code, out, _ = run("converge")
    assert code == 0
    slopes = [float(r.split(",")[2]) for r in rows(out)[1:]]
    assert all(abs(s - 2.0) <= 0.1 for s in slopes)


def test_converge_single_size():
    assert run("converge", "--sizes", "64")[0] == 2


def test_sample_reproducible_and_binomial():
    args = ("sample", "--bc", "neumann", "--l", "7", "--shots", "100000", "--seed", "42",
            "--nmin", "-30", "--nmax", "30")
    code, a, _ = run(*args)
    code2, b, _ = run(*args)
    assert code == code2 == 0 and a == b
    for r in rows(a)[1:]:
        n, count, freq, prob = r.split(",")
        p = float(prob)
        assert abs(float(freq) - p) <= 5 * math.sqrt(p * (1 - p) / 1e5) + 1e-12


@pytest.mark.parametrize("extra", [("--shots", "0"), ("--shots", "10", "--seed", "-1"),
                                   ("--shots", "10", "--seed", str(2 ** 64))])
def test_sample_validation(extra):
    assert run("sample", "--bc", "neumann", "--l", "1", *extra)[0] == 2


def test_halfline_bound_density():
    code, out, _ = run("halfline", "--gamma", "-1", "--bound", "--kmax", "3", "--dk", "0.25")
    assert code == 0
    table = {float(r.split(",")[0]): r.split(",")[1] for r in rows(out)[1:]}
    assert table[0.0] == "0.318309886184"
    assert all(table[k] == table[-k] for k in table)


def test_halfline_no_bound_state():
    assert run("halfline", "--gamma", "1", "--bound")[0] == 2


def test_weylcheck_pass_fail():
    code, out, _ = run("weylcheck", "--mode", "halfline", "--a", "0.3", "--q", "2.0", "--samples", "16")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run("weylcheck", "--mode", "halfline", "--tol", "1e-30", "--samples", "4")
    assert code == 1 and out.startswith("FAIL") and "max_deviation=" in out
    code, out, _ = run("weylcheck", "--mode", "halfline", "--a", "0", "--samples", "4")
    assert code == 0
    assert float(out.split("max_deviation=")[1].split()[0]) <= 1e-12


@pytest.mark.parametrize("mode", ["interval", "circle"])
def test_weylcheck_modes(mode):
    code, out, _ = run("weylcheck", "--mode", mode, "--samples", "64")
    assert code == 0 and out.startswith("PASS")


def test_out_file_matches_stdout(tmp_path):
    target = tmp_path / "dist.csv"
    args = ("momdist", "--bc", "dirichlet", "--l", "3", "--nmin", "-6", "--nmax", "6")
    code, out, _ = run(*args, "--out", str(target))
    assert code == 0 and out == ""
    data = target.read_bytes()
    assert b"\r" not in data
    assert data.decode() == run(*args, "--out", "-")[1]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["dist.csv"]


def test_bad_flag_exit_code():
    assert run("momdist", "--bc", "neumann")[0] == 2
    assert run("nosuchcommand")[0] == 2
