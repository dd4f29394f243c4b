"""Command-line front end.

Every subcommand writes CSV (or a short text report) to ``--out``; ``-``
means standard output. Exit codes: 0 success, 2 invalid arguments,
1 numerical failure or a failed check.
"""

from __future__ import annotations

import argparse
import cmath
import io
import math
import os
import sys
import tempfile

import numpy as np

from .circle import CircleParams, CircleSuperposition, angular_eigenvalue, weyl_check_circle
from .errors import InputError, MomentumError
from .halfline import (
    ExtensionLambda,
    MomentumSuperposition,
    standard_momentum_density_bound,
    standard_momentum_overlap_scattering,
    weyl_check_halfline,
)
from .interval import (
    BoundaryKind,
    IntervalParams,
    commutator_check_pR_V,
    interval_superposition,
    measurement_distribution,
    momentum_spectrum,
    sample_measurement,
)
from .lattice import LatticeConfig, continuum_convergence, lattice_momentum_spectrum
from .numerics import Grid


class UsageError(Exception):
    """Flag combination rejected before any computation."""


def fmt(x) -> str:
    return "{:.12g}".format(float(x))


def interval_with_theta(length: float, theta: float) -> IntervalParams:
    """Interval with sigma = 1 at x = 0 and sigma_L = exp(-i theta), so that arg(sigma sigma_L*) = theta."""
    lam_l = ExtensionLambda.from_sigma(cmath.exp(-1j * theta))
    return IntervalParams(length, 1.0, ExtensionLambda(0.0), lam_l)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _check_common(args) -> None:
    if hasattr(args, "L"):
        _require(math.isfinite(args.L) and args.L > 0, "--L must be positive")
    if getattr(args, "theta", None) is not None:
        _require(math.isfinite(args.theta), "--theta must be finite")


def _check_level(bc: str, l: int) -> None:
    if bc == "dirichlet":
        _require(l >= 1, "Dirichlet levels start at l = 1")
    else:
        _require(l >= 0, "Neumann levels start at l = 0")


def cmd_momdist(args) -> str:
    _check_common(args)
    _check_level(args.bc, args.l)
    _require(args.nmin <= args.nmax, "--nmin must not exceed --nmax")
    p = interval_with_theta(args.L, args.theta)
    dist = measurement_distribution(p, BoundaryKind(args.bc), args.l, (args.nmin, args.nmax))
    lines = ["n,k,probability"]
    lines += [f"{n},{fmt(k)},{fmt(pr)}" for n, k, pr in zip(dist.ns, dist.ks, dist.probabilities)]
    lines.append(f"# sum={fmt(dist.total)} tail={fmt(dist.tail_bound)}")
    return "\n".join(lines) + "\n"


def cmd_spectrum(args) -> str:
    _check_common(args)
    if args.count is not None:
        _require(args.count >= 1, "--count must be positive")
    lines = ["index,value"]
    if args.mode == "interval":
        count = 10 if args.count is None else args.count
        start = 1 if args.nstart is None else args.nstart
        p = interval_with_theta(args.L, args.theta)
        # k_n directly from the flux phase, without the round trip through sigma
        for n in range(start, start + count):
            lines.append(f"{n},{fmt(math.pi / args.L * (n + args.theta / (2 * math.pi)))}")
        del p
    elif args.mode == "circle":
        count = 10 if args.count is None else args.count
        start = 0 if args.nstart is None else args.nstart
        c = CircleParams.from_flux(args.theta)
        for n in range(start, start + count):
            lines.append(f"{n},{fmt(angular_eigenvalue(c, n))}")
    else:
        _require(args.N is not None and args.N >= 2, "lattice mode needs --N >= 2")
        cfg = LatticeConfig.on_interval(args.L, args.N, args.beta0, args.betaL)
        values, _ = lattice_momentum_spectrum(cfg, vectors=False)
        if args.count is not None:
            values = values[:args.count]
        lines += [f"{i},{fmt(v)}" for i, v in enumerate(values, start=1)]
    return "\n".join(lines) + "\n"


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be a comma-separated list of integers, got {text!r}")
    _require(len(sizes) >= 2, "--sizes needs at least two entries to fit an order")
    _require(all(n >= 2 for n in sizes), "lattice sizes must be >= 2")
    _require(all(b > a for a, b in zip(sizes, sizes[1:])), "--sizes must be increasing")
    return sizes


def cmd_converge(args) -> str:
    _check_common(args)
    sizes = _parse_sizes(args.sizes)
    _require(args.levels >= 1, "--levels must be positive")
    report = continuum_convergence(args.beta0, args.betaL, args.levels, sizes, args.L)
    header = ["level", "target", "slope", "intercept"] + [f"err_N{n}" for n in sizes]
    lines = [",".join(header)]
    for fit in report.levels:
        row = [str(fit.level), fmt(fit.target), fmt(fit.slope), fmt(fit.intercept)]
        row += [fmt(e) for e in fit.errors]
        lines.append(",".join(row))
    lines.append(f"# theta={fmt(report.theta)} L={fmt(report.length)}")
    for fit in report.levels:
        if fit.skipped:
            lines.append(f"# level {fit.level} skipped: {fit.note}")
    if any(n % 2 == 0 for n in sizes):
        lines.append("# even N: p_R levels obey the lattice condition with theta + pi")
    return "\n".join(lines) + "\n"


def cmd_sample(args) -> str:
    _check_common(args)
    _check_level(args.bc, args.l)
    _require(args.shots >= 1, "--shots must be positive")
    _require(0 <= args.seed < 2 ** 64, "--seed must be an unsigned 64-bit integer")
    _require(args.nmin <= args.nmax, "--nmin must not exceed --nmax")
    p = interval_with_theta(args.L, args.theta)
    dist = measurement_distribution(p, BoundaryKind(args.bc), args.l, (args.nmin, args.nmax))
    result = sample_measurement(dist, args.shots, args.seed)
    lines = ["n,count,frequency,probability"]
    for n, c, f, pr in zip(result.ns, result.counts, result.frequencies, dist.probabilities):
        lines.append(f"{n},{c},{fmt(f)},{fmt(pr)}")
    lines.append(f"# shots={args.shots} seed={args.seed} last={result.post_measurement_state()}")
    return "\n".join(lines) + "\n"


def cmd_halfline(args) -> str:
    _require(math.isfinite(args.gamma), "--gamma must be finite")
    _require(args.kmax > 0 and args.dk > 0, "--kmax and --dk must be positive")
    if args.bound:
        _require(args.gamma < 0, "a bound state needs gamma < 0")
    else:
        _require(args.p is not None and args.p >= 0, "scattering densities need --p >= 0")
        _require(not (args.gamma == 0 and args.p == 0), "gamma = p = 0 is singular")
    steps = int(round(args.kmax / args.dk))
    ks = np.arange(-steps, steps + 1) * args.dk
    if args.bound:
        dens = standard_momentum_density_bound(args.gamma, ks)
    else:
        amp = standard_momentum_overlap_scattering(args.gamma, args.p, ks, args.epsilon)
        dens = np.abs(amp) ** 2 / (2 * math.pi)
    lines = ["k,density"] + [f"{fmt(k)},{fmt(d)}" for k, d in zip(ks, dens)]
    return "\n".join(lines) + "\n"


def cmd_weylcheck(args):
    _require(args.samples >= 1, "--samples must be positive")
    _require(args.tol >= 0, "--tol must be non-negative")
    rng = np.random.default_rng(args.seed)
    terms = 4
    if args.mode == "halfline":
        sigma = ExtensionLambda(args.beta).sigma
        samples = [MomentumSuperposition(rng.uniform(-5, 5, terms),
                                         rng.normal(size=terms) + 1j * rng.normal(size=terms), sigma)
                   for _ in range(args.samples)]
        dev = weyl_check_halfline(args.a, args.q, samples, Grid.spanning(0.0, 10.0, 801))
        what = f"halfline a={fmt(args.a)} q={fmt(args.q)}"
    elif args.mode == "interval":
        p = interval_with_theta(args.L, args.theta)
        samples = [interval_superposition(p, rng.integers(-10, 11, terms),
                                          rng.normal(size=terms) + 1j * rng.normal(size=terms))
                   for _ in range(args.samples)]
        dev = commutator_check_pR_V(p, samples, a=args.a)
        what = f"interval a={fmt(args.a)} q=pi/L"
    else:
        _require(-math.pi <= args.a < math.pi, "circle mode needs -pi <= a < pi")
        c = CircleParams.from_flux(args.theta)
        samples = [CircleSuperposition(rng.integers(-10, 11, terms),
                                       rng.normal(size=terms) + 1j * rng.normal(size=terms), c.theta)
                   for _ in range(args.samples)]
        dev = weyl_check_circle(c, args.a, samples)
        what = f"circle alpha={fmt(args.a)}"
    ok = dev <= args.tol
    text = f"{'PASS' if ok else 'FAIL'} {what} samples={args.samples} max_deviation={dev:.3e} tol={args.tol:.3e}\n"
    return text, (0 if ok else 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfadjoint-momentum",
                                     description="Self-adjoint momentum on the half-line, interval and circle.")
    sub = parser.add_subparsers(dest="command", required=True)

    def out_flag(p):
        p.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = sub.add_parser("momdist", help="momentum measurement distribution of an energy eigenstate")
    p.add_argument("--bc", choices=["neumann", "dirichlet"], required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    out_flag(p)
    p.set_defaults(func=cmd_momdist)

    p = sub.add_parser("spectrum", help="momentum or angular-momentum spectrum")
    p.add_argument("--mode", choices=["interval", "circle", "lattice"], required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--nstart", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--betaL", type=float, default=0.0)
    out_flag(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("converge", help="lattice continuum-limit convergence orders")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--sizes", default="64,128,256,512")
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--betaL", type=float, default=0.0)
    p.add_argument("--L", type=float, default=1.0)
    out_flag(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sample", help="sample momentum measurement outcomes")
    p.add_argument("--bc", choices=["neumann", "dirichlet"], required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--nmin", type=int, default=-100)
    p.add_argument("--nmax", type=int, default=100)
    out_flag(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("halfline", help="standard-momentum densities on the half-line")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--bound", action="store_true")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--dk", type=float, default=0.5)
    out_flag(p)
    p.set_defaults(func=cmd_halfline)

    p = sub.add_parser("weylcheck", help="check Weyl relations on random superpositions")
    p.add_argument("--mode", choices=["halfline", "interval", "circle"], required=True)
    p.add_argument("--a", type=float, default=0.3)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.0)
    out_flag(p)
    p.set_defaults(func=cmd_weylcheck)
    return parser


def write_output(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with io.open(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (UsageError, InputError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MomentumError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    text, code = result if isinstance(result, tuple) else (result, 0)
    try:
        write_output(text, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
