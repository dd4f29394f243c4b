"""Momentum and energy on the interval [0, L].

With boundary parameters lambda at x = 0 and lambda_L at x = L the momentum
p_R is self-adjoint and its spectrum is k_n = (pi/L)(n + theta/2pi), where
exp(i theta) = sigma sigma_L*. This module builds that spectrum and its
eigenfunctions, the Neumann/Dirichlet/Robin energy eigenstates, the momentum
measurement distributions of those states, the conveyor-belt translation
V_a, the flux (gauge) view of theta, sampling of measurement outcomes and
spectral time evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import polygamma, psi as digamma

from .errors import (
    DomainError,
    InputError,
    RepresentationError,
    SolverError,
    TruncationError,
)
from .halfline import (
    MINUS,
    PLUS,
    ExtensionLambda,
    HalfLineStateLabel,
    MomentumSuperposition,
    TwoComponentWave,
    vtilde_apply,
)
from .numerics import Grid, find_root, integrate, integrate_oscillatory
from .prng import Xoshiro256StarStar

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IntervalParams:
    """Interval length, mass and the boundary parameters at both ends.

    Any real ``beta`` is accepted at either end.
    """

    length: float = 1.0
    mass: float = 1.0
    lambda0: ExtensionLambda = ExtensionLambda(0.0)
    lambdaL: ExtensionLambda = ExtensionLambda(0.0)

    def __post_init__(self):
        if not self.length > 0:
            raise InputError("length must be positive")
        if not self.mass > 0:
            raise InputError("mass must be positive")

    @property
    def sigma(self) -> complex:
        return self.lambda0.sigma

    @property
    def sigmaL(self) -> complex:
        return self.lambdaL.sigma

    @property
    def theta(self) -> float:
        return theta_from_lambdas(self)

    def grid(self, count: int = 4001) -> Grid:
        return Grid.spanning(0.0, self.length, count)


@dataclass(frozen=True)
class BoundaryKind:
    """Boundary condition of the energy eigenproblem.

    Robin means gamma0 psi(0) - psi'(0) = 0 and gammaL psi(L) + psi'(L) = 0,
    so both Neumann ends are gamma = 0 and negative gammas bind.
    """

    kind: str
    gamma0: float = 0.0
    gammaL: float = 0.0

    def __post_init__(self):
        if self.kind not in ("neumann", "dirichlet", "robin"):
            raise InputError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "robin" and not (math.isfinite(self.gamma0) and math.isfinite(self.gammaL)):
            raise InputError("Robin parameters must be finite")

    @classmethod
    def neumann(cls) -> "BoundaryKind":
        return cls("neumann")

    @classmethod
    def dirichlet(cls) -> "BoundaryKind":
        return cls("dirichlet")

    @classmethod
    def robin(cls, gamma0: float, gammaL: float | None = None) -> "BoundaryKind":
        return cls("robin", float(gamma0), float(gamma0 if gammaL is None else gammaL))


@dataclass(frozen=True)
class GeneralBoundary:
    """(Psi_o, Psi_o')(0) = e^{i eta} [[a, -b], [-c, d]] (Psi_e, Psi_e')(0).

    Self-adjointness of the doubled Hamiltonian needs real a, b, c, d with
    ad - bc = -1.
    """

    eta: float
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c + 1.0) > 1e-12:
            raise InputError("general boundary needs a*d - b*c = -1")

    def residual(self, psi_e0: complex, dpsi_e0: complex, psi_o0: complex, dpsi_o0: complex) -> float:
        ph = complex(math.cos(self.eta), math.sin(self.eta))
        r0 = psi_o0 - ph * (self.a * psi_e0 - self.b * dpsi_e0)
        r1 = dpsi_o0 - ph * (-self.c * psi_e0 + self.d * dpsi_e0)
        return max(abs(r0), abs(r1))

    def embeds_robin(self) -> bool:
        """True for e^{i eta} = 1, a = 1, b = 0, d = -1."""
        eta = math.remainder(self.eta, TWO_PI)
        return abs(eta) < 1e-12 and self.a == 1 and self.b == 0 and self.d == -1

    def robin_gamma(self) -> float:
        """gamma = -c/2 of the Robin condition on the P+ sector.

        The P- sector is Dirichlet. Other parameter sets have no embedding
        of the single-component problem and are only built on the lattice.
        """
        if not self.embeds_robin():
            raise InputError("only e^{i eta}=1, a=1, b=0, d=-1 embeds a Robin problem")
        return -self.c / 2.0


@dataclass(frozen=True)
class MeasurementDistribution:
    """Outcome table (n, k_n, P_n) of a momentum measurement.

    ``tail_bound`` is the probability outside the tabulated range.
    ``closed_form`` says whether the entries are exact formulas or quadrature.
    ``moment_diverges`` says whether sum k^2 P grows without bound.
    ``tail_fit`` holds envelope coefficients {m: c_m} of P ~ sum_m c_m/|k|^m keyed by
    (side, parity) when the distribution came from quadrature, and
    ``tail_moment`` is the matching estimate of sum k^2 P outside the table.
    """

    ns: np.ndarray
    ks: np.ndarray
    probabilities: np.ndarray
    tail_bound: float
    length: float
    theta: float = 0.0
    bc: str = ""
    l: int = 0
    closed_form: bool = False
    moment_diverges: bool = False
    tail_fit: dict = field(default_factory=dict)
    tail_moment: float = 0.0

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=np.int64)
        ks = np.asarray(self.ks, dtype=float)
        ps = np.asarray(self.probabilities, dtype=float)
        if not (ns.shape == ks.shape == ps.shape) or ns.ndim != 1 or ns.size == 0:
            raise InputError("ns, ks and probabilities must be equal-length 1-d arrays")
        if np.any(ps < 0):
            raise InputError("probabilities must be non-negative")
        if self.tail_bound < 0:
            raise InputError("tail bound must be non-negative")
        for name, arr in (("ns", ns), ("ks", ks), ("probabilities", ps)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def total(self) -> float:
        return math.fsum(self.probabilities)

    def probability(self, n: int) -> float:
        idx = np.searchsorted(self.ns, n)
        if idx < self.ns.size and self.ns[idx] == n:
            return float(self.probabilities[idx])
        raise KeyError(n)


@dataclass(frozen=True)
class GaugeField:
    """Vector potential e*A_x = charge_times_a - d(phase_profile)/dx.

    ``phase_profile`` is e*phi(x) of accumulated gauge transformations; it is
    kept as a function so the line integral of A is exact.
    """

    charge_times_a: float
    phase_profile: Callable[[np.ndarray], np.ndarray] | None = None

    def line_integral(self, length: float) -> float:
        """e * integral of A_x over [0, L]."""
        total = self.charge_times_a * length
        if self.phase_profile is not None:
            total -= float(self.phase_profile(length)) - float(self.phase_profile(0.0))
        return total


@dataclass(frozen=True)
class EnergyEigenstate:
    """Stationary state with ``profile`` the unit-norm single-component psi."""

    l: int
    energy: float
    wavenumber: complex
    profile: Callable[[np.ndarray], np.ndarray]
    wave: TwoComponentWave

    def __call__(self, x):
        return self.profile(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SecondMoment:
    """Sum of k^2 P with its analytic tail, or a divergence report."""

    value: float
    partial_sum: float
    tail: float
    diverges: bool
    growth_rate: float


@dataclass(frozen=True)
class SampleResult:
    """Histogram of measurement outcomes. ``outcomes[i]`` is shot i's n."""

    ns: np.ndarray
    counts: np.ndarray
    outcomes: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.outcomes.size

    def post_measurement_state(self, shot: int = -1) -> int:
        """Label n of the eigenstate phi_{k_n} the state collapsed to."""
        return int(self.outcomes[shot])


# --- momentum spectrum ------------------------------------------------------

def theta_from_lambdas(p: IntervalParams) -> float:
    """theta = arg(sigma sigma_L*) in [0, 2 pi)."""
    z = p.sigma * p.sigmaL.conjugate()
    theta = math.atan2(z.imag, z.real) % TWO_PI
    return 0.0 if theta >= TWO_PI else theta


def _n_values(n_range) -> np.ndarray:
    if isinstance(n_range, tuple) and len(n_range) == 2:
        return np.arange(int(n_range[0]), int(n_range[1]) + 1)
    ns = np.asarray(list(n_range), dtype=np.int64)
    if ns.ndim != 1:
        raise InputError("n range must be one-dimensional")
    return ns


def momentum_values(p: IntervalParams, ns) -> np.ndarray:
    return (math.pi / p.length) * (np.asarray(ns, dtype=float) + p.theta / TWO_PI)


def momentum_spectrum(p: IntervalParams, n_range) -> list[tuple[int, float]]:
    """[(n, k_n)] with k_n = (pi/L)(n + theta/2pi).

    ``n_range`` is an iterable of integers or an inclusive (nmin, nmax) pair.
    """
    ns = _n_values(n_range)
    return list(zip(ns.tolist(), momentum_values(p, ns).tolist()))


def momentum_eigenfunction_interval(p: IntervalParams, n: int, x):
    """(Psi_e, Psi_o) of phi_{k_n}, unit-normalized on [0, L]. Shape (2, ...)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > p.length):
        raise DomainError("x must lie in [0, L]")
    k = float(momentum_values(p, [n])[0])
    a = np.exp(1j * k * x)
    b = p.sigma * np.exp(-1j * k * x)
    return np.stack([a + b, a - b]) / (2.0 * math.sqrt(p.length))


def interval_superposition(p: IntervalParams, ns, coeffs) -> MomentumSuperposition:
    """sum_j c_j phi_{k_{n_j}} as an evaluable superposition."""
    return MomentumSuperposition(momentum_values(p, ns), np.asarray(coeffs, dtype=complex),
                                 p.sigma, 1.0 / (2.0 * math.sqrt(p.length)))


def _on_ladder(p: IntervalParams, s: MomentumSuperposition) -> bool:
    m = s.ks * p.length / math.pi - p.theta / TWO_PI
    return bool(np.all(np.abs(m - np.round(m)) < 1e-9)) and abs(s.sigma - p.sigma) < 1e-12


def commutator_check_pR_V(p: IntervalParams, samples: Iterable[MomentumSuperposition],
                          a: float = 0.0, grid: Grid | None = None) -> float:
    """Max deviation of [p_R, V~_{pi/L}] = (pi/L) V~_{pi/L} and of the Weyl form.

    p_R acts by k_n on eigencomponents. V~_{pi/L} moves n to n+1 when it
    acts first and is applied as the pointwise matrix otherwise. The Weyl
    form checked is V_a V~_{pi/L} = exp(i (pi/L) a) V~_{pi/L} V_a.
    """
    grid = grid or p.grid(801)
    q = math.pi / p.length
    worst = 0.0
    for s in samples:
        if not isinstance(s, MomentumSuperposition) or not _on_ladder(p, s):
            raise RepresentationError("samples must be finite superpositions of phi_{k_n}")
        shifted = s.boosted(q)
        p_after = MomentumSuperposition(shifted.ks, shifted.coeffs * shifted.ks, s.sigma, s.norm)
        p_before = MomentumSuperposition(s.ks, s.coeffs * s.ks, s.sigma, s.norm)
        commutator = p_after.sample(grid) - vtilde_apply(q, p_before.sample(grid))
        rhs = vtilde_apply(q, s.sample(grid)).scaled(q)
        worst = max(worst, (commutator - rhs).max_abs())
        left = shifted.translated(a).sample(grid)
        right = vtilde_apply(q, s.translated(a).sample(grid)).scaled(np.exp(1j * q * a))
        worst = max(worst, (left - right).max_abs())
    return worst


def va_action_interval(p: IntervalParams, a: float, state: HalfLineStateLabel) -> HalfLineStateLabel:
    """V_a = exp(i p_R a) on a position label in [0, L].

    + labels move left and - labels move right; at x = 0 they swap sector
    with phase sigma (sigma*), at x = L with sigma_L (sigma_L*).
    """
    L = p.length
    if not -L <= a < L:
        raise InputError(f"a must lie in [-L, L), got {a}")
    if not 0 <= state.x <= L:
        raise DomainError("label must lie in [0, L]")
    ph = state.phase
    if state.sign == PLUS:
        y = state.x - a
        if y >= L:
            return HalfLineStateLabel(2 * L - y, MINUS, ph * p.sigmaL)
        if y >= 0:
            return HalfLineStateLabel(y, PLUS, ph)
        return HalfLineStateLabel(-y, MINUS, ph * p.sigma)
    y = state.x + a
    if y >= L:
        return HalfLineStateLabel(2 * L - y, PLUS, ph * p.sigmaL.conjugate())
    if y >= 0:
        return HalfLineStateLabel(y, MINUS, ph)
    return HalfLineStateLabel(-y, PLUS, ph * p.sigma.conjugate())


# --- energy eigenstates -----------------------------------------------------

def _robin_matching(g0: float, gL: float, L: float):
    """Matching functions for psi = cos kx + (g0/k) sin kx and its cosh form.

    Both are divided by k (or kappa) and share the value at 0, so the
    negative- and positive-energy scans join continuously.
    """
    c = g0 + gL + g0 * gL * L

    def positive(k):
        return (g0 + gL) * math.cos(k * L) + (g0 * gL - k * k) * L * float(np.sinc(k * L / math.pi))

    def negative(kappa):
        if kappa == 0:
            return c
        return (g0 + gL) + (g0 * gL + kappa * kappa) * math.tanh(kappa * L) / kappa

    return c, positive, negative


def _scan_roots(f, lo: float, hi: float, steps: int) -> list[float]:
    xs = np.linspace(lo, hi, steps + 1)
    vals = [f(x) for x in xs]
    roots = []
    for i in range(steps):
        a, b = vals[i], vals[i + 1]
        if i > 0 and a == 0:
            roots.append(float(xs[i]))
        elif a * b < 0:
            roots.append(find_root(f, (xs[i], xs[i + 1]), tol=1e-14))
    return roots


def robin_levels(bc: BoundaryKind, L: float, count: int) -> list[tuple[str, float]]:
    """Lowest ``count`` Robin levels as ('kappa', kappa), ('zero', 0) or ('k', k)."""
    g0, gL = bc.gamma0, bc.gammaL
    c, positive, negative = _robin_matching(g0, gL, L)
    gmax = max(abs(g0), abs(gL))
    kappa_max = 2 * gmax + 2 * math.sqrt(gmax / L) + 1.0 / L
    levels = [("kappa", r) for r in sorted(_scan_roots(negative, 0.0, kappa_max, 4096), reverse=True)]
    levels = [lv for lv in levels if lv[1] > 0]
    if c == 0:
        levels.append(("zero", 0.0))
    step = math.pi / (64 * L)
    lo = 0.0
    while len(levels) < count:
        hi = lo + 64 * 8 * step
        levels.extend(("k", r) for r in _scan_roots(positive, lo, hi, 512) if r > 0)
        lo = hi
        if lo > 1e6 / L:
            raise SolverError("Robin levels could not be bracketed")
    return levels[:count]


def _robin_profile(g0: float, L: float, kind: str, w: float):
    if kind == "zero":
        norm = math.sqrt(L + g0 * L ** 2 + g0 ** 2 * L ** 3 / 3)
        return (lambda x: (1 + g0 * x) / norm), 0.0
    g = g0 / w
    if kind == "k":
        n2 = 0.5 * L * (1 + g * g) + (1 - g * g) * math.sin(2 * w * L) / (4 * w) \
            + g * (1 - math.cos(2 * w * L)) / (2 * w)
        norm = math.sqrt(n2)
        return (lambda x: (np.cos(w * x) + g * np.sin(w * x)) / norm), w * w
    n2 = 0.5 * L * (1 - g * g) + (1 + g * g) * math.sinh(2 * w * L) / (4 * w) \
        + g * (math.cosh(2 * w * L) - 1) / (2 * w)
    norm = math.sqrt(n2)
    return (lambda x: (np.cosh(w * x) + g * np.sinh(w * x)) / norm), -w * w


def energy_eigenstate(p: IntervalParams, bc: BoundaryKind, l: int, grid: Grid | None = None) -> EnergyEigenstate:
    """l-th stationary state of the free particle embedded as (psi, psi)/sqrt 2.

    Neumann counts from l = 0, Dirichlet from l = 1. Robin states are indexed
    from l = 0 in order of increasing energy, bound states first.
    """
    L, m = p.length, p.mass
    grid = grid or p.grid()
    if int(l) != l:
        raise IndexError("l must be an integer")
    l = int(l)
    if bc.kind == "neumann":
        if l < 0:
            raise IndexError("Neumann levels start at l = 0")
        w = math.pi * l / L
        if l == 0:
            profile = lambda x: np.full(np.shape(x), 1.0 / math.sqrt(L))
        else:
            profile = lambda x: math.sqrt(2.0 / L) * np.cos(w * x)
        k2 = w * w
    elif bc.kind == "dirichlet":
        if l < 1:
            raise IndexError("Dirichlet levels start at l = 1")
        w = math.pi * l / L
        profile = lambda x: math.sqrt(2.0 / L) * np.sin(w * x)
        k2 = w * w
    else:
        if l < 0:
            raise IndexError("Robin levels start at l = 0")
        kind, w = robin_levels(bc, L, l + 1)[l]
        profile, k2 = _robin_profile(bc.gamma0, L, kind, w)
        if kind == "kappa":
            w = 1j * w
    psi = profile(grid.points) / math.sqrt(2)
    wave = TwoComponentWave(grid, psi, psi)
    return EnergyEigenstate(l, k2 / (2 * m), w, profile, wave)


def pR_expectation(wave: TwoComponentWave) -> complex:
    """<Psi| -i sigma_1 d/dx |Psi> with second-order differences."""
    h = wave.grid.dx
    de = np.gradient(wave.even, h, edge_order=2)
    do = np.gradient(wave.odd, h, edge_order=2)
    return complex(integrate(-1j * (np.conj(wave.even) * do + np.conj(wave.odd) * de), wave.grid))


# --- measurement distributions ------------------------------------------------

def _closed_form_probabilities(kind: str, l: int, ns: np.ndarray) -> np.ndarray:
    ns = ns.astype(np.int64)
    out = np.zeros(ns.shape)
    allowed = (ns + l) % 2 == 1
    n = ns[allowed].astype(float)
    if kind == "neumann" and l == 0:
        out[ns == 0] = 0.5
        out[allowed] = 2.0 / (math.pi ** 2 * n ** 2)
        return out
    out[np.abs(ns) == l] = 0.25
    num = 4.0 * n ** 2 if kind == "neumann" else 4.0 * l ** 2
    out[allowed] = num / (math.pi ** 2 * (l * l - n ** 2) ** 2)
    return out


def _closed_form_tail_from(kind: str, l: int, m0: int) -> float:
    """Sum of the closed-form P(m) over all m >= m0."""
    cut = max(m0, l + 1)
    explicit = np.arange(m0, cut)
    total = math.fsum(_closed_form_probabilities(kind, l, explicit)) if explicit.size else 0.0
    start = cut if (cut + l) % 2 == 1 else cut + 1
    pi2 = math.pi ** 2
    if kind == "neumann" and l == 0:
        return total + (2.0 / pi2) * 0.25 * float(polygamma(1, start / 2.0))
    a, b = (start - l) / 2.0, (start + l) / 2.0
    squares = 0.25 * (float(polygamma(1, a)) + float(polygamma(1, b)))
    # sum over the class of 1/(n-l) - 1/(n+l), times 1/(2l), gives sum 1/(n^2 - l^2)
    recip = 0.5 * (float(digamma(b)) - float(digamma(a))) / (2.0 * l)
    if kind == "neumann":
        body = 0.25 * squares + 0.5 * recip
        return total + (4.0 / pi2) * body
    body = 0.25 * squares - 0.5 * recip
    return total + (4.0 / pi2) * body


def closed_form_tail(kind: str, l: int, nmin: int, nmax: int) -> float:
    """Exact probability of outcomes outside [nmin, nmax]."""
    # P is even in n, so the lower tail n <= nmin - 1 is the sum over m >= 1 - nmin
    return _closed_form_tail_from(kind, l, nmax + 1) + _closed_form_tail_from(kind, l, 1 - nmin)


def overlap_amplitudes(p: IntervalParams, state: EnergyEigenstate, ks) -> np.ndarray:
    """<phi_k|Psi+> = (1/sqrt(2L)) integral of exp(-ikx) psi(x), by Filon quadrature."""
    w = state.wave
    return integrate_oscillatory(w.even + w.odd, w.grid, ks) / (2.0 * math.sqrt(p.length))


def _is_zero_theta(theta: float) -> bool:
    return min(theta, TWO_PI - theta) < 1e-12


_ENVELOPE_POWERS = (2, 3, 4, 5, 6)
_FIT_REACH = 400


def _fit_envelope(ks: np.ndarray, ps: np.ndarray, k_state: float = 0.0) -> dict:
    """Least-squares fit P ~ sum_m c_m/|k|^m over the last decade in |k|.

    Odd powers appear when psi' does not vanish at the walls. Momenta below
    three times the state's own wavenumber are kept out of the fit.
    """
    kk = np.abs(ks)
    kmax = kk.max()
    sel = kk >= max(kmax / 10, 3 * k_state)
    powers = _ENVELOPE_POWERS
    if sel.sum() < 2 * len(powers):
        sel = np.ones_like(sel)
        powers = powers[:max(1, int(sel.sum()) // 2)]
    u = kmax / kk[sel]
    design = np.stack([u ** m for m in powers], axis=1)
    coef, *_ = np.linalg.lstsq(design, ps[sel], rcond=None)
    return {m: float(c) * kmax ** m for m, c in zip(powers, coef)}


def _inverse_power_sum(power: int, k0: float, L: float) -> float:
    """Sum of 1/k^power over k = k0 + 2 pi j/L, j >= 0, for power >= 2."""
    z = k0 * L / TWO_PI
    sign = -1.0 if power % 2 else 1.0
    return sign * (L / TWO_PI) ** power * float(polygamma(power - 1, z)) / math.factorial(power - 1)


def _envelope_tail(coeffs: dict, k0: float, L: float) -> tuple[float, float]:
    """Tail sums of P and of k^2 P for the envelope sum_m c_m/|k|^m, from k0 on.

    The moment sum keeps only the powers m >= 4 for which it converges.
    """
    prob = sum(c * _inverse_power_sum(m, k0, L) for m, c in coeffs.items())
    moment = sum(c * _inverse_power_sum(m - 2, k0, L) for m, c in coeffs.items() if m >= 4)
    return prob, moment


def measurement_distribution(p: IntervalParams, bc: BoundaryKind, l: int, n_range,
                             method: str = "auto", grid: Grid | None = None) -> MeasurementDistribution:
    """Momentum measurement table for the l-th energy eigenstate.

    With theta = 0 and Neumann or Dirichlet walls the entries are exact
    formulas (``method='auto'`` or ``'closed'``); otherwise, or with
    ``method='quadrature'``, they are Filon overlaps with phi_{k_n}. Outcomes
    that violate the parity rule are stored as exact zeros in the closed form.
    """
    if method not in ("auto", "closed", "quadrature"):
        raise InputError("method must be 'auto', 'closed' or 'quadrature'")
    ns = _n_values(n_range)
    if ns.size == 0:
        raise InputError("empty n range")
    ns = np.sort(ns)
    theta = p.theta
    ks = momentum_values(p, ns)
    closed_ok = _is_zero_theta(theta) and bc.kind in ("neumann", "dirichlet")
    if bc.kind == "dirichlet" and l < 1:
        raise IndexError("Dirichlet levels start at l = 1")
    if bc.kind == "neumann" and l < 0:
        raise IndexError("Neumann levels start at l = 0")
    if method == "closed" and not closed_ok:
        raise InputError("closed forms exist only for theta = 0 with Neumann or Dirichlet walls")
    contiguous = bool(np.all(np.diff(ns) == 1))
    if closed_ok and method != "quadrature":
        probs = _closed_form_probabilities(bc.kind, l, ns)
        tail = closed_form_tail(bc.kind, l, int(ns[0]), int(ns[-1])) if contiguous else max(0.0, 1.0 - math.fsum(probs))
        return MeasurementDistribution(ns, ks, probs, tail, p.length, theta, bc.kind, l,
                                       closed_form=True, moment_diverges=bc.kind == "neumann")
    state = energy_eigenstate(p, bc, l, grid)
    # the envelope fit needs a long table, so overlaps are taken on a wider
    # contiguous range and whatever is not reported goes into the tail
    reach = max(_FIT_REACH, 4 * (abs(l) + 1), int(np.abs(ns).max()))
    all_ns = np.arange(min(int(ns[0]), -reach), max(int(ns[-1]), reach) + 1)
    all_ks = momentum_values(p, all_ns)
    all_probs = np.abs(overlap_amplitudes(p, state, all_ks)) ** 2
    if bc.kind in ("neumann", "dirichlet") and _is_zero_theta(theta):
        forbidden = (all_ns + l) % 2 == 0
        forbidden &= np.abs(all_ns) != l
        if bc.kind == "neumann" and l == 0:
            forbidden &= all_ns != 0
        all_probs[forbidden] = 0.0
    shown = np.isin(all_ns, ns)
    probs = all_probs[np.searchsorted(all_ns, ns)]
    ends = abs(state(0.0)) + abs(state(p.length))
    fits = {}
    L = p.length
    tail = math.fsum(all_probs[~shown])
    tail_moment = math.fsum(all_ks[~shown] ** 2 * all_probs[~shown])
    for side in (1, -1):
        for parity in (0, 1):
            sel = (np.sign(all_ks) == side) & (all_ns % 2 == parity)
            if sel.sum() < 2:
                continue
            coeffs = _fit_envelope(all_ks[sel], all_probs[sel], abs(state.wavenumber))
            fits[(side, parity)] = coeffs
            k_last = np.abs(all_ks[sel]).max()
            t, m = _envelope_tail(coeffs, k_last + TWO_PI / L, L)
            tail += max(t, 0.0)
            tail_moment += max(m, 0.0)
    return MeasurementDistribution(ns, ks, probs, tail, p.length, theta, bc.kind, l,
                                   closed_form=False, moment_diverges=ends > 1e-12, tail_fit=fits,
                                   tail_moment=tail_moment)


def first_moment(dist: MeasurementDistribution) -> float:
    return math.fsum(dist.ks * dist.probabilities)


def _closed_moment_tail(kind: str, l: int, L: float, m0: int) -> float:
    # Dirichlet: sum over m >= m0 of k^2 P = (4 l^2/L^2) * sum m^2/(m^2 - l^2)^2
    cut = max(m0, l + 1)
    explicit = np.arange(m0, cut)
    total = 0.0
    if explicit.size:
        k = math.pi * explicit / L
        total = math.fsum(k ** 2 * _closed_form_probabilities(kind, l, explicit))
    start = cut if (cut + l) % 2 == 1 else cut + 1
    a, b = (start - l) / 2.0, (start + l) / 2.0
    squares = 0.25 * (float(polygamma(1, a)) + float(polygamma(1, b)))
    recip = 0.5 * (float(digamma(b)) - float(digamma(a))) / (2.0 * l)
    return total + (4.0 * l * l / L ** 2) * (0.25 * squares + 0.5 * recip)


def second_moment(dist: MeasurementDistribution, closed_form_tail: bool = True) -> SecondMoment:
    """Sum of k^2 P over the table plus its tail.

    Diverging cases (any wall value of psi nonzero, e.g. Neumann) report
    ``value = inf`` and the growth rate dS/dN of the partial sums.
    """
    ns = dist.ns
    if ns[0] != -ns[-1] or not np.all(np.diff(ns) == 1):
        raise InputError("second moment needs a contiguous range symmetric about n = 0")
    terms = dist.ks ** 2 * dist.probabilities
    partial = math.fsum(terms)
    N = int(ns[-1])
    if dist.moment_diverges:
        half = np.abs(ns) <= N // 2
        lower = math.fsum(terms[half])
        rate = (partial - lower) / (N - N // 2) if N >= 2 else float("nan")
        return SecondMoment(math.inf, partial, math.inf, True, rate)
    tail = 0.0
    if closed_form_tail:
        if dist.closed_form:
            tail = 2.0 * _closed_moment_tail(dist.bc, dist.l, dist.length, N + 1)
        else:
            tail = dist.tail_moment
    return SecondMoment(partial + tail, partial, tail, False, 0.0)


# --- gauge view of theta ------------------------------------------------------

def gauge_shift_theta(p: IntervalParams) -> tuple[IntervalParams, GaugeField]:
    """Move theta from the walls into a constant vector potential.

    W(theta) = exp(i theta/(2L) x_R) keeps sigma and sets sigma_L' = sigma,
    so theta' = 0, and the momentum becomes -i sigma_1 d/dx + e A_x with
    e A_x = theta/2L.
    """
    theta = p.theta
    shifted = IntervalParams(p.length, p.mass, p.lambda0, p.lambda0)
    return shifted, GaugeField(theta / (2.0 * p.length))


def gauge_shifted_spectrum(p_shifted: IntervalParams, gauge: GaugeField, n_range) -> list[tuple[int, float]]:
    """Spectrum of -i sigma_1 d/dx + e A_x on the theta' = 0 domain."""
    return [(n, k + gauge.charge_times_a) for n, k in momentum_spectrum(p_shifted, n_range)]


def gauge_transform_wave(wave: TwoComponentWave, theta: float, length: float) -> TwoComponentWave:
    """W(theta)^dagger Psi = V~_{-theta/2L} Psi."""
    return vtilde_apply(-theta / (2.0 * length), wave)


def _derivative4(f: np.ndarray, h: float, i: int):
    # fourth-order five-point stencils, one-sided near the ends
    n = f.size
    if i < 0:
        i += n
    if n < 5:
        return np.gradient(f, h, edge_order=2)[i]
    if i < 2:
        w = [np.array([-25, 48, -36, 16, -3]), np.array([-3, -10, 18, -6, 1])][i]
        return np.dot(w, f[:5]) / (12 * h)
    if i > n - 3:
        w = [np.array([-25, 48, -36, 16, -3]), np.array([-3, -10, 18, -6, 1])][n - 1 - i]
        return -np.dot(w, f[::-1][:5]) / (12 * h)
    return np.dot(np.array([1, -8, 0, 8, -1]), f[i - 2:i + 3]) / (12 * h)


def covariant_derivative(psi, grid: Grid, gauge: GaugeField, at: int) -> complex:
    """D_x psi = psi' + i e A_x psi at grid index ``at`` (fourth-order differences)."""
    psi = np.asarray(psi, dtype=complex)
    d = _derivative4(psi, grid.dx, at)
    ea = gauge.charge_times_a
    if gauge.phase_profile is not None:
        phase = np.asarray(gauge.phase_profile(grid.points), dtype=float)
        ea = ea - _derivative4(phase, grid.dx, at)
    return complex(d + 1j * ea * psi[at])


def gauge_apply(psi, grid: Grid, gauge: GaugeField, phase: Callable[[np.ndarray], np.ndarray]):
    """psi -> exp(i e phi) psi and e A -> e A - d(e phi)/dx. Returns (psi', field')."""
    psi = np.asarray(psi, dtype=complex)
    new_psi = np.exp(1j * np.asarray(phase(grid.points), dtype=float)) * psi
    old = gauge.phase_profile
    if old is None:
        profile = phase
    else:
        profile = lambda x: np.asarray(old(x), dtype=float) + np.asarray(phase(x), dtype=float)
    return new_psi, GaugeField(gauge.charge_times_a, profile)


def gauge_string_expectation(psi, grid: Grid, gauge: GaugeField) -> complex:
    """Psi(0)* exp(i e integral_0^L A_x) Psi(L)."""
    psi = np.asarray(psi, dtype=complex)
    length = grid.stop - grid.x0
    return complex(np.conj(psi[0]) * np.exp(1j * gauge.line_integral(length)) * psi[-1])


# --- sampling and time evolution ----------------------------------------------

def sample_measurement(dist: MeasurementDistribution, shots: int, seed: int = 0,
                       max_redraws: int = 10_000) -> SampleResult:
    """Draw ``shots`` outcomes by inverse CDF with a seeded xoshiro256** stream.

    Uniforms that land in the tail bucket beyond the table are redrawn.
    """
    if int(shots) != shots or shots < 1:
        raise InputError("shots must be a positive integer")
    probs = dist.probabilities
    cdf = np.cumsum(probs)
    if cdf[-1] <= 0:
        raise InputError("distribution has no probability on its table")
    rng = Xoshiro256StarStar(seed)
    outcomes = np.empty(int(shots), dtype=np.int64)
    for i in range(int(shots)):
        for _ in range(max_redraws):
            u = rng.next_double()
            idx = int(np.searchsorted(cdf, u, side="right"))
            if idx < cdf.size:
                break
        else:
            raise SolverError("tail bucket swallowed every draw")
        outcomes[i] = dist.ns[idx]
    counts = np.array([np.count_nonzero(outcomes == n) for n in dist.ns], dtype=np.int64)
    return SampleResult(dist.ns.copy(), counts, outcomes)


def evolve(p: IntervalParams, bc: BoundaryKind, psi0: TwoComponentWave, t: float,
           modes: int = 64, tol: float = 1e-8) -> TwoComponentWave:
    """Psi(t) = sum_l c_l exp(-i E_l t) psi_l over the lowest ``modes`` states."""
    if np.max(np.abs(psi0.even - psi0.odd)) > 1e-10 * max(psi0.max_abs(), 1.0):
        raise InputError("initial state must lie in the P+ sector")
    first = 1 if bc.kind == "dirichlet" else 0
    states = [energy_eigenstate(p, bc, l, psi0.grid) for l in range(first, first + modes)]
    coeffs = [s.wave.inner(psi0) for s in states]
    rebuilt = TwoComponentWave(psi0.grid, np.zeros(psi0.grid.count), np.zeros(psi0.grid.count))
    for s, c in zip(states, coeffs):
        rebuilt = rebuilt + s.wave.scaled(c)
    residual = (psi0 - rebuilt).norm()
    if residual > tol * max(psi0.norm(), 1.0):
        raise TruncationError(f"{modes} eigenstates leave residual {residual:.3e}")
    out = TwoComponentWave(psi0.grid, np.zeros(psi0.grid.count), np.zeros(psi0.grid.count))
    for s, c in zip(states, coeffs):
        out = out + s.wave.scaled(c * np.exp(-1j * s.energy * t))
    return out
