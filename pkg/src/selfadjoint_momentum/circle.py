"""A particle on a ring threaded by flux theta, and its map to the interval.

Angles are kept in [-pi, pi). Crossing the cut at +-pi costs a phase
exp(+-i theta), which is how the flux shows up in the position basis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InputError, RepresentationError
from .halfline import PLUS, HalfLineStateLabel
from .interval import IntervalParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircleParams:
    """Flux phase theta in [0, 2 pi), optionally with the flux e*Phi it came from."""

    theta: float
    charge_flux: float | None = None

    def __post_init__(self):
        if not 0 <= self.theta < TWO_PI:
            raise InputError("theta must lie in [0, 2 pi)")
        if self.charge_flux is not None:
            gap = math.remainder(self.theta - self.charge_flux, TWO_PI)
            if abs(gap) > 1e-12:
                raise InputError("theta and charge_flux disagree modulo 2 pi")

    @classmethod
    def from_flux(cls, charge_flux: float) -> "CircleParams":
        theta = charge_flux % TWO_PI
        return cls(0.0 if theta >= TWO_PI else theta, charge_flux)

    @property
    def rho(self) -> complex:
        return cmath.exp(1j * self.theta)


def angular_eigenvalue(c: CircleParams, n: int) -> float:
    return n + c.theta / TWO_PI


def angular_eigenfunction(c: CircleParams, n: int, phi):
    """<phi|n> = exp(i (n + theta/2pi) phi)/sqrt(2 pi) for phi in [-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(phi) > math.pi):
        raise InputError("phi must lie in [-pi, pi]")
    out = np.exp(1j * angular_eigenvalue(c, n) * phi) / math.sqrt(TWO_PI)
    return complex(out) if out.ndim == 0 else out


def normalize_angle(c: CircleParams, phi: float, phase: complex = 1.0) -> tuple[float, complex]:
    """Bring the label phase*|phi> to phi in [-pi, pi) using |phi> = e^{-i theta}|phi - 2 pi>."""
    while phi >= math.pi:
        phi -= TWO_PI
        phase *= cmath.exp(-1j * c.theta)
    while phi < -math.pi:
        phi += TWO_PI
        phase *= cmath.exp(1j * c.theta)
    return phi, complex(phase)


def u_alpha_action(c: CircleParams, alpha: float, phi: float, phase: complex = 1.0) -> tuple[float, complex]:
    """U_alpha |phi> = |phi - alpha>, wrapped into [-pi, pi) with phase e^{+-i theta}."""
    if not -math.pi <= alpha < math.pi:
        raise InputError("alpha must lie in [-pi, pi)")
    phi, phase = normalize_angle(c, phi, phase)
    y = phi - alpha
    if y < -math.pi:
        return y + TWO_PI, phase * cmath.exp(1j * c.theta)
    if y < math.pi:
        return y, complex(phase)
    return y - TWO_PI, phase * cmath.exp(-1j * c.theta)


def map_interval_to_circle(p: IntervalParams, state: HalfLineStateLabel) -> tuple[float, complex]:
    """U|x,+> = |pi x/L> and U|x,-> = sigma* |-pi x/L>, angle in [-pi, pi)."""
    if not 0 <= state.x <= p.length:
        raise InputError("label must lie in [0, L]")
    c = CircleParams(p.theta)
    phi = math.pi * state.x / p.length
    if state.sign == PLUS:
        return normalize_angle(c, phi, state.phase)
    return normalize_angle(c, -phi, state.phase * p.sigma.conjugate())


def circle_label_amplitude(c: CircleParams, phi: float, phase: complex, n: int) -> complex:
    """(phase |phi>)^dagger |n>."""
    return complex(phase).conjugate() * angular_eigenfunction(c, n, phi)


@dataclass(frozen=True)
class CircleSuperposition:
    """sum_j c_j |n_j> on the ring with flux theta."""

    ns: np.ndarray
    coeffs: np.ndarray
    theta: float

    def __post_init__(self):
        ns = np.atleast_1d(np.asarray(self.ns, dtype=np.int64))
        cs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if ns.shape != cs.shape:
            raise InputError("ns and coeffs must have the same length")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "coeffs", cs)

    def __call__(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        nu = self.ns + self.theta / TWO_PI
        waves = np.exp(1j * np.multiply.outer(nu, phi)) / math.sqrt(TWO_PI)
        return np.tensordot(self.coeffs, waves, axes=1)

    def rotated(self, alpha: float) -> "CircleSuperposition":
        """U_alpha = exp(i alpha L): each |n> picks up exp(i alpha (n + theta/2pi))."""
        nu = self.ns + self.theta / TWO_PI
        return CircleSuperposition(self.ns, self.coeffs * np.exp(1j * alpha * nu), self.theta)

    def raised(self) -> "CircleSuperposition":
        """U~ = exp(i phi) as the ladder step |n> -> |n+1>."""
        return CircleSuperposition(self.ns + 1, self.coeffs, self.theta)

    def with_angular_momentum(self) -> "CircleSuperposition":
        nu = self.ns + self.theta / TWO_PI
        return CircleSuperposition(self.ns, self.coeffs * nu, self.theta)


def _angles(count: int) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(count) / count


def weyl_check_circle(c: CircleParams, alpha: float, samples: Iterable[CircleSuperposition],
                      points: int = 512) -> float:
    """Max deviation of U_alpha U~ - exp(i alpha) U~ U_alpha over the samples.

    U~ is the ladder step on the left and multiplication by exp(i phi) on the right.
    """
    phi = _angles(points)
    worst = 0.0
    for s in samples:
        if not isinstance(s, CircleSuperposition) or abs(s.theta - c.theta) > 1e-15:
            raise RepresentationError("samples must be finite superpositions of |n> with matching theta")
        left = s.raised().rotated(alpha)(phi)
        right = cmath.exp(1j * alpha) * np.exp(1j * phi) * s.rotated(alpha)(phi)
        worst = max(worst, float(np.abs(left - right).max()))
    return worst


def commutator_check_circle(c: CircleParams, samples: Iterable[CircleSuperposition],
                            points: int = 512) -> float:
    """Max deviation of [L, U~] = U~, with U~ applied as exp(i phi) pointwise."""
    phi = _angles(points)
    worst = 0.0
    for s in samples:
        if not isinstance(s, CircleSuperposition) or abs(s.theta - c.theta) > 1e-15:
            raise RepresentationError("samples must be finite superpositions of |n> with matching theta")
        raise_ = np.exp(1j * phi)
        comm = s.raised().with_angular_momentum()(phi) - raise_ * s.with_angular_momentum()(phi)
        worst = max(worst, float(np.abs(comm - raise_ * s(phi)).max()))
    return worst


def flux_gauge_multiplier(c: CircleParams, phi):
    """exp(i (theta/2pi) phi): turns periodic waves into the twisted ones."""
    return np.exp(1j * (c.theta / TWO_PI) * np.asarray(phi, dtype=float))
