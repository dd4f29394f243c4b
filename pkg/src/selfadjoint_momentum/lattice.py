"""Lattice regularization of the interval.

N sites at x_n = (n - 1/2) a, n = 1..N, with L = N a. The forward and
backward difference matrices carry the boundary parameters in their corner
entries; their Hermitian average p_R is tridiagonal, and what is left over is
an anti-Hermitian part i p_I living on the two end sites only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import InputError, SingularInputError
from .halfline import ExtensionLambda
from .numerics import HermitianTridiagonal, eig_hermitian_tridiagonal


@dataclass(frozen=True)
class LatticeConfig:
    sites: int
    spacing: float
    lambda0: ExtensionLambda = ExtensionLambda(0.0)
    lambdaL: ExtensionLambda = ExtensionLambda(0.0)
    mass: float = 1.0

    def __post_init__(self):
        if int(self.sites) != self.sites or self.sites < 2:
            raise InputError("a lattice needs at least 2 sites")
        if not self.spacing > 0:
            raise InputError("spacing must be positive")
        if not self.mass > 0:
            raise InputError("mass must be positive")
        if not (math.isfinite(self.lambda0.beta) and math.isfinite(self.lambdaL.beta)):
            raise InputError("lattice boundary parameters must be finite")

    @classmethod
    def on_interval(cls, length: float, sites: int, beta0: float = 0.0, betaL: float = 0.0,
                    mass: float = 1.0) -> "LatticeConfig":
        return cls(int(sites), length / sites, ExtensionLambda(beta0), ExtensionLambda(betaL), mass)

    @property
    def length(self) -> float:
        return self.sites * self.spacing

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(1, self.sites + 1) - 0.5) * self.spacing


@dataclass(frozen=True)
class LatticeOperators:
    pF: np.ndarray
    pB: np.ndarray
    pR: HermitianTridiagonal
    pI: np.ndarray


def build_momentum_matrices(cfg: LatticeConfig) -> LatticeOperators:
    """Forward, backward, Hermitian and anti-Hermitian lattice momenta."""
    n, a = cfg.sites, cfg.spacing
    lam, lamL = cfg.lambda0.value, cfg.lambdaL.value
    f = -np.eye(n, dtype=complex) + np.eye(n, k=1, dtype=complex)
    f[-1, -1] = lamL
    b = np.eye(n, dtype=complex) - np.eye(n, k=-1, dtype=complex)
    b[0, 0] = -lam
    pF = (-1j / a) * f
    pB = (-1j / a) * b
    diag = np.zeros(n, dtype=complex)
    diag[0] += (-1j / (2 * a)) * (-lam)
    diag[-1] += (-1j / (2 * a)) * lamL
    upper = np.full(n - 1, -1j / (2 * a), dtype=complex)
    pR = HermitianTridiagonal(diag, upper).validated()
    pI = np.zeros(n)
    pI[0] = 1 / (2 * a)
    pI[-1] = -1 / (2 * a)
    return LatticeOperators(pF, pB, pR, pI)


def lattice_momentum_spectrum(cfg: LatticeConfig, vectors: bool = True):
    """Ascending eigenvalues of p_R and, if asked, the eigenvectors as columns."""
    return eig_hermitian_tridiagonal(build_momentum_matrices(cfg).pR, vectors=vectors)


def lattice_quantization_rhs(cfg: LatticeConfig, k: float) -> complex:
    """(1 - lambda z)(1 + lambda_L z)/((z + lambda)(z - lambda_L)) with z = exp(ika)."""
    z = cmath.exp(1j * k * cfg.spacing)
    lam, lamL = cfg.lambda0.value, cfg.lambdaL.value
    den = (z + lam) * (z - lamL)
    if den == 0:
        raise SingularInputError("lattice quantization condition has a pole here")
    return (1 - lam * z) * (1 + lamL * z) / den


def lattice_quantization_residual(cfg: LatticeConfig, k: float) -> complex:
    """exp(2ikL) minus the right-hand side of the lattice quantization condition."""
    return cmath.exp(2j * k * cfg.length) - lattice_quantization_rhs(cfg, k)


def sublattice_residual(cfg: LatticeConfig, k: float) -> complex:
    """Residual with the site-parity factor (-1)^(N+1) on the right-hand side.

    For an even number of sites the eigenvalues of p_R satisfy the condition
    only with this sign, i.e. with theta shifted by pi.
    """
    sign = 1.0 if cfg.sites % 2 == 1 else -1.0
    return cmath.exp(2j * k * cfg.length) - sign * lattice_quantization_rhs(cfg, k)


def momentum_candidates(cfg: LatticeConfig, s: float) -> tuple[float, ...]:
    """The wavenumbers in the first Brillouin window with sin(ka)/a = s."""
    a = cfg.spacing
    x = max(-1.0, min(1.0, s * a))
    k1 = math.asin(x) / a
    k2 = (math.pi - math.asin(x)) / a
    return (k1, k2) if k2 != k1 else (k1,)


@dataclass
class LevelFit:
    level: int
    target: float
    errors: list = field(default_factory=list)
    slope: float = float("nan")
    intercept: float = float("nan")
    skipped: bool = False
    note: str = ""


@dataclass
class ConvergenceReport:
    sizes: list
    length: float
    theta: float
    levels: list


def continuum_convergence(beta0: float, betaL: float, levels: int, sizes, length: float = 1.0) -> ConvergenceReport:
    """Fit log(error) against log(a) for the lowest positive momentum levels.

    Each positive eigenvalue s is turned into k = arcsin(a s)/a, choosing the
    branch nearest the continuum target k_n = (pi/L)(n + theta/2pi); the
    targets are the lowest positive k_n in order.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError("need at least two strictly increasing sizes")
    if levels < 1:
        raise InputError("levels must be positive")
    lam0, lamL = ExtensionLambda(beta0), ExtensionLambda(betaL)
    z = lam0.sigma * lamL.sigma.conjugate()
    theta = math.atan2(z.imag, z.real) % (2 * math.pi)
    n0 = 0 if theta > 0 else 1
    targets = [(math.pi / length) * (n0 + j + theta / (2 * math.pi)) for j in range(levels)]
    fits = [LevelFit(j + 1, t) for j, t in enumerate(targets)]
    for n in sizes:
        cfg = LatticeConfig.on_interval(length, n, beta0, betaL)
        values, _ = lattice_momentum_spectrum(cfg, vectors=False)
        positive = values[values > 1e-12 / cfg.spacing]
        for fit, s in zip(fits, positive[:levels]):
            if abs(s * cfg.spacing) > 1 - 1e-12:
                fit.skipped = True
                fit.note = f"branch ambiguous at N={n}"
                fit.errors.append(float("nan"))
                continue
            k = min(momentum_candidates(cfg, s), key=lambda c: abs(c - fit.target))
            fit.errors.append(abs(k - fit.target))
    spacings = np.array([length / n for n in sizes])
    for fit in fits:
        err = np.array(fit.errors, dtype=float)
        if fit.skipped or len(err) != len(sizes) or np.any(~np.isfinite(err)) or np.any(err <= 0):
            fit.skipped = True
            fit.note = fit.note or "error vanished or level missing; cannot fit"
            continue
        fit.slope, fit.intercept = (float(v) for v in np.polyfit(np.log(spacings), np.log(err), 1))
    return ConvergenceReport(sizes, length, theta, fits)


def _ghost_ratio(gamma: float, a: float) -> float:
    # wall halfway between the ghost and the first site: gamma*psi - psi' = 0 there
    if math.isinf(gamma):
        return -1.0
    den = 1 + gamma * a / 2
    if den == 0:
        raise SingularInputError("gamma * a = -2 puts the ghost-cell closure at a pole")
    return (1 - gamma * a / 2) / den


def kinetic_matrix(cfg: LatticeConfig, gamma: float, gammaL: float | None = None) -> np.ndarray:
    """-(1/2m) times the three-point second difference with ghost-cell walls."""
    n, a, m = cfg.sites, cfg.spacing, cfg.mass
    gammaL = gamma if gammaL is None else gammaL
    c = 1 / (2 * m * a * a)
    k = 2 * c * np.eye(n) - c * (np.eye(n, k=1) + np.eye(n, k=-1))
    k[0, 0] -= c * _ghost_ratio(gamma, a)
    k[-1, -1] -= c * _ghost_ratio(gammaL, a)
    return k


def build_doubled_hamiltonian(cfg: LatticeConfig, gamma: float, mu: float,
                              gammaL: float | None = None, doubler_closure: str = "dirichlet") -> np.ndarray:
    """2N x 2N Hamiltonian in the (even, odd) component basis.

    The P+ combination sees the Robin walls and the P- combination is pushed
    up by mu (given in units of 1/(2 m L^2)). With ``doubler_closure =
    'dirichlet'`` the P- sector has Dirichlet walls, which is the embedding
    that reproduces the single-component problem; ``'same'`` gives both
    components the Robin closure.
    """
    if mu < 0:
        raise InputError("mu must be non-negative")
    if doubler_closure not in ("dirichlet", "same"):
        raise InputError("doubler_closure must be 'dirichlet' or 'same'")
    k_plus = kinetic_matrix(cfg, gamma, gammaL)
    if doubler_closure == "dirichlet":
        k_minus = kinetic_matrix(cfg, math.inf, math.inf)
    else:
        k_minus = k_plus
    penalty = mu / (2 * cfg.mass * cfg.length ** 2)
    n = cfg.sites
    diag = 0.5 * (k_plus + k_minus) + 0.5 * penalty * np.eye(n)
    off = 0.5 * (k_plus - k_minus) - 0.5 * penalty * np.eye(n)
    return np.block([[diag, off], [off, diag]])


def doubled_spectrum(cfg: LatticeConfig, gamma: float, mu: float, gammaL: float | None = None,
                     doubler_closure: str = "dirichlet", method: str = "blocks") -> np.ndarray:
    """Ascending eigenvalues of the doubled Hamiltonian.

    In the P+/P- basis (Psi_e +- Psi_o)/sqrt 2 the matrix splits into K+ and
    K- + mu/(2mL^2), so ``method='blocks'`` diagonalizes the two real
    tridiagonal blocks. That keeps the mu dependence an exact shift of one
    block instead of a perturbation buried in a matrix of norm ~mu.
    ``method='dense'`` diagonalizes the full 2N x 2N matrix.
    """
    if method == "dense":
        return np.linalg.eigvalsh(build_doubled_hamiltonian(cfg, gamma, mu, gammaL, doubler_closure))
    if method != "blocks":
        raise InputError("method must be 'blocks' or 'dense'")
    if mu < 0:
        raise InputError("mu must be non-negative")
    if doubler_closure not in ("dirichlet", "same"):
        raise InputError("doubler_closure must be 'dirichlet' or 'same'")
    k_plus = kinetic_matrix(cfg, gamma, gammaL)
    k_minus = kinetic_matrix(cfg, math.inf, math.inf) if doubler_closure == "dirichlet" else k_plus
    penalty = mu / (2 * cfg.mass * cfg.length ** 2)
    plus = eigvalsh_tridiagonal(np.diag(k_plus).copy(), np.diag(k_plus, 1).copy())
    minus = eigvalsh_tridiagonal(np.diag(k_minus).copy(), np.diag(k_minus, 1).copy()) + penalty
    return np.sort(np.concatenate([plus, minus]))
