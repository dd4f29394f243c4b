"""Shared numerical kernels.

Uniform-grid quadrature (composite Simpson, plus a Filon-type rule for
integrands carrying a plane-wave factor), the eigendecomposition of Hermitian
tridiagonal matrices by phase reduction and implicit-shift QL, and bracketed
root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, InputError, InvariantError, SolverError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x0 + j*dx`` for ``j = 0 .. count-1``."""

    x0: float
    dx: float
    count: int

    def __post_init__(self):
        if not self.dx > 0:
            raise InputError(f"grid spacing must be positive, got {self.dx}")
        if int(self.count) != self.count or self.count < 2:
            raise InputError(f"grid needs at least 2 points, got {self.count}")

    @classmethod
    def spanning(cls, start: float, stop: float, count: int) -> "Grid":
        """Grid with ``count`` points from ``start`` to ``stop`` inclusive."""
        if count < 2 or not stop > start:
            raise InputError("need stop > start and count >= 2")
        return cls(float(start), (stop - start) / (count - 1), int(count))

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.count)

    @property
    def stop(self) -> float:
        return self.x0 + self.dx * (self.count - 1)


def _check_length(values: np.ndarray, grid: Grid) -> None:
    if values.shape[-1] != grid.count:
        raise InputError(
            f"expected {grid.count} samples along the last axis, got {values.shape[-1]}"
        )


def integrate(values, grid: Grid):
    """Composite Simpson integral of sampled values over ``grid``.

    Works along the last axis, so a stack of integrands can be integrated at
    once. With an odd number of intervals the final interval is closed with
    the three-point end-panel rule ``h(5 f_n + 8 f_{n-1} - f_{n-2})/12``.
    """
    f = np.asarray(values)
    _check_length(f, grid)
    h = grid.dx
    n = grid.count
    if n == 2:
        return 0.5 * h * (f[..., 0] + f[..., 1])
    m = n if n % 2 == 1 else n - 1
    s = f[..., 0] + f[..., m - 1]
    s = s + 4.0 * f[..., 1:m - 1:2].sum(axis=-1) + 2.0 * f[..., 2:m - 2:2].sum(axis=-1)
    total = s * h / 3.0
    if m != n:
        total = total + h * (5.0 * f[..., -1] + 8.0 * f[..., -2] - f[..., -3]) / 12.0
    return total


def _filon_weights(theta: np.ndarray):
    """Filon coefficients alpha, beta, gamma as functions of theta = k*h."""
    theta = np.asarray(theta, dtype=float)
    alpha = np.empty_like(theta)
    beta = np.empty_like(theta)
    gamma = np.empty_like(theta)
    small = np.abs(theta) < 2e-2
    t = theta[small]
    t2 = t * t
    alpha[small] = t * t2 * (2 / 45 - t2 * (2 / 315 - t2 * 2 / 4725))
    beta[small] = 2 / 3 + t2 * (2 / 15 - t2 * (4 / 105 - t2 * 2 / 567))
    gamma[small] = 4 / 3 - t2 * (2 / 15 - t2 * (1 / 210 - t2 / 11340))
    t = theta[~small]
    s, c = np.sin(t), np.cos(t)
    t3 = t ** 3
    alpha[~small] = (t * t + t * s * c - 2 * s * s) / t3
    beta[~small] = 2 * (t * (1 + c * c) - 2 * s * c) / t3
    gamma[~small] = 4 * (s - t * c) / t3
    return alpha, beta, gamma


def integrate_oscillatory(values, grid: Grid, k, chunk: int = 256):
    """Filon-Simpson approximation of ``∫ f(x) exp(-i k x) dx``.

    ``f`` is interpolated quadratically on panel pairs and the plane wave is
    integrated exactly, so the error does not grow with ``|k|``. Reduces to
    :func:`integrate` as ``k -> 0``. ``k`` may be a scalar or a 1-d array.
    """
    f = np.asarray(values, dtype=complex)
    if f.ndim != 1:
        raise InputError("integrate_oscillatory expects a 1-d sample vector")
    _check_length(f, grid)
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    x = grid.points
    h = grid.dx
    n = grid.count
    m = n if n % 2 == 1 else n - 1
    out = np.empty(ks.shape, dtype=complex)
    for start in range(0, ks.size, chunk):
        kk = ks[start:start + chunk]
        phase = np.exp(-1j * np.outer(kk, x))
        g = phase * f
        if m >= 3:
            alpha, beta, gamma = _filon_weights(kk * h)
            even = g[:, 0:m:2].sum(axis=1) - 0.5 * (g[:, 0] + g[:, m - 1])
            odd = g[:, 1:m - 1:2].sum(axis=1)
            res = h * (1j * alpha * (g[:, m - 1] - g[:, 0]) + beta * even + gamma * odd)
        else:
            res = np.zeros(kk.shape, dtype=complex)
        if m != n:
            if n >= 3:
                res = res + _filon_end_panel(f[-3:], x[-2], h, kk)
            else:
                mu0, mu1, _ = _plane_wave_moments(kk * h)
                res = res + h * np.exp(-1j * kk * x[0]) * ((mu0 - mu1) * f[0] + mu1 * f[1])
        out[start:start + chunk] = res
    return out[0] if np.ndim(k) == 0 else out


def _plane_wave_moments(t: np.ndarray):
    """mu_j = integral of u^j exp(-i t u) over [0, 1] for j = 0, 1, 2."""
    t = np.asarray(t, dtype=float)
    mu = np.empty((3,) + t.shape, dtype=complex)
    small = np.abs(t) < 0.1
    ts = t[small]
    term = np.ones_like(ts, dtype=complex)
    acc = np.zeros((3,) + ts.shape, dtype=complex)
    for m in range(18):
        for j in range(3):
            acc[j] += term / (j + m + 1)
        term = term * (-1j * ts) / (m + 1)
    mu[:, small] = acc
    tl = t[~small]
    e = np.exp(-1j * tl)
    m0 = (1 - e) / (1j * tl)
    m1 = (m0 - e) / (1j * tl)
    m2 = (2 * m1 - e) / (1j * tl)
    mu[0, ~small], mu[1, ~small], mu[2, ~small] = m0, m1, m2
    return mu


def _filon_end_panel(f3, x_mid, h, k):
    # f interpolated quadratically through the last three samples, integrated
    # against exp(-ikx) over the last panel only
    mu0, mu1, mu2 = _plane_wave_moments(k * h)
    w_prev = 0.5 * (mu2 - mu1)
    w_mid = mu0 - mu2
    w_last = 0.5 * (mu2 + mu1)
    return h * np.exp(-1j * k * x_mid) * (w_prev * f3[0] + w_mid * f3[1] + w_last * f3[2])


@dataclass(frozen=True)
class HermitianTridiagonal:
    """Tridiagonal matrix with real diagonal and complex upper diagonal.

    The lower diagonal is the complex conjugate of ``upper``.
    """

    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.diag, dtype=complex))
        u = np.atleast_1d(np.asarray(self.upper, dtype=complex))
        if u.size != max(d.size - 1, 0) or d.size == 0:
            raise InputError(
                f"upper diagonal must have length {d.size - 1}, got {u.size}"
            )
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "upper", u)

    @property
    def size(self) -> int:
        return self.diag.size

    def validated(self) -> "HermitianTridiagonal":
        """Return a copy with an exactly real diagonal, or raise."""
        scale = max(1.0, float(np.max(np.abs(self.diag))),
                    float(np.max(np.abs(self.upper), initial=0.0)))
        if np.max(np.abs(self.diag.imag)) > 1e3 * _EPS * scale:
            raise InvariantError("diagonal of a Hermitian matrix must be real")
        return HermitianTridiagonal(self.diag.real.astype(complex), self.upper)

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag.astype(complex))
        if self.size > 1:
            m += np.diag(self.upper, 1) + np.diag(self.upper.conj(), -1)
        return m

    def norm(self) -> float:
        """Max absolute row sum, an upper bound for the spectral norm."""
        a = np.abs(self.diag)
        if self.size > 1:
            off = np.abs(self.upper)
            a = a.copy()
            a[:-1] += off
            a[1:] += off
        return float(a.max())


def _tql_implicit(d: np.ndarray, e: np.ndarray, zt: np.ndarray | None) -> None:
    """Implicit-shift QL on a real symmetric tridiagonal matrix, in place.

    ``d`` is the diagonal, ``e[i]`` couples rows ``i`` and ``i+1`` with
    ``e[-1] == 0``. When given, the rows of ``zt`` are rotated so that row
    ``j`` ends up holding eigenvector ``j``.
    """
    n = d.size
    d_ = d.tolist()
    e_ = e.tolist()
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d_[m]) + abs(d_[m + 1])
                if abs(e_[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > 60:
                raise SolverError("implicit QL did not converge")
            g = (d_[l + 1] - d_[l]) / (2.0 * e_[l])
            r = math.hypot(g, 1.0)
            g = d_[m] - d_[l] + e_[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e_[i]
                b = c * e_[i]
                r = math.hypot(f, g)
                e_[i + 1] = r
                if r == 0.0:
                    d_[i + 1] -= p
                    e_[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d_[i + 1] - p
                r = (d_[i] - g) * s + 2.0 * c * b
                p = s * r
                d_[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    upper_row = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * upper_row
                    zt[i] = c * zt[i] - s * upper_row
                i -= 1
            if underflow:
                continue
            d_[l] -= p
            e_[l] = g
            e_[m] = 0.0
    d[:] = d_


def eig_hermitian_tridiagonal(m: HermitianTridiagonal, vectors: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors of ``m``.

    The complex off-diagonal entries are rotated onto their moduli by a
    diagonal unitary similarity, the resulting real symmetric matrix is
    diagonalized by implicit-shift QL, and the phases are restored on the
    eigenvectors. Each eigenvector is normalized so that its first non-zero
    component is real and positive. Eigenvectors are returned as columns.
    """
    m = m.validated()
    n = m.size
    d = m.diag.real.copy()
    off = np.abs(m.upper)
    phases = np.ones(n, dtype=complex)
    for j in range(n - 1):
        u = m.upper[j]
        phases[j + 1] = phases[j] * (np.conj(u) / abs(u) if u != 0 else 1.0)
    e = np.zeros(n)
    e[:n - 1] = off
    zt = np.eye(n) if vectors else None
    _tql_implicit(d, e, zt)
    order = np.argsort(d, kind="stable")
    values = d[order]
    if not vectors:
        return values, None
    w = zt[order].T
    v = phases[:, None] * w
    for col in range(n):
        vec = v[:, col]
        big = np.abs(vec) > 1e-12 * np.abs(vec).max()
        first = vec[np.argmax(big)]
        v[:, col] = vec * (abs(first) / first)
    return values, v


def find_root(f: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-12) -> float:
    """Root of ``f`` inside ``bracket`` by Brent's method.

    The bracket must straddle a sign change. The iteration never leaves it.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not tol > 0:
        raise InputError("tol must be positive")
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:g}, {fhi:g}")
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * _EPS, maxiter=500))
