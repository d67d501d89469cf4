"""Pointwise-evaluable plane functions and their band-limited spectra.

Two function flavors coexist:

* :class:`SmoothFunction2D` wraps an arbitrary closed-form callable
  ``(X, Y) -> complex array`` together with decay metadata, so shifts and
  modulations stay exact.
* :class:`SpectralFunction2D` stores a finite set of plane-wave modes
  ``f(z) = sum_k c_k exp(i k.z)`` on the Fourier lattice of a quadrature
  grid.  Star products, Fourier multipliers, and involutions act on the
  coefficients; evaluation anywhere is the exact trigonometric sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import QuadratureGrid
from .errors import ResolutionError

__all__ = [
    "SmoothFunction2D",
    "SpectralFunction2D",
    "gaussian2d",
    "gaussian_packet2d",
    "polynomial_times_gaussian",
    "smooth_step",
    "windowed_coordinate",
    "sample_on_grid",
    "grid_to_modes",
    "spectral_from_callable",
]


@dataclass
class SmoothFunction2D:
    """A closed-form complex function on the plane with decay metadata."""

    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    box_half_width: float = 8.0
    points_per_axis: int = 256

    def __call__(self, X, Y):
        return self.eval(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))

    def default_grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.box_half_width, self.points_per_axis)


def gaussian2d(ax: float = 0.5, ay: float = 0.5, x0: float = 0.0, y0: float = 0.0,
               amp: complex = 1.0, half_width: float = 8.0) -> SmoothFunction2D:
    """amp * exp(-ax (x-x0)^2 - ay (y-y0)^2)."""

    def _f(X, Y):
        return amp * np.exp(-ax * (X - x0) ** 2 - ay * (Y - y0) ** 2).astype(complex)

    return SmoothFunction2D(_f, box_half_width=half_width)


def gaussian_packet2d(rng: np.random.Generator, half_width: float = 8.0) -> SmoothFunction2D:
    """A random Gaussian packet: offset center, width, phase and modulation."""
    ax, ay = rng.uniform(0.3, 1.2, size=2)
    x0, y0 = rng.uniform(-1.5, 1.5, size=2)
    kx, ky = rng.uniform(-1.0, 1.0, size=2)
    amp = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))

    def _f(X, Y):
        return amp * np.exp(
            -ax * (X - x0) ** 2 - ay * (Y - y0) ** 2 + 1j * (kx * X + ky * Y)
        )

    return SmoothFunction2D(_f, box_half_width=half_width)


def polynomial_times_gaussian(coeffs: dict[tuple[int, int], complex],
                              ax: float = 0.5, ay: float = 0.5,
                              half_width: float = 8.0) -> SmoothFunction2D:
    """(sum coeffs[m,n] x^m y^n) * exp(-ax x^2 - ay y^2)."""

    def _f(X, Y):
        poly = np.zeros(np.broadcast(X, Y).shape, dtype=complex)
        for (m, n), c in coeffs.items():
            poly += c * X**m * Y**n
        return poly * np.exp(-ax * X**2 - ay * Y**2)

    return SmoothFunction2D(_f, box_half_width=half_width)


def smooth_step(t) -> np.ndarray:
    """Smooth plateau u(t): 1 for t <= 1, 0 for t >= 2, C-infinity between.

    Built from the standard bump g(s) = exp(-1/s) (s > 0) as
    u = g(2 - t) / (g(2 - t) + g(t - 1)).
    """
    t = np.asarray(t, dtype=float)

    def g(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    up = g(2.0 - t)
    dn = g(t - 1.0)
    return up / (up + dn + 1e-300)


def windowed_coordinate(which: str, plateau_radius: float,
                        half_width: float = 10.0) -> SmoothFunction2D:
    """Coordinate function times a radial plateau (1 inside, 0 beyond 2x).

    Useful as a Schwartz-class stand-in for the affine symbols on any
    region well inside the plateau.
    """
    if which not in ("x", "y"):
        raise ValueError("which must be 'x' or 'y'")

    def _f(X, Y):
        rad = np.hypot(X, Y)
        coord = X if which == "x" else Y
        return (coord * smooth_step(rad / plateau_radius)).astype(complex)

    return SmoothFunction2D(_f, box_half_width=half_width)


def sample_on_grid(f, grid: QuadratureGrid) -> np.ndarray:
    """Samples of f on the grid, shape (N, N), indexed [ix, iy]."""
    X, Y = grid.meshgrid()
    return np.asarray(f(X, Y), dtype=complex)


def grid_to_modes(samples: np.ndarray, grid: QuadratureGrid) -> tuple[np.ndarray, np.ndarray]:
    """Plane-wave coefficients of grid samples.

    Returns ``(k, C)`` with 1D frequency vector ``k`` (fft order,
    shifted to be monotone) and coefficient array ``C`` such that
    ``f(x, y) = sum_{a,b} C[a,b] exp(i(k[a] x + k[b] y))`` interpolates
    the samples exactly.
    """
    N = grid.points_per_axis
    x0 = -grid.half_width
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=grid.spacing)
    C = np.fft.fft2(samples) / (N * N)
    # compensate the grid origin offset: samples start at x0, not 0
    phase = np.exp(-1j * k * x0)
    C = C * phase[:, None] * phase[None, :]
    k_s = np.fft.fftshift(k)
    C_s = np.fft.fftshift(C)
    return k_s, C_s


class SpectralFunction2D:
    """Band-limited function f(z) = sum C[a,b] exp(i(kx[a] x + ky[b] y)).

    The mode lattice always has uniform spacing ``2*pi/(2W)``; ``kx`` and
    ``ky`` are monotone 1D frequency vectors (not necessarily the same
    length after products extend the band).
    """

    def __init__(self, kx: np.ndarray, ky: np.ndarray, coeff: np.ndarray,
                 half_width: float):
        self.kx = np.asarray(kx, dtype=float)
        self.ky = np.asarray(ky, dtype=float)
        self.coeff = np.asarray(coeff, dtype=complex)
        self.half_width = float(half_width)
        if self.coeff.shape != (self.kx.size, self.ky.size):
            raise ValueError("coefficient array does not match mode vectors")

    @property
    def box_half_width(self) -> float:
        return self.half_width

    def __call__(self, X, Y):
        X = np.atleast_1d(np.asarray(X, dtype=float))
        Y = np.atleast_1d(np.asarray(Y, dtype=float))
        shape = np.broadcast(X, Y).shape
        Xf = np.broadcast_to(X, shape).ravel()
        Yf = np.broadcast_to(Y, shape).ravel()
        out = np.zeros(Xf.size, dtype=complex)
        # factorized evaluation: (points x kx) @ C @ (ky x points), chunked
        chunk = max(1, int(2e7 // max(1, self.kx.size * self.ky.size) + 1)) * 512
        for lo in range(0, Xf.size, chunk):
            hi = min(lo + chunk, Xf.size)
            Ex = np.exp(1j * np.outer(Xf[lo:hi], self.kx))
            Ey = np.exp(1j * np.outer(self.ky, Yf[lo:hi]))
            out[lo:hi] = np.einsum("pa,ab,bp->p", Ex, self.coeff, Ey, optimize=True)
        return out.reshape(shape)

    def prune(self, rel_tol: float = 1e-15) -> "SpectralFunction2D":
        """Drop rows/columns of negligible coefficient mass."""
        mag = np.abs(self.coeff)
        cut = rel_tol * mag.max() if mag.size else 0.0
        rows = np.nonzero(mag.max(axis=1) > cut)[0]
        cols = np.nonzero(mag.max(axis=0) > cut)[0]
        if rows.size == 0 or cols.size == 0:
            return SpectralFunction2D(self.kx[:1], self.ky[:1],
                                      np.zeros((1, 1), complex), self.half_width)
        rows = np.arange(rows[0], rows[-1] + 1)
        cols = np.arange(cols[0], cols[-1] + 1)
        return SpectralFunction2D(self.kx[rows], self.ky[cols],
                                  self.coeff[np.ix_(rows, cols)], self.half_width)

    def map_coeff(self, fn) -> "SpectralFunction2D":
        """New function with coefficients fn(KX, KY, C)."""
        KX, KY = np.meshgrid(self.kx, self.ky, indexing="ij")
        return SpectralFunction2D(self.kx, self.ky, fn(KX, KY, self.coeff), self.half_width)

    def conjugate(self) -> "SpectralFunction2D":
        """Pointwise complex conjugate (reflects the mode lattice)."""
        return SpectralFunction2D(-self.kx[::-1], -self.ky[::-1],
                                  np.conj(self.coeff[::-1, ::-1]), self.half_width)

    def derivative(self, axis: str) -> "SpectralFunction2D":
        if axis == "x":
            return self.map_coeff(lambda KX, KY, C: 1j * KX * C)
        return self.map_coeff(lambda KX, KY, C: 1j * KY * C)

    def l2_norm(self) -> float:
        """L2 norm over the periodic box (Parseval)."""
        area = (2.0 * self.half_width) ** 2
        return float(np.sqrt(np.sum(np.abs(self.coeff) ** 2) * area))


def spectral_from_callable(f, grid: QuadratureGrid, rel_tol: float = 1e-15,
                           max_alias_mass: float = 1e-6) -> SpectralFunction2D:
    """Band-limited interpolant of a callable on the grid.

    Raises :class:`ResolutionError` when the upper half of the frequency
    band carries more than ``max_alias_mass`` of the coefficient mass,
    which signals an unresolved (aliased) function.
    """
    samples = sample_on_grid(f, grid)
    k, C = grid_to_modes(samples, grid)
    mag = np.abs(C)
    total = mag.sum()
    if total > 0:
        kmax = np.abs(k).max()
        outer = (np.abs(k)[:, None] > 0.75 * kmax) | (np.abs(k)[None, :] > 0.75 * kmax)
        if mag[outer].sum() > max_alias_mass * total:
            raise ResolutionError(
                "grid too coarse: significant spectral mass near the Nyquist band"
            )
    return SpectralFunction2D(k, k, C, grid.half_width).prune(rel_tol)
