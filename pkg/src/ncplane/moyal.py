"""Star products on the plane, ordering multiplier, and left-multiplication matrices.

Two backends realize the deformed product:

* The *series* backend evaluates the bidifferential expansion

      f *_rho g = sum_{j,k} ((-i(rho-1)T)^j / j!) ((-i rho T)^k / k!)
                  (dx^j dy^k f)(dy^j dx^k g),

  with T the effective deformation scale.  It is restricted to inputs
  where the sum terminates exactly: at least one factor must be a
  polynomial (the other may be polynomial or polynomial-times-Gaussian).

* The *grid* backend works in Fourier space, where the product of plane
  waves is exact:

      exp(i k.z) *_rho exp(i l.z)
          = exp(i (k+l).z) * exp(i (rho-1) T kx ly + i rho T ky lx).

  Functions are represented by band-limited mode sums on a quadrature
  grid; the product is the twisted accumulation of mode pairs.  The sign
  conventions of the transform (modes exp(+i k.z), coefficients from the
  forward FFT) are fixed here once and used everywhere.

The ordering-change operator is the Fourier multiplier
``exp(-i(1/2 - rho) T kx ky)`` (forward direction), which maps the
rho-ordered product to the symmetric one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisTruncation, OperatorMatrix, QuadratureGrid, hermite_table
from .errors import ResolutionError, ScaleError, ValidationError
from .functions import (
    SmoothFunction2D,
    SpectralFunction2D,
    spectral_from_callable,
)
from .kinematics import FirstOrderOp, GaussianPolynomial, build_1d_ops, lift_2d
from .params import ParameterSet

__all__ = [
    "StarConfig",
    "PolynomialFunction2D",
    "star",
    "star_apply_symbol",
    "t_rho",
    "involution_rho",
    "left_mult_matrix",
    "affine_left_mult",
    "gauge_slopes",
]

_MAX_PRODUCT_MODES = 200_000


@dataclass(frozen=True)
class StarConfig:
    """Configuration of the deformed product."""

    theta_eff: float
    rho: float = 0.5
    backend: str = "grid"
    grid: QuadratureGrid = field(default_factory=lambda: QuadratureGrid(10.0, 128))
    series_max_order: int = 8
    mode_rel_tol: float = 1e-14
    max_alias_mass: float = 1e-3

    def __post_init__(self):
        if self.backend not in ("series", "grid"):
            raise ValidationError(f"unknown star backend '{self.backend}'")

    @classmethod
    def for_params(cls, params: ParameterSet, backend: str = "grid",
                   grid: QuadratureGrid | None = None) -> "StarConfig":
        return cls(theta_eff=params.theta_eff, rho=params.rho, backend=backend,
                   grid=grid or QuadratureGrid(10.0, 128))


class PolynomialFunction2D:
    """Polynomial in (x, y) with exact complex coefficient arithmetic."""

    def __init__(self, coeffs: dict[tuple[int, int], complex]):
        self.coeffs = {k: complex(v) for k, v in coeffs.items() if v != 0}

    @classmethod
    def coordinate(cls, which: str) -> "PolynomialFunction2D":
        if which == "x":
            return cls({(1, 0): 1.0})
        if which == "y":
            return cls({(0, 1): 1.0})
        raise ValidationError("coordinate must be 'x' or 'y'")

    @property
    def degree(self) -> int:
        return max((m + n for m, n in self.coeffs), default=0)

    def __call__(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(np.broadcast(X, Y).shape, dtype=complex)
        for (m, n), c in self.coeffs.items():
            out += c * X**m * Y**n
        return out

    def derivative(self, axis: str) -> "PolynomialFunction2D":
        out: dict[tuple[int, int], complex] = {}
        for (m, n), c in self.coeffs.items():
            if axis == "x" and m >= 1:
                out[(m - 1, n)] = out.get((m - 1, n), 0.0) + m * c
            if axis == "y" and n >= 1:
                out[(m, n - 1)] = out.get((m, n - 1), 0.0) + n * c
        return PolynomialFunction2D(out)

    def __mul__(self, other):
        if isinstance(other, PolynomialFunction2D):
            out: dict[tuple[int, int], complex] = {}
            for (m1, n1), c1 in self.coeffs.items():
                for (m2, n2), c2 in other.coeffs.items():
                    key = (m1 + m2, n1 + n2)
                    out[key] = out.get(key, 0.0) + c1 * c2
            return PolynomialFunction2D(out)
        if isinstance(other, GaussianPolynomial):
            out: dict[tuple[int, int], complex] = {}
            for (m1, n1), c1 in self.coeffs.items():
                for (m2, n2), c2 in other.coeffs.items():
                    key = (m1 + m2, n1 + n2)
                    out[key] = out.get(key, 0.0) + c1 * c2
            return GaussianPolynomial((other.alpha, other.beta, other.gamma), out)
        return NotImplemented

    def __add__(self, other: "PolynomialFunction2D") -> "PolynomialFunction2D":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return PolynomialFunction2D(out)

    def scale(self, c: complex) -> "PolynomialFunction2D":
        return PolynomialFunction2D({k: c * v for k, v in self.coeffs.items()})


def _gp_derivative(g: GaussianPolynomial, axis: str) -> GaussianPolynomial:
    op = FirstOrderOp(p=1.0) if axis == "x" else FirstOrderOp(q=1.0)
    return g.apply(op)


def _series_star(f, g, cfg: StarConfig):
    """Terminating bidifferential expansion; f or g must be polynomial."""
    f_poly = isinstance(f, PolynomialFunction2D)
    g_poly = isinstance(g, PolynomialFunction2D)
    if not (f_poly or g_poly):
        raise ValidationError("series backend needs at least one polynomial factor")
    deg = f.degree if f_poly else g.degree
    if deg > cfg.series_max_order:
        raise ValidationError(
            f"polynomial degree {deg} exceeds series_max_order {cfg.series_max_order}"
        )
    T = cfg.theta_eff
    cjs = -1j * (cfg.rho - 1.0) * T
    cks = -1j * cfg.rho * T

    def deriv(h, axis, times):
        for _ in range(times):
            h = h.derivative(axis) if isinstance(h, PolynomialFunction2D) else _gp_derivative(h, axis)
        return h

    terms = []
    # the terminating index runs over the polynomial factor's derivatives
    for j in range(deg + 1):
        for k in range(deg + 1 - j):
            w = (cjs**j / math.factorial(j)) * (cks**k / math.factorial(k))
            if w == 0:
                continue
            df = deriv(deriv(f, "x", j), "y", k)
            dg = deriv(deriv(g, "y", j), "x", k)
            if not df.coeffs or not dg.coeffs:
                continue
            if isinstance(df, PolynomialFunction2D):
                prod = df * dg
            elif isinstance(dg, PolynomialFunction2D):
                prod = dg * df
            else:
                raise ValidationError(
                    "series backend supports polynomial and polynomial*Gaussian factors"
                )
            terms.append((w, prod))
    if not terms:
        return PolynomialFunction2D({})
    if all(isinstance(p, PolynomialFunction2D) for _, p in terms):
        out = PolynomialFunction2D({})
        for w, p in terms:
            out = out + p.scale(w)
        return out
    # Gaussian-polynomial result: merge coefficient tables
    exps = next(p for _, p in terms if isinstance(p, GaussianPolynomial))
    merged: dict[tuple[int, int], complex] = {}
    for w, p in terms:
        for key, val in p.coeffs.items():
            merged[key] = merged.get(key, 0.0) + w * val
    return GaussianPolynomial((exps.alpha, exps.beta, exps.gamma), merged)


def _as_spectral(f, cfg: StarConfig) -> SpectralFunction2D:
    if isinstance(f, SpectralFunction2D):
        if abs(f.half_width - cfg.grid.half_width) > 1e-12:
            raise ResolutionError("spectral function lives on a different box")
        return f
    return spectral_from_callable(f, cfg.grid, rel_tol=cfg.mode_rel_tol,
                                  max_alias_mass=cfg.max_alias_mass)


def _significant_modes(F: SpectralFunction2D, rel_tol: float):
    mag = np.abs(F.coeff)
    total = mag.sum()
    if total == 0:
        return np.empty((0, 2), dtype=int), np.empty(0, dtype=complex)
    mask = mag > rel_tol * mag.max()
    idx = np.argwhere(mask)
    return idx, F.coeff[mask]


def _grid_star(f, g, cfg: StarConfig) -> SpectralFunction2D:
    """Twisted accumulation of mode pairs; exact for band-limited factors."""
    F = _as_spectral(f, cfg)
    G = _as_spectral(g, cfg)
    fi, fc = _significant_modes(F, cfg.mode_rel_tol)
    if fi.shape[0] * G.coeff.size > _MAX_PRODUCT_MODES * 10_000:
        raise ScaleError(
            f"grid star product budget exceeded: {fi.shape[0]} x {G.coeff.size} mode pairs"
        )
    dk = 2.0 * np.pi / (2.0 * cfg.grid.half_width)
    # output lattice spans the sum of both mode ranges
    kx_min = F.kx[0] + G.kx[0]
    ky_min = F.ky[0] + G.ky[0]
    nx = F.kx.size + G.kx.size - 1
    ny = F.ky.size + G.ky.size - 1
    out = np.zeros((nx, ny), dtype=complex)
    T = cfg.theta_eff
    rho = cfg.rho
    # phase(k, l) = exp(i (rho-1) T kx*ly) * exp(i rho T ky*lx)
    ly = G.ky[None, :]
    lx = G.kx[:, None]
    fkx = F.kx[fi[:, 0]]
    fky = F.ky[fi[:, 1]]
    for t in range(fi.shape[0]):
        a, b = fi[t]
        phase = np.exp(1j * (rho - 1.0) * T * fkx[t] * ly) * np.exp(1j * rho * T * fky[t] * lx)
        out[a : a + G.kx.size, b : b + G.ky.size] += fc[t] * (phase * G.coeff)
    kx = kx_min + dk * np.arange(nx)
    ky = ky_min + dk * np.arange(ny)
    return SpectralFunction2D(kx, ky, out, cfg.grid.half_width).prune(cfg.mode_rel_tol)


def star(f, g, cfg: StarConfig):
    """Deformed product f *_rho g with the configured backend."""
    if cfg.backend == "series":
        return _series_star(f, g, cfg)
    return _grid_star(f, g, cfg)


def star_apply_symbol(symbol, phi, cfg: StarConfig) -> SpectralFunction2D:
    """Left multiplication symbol *_rho phi with an exactly evaluated symbol.

    ``symbol`` may grow polynomially (it is never Fourier transformed);
    ``phi`` must be band-limited on the configured grid.  Uses the exact
    plane-wave shift

        symbol *_rho exp(i l.z)
            = exp(i l.z) symbol(x + (rho-1) T ly, y + rho T lx).
    """
    P = _as_spectral(phi, cfg)
    pi, pc = _significant_modes(P, cfg.mode_rel_tol)
    X, Y = cfg.grid.meshgrid()
    out = np.zeros(X.shape, dtype=complex)
    T = cfg.theta_eff
    rho = cfg.rho
    lx = P.kx[pi[:, 0]]
    ly = P.ky[pi[:, 1]]
    for t in range(pi.shape[0]):
        shift_x = (rho - 1.0) * T * ly[t]
        shift_y = rho * T * lx[t]
        out += pc[t] * np.exp(1j * (lx[t] * X + ly[t] * Y)) * np.asarray(
            symbol(X + shift_x, Y + shift_y), dtype=complex
        )
    k, C = _raw_modes(out, cfg.grid)
    return SpectralFunction2D(k, k, C, cfg.grid.half_width).prune(cfg.mode_rel_tol)


def _raw_modes(samples: np.ndarray, grid: QuadratureGrid):
    from .functions import grid_to_modes

    return grid_to_modes(samples, grid)


def t_rho(f, cfg: StarConfig, direction: str = "forward") -> SpectralFunction2D:
    """Ordering-change Fourier multiplier exp(-+ i (1/2 - rho) T kx ky)."""
    if direction not in ("forward", "inverse"):
        raise ValidationError("direction must be 'forward' or 'inverse'")
    F = _as_spectral(f, cfg)
    sgn = -1.0 if direction == "forward" else 1.0
    c = sgn * 1j * (0.5 - cfg.rho) * cfg.theta_eff
    return F.map_coeff(lambda KX, KY, C: np.exp(c * KX * KY) * C)


def involution_rho(f, cfg: StarConfig) -> SpectralFunction2D:
    """rho-involution: forward multiplier, conjugation, inverse multiplier."""
    return t_rho(t_rho(f, cfg, "forward").conjugate(), cfg, "inverse")


# ---------------------------------------------------------------------------
# left-multiplication matrices
# ---------------------------------------------------------------------------

def left_mult_matrix(f, cfg: StarConfig, basis: BasisTruncation,
                     chunk: int = 512) -> OperatorMatrix:
    """Matrix of psi -> f *_rho psi in the truncated Hermite basis.

    Decomposes ``f`` into grid modes; for each mode the product with a
    basis function is an exact phase-times-shift, so every entry reduces
    to separable 1D overlap integrals evaluated on the quadrature grid:

        <h_a, exp(ik.z) h_b(z - v)> = Ox[p_a, m_b] * Oy[q_a, n_b],
        v = (-rho T ky, (1-rho) T kx).
    """
    F = _as_spectral(f, cfg)
    idx, coeffs = _significant_modes(F, cfg.mode_rel_tol)
    if idx.shape[0] > _MAX_PRODUCT_MODES:
        raise ScaleError(f"{idx.shape[0]} significant modes exceed the assembly budget")
    L = basis.level_L
    x, w = cfg.grid.nodes_1d()
    H = hermite_table(L, x)          # (L+1, N)
    Hw = H * w                       # quadrature-weighted row functions
    T = cfg.theta_eff
    rho = cfg.rho
    kxs = F.kx[idx[:, 0]]
    kys = F.ky[idx[:, 1]]
    dim = basis.scalar_dim
    P = np.array([p for (p, q) in basis.pairs])
    Q = np.array([q for (p, q) in basis.pairs])
    M2 = np.zeros(((L + 1) ** 2, (L + 1) ** 2), dtype=complex)
    for lo in range(0, idx.shape[0], chunk):
        hi = min(lo + chunk, idx.shape[0])
        kx = kxs[lo:hi]
        ky = kys[lo:hi]
        c = coeffs[lo:hi]
        vx = -rho * T * ky
        vy = (1.0 - rho) * T * kx
        Hx = _shifted_hermite(L, x, vx)      # (J, L+1, N)
        Hy = _shifted_hermite(L, x, vy)
        Ex = np.exp(1j * np.outer(kx, x))    # (J, N)
        Ey = np.exp(1j * np.outer(ky, x))
        Ox = np.einsum("pn,jn,jmn->jpm", Hw, Ex, Hx, optimize=True)
        Oy = np.einsum("qn,jn,jmn->jqm", Hw, Ey, Hy, optimize=True)
        J = hi - lo
        A = (Ox * c[:, None, None]).reshape(J, -1)
        B = Oy.reshape(J, -1)
        M2 += A.T @ B                        # [(p,m), (q,n)]
    M2 = M2.reshape(L + 1, L + 1, L + 1, L + 1)
    Mcol = np.array([m for (m, n) in basis.pairs])
    Ncol = np.array([n for (m, n) in basis.pairs])
    out = M2[P[:, None], Mcol[None, :], Q[:, None], Ncol[None, :]]
    return OperatorMatrix(np.ascontiguousarray(out), basis)


def _shifted_hermite(L: int, x: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """h_m(x - v) for all m <= L, shape (len(shifts), L+1, len(x))."""
    args = x[None, :] - shifts[:, None]
    table = hermite_table(L, args.ravel())
    return table.reshape(L + 1, shifts.size, x.size).transpose(1, 0, 2)


def gauge_slopes(params: ParameterSet) -> tuple[float, float]:
    """Slope coefficients (alpha_x, alpha_y) of the constant-field potentials."""
    disc = params.gauge_discriminant
    if disc < 0:
        raise ValidationError("inadmissible parameters: constraint 'gauge_discriminant_nonneg' violated")
    den = params.hbar0 + math.sqrt(disc)
    ax = -2.0 * (1.0 - params.rho) * params.hbar0 * params.b_ext / den
    ay = 2.0 * params.rho * params.hbar0 * params.b_ext / den
    return ax, ay


def affine_left_mult(which: str, params: ParameterSet, basis: BasisTruncation) -> OperatorMatrix:
    """Exact left-multiplication matrices for the affine symbols.

    ``x``   -> x + i(1-rho) T d/dy
    ``y``   -> y - i rho T d/dx
    ``A_x`` -> alpha_x * (y - i rho T d/dx)
    ``A_y`` -> alpha_y * (x + i(1-rho) T d/dy)
    """
    params.validate()
    T = params.theta_eff
    rho = params.rho
    ops = build_1d_ops(max(1, basis.level_L))
    Xl = lift_2d(ops["X1"], "x", basis)
    Yl = lift_2d(ops["X1"], "y", basis)
    Dxl = lift_2d(ops["Dx1"], "x", basis)
    Dyl = lift_2d(ops["Dx1"], "y", basis)
    Lx = Xl + 1j * (1.0 - rho) * T * Dyl
    Ly = Yl - 1j * rho * T * Dxl
    if which == "x":
        return OperatorMatrix(Lx, basis)
    if which == "y":
        return OperatorMatrix(Ly, basis)
    ax, ay = gauge_slopes(params)
    if which == "A_x":
        return OperatorMatrix(ax * Ly, basis)
    if which == "A_y":
        return OperatorMatrix(ay * Lx, basis)
    raise ValidationError("which must be one of 'x', 'y', 'A_x', 'A_y'")
