"""Twisted convolution algebra on R^4 and its plane representation.

Functions of four variables multiply by twisted convolution

    (f * g)(p) = int f(q) g(p-q) exp(pi i p^T tau q) dq,

with the skew cocycle matrix ``tau`` fixed by the sector constants.  The
algebra acts on plane functions through a projective family of
phase-times-shift unitaries; integrating a symbol against that family
yields dense operator matrices in the truncated Hermite basis.

All integrals are tensor trapezoid quadrature on symmetric grids at desk
scale; the representation routines refuse budgets beyond a configurable
cap instead of silently degrading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import BasisTruncation, OperatorMatrix, QuadratureGrid, hermite_table
from .errors import ScaleError, ValidationError
from .functions import SmoothFunction2D
from .params import ParameterSet

__all__ = [
    "tau_matrix",
    "TwistedStructure",
    "Grid4D",
    "Function4D",
    "SeparableFunction4D",
    "gaussian_packet4",
    "twisted_product",
    "separable_product_samples",
    "GridSampledFunction4D",
    "l1_norm",
    "involution4",
    "derivation",
    "automorphism_alpha",
    "local_exponents",
    "projective_constants",
    "projective_rep_apply",
    "weyl_factor_apply",
    "weyl_pair_phase",
    "weyl_relation_check",
    "integrated_rep",
    "covariance_defect",
]

_MAX_REP_DIM = 40
_MAX_REP_NODES = 15**4


def tau_matrix(params: ParameterSet) -> np.ndarray:
    """Skew cocycle matrix of the four Weyl generator families."""
    h, t, b = params.hbar0, params.theta0, params.b0
    tau = np.zeros((4, 4))
    tau[0, 1] = b / (2 * math.pi * h)
    tau[0, 2] = -1.0 / (2 * math.pi * h)
    tau[1, 3] = -1.0 / (2 * math.pi * h)
    tau[2, 3] = t / (2 * math.pi * h * h)
    return tau - tau.T


@dataclass(frozen=True)
class TwistedStructure:
    params: ParameterSet
    tau: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tau", tau_matrix(self.params))


@dataclass(frozen=True)
class Grid4D:
    """Symmetric tensor trapezoid grid on [-W, W]^4 (odd node counts)."""

    half_width: float = 6.0
    points_per_axis: int = 21

    def __post_init__(self):
        if self.points_per_axis < 5 or self.points_per_axis % 2 == 0:
            raise ValidationError("points_per_axis must be odd and >= 5")

    def nodes_1d(self) -> tuple[np.ndarray, np.ndarray]:
        N = self.points_per_axis
        x = np.linspace(-self.half_width, self.half_width, N)
        w = np.full(N, x[1] - x[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return x, w

    @property
    def n_nodes(self) -> int:
        return self.points_per_axis**4

    def flat_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """All q-nodes (n, 4) with combined weights (n,)."""
        x, w = self.nodes_1d()
        Q = np.stack(np.meshgrid(x, x, x, x, indexing="ij"), axis=-1).reshape(-1, 4)
        W = (w[:, None, None, None] * w[None, :, None, None]
             * w[None, None, :, None] * w[None, None, None, :]).ravel()
        return Q, W


class Function4D:
    """Pointwise-evaluable complex function on R^4 with decay metadata."""

    def __init__(self, eval_fn: Callable[[np.ndarray], np.ndarray],
                 box_half_width: float = 6.0):
        self._eval = eval_fn
        self.box_half_width = box_half_width

    def __call__(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return np.asarray(self._eval(q), dtype=complex)


class SeparableFunction4D(Function4D):
    """Product of four single-variable factors (fast twisted products)."""

    def __init__(self, factors, box_half_width: float = 6.0):
        self.factors = list(factors)

        def _eval(q):
            out = np.ones(q.shape[:-1], dtype=complex)
            for i, f in enumerate(self.factors):
                out = out * f(q[..., i])
            return out

        super().__init__(_eval, box_half_width)


def gaussian_packet4(rng: np.random.Generator, half_width: float = 6.0) -> SeparableFunction4D:
    """Random axis-separable Gaussian packet (center, width, phase, ramp)."""
    factors = []
    for _ in range(4):
        a = rng.uniform(0.4, 1.1)
        c = rng.uniform(-0.8, 0.8)
        k = rng.uniform(-0.8, 0.8)
        amp = rng.uniform(0.6, 1.4) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        factors.append(lambda t, a=a, c=c, k=k, amp=amp:
                       amp * np.exp(-a * (t - c) ** 2 + 1j * k * t))
    return SeparableFunction4D(factors, box_half_width=half_width)


def twisted_product(f: Function4D, g: Function4D, ts: TwistedStructure,
                    grid: Grid4D | None = None) -> Function4D:
    """Quadrature-backed twisted convolution, evaluable at arbitrary points."""
    grid = grid or Grid4D()
    Q, W = grid.flat_nodes()
    fvals = f(Q) * W
    tauQ = ts.tau @ Q.T  # (4, n)

    def _eval(p):
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1, 4)
        out = np.empty(flat.shape[0], dtype=complex)
        chunk = max(1, int(4e7 // Q.shape[0]))
        for lo in range(0, flat.shape[0], chunk):
            hi = min(lo + chunk, flat.shape[0])
            pc = flat[lo:hi]
            phase = np.exp(1j * math.pi * (pc @ tauQ))
            gv = g(pc[:, None, :] - Q[None, :, :])
            out[lo:hi] = (phase * gv) @ fvals
        return out.reshape(p.shape[:-1])

    return Function4D(_eval, box_half_width=f.box_half_width + g.box_half_width)


def separable_product_samples(f: SeparableFunction4D, g: SeparableFunction4D,
                              ts: TwistedStructure, p_grid: Grid4D,
                              q_grid: Grid4D | None = None) -> np.ndarray:
    """Twisted product sampled on the full 4D output grid, for separable factors.

    The phase couples each integration variable q_m to at most two
    output variables, so the quadrature factorizes into four rank-3
    contractions followed by an elementwise product.  ``q_grid``
    controls the integration accuracy independently of the output grid.
    """
    q_grid = q_grid or p_grid
    xp, _ = p_grid.nodes_1d()
    xq, wq = q_grid.nodes_1d()
    tau = ts.tau
    # phase exponents per q-axis: q1 couples (p2, p3); q2 (p1, p4);
    # q3 (p1, p4); q4 (p2, p3)
    couplings = {
        0: ((1, tau[1, 0]), (2, tau[2, 0])),
        1: ((0, tau[0, 1]), (3, tau[3, 1])),
        2: ((0, tau[0, 2]), (3, tau[3, 2])),
        3: ((1, tau[1, 3]), (2, tau[2, 3])),
    }
    A = []
    for axis in range(4):
        (ia, ca), (ib, cb) = couplings[axis]
        phi = ca * xp[:, None] + cb * xp[None, :]          # (pa, pb)
        fq = f.factors[axis](xq) * wq                      # (q,)
        gq = g.factors[axis](xp[:, None] - xq[None, :])    # (p_axis, q)
        E = np.exp(1j * math.pi * np.einsum("q,ab->qab", xq, phi))
        A.append(np.einsum("q,pq,qab->pab", fq, gq, E, optimize=True))
    return np.einsum("abc,bad,cad,dbc->abcd", A[0], A[1], A[2], A[3], optimize=True)


class GridSampledFunction4D(Function4D):
    """Function backed by samples on a :class:`Grid4D` (exact node lookup)."""

    def __init__(self, samples: np.ndarray, grid: Grid4D):
        self.samples = np.asarray(samples, dtype=complex)
        self.grid = grid
        x, _ = grid.nodes_1d()

        def _eval(q):
            q = np.asarray(q, dtype=float)
            idx = np.rint((q - x[0]) / (x[1] - x[0])).astype(int)
            if np.any(idx < 0) or np.any(idx >= x.size):
                raise ValidationError("query point outside the sampled grid")
            off = q - x[idx]
            if np.abs(off).max() > 1e-9:
                raise ValidationError("grid-sampled function queried off its nodes")
            return self.samples[idx[..., 0], idx[..., 1], idx[..., 2], idx[..., 3]]

        super().__init__(_eval, box_half_width=grid.half_width)


def l1_norm(values_or_fn, grid: Grid4D) -> float:
    """L1 norm by tensor quadrature (accepts samples or a callable)."""
    if callable(values_or_fn):
        Q, W = grid.flat_nodes()
        return float(np.sum(np.abs(values_or_fn(Q)) * W))
    x, w = grid.nodes_1d()
    W4 = np.einsum("a,b,c,d->abcd", w, w, w, w)
    return float(np.sum(np.abs(values_or_fn) * W4))


def involution4(f: Function4D) -> Function4D:
    """f*(q) = conj(f(-q))."""
    return Function4D(lambda q: np.conj(f(-np.asarray(q))), f.box_half_width)


def _q_sharp(q: np.ndarray, b0: float) -> tuple[np.ndarray, np.ndarray]:
    return b0 * q[..., 1] - q[..., 2], -b0 * q[..., 0] - q[..., 3]


def derivation(f: Function4D, j: int, params: ParameterSet) -> Function4D:
    """Derivation (d_j f)(q) = -i q_sharp_j f(q), j in {1, 2}."""
    if j not in (1, 2):
        raise ValidationError("derivation index must be 1 or 2")

    def _eval(q):
        s1, s2 = _q_sharp(np.asarray(q, dtype=float), params.b0)
        s = s1 if j == 1 else s2
        return -1j * s * f(q)

    return Function4D(_eval, f.box_half_width)


def automorphism_alpha(k2: tuple[float, float], f: Function4D,
                       params: ParameterSet) -> Function4D:
    """Plane action alpha_k(f)(q) = exp(-i k . q_sharp) f(q)."""
    k1, k2v = k2

    def _eval(q):
        s1, s2 = _q_sharp(np.asarray(q, dtype=float), params.b0)
        return np.exp(-1j * (k1 * s1 + k2v * s2)) * f(q)

    return Function4D(_eval, f.box_half_width)


def local_exponents(p: np.ndarray, q: np.ndarray) -> tuple[float, float, float]:
    """The three antisymmetric bilinears entering the cocycle expansion."""
    xi = 0.5 * (q[0] * p[2] + q[1] * p[3] - q[2] * p[0] - q[3] * p[1])
    xi_p = 0.5 * (q[2] * p[3] - p[2] * q[3])
    xi_pp = 0.5 * (q[0] * p[1] - p[0] * q[1])
    return float(xi), float(xi_p), float(xi_pp)


# ---------------------------------------------------------------------------
# projective representation on the plane
# ---------------------------------------------------------------------------

def projective_constants(params: ParameterSet) -> dict[str, complex]:
    """Closed-form constants of the projective phase-shift family."""
    h, t, b0 = params.hbar0, params.theta0, params.b0
    r, s = params.r, params.s
    den = r * t * b0 - h
    return {
        "a": 1j / h,
        "b": 1j * b0 * (1 - r) / den,
        "c": 1j * r * b0 / h,
        "d": 1j * (1.0 / (2 * h) + s * t * b0 * (1 - r) / (h * den)),
        "h": 1j * (1.0 / (2 * h) - r * t * b0 * (1 - s) / h**2),
        "m": 1j * (s - 0.5) * t / h**2,
        "n": 1j * (-b0 / (2 * h) + b0 * (1 - r) * (r * t * b0 - r * s * t * b0 - h) / (h * den)),
        "delta": (1 - s) * t / h,
        "lam": (t * b0 * (r + s - r * s) - h) / den,
        "mu": s * t / h,
        "eta": (r * t * b0 * (1 - s) - h) / h,
    }


def projective_rep_apply(k: np.ndarray, f, params: ParameterSet) -> SmoothFunction2D:
    """Apply the projective unitary U(k) to a plane function, exactly."""
    params.validate()
    c = projective_constants(params)
    k1, k2, k3, k4 = (float(v) for v in k)
    pure = (c["d"] * k1 * k3 + c["h"] * k4 * k2 - c["m"] * k3 * k4 + c["n"] * k1 * k2)
    sx = c["delta"] * k4 + c["lam"] * k1
    sy = -c["mu"] * k3 - c["eta"] * k2

    def _eval(X, Y):
        phase = np.exp(c["a"] * k3 * X + c["a"] * k4 * Y - c["b"] * k1 * Y - c["c"] * k2 * X + pure)
        return phase * np.asarray(f(X + sx, Y + sy), dtype=complex)

    hw = getattr(f, "box_half_width", 8.0) + abs(sx) + abs(sy)
    return SmoothFunction2D(_eval, box_half_width=hw)


def weyl_factor_apply(i: int, q: float, f, params: ParameterSet) -> SmoothFunction2D:
    """Apply the single one-parameter unitary U_i(q) to a plane function."""
    c = projective_constants(params)
    if i == 1:
        phase = lambda X, Y: np.exp(-c["b"] * q * Y)
        shift = (c["lam"] * q, 0.0)
    elif i == 2:
        phase = lambda X, Y: np.exp(-c["c"] * q * X)
        shift = (0.0, -c["eta"] * q)
    elif i == 3:
        phase = lambda X, Y: np.exp(c["a"] * q * X)
        shift = (0.0, -c["mu"] * q)
    elif i == 4:
        phase = lambda X, Y: np.exp(c["a"] * q * Y)
        shift = (c["delta"] * q, 0.0)
    else:
        raise ValidationError("factor index must be in 1..4")
    sx, sy = shift

    def _eval(X, Y):
        return phase(X, Y) * np.asarray(f(X + sx, Y + sy), dtype=complex)

    hw = getattr(f, "box_half_width", 8.0) + abs(sx) + abs(sy)
    return SmoothFunction2D(_eval, box_half_width=hw)


def weyl_pair_phase(i: int, j: int, qi: float, qj: float, params: ParameterSet) -> complex:
    """Analytic phase in U_i(qi) U_j(qj) = phase * U_j(qj) U_i(qi)."""
    h, t, b0 = params.hbar0, params.theta0, params.b0
    key = (min(i, j), max(i, j))
    sign = 1.0 if i < j else -1.0
    if key == (1, 3):
        ang = qi * qj / h
    elif key == (2, 4):
        ang = qi * qj / h
    elif key == (1, 2):
        ang = -b0 * qi * qj / h
    elif key == (3, 4):
        ang = -t * qi * qj / h**2
    elif key in ((1, 4), (2, 3)):
        return 1.0 + 0.0j
    else:
        raise ValidationError(f"invalid generator pair ({i},{j})")
    return complex(np.exp(1j * sign * ang))


def weyl_relation_check(i: int, j: int, qi: float, qj: float, params: ParameterSet,
                        probe=None, n_samples: int = 40, seed: int = 3) -> dict:
    """Measure the reordering phase of a generator pair on a probe function."""
    if i == j:
        raise ValidationError("generator indices must differ")
    from .functions import gaussian2d

    probe = probe or gaussian2d(0.5, 0.5)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, n_samples)
    Y = rng.uniform(-2, 2, n_samples)
    fwd = weyl_factor_apply(i, qi, weyl_factor_apply(j, qj, probe, params), params)
    rev = weyl_factor_apply(j, qj, weyl_factor_apply(i, qi, probe, params), params)
    num = fwd(X, Y)
    den = rev(X, Y)
    good = np.abs(den) > 1e-12
    if not np.any(good):
        raise ValidationError("probe vanishes at all sample points; phase indeterminate")
    measured = num[good] / den[good]
    analytic = weyl_pair_phase(i, j, qi, qj, params)
    return {
        "measured_phase": complex(measured.mean()),
        "analytic_phase": analytic,
        "max_deviation": float(np.abs(measured - analytic).max()),
        "n_used": int(good.sum()),
    }


# ---------------------------------------------------------------------------
# integrated representation
# ---------------------------------------------------------------------------

def integrated_rep(f: Function4D, params: ParameterSet, basis: BasisTruncation,
                   grid4: Grid4D, grid2: QuadratureGrid | None = None,
                   max_dim: int = _MAX_REP_DIM, max_nodes: int = _MAX_REP_NODES) -> OperatorMatrix:
    """Matrix of the integrated symbol: rho(f) = int f(-k) U(k) dk.

    Matrix elements factor into 1D phase-shift overlaps of Hermite
    functions, batched over the (k1, k4) and (k2, k3) planes.  Refuses
    budgets beyond ``max_dim`` / ``max_nodes``.
    """
    if basis.scalar_dim > max_dim:
        raise ScaleError(f"scalar dimension {basis.scalar_dim} beyond desk-scale cap {max_dim}")
    if grid4.n_nodes > max_nodes:
        raise ScaleError(f"{grid4.n_nodes} quadrature nodes beyond desk-scale cap {max_nodes}")
    grid2 = grid2 or QuadratureGrid(10.0, 96)
    params.validate()
    c = projective_constants(params)
    L = basis.level_L
    x, wx = grid2.nodes_1d()
    H = hermite_table(L, x)
    Hw = H * wx

    k, wk = grid4.nodes_1d()
    nk = k.size
    # u-plane: (k1, k4); v-plane: (k2, k3)
    K1 = np.repeat(k, nk)
    K4 = np.tile(k, nk)
    W14 = np.repeat(wk, nk) * np.tile(wk, nk)
    K2 = np.repeat(k, nk)
    K3 = np.tile(k, nk)
    W23 = np.repeat(wk, nk) * np.tile(wk, nk)

    # x data: phase (a k3 - c k2) x over v; shift (delta k4 + lam k1) over u
    Ex = np.exp(np.multiply.outer(c["a"] * K3 - c["c"] * K2, x))          # (V, nx)
    shx = c["delta"] * K4 + c["lam"] * K1                                  # (U,)
    Ey = np.exp(np.multiply.outer(c["a"] * K4 - c["b"] * K1, x))          # (U, nx)
    shy = -(c["mu"] * K3 + c["eta"] * K2)                                  # (V,)

    Hx = _shifted_tables(L, x, shx)                                        # (U, L+1, nx)
    Hy = _shifted_tables(L, x, shy)                                        # (V, L+1, nx)
    Ix = np.einsum("pn,vn,umn->vupm", Hw, Ex, Hx, optimize=True)
    Iy = np.einsum("qn,un,vmn->uvqm", Hw, Ey, Hy, optimize=True)

    # symbol weight: f(-k) * bilinear phase * quadrature weights
    kvec = np.empty((K1.size, K2.size, 4))
    kvec[..., 0] = K1[:, None]
    kvec[..., 1] = K2[None, :]
    kvec[..., 2] = K3[None, :]
    kvec[..., 3] = K4[:, None]
    # bilinear phase d k1 k3 + h k4 k2 - m k3 k4 + n k1 k2 over (u, v)
    pure = np.exp(
        c["d"] * K1[:, None] * K3[None, :]
        + c["h"] * K4[:, None] * K2[None, :]
        - c["m"] * K4[:, None] * K3[None, :]
        + c["n"] * K1[:, None] * K2[None, :]
    )
    F = f(-kvec) * pure * (W14[:, None] * W23[None, :])                    # (U, V)

    U = K1.size
    V = K2.size
    A = Ix.transpose(1, 0, 2, 3).reshape(U * V, -1)                        # [(u,v), (p,m)]
    B = (F[..., None, None] * Iy.reshape(U, V, (L + 1), (L + 1))).reshape(U * V, -1)
    M2 = (A.T @ B).reshape(L + 1, L + 1, L + 1, L + 1)                     # [p, m, q, n]
    P = np.array([p for (p, q) in basis.pairs])
    Q = np.array([q for (p, q) in basis.pairs])
    Mc = np.array([m for (m, n) in basis.pairs])
    Nc = np.array([n for (m, n) in basis.pairs])
    out = M2[P[:, None], Mc[None, :], Q[:, None], Nc[None, :]]
    return OperatorMatrix(np.ascontiguousarray(out), basis)


def _shifted_tables(L: int, x: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    args = x[None, :] + shifts[:, None]
    table = hermite_table(L, args.ravel())
    return table.reshape(L + 1, shifts.size, x.size).transpose(1, 0, 2)


def covariance_defect(f: Function4D, k2: tuple[float, float], params: ParameterSet,
                      basis: BasisTruncation, grid4: Grid4D,
                      grid2: QuadratureGrid | None = None,
                      max_dim: int = 80, interior_margin: int | None = None) -> dict:
    """Covariance of the integrated representation under the plane action.

    Compares U_k rho(f) U_k^dagger with rho(alpha_k f), where U_k is the
    matrix exponential of the truncated momentum pair.  The exponential
    of a truncated generator corrupts the edge block, so the comparison
    is restricted to the interior (margin defaults to level/3).
    """
    from scipy.linalg import expm

    from .kinematics import build_kinematics

    kin = build_kinematics(params, basis)
    gen = -1j * (k2[0] * kin.Pi_x.mat + k2[1] * kin.Pi_y.mat)
    Uk = expm(gen)
    rho_f = integrated_rep(f, params, basis, grid4, grid2, max_dim=max_dim).mat
    rho_af = integrated_rep(automorphism_alpha(k2, f, params), params, basis, grid4,
                            grid2, max_dim=max_dim).mat
    lhs = Uk @ rho_f @ Uk.conj().T
    margin = interior_margin if interior_margin is not None else max(2, basis.level_L // 3)
    ii = basis.interior_indices(margin)
    defect = np.linalg.norm(lhs[np.ix_(ii, ii)] - rho_af[np.ix_(ii, ii)], 2)
    scale = float(np.linalg.norm(rho_f[np.ix_(ii, ii)], 2))
    return {
        "defect": float(defect),
        "scale": scale,
        "relative": float(defect / max(scale, 1e-300)),
    }
