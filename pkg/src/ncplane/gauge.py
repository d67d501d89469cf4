"""Localized gauge perturbations of the Moyal-side Dirac operator.

The base operator here is a realization of the Dirac family acting on
the same Hilbert space as left star multiplication.  Its normalized
momenta are chosen so that conjugation generates plane translations of
the multiplier symbol for the *active* ordering parameter rho, i.e.

    [P_x, L_f] = -i L_{df/dx},   [P_y, L_f] = -i L_{df/dy},

together with the oscillator commutator [P_x, P_y] = i.  (The momenta
are unique only up to the commutant; the concrete coefficients are a
recorded choice.)  The constant-field potentials are affine, so they
are localized by a smooth radial plateau cutoff before insertion into
the perturbation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisTruncation, OperatorMatrix, QuadratureGrid, build_1d_ops, lift_2d
from .errors import ResolutionError, ValidationError
from .functions import SmoothFunction2D, SpectralFunction2D
from .kinematics import FirstOrderOp, pauli
from .moyal import StarConfig, affine_left_mult, gauge_slopes, left_mult_matrix, star_apply_symbol, t_rho
from .params import ParameterSet

__all__ = [
    "GaugePotential",
    "gauge_potentials",
    "CutoffProfile",
    "localized_potentials",
    "base_momenta",
    "moyal_dirac",
    "perturbation_matrix",
    "minimal_coupled",
    "PerturbedOperators",
    "build_perturbed",
    "ladder_decomposition",
    "resolvent_apply",
    "convergence_sweep",
    "commutator_probe",
    "local_compactness_probe",
    "cutoff_tail_norms",
]


# ---------------------------------------------------------------------------
# potentials and cutoffs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugePotential:
    """Slope coefficients of the constant-field potentials A_x = ax*y, A_y = ay*x."""

    alpha_x: float
    alpha_y: float
    params: ParameterSet


def gauge_potentials(params: ParameterSet) -> GaugePotential:
    ax, ay = gauge_slopes(params)
    return GaugePotential(alpha_x=ax, alpha_y=ay, params=params)


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth radial plateau: 1 on |z| <= R, 0 on |z| >= 2R."""

    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValidationError("cutoff radius must be positive")

    def profile(self, t: np.ndarray) -> np.ndarray:
        """The unscaled step u(t) in the radial variable t >= 0."""
        from .functions import smooth_step

        return smooth_step(t)

    def __call__(self, X, Y):
        rad = np.hypot(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
        return self.profile(rad / self.R)


def localized_potentials(gp: GaugePotential, cutoff: CutoffProfile,
                         cfg: StarConfig) -> dict[str, SpectralFunction2D]:
    """Cutoff potentials pulled back through the inverse ordering multiplier.

    For rho = 1/2 these are the plain windowed potentials; otherwise the
    inverse Fourier multiplier is applied mode-wise.  The grid must put
    several nodes across the cutoff transition annulus; support beyond
    the box is clipped, which is quadrature-exact for any basis resolved
    by the box.
    """
    grid = cfg.grid
    if grid.spacing > cutoff.R / 3.0:
        raise ResolutionError(
            f"grid spacing {grid.spacing:.3g} too coarse for cutoff radius {cutoff.R}"
        )
    # support beyond the box is clipped deliberately; disable the alias guard
    cfg = replace(cfg, max_alias_mass=float("inf"))

    def windowed(slope_axis: str, slope: float):
        def _f(X, Y):
            coord = Y if slope_axis == "y" else X
            return (slope * coord * cutoff(X, Y)).astype(complex)

        return SmoothFunction2D(_f, box_half_width=grid.half_width)

    ax_fun = windowed("y", gp.alpha_x)
    ay_fun = windowed("x", gp.alpha_y)
    return {
        "Axr": t_rho(ax_fun, cfg, "inverse"),
        "Ayr": t_rho(ay_fun, cfg, "inverse"),
        "clipped": 2.0 * cutoff.R > grid.half_width,
    }


# ---------------------------------------------------------------------------
# base Dirac operator on the multiplier side
# ---------------------------------------------------------------------------

def base_momenta(params: ParameterSet) -> tuple[FirstOrderOp, FirstOrderOp]:
    """Normalized momenta compatible with left multiplication at this rho.

    P_x = mu*y + i(mu*(1-rho)*T - 1) d/dx,
    P_y = nu*x - i(1 + nu*rho*T) d/dy,
    with mu - nu + mu*nu*T = 1 so that [P_x, P_y] = i.  For T <= 1 the
    symmetric branch nu = -mu keeps the ground states well localized.
    """
    T = params.theta_eff
    rho = params.rho
    if T <= 1.0:
        mu = 0.5 if T == 0.0 else (1.0 - math.sqrt(1.0 - T)) / T
        nu = -mu
    else:
        mu = 2.0 / T
        nu = (1.0 - mu) / (mu * T - 1.0)
    Px = FirstOrderOp(v=mu, p=1j * (mu * (1.0 - rho) * T - 1.0))
    Py = FirstOrderOp(u=nu, q=-1j * (1.0 + nu * rho * T))
    ccr = Px.commutator_scalar(Py)
    if abs(ccr - 1j) > 1e-10:
        raise ValidationError(f"base momenta commutator {ccr} != i")
    return Px, Py


def moyal_dirac(params: ParameterSet, basis: BasisTruncation) -> OperatorMatrix:
    """Base Dirac matrix (P_x x sigma_x + P_y x sigma_y)/sqrt(2)."""
    params.validate()
    Px, Py = base_momenta(params)
    mx = Px.matrix(basis)
    my = Py.matrix(basis)
    D = (np.kron(pauli("x"), mx) + np.kron(pauli("y"), my)) / math.sqrt(2.0)
    return OperatorMatrix(D, basis, spinor=True)


def perturbation_matrix(gp: GaugePotential, cutoff: CutoffProfile, cfg: StarConfig,
                        basis: BasisTruncation) -> OperatorMatrix:
    """Bounded perturbation -e (L_Axr x sigma_x + L_Ayr x sigma_y)."""
    loc = localized_potentials(gp, cutoff, cfg)
    Lx = left_mult_matrix(loc["Axr"], cfg, basis).mat
    Ly = left_mult_matrix(loc["Ayr"], cfg, basis).mat
    e = gp.params.e
    B = -e * (np.kron(pauli("x"), Lx) + np.kron(pauli("y"), Ly))
    return OperatorMatrix(B, basis, spinor=True)


def minimal_coupled(params: ParameterSet, basis: BasisTruncation) -> OperatorMatrix:
    """Formal minimally coupled operator with exact affine multipliers."""
    D = moyal_dirac(params, basis).mat
    Lax = affine_left_mult("A_x", params, basis).mat
    Lay = affine_left_mult("A_y", params, basis).mat
    M = D - params.e * (np.kron(pauli("x"), Lax) + np.kron(pauli("y"), Lay))
    return OperatorMatrix(M, basis, spinor=True)


@dataclass
class PerturbedOperators:
    """The operator chain D_base, B_R, D_R = D_base + B_R, D_inf."""

    D_base: OperatorMatrix
    B_R: OperatorMatrix
    D_R: OperatorMatrix
    D_inf: OperatorMatrix
    cfg: StarConfig
    cutoff: CutoffProfile


def build_perturbed(params: ParameterSet, basis: BasisTruncation,
                    cutoff: CutoffProfile, cfg: StarConfig) -> PerturbedOperators:
    gp = gauge_potentials(params)
    D_base = moyal_dirac(params, basis)
    B_R = perturbation_matrix(gp, cutoff, cfg, basis)
    D_R = OperatorMatrix(D_base.mat + B_R.mat, basis, spinor=True)
    D_inf = minimal_coupled(params, basis)
    return PerturbedOperators(D_base=D_base, B_R=B_R, D_R=D_R, D_inf=D_inf,
                              cfg=cfg, cutoff=cutoff)


# ---------------------------------------------------------------------------
# ladder decomposition and the analytic-vector bound
# ---------------------------------------------------------------------------

def ladder_decomposition(params: ParameterSet) -> dict:
    """Constant 2x2 matrices M1..M4 with D_inf = M1 a_x + M2 a_x* + M3 a_y + M4 a_y*.

    Computed from the first-order coefficients of the minimally coupled
    operator; K = sum of operator norms bounds the action on degree-l
    states by K*sqrt(l+1).
    """
    Px, Py = base_momenta(params)
    ax_slope, ay_slope = gauge_slopes(params)
    T = params.theta_eff
    rho = params.rho
    e = params.e
    # affine multipliers: L_Ax = ax*(y - i rho T dx), L_Ay = ay*(x + i(1-rho) T dy)
    Lax = FirstOrderOp(v=ax_slope, p=-1j * rho * T * ax_slope)
    Lay = FirstOrderOp(u=ay_slope, q=1j * (1.0 - rho) * T * ay_slope)
    sx, sy = pauli("x"), pauli("y")
    inv_s2 = 1.0 / math.sqrt(2.0)
    cx_op = inv_s2 * Px + (-e) * Lax   # sigma_x component
    cy_op = inv_s2 * Py + (-e) * Lay   # sigma_y component
    Bx = cx_op.p * sx + cy_op.p * sy
    By = cx_op.q * sx + cy_op.q * sy
    Cx = cx_op.u * sx + cy_op.u * sy
    Cy = cx_op.v * sx + cy_op.v * sy
    M1 = (Bx + Cx) / math.sqrt(2.0)
    M2 = (Cx - Bx) / math.sqrt(2.0)
    M3 = (By + Cy) / math.sqrt(2.0)
    M4 = (Cy - By) / math.sqrt(2.0)
    K = sum(float(np.linalg.norm(M, 2)) for M in (M1, M2, M3, M4))
    return {"M1": M1, "M2": M2, "M3": M3, "M4": M4, "K": K}


def ladder_reconstruction(params: ParameterSet, basis: BasisTruncation) -> OperatorMatrix:
    """Rebuild the minimally coupled matrix from the ladder decomposition."""
    dec = ladder_decomposition(params)
    ops = build_1d_ops(max(1, basis.level_L))
    a1 = (ops["X1"] + ops["Dx1"]) / math.sqrt(2.0)
    a1d = (ops["X1"] - ops["Dx1"]) / math.sqrt(2.0)
    lifts = {
        "M1": lift_2d(a1, "x", basis),
        "M2": lift_2d(a1d, "x", basis),
        "M3": lift_2d(a1, "y", basis),
        "M4": lift_2d(a1d, "y", basis),
    }
    total = sum(np.kron(dec[name], lifts[name]) for name in ("M1", "M2", "M3", "M4"))
    return OperatorMatrix(total, basis, spinor=True)


# ---------------------------------------------------------------------------
# resolvents and convergence experiments
# ---------------------------------------------------------------------------

def resolvent_apply(D: OperatorMatrix, z: complex, v: np.ndarray) -> np.ndarray:
    """Solve (D - z) w = v for nonreal z; checks the residual."""
    if z.imag == 0:
        raise ValidationError("resolvent point must have nonzero imaginary part")
    A = D.mat - z * np.eye(D.dim)
    w = np.linalg.solve(A, v)
    res = np.linalg.norm(A @ w - v)
    if res > 1e-9 * max(1.0, np.linalg.norm(v)):
        raise ValidationError(f"resolvent solve residual {res} too large")
    return w


def default_probes(basis: BasisTruncation, count: int = 4,
                   seed: int = 7) -> list[np.ndarray]:
    """Low-level spinor probe vectors supported in m+n <= L/2."""
    rng = np.random.default_rng(seed)
    dim = basis.spinor_dim
    half = basis.level_L // 2
    low = [i for i, (m, n) in enumerate(basis.pairs) if m + n <= half]
    probes = []
    for j, (m, n, spin) in enumerate([(0, 0, 0), (1, 0, 1), (0, 1, 0), (1, 1, 1)][: max(1, count - 1)]):
        if m + n <= basis.level_L:
            v = np.zeros(dim, dtype=complex)
            v[spin * basis.scalar_dim + basis.index_of(m, n)] = 1.0
            probes.append(v)
    v = np.zeros(dim, dtype=complex)
    sel = rng.choice(low, size=min(6, len(low)), replace=False)
    for i in sel:
        v[i] += rng.standard_normal() + 1j * rng.standard_normal()
        v[i + basis.scalar_dim] += rng.standard_normal() + 1j * rng.standard_normal()
    probes.append(v / np.linalg.norm(v))
    return probes[:count]


def convergence_sweep(params: ParameterSet, basis: BasisTruncation,
                      radii: list[float], probes: list[np.ndarray] | None = None,
                      cfg: StarConfig | None = None, z: complex = 1j) -> dict:
    """Resolvent and direct-action errors of the cutoff chain against D_inf."""
    if sorted(radii) != list(radii):
        raise ValidationError("cutoff radii must be increasing")
    cfg = cfg or StarConfig.for_params(params)
    probes = probes if probes is not None else default_probes(basis)
    D_inf = minimal_coupled(params, basis)
    D_base = moyal_dirac(params, basis)
    gp = gauge_potentials(params)
    ref = [resolvent_apply(D_inf, z, v) for v in probes]
    rows = []
    for R in radii:
        B_R = perturbation_matrix(gp, CutoffProfile(R), cfg, basis)
        D_R = OperatorMatrix(D_base.mat + B_R.mat, basis, spinor=True)
        err_res = max(
            float(np.linalg.norm(resolvent_apply(D_R, z, v) - w))
            for v, w in zip(probes, ref)
        )
        err_dir = max(
            float(np.linalg.norm(D_R.mat @ v - D_inf.mat @ v)) for v in probes
        )
        rows.append({"R": float(R), "err_resolvent": err_res, "err_direct": err_dir})
    return {"rows": rows, "z": z, "n_probes": len(probes)}


def commutator_probe(params: ParameterSet, a_fun, cfg: StarConfig,
                     levels: list[int], margin: int = 2) -> dict:
    """Bounded-commutator diagnostic against the derivation identity.

    Compares [D_base, pi(a)] with -(i/sqrt2)(L_{da/dx} x sigma_x +
    L_{da/dy} x sigma_y) on interior blocks and tracks the commutator
    norm across truncation levels.
    """
    from .moyal import _as_spectral  # local import: shares the backend

    A = _as_spectral(a_fun, cfg)
    dax = A.derivative("x")
    day = A.derivative("y")
    out = []
    for L in levels:
        basis = BasisTruncation(L)
        D = moyal_dirac(params, basis).mat
        La = left_mult_matrix(A, cfg, basis).mat
        Ldx = left_mult_matrix(dax, cfg, basis).mat
        Ldy = left_mult_matrix(day, cfg, basis).mat
        comm = D @ np.kron(np.eye(2), La) - np.kron(np.eye(2), La) @ D
        target = -1j / math.sqrt(2.0) * (np.kron(pauli("x"), Ldx) + np.kron(pauli("y"), Ldy))
        om = OperatorMatrix(comm - target, basis, spinor=True)
        interior_res = float(np.abs(om.interior(margin)).max())
        comm_interior = OperatorMatrix(comm, basis, spinor=True).interior(margin)
        out.append({
            "L": L,
            "interior_residual": interior_res,
            "commutator_norm": float(np.linalg.norm(comm_interior, 2)),
        })
    return {"rows": out}


def local_compactness_probe(params: ParameterSet, a_fun, cfg: StarConfig,
                            levels: list[int], z: complex = 1j,
                            n_singular: int = 30, e_override: float | None = None) -> dict:
    """Singular-value decay of pi(a) (D - z)^-1 across truncation levels."""
    from .moyal import _as_spectral

    A = _as_spectral(a_fun, cfg)
    rows = []
    for L in levels:
        basis = BasisTruncation(L)
        p = params if e_override is None else replace(params, e=e_override)
        if p.e == 0.0:
            D = moyal_dirac(p, basis)
        else:
            D = minimal_coupled(p, basis)
        La = left_mult_matrix(A, cfg, basis).mat
        R = np.linalg.solve(D.mat - z * np.eye(D.dim), np.eye(D.dim))
        T = np.kron(np.eye(2), La) @ R
        sv = np.linalg.svd(T, compute_uv=False)[:n_singular]
        rows.append({"L": L, "singular_values": sv})
    return {"rows": rows}


def cutoff_tail_norms(params: ParameterSet, cfg: StarConfig, radii: list[float],
                      probe=None, slope_axis: str = "y") -> list[dict]:
    """L2 norms of ((u_R - 1) * affine) *_(1/2) probe for increasing R."""
    from .functions import gaussian2d

    probe = probe or gaussian2d(0.5, 0.5, half_width=cfg.grid.half_width)
    half_cfg = StarConfig(theta_eff=cfg.theta_eff, rho=0.5, backend="grid", grid=cfg.grid)
    out = []
    for R in radii:
        cut = CutoffProfile(R)

        def tail_symbol(X, Y, _cut=cut):
            coord = Y if slope_axis == "y" else X
            return (_cut(X, Y) - 1.0) * coord

        prod = star_apply_symbol(tail_symbol, probe, half_cfg)
        out.append({"R": float(R), "norm": prod.l2_norm()})
    return out
