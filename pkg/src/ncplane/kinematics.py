"""Kinematical operators, ladder structure, Dirac family, and spectra.

Two realizations of the same unitary class are used side by side:

* the *position realization* writes the generators as first-order
  differential operators in (x, y) per the presentation parameters
  (r, s); it is exact on interior blocks and carries all commutator
  identities;
* the *oscillator frame* rewrites the normalized momenta and the
  guiding-center pair as a standard pair of harmonic ladders.  In that
  frame every lifted operator is degree-graded, so truncated interior
  eigenvalues of the Dirac operator and the Landau Hamiltonian are exact
  and spectral claims can be checked to solver precision.

The position-space Hermite truncation converges only slowly for the
eigenvalue problem itself (the sector's ground-state Gaussians carry a
large imaginary cross term), which is why spectral experiments run in
the oscillator frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisTruncation, OperatorMatrix, QuadratureGrid, build_1d_ops, lift_2d
from .errors import ValidationError
from .functions import SmoothFunction2D
from .params import ParameterSet

__all__ = [
    "KinematicalOps",
    "build_kinematics",
    "ladder_ops",
    "hamiltonian",
    "dirac",
    "grading",
    "pauli",
    "FirstOrderOp",
    "OscillatorFrame",
    "oscillator_frame",
    "ground_state_analytic",
    "GaussianPolynomial",
    "excited_state",
    "dirac_spectrum",
    "hamiltonian_spectrum",
    "distinct_levels",
    "edge_threshold",
    "isospectrality_check",
]


def pauli(which: str) -> np.ndarray:
    if which == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if which == "y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if which == "z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise ValidationError(f"unknown Pauli label '{which}'")


# ---------------------------------------------------------------------------
# first-order operator algebra: A = u*x + v*y + p*d/dx + q*d/dy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FirstOrderOp:
    """Complex coefficients of u*x + v*y + p*d/dx + q*d/dy."""

    u: complex = 0.0
    v: complex = 0.0
    p: complex = 0.0
    q: complex = 0.0

    def __add__(self, other):
        return FirstOrderOp(self.u + other.u, self.v + other.v,
                            self.p + other.p, self.q + other.q)

    def __mul__(self, c):
        return FirstOrderOp(c * self.u, c * self.v, c * self.p, c * self.q)

    __rmul__ = __mul__

    def commutator_scalar(self, other: "FirstOrderOp") -> complex:
        """[self, other] as a multiple of the identity ([x, d/dx] = -1)."""
        return (self.p * other.u - self.u * other.p) + (self.q * other.v - self.v * other.q)

    def matrix(self, basis: BasisTruncation) -> np.ndarray:
        ops = build_1d_ops(max(1, basis.level_L))
        Xl = lift_2d(ops["X1"], "x", basis)
        Yl = lift_2d(ops["X1"], "y", basis)
        Dxl = lift_2d(ops["Dx1"], "x", basis)
        Dyl = lift_2d(ops["Dx1"], "y", basis)
        return self.u * Xl + self.v * Yl + self.p * Dxl + self.q * Dyl

    def is_hermitian_realization(self, tol: float = 1e-13) -> bool:
        return (abs(self.u.imag) < tol and abs(self.v.imag) < tol
                and abs(self.p.real) < tol and abs(self.q.real) < tol)


def _first_order_generators(params: ParameterSet) -> dict[str, FirstOrderOp]:
    """Position-realization coefficient vectors of the generator tuple."""
    h, t = params.hbar0, params.theta0
    s = params.s
    cy, cp = params.pi_x_coeffs
    cx, cq = params.pi_y_coeffs
    # quantum momenta realized as p = -i*hbar0*d
    X = FirstOrderOp(u=1.0, q=1j * s * t)                 # x - s*(t/h)*p_y
    Y = FirstOrderOp(v=1.0, p=-1j * (1.0 - s) * t)        # y + (1-s)*(t/h)*p_x
    Pix = FirstOrderOp(v=cy, p=-1j * h * cp)
    Piy = FirstOrderOp(u=cx, q=-1j * h * cq)
    return {"X": X, "Y": Y, "Pi_x": Pix, "Pi_y": Piy}


# ---------------------------------------------------------------------------
# position realization
# ---------------------------------------------------------------------------

@dataclass
class KinematicalOps:
    """Matrices of the generator tuple in the truncated position basis."""

    X: OperatorMatrix
    Y: OperatorMatrix
    Pi_x: OperatorMatrix
    Pi_y: OperatorMatrix
    Pi_x_tilde: OperatorMatrix
    Pi_y_tilde: OperatorMatrix
    params: ParameterSet
    basis: BasisTruncation


def build_kinematics(params: ParameterSet, basis: BasisTruncation) -> KinematicalOps:
    """Assemble the six kinematical matrices from lifted 1D blocks."""
    params.validate()
    gens = _first_order_generators(params)
    ops = build_1d_ops(max(1, basis.level_L))
    Xl = lift_2d(ops["X1"], "x", basis)
    Yl = lift_2d(ops["X1"], "y", basis)
    Dxl = lift_2d(ops["Dx1"], "x", basis)
    Dyl = lift_2d(ops["Dx1"], "y", basis)

    def mat(op: FirstOrderOp) -> np.ndarray:
        return op.u * Xl + op.v * Yl + op.p * Dxl + op.q * Dyl

    scale = params.momentum_scale()
    mx = mat(gens["Pi_x"])
    my = mat(gens["Pi_y"])
    return KinematicalOps(
        X=OperatorMatrix(mat(gens["X"]), basis),
        Y=OperatorMatrix(mat(gens["Y"]), basis),
        Pi_x=OperatorMatrix(mx, basis),
        Pi_y=OperatorMatrix(my, basis),
        Pi_x_tilde=OperatorMatrix(mx / scale, basis),
        Pi_y_tilde=OperatorMatrix(my / scale, basis),
        params=params,
        basis=basis,
    )


def ladder_ops(kin: KinematicalOps) -> dict[str, OperatorMatrix]:
    """Lowering/raising combinations of the normalized momenta."""
    am = (kin.Pi_x_tilde.mat + 1j * kin.Pi_y_tilde.mat) / math.sqrt(2.0)
    ap = (kin.Pi_x_tilde.mat - 1j * kin.Pi_y_tilde.mat) / math.sqrt(2.0)
    return {
        "a_minus": OperatorMatrix(am, kin.basis),
        "a_plus": OperatorMatrix(ap, kin.basis),
    }


def hamiltonian(kin: KinematicalOps) -> OperatorMatrix:
    """Landau Hamiltonian (Pi_x_tilde^2 + Pi_y_tilde^2)/2 with exact entries.

    The square is assembled one level higher and projected back, so the
    returned matrix is the true compression of the operator (and in
    particular positive with spectrum bounded below by 1/2).
    """
    basis = kin.basis
    big = BasisTruncation(basis.level_L + 1)
    kb = build_kinematics(kin.params, big)
    Hbig = 0.5 * (kb.Pi_x_tilde.mat @ kb.Pi_x_tilde.mat + kb.Pi_y_tilde.mat @ kb.Pi_y_tilde.mat)
    sel = np.array([big.index_of(m, n) for (m, n) in basis.pairs])
    return OperatorMatrix(Hbig[np.ix_(sel, sel)], basis)


def grading(basis: BasisTruncation) -> OperatorMatrix:
    """Spinor grading diag(+block, -block)."""
    return OperatorMatrix(np.kron(pauli("z"), np.eye(basis.scalar_dim)), basis, spinor=True)


def dirac(params: ParameterSet, basis: BasisTruncation) -> OperatorMatrix:
    """Dirac matrix (Pi_x_tilde x sigma_x + Pi_y_tilde x sigma_y)/sqrt(2)."""
    kin = build_kinematics(params, basis)
    D = (np.kron(pauli("x"), kin.Pi_x_tilde.mat) + np.kron(pauli("y"), kin.Pi_y_tilde.mat)) / math.sqrt(2.0)
    return OperatorMatrix(D, basis, spinor=True)


# ---------------------------------------------------------------------------
# oscillator frame
# ---------------------------------------------------------------------------

@dataclass
class OscillatorFrame:
    """Sector-adapted frame: normalized momenta and guiding centers.

    ``tuple_ops`` holds the position-realization coefficient vectors of
    (Pi_x_tilde, Pi_y_tilde, G_x_tilde, G_y_tilde); ``guiding_sign`` is
    the sign of the guiding-center commutator [G_x, G_y]/i.  In the
    adapted realization the momenta act as the standard x-axis pair
    (position, -i d/dx) and the guiding centers as the y-axis pair, so
    all lifted matrices are degree-graded.
    """

    params: ParameterSet
    tuple_ops: dict[str, FirstOrderOp]
    guiding_sign: float
    guiding_scale: float

    def ladder_lowering(self) -> FirstOrderOp:
        t = self.tuple_ops
        return (t["Pi_x_tilde"] + 1j * t["Pi_y_tilde"]) * (1.0 / math.sqrt(2.0))

    def guiding_lowering(self) -> FirstOrderOp:
        t = self.tuple_ops
        if self.guiding_sign > 0:
            return (t["G_x_tilde"] + 1j * t["G_y_tilde"]) * (1.0 / math.sqrt(2.0))
        return (t["G_y_tilde"] + 1j * t["G_x_tilde"]) * (1.0 / math.sqrt(2.0))

    def adapted_momenta(self, basis: BasisTruncation) -> tuple[np.ndarray, np.ndarray]:
        """Matrices of the normalized momenta in the adapted basis."""
        ops = build_1d_ops(max(1, basis.level_L))
        Xl = lift_2d(ops["X1"], "x", basis)
        Dxl = lift_2d(ops["Dx1"], "x", basis)
        return Xl, -1j * Dxl

    def dirac_matrix(self, basis: BasisTruncation) -> OperatorMatrix:
        Px, Py = self.adapted_momenta(basis)
        D = (np.kron(pauli("x"), Px) + np.kron(pauli("y"), Py)) / math.sqrt(2.0)
        return OperatorMatrix(D, basis, spinor=True)

    def hamiltonian_matrix(self, basis: BasisTruncation) -> OperatorMatrix:
        big = BasisTruncation(basis.level_L + 1)
        Px, Py = self.adapted_momenta(big)
        Hbig = 0.5 * (Px @ Px + Py @ Py)
        sel = np.array([big.index_of(m, n) for (m, n) in basis.pairs])
        return OperatorMatrix(Hbig[np.ix_(sel, sel)], basis)


def oscillator_frame(params: ParameterSet) -> OscillatorFrame:
    """Build the adapted frame and verify its commutator table."""
    params.validate()
    gens = _first_order_generators(params)
    scale = params.momentum_scale()
    ptx = gens["Pi_x"] * (1.0 / scale)
    pty = gens["Pi_y"] * (1.0 / scale)
    gx = gens["X"] + gens["Pi_y"] * (1.0 / params.b0)
    gy = gens["Y"] + gens["Pi_x"] * (-1.0 / params.b0)
    theta_g = params.theta0 - params.hbar0 / params.b0
    if theta_g == 0.0:
        raise ValidationError("degenerate guiding-center form")
    gscale = math.sqrt(abs(theta_g))
    ops = {
        "Pi_x_tilde": ptx,
        "Pi_y_tilde": pty,
        "G_x_tilde": gx * (1.0 / gscale),
        "G_y_tilde": gy * (1.0 / gscale),
    }
    # commutator table: momenta pair gives i, guiding pair gives +/- i,
    # all cross terms vanish
    checks = {
        ("Pi_x_tilde", "Pi_y_tilde"): 1j,
        ("G_x_tilde", "G_y_tilde"): 1j * math.copysign(1.0, theta_g),
        ("Pi_x_tilde", "G_x_tilde"): 0.0,
        ("Pi_x_tilde", "G_y_tilde"): 0.0,
        ("Pi_y_tilde", "G_x_tilde"): 0.0,
        ("Pi_y_tilde", "G_y_tilde"): 0.0,
    }
    for (aname, bname), want in checks.items():
        got = ops[aname].commutator_scalar(ops[bname])
        if abs(got - want) > 1e-10:
            raise ValidationError(
                f"frame commutator [{aname},{bname}] = {got}, expected {want}"
            )
    return OscillatorFrame(params=params, tuple_ops=ops,
                           guiding_sign=math.copysign(1.0, theta_g),
                           guiding_scale=gscale)


# ---------------------------------------------------------------------------
# ground state and ladder excitations in closed form
# ---------------------------------------------------------------------------

class GaussianPolynomial:
    """poly(x, y) * exp(-(alpha x^2 + 2 gamma x y + beta y^2)/2) in closed form."""

    def __init__(self, exponents: tuple[complex, complex, complex],
                 coeffs: dict[tuple[int, int], complex]):
        self.alpha, self.beta, self.gamma = exponents
        self.coeffs = dict(coeffs)

    def __call__(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        poly = np.zeros(np.broadcast(X, Y).shape, dtype=complex)
        for (m, n), c in self.coeffs.items():
            poly = poly + c * X**m * Y**n
        return poly * np.exp(-(self.alpha * X**2 + 2 * self.gamma * X * Y + self.beta * Y**2) / 2.0)

    def apply(self, op: FirstOrderOp) -> "GaussianPolynomial":
        """Apply u*x + v*y + p*d/dx + q*d/dy, staying in closed form."""
        al, be, ga = self.alpha, self.beta, self.gamma
        out: dict[tuple[int, int], complex] = {}

        def add(key, val):
            out[key] = out.get(key, 0.0) + val

        for (m, n), c in self.coeffs.items():
            if op.u:
                add((m + 1, n), op.u * c)
            if op.v:
                add((m, n + 1), op.v * c)
            if op.p:
                if m >= 1:
                    add((m - 1, n), op.p * c * m)
                add((m + 1, n), -op.p * c * al)
                add((m, n + 1), -op.p * c * ga)
            if op.q:
                if n >= 1:
                    add((m, n - 1), op.q * c * n)
                add((m, n + 1), -op.q * c * be)
                add((m + 1, n), -op.q * c * ga)
        out = {k: v for k, v in out.items() if v != 0.0}
        return GaussianPolynomial((al, be, ga), out)

    def l2_norm(self, grid: QuadratureGrid) -> float:
        X, Yg = grid.meshgrid()
        vals = self(X, Yg)
        return float(np.sqrt(np.sum(np.abs(vals) ** 2 * grid.weights_2d())))


def _vacuum_exponents(frame: OscillatorFrame) -> tuple[complex, complex, complex]:
    """Exponent matrix of the joint vacuum of the two lowering operators.

    Solves, for psi = exp(-(alpha x^2 + 2 gamma xy + beta y^2)/2), the
    linear system expressing that both lowering operators annihilate
    psi.  This vacuum is the natural unique ground state: lowest Landau
    level and lowest guiding-center excitation.
    """
    ops = [frame.ladder_lowering(), frame.guiding_lowering()]
    A = []
    b = []
    for op in ops:
        # (u x + v y + p d/dx + q d/dy) psi = 0 =>
        #   x:  u - p*alpha - q*gamma = 0
        #   y:  v - p*gamma - q*beta  = 0
        A.append([op.p, 0.0, op.q])
        b.append(op.u)
        A.append([0.0, op.q, op.p])
        b.append(op.v)
    A = np.array(A, dtype=complex)
    b = np.array(b, dtype=complex)
    sol, res, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < 3 or np.linalg.norm(A @ sol - b) > 1e-10:
        raise ValidationError("no Gaussian joint vacuum for these parameters")
    alpha, beta, gamma = sol
    M = np.array([[alpha.real, gamma.real], [gamma.real, beta.real]])
    if M[0, 0] <= 0 or np.linalg.det(M) <= 0:
        raise ValidationError("joint vacuum Gaussian is not normalizable (positivity violated)")
    return complex(alpha), complex(beta), complex(gamma)


def ground_state_analytic(params: ParameterSet) -> SmoothFunction2D:
    """Normalized closed-form ground state of the Landau Hamiltonian.

    Returned as a Gaussian ``C exp(-(alpha x^2 + 2 gamma xy + beta y^2)/2)``
    annihilated by both the momentum lowering operator and the
    guiding-center lowering operator.  The exponent data is attached as
    ``.exponents`` and the normalization as ``.normalization``.
    """
    params.validate()
    frame = oscillator_frame(params)
    alpha, beta, gamma = _vacuum_exponents(frame)
    M = np.array([[alpha.real, gamma.real], [gamma.real, beta.real]])
    norm = (np.linalg.det(M) ** 0.25) / math.sqrt(math.pi)

    def _f(X, Y):
        return norm * np.exp(-(alpha * X**2 + 2 * gamma * X * Y + beta * Y**2) / 2.0)

    # box where |psi|^2 decays below ~1e-16
    decay = min(M[0, 0], np.linalg.det(M) / max(M[0, 0], M[1, 1]))
    hw = max(8.0, math.sqrt(40.0 / max(decay, 1e-8)))
    f = SmoothFunction2D(_f, box_half_width=hw)
    f.exponents = (alpha, beta, gamma)
    f.normalization = norm
    return f


def ground_state_polynomial(params: ParameterSet) -> GaussianPolynomial:
    """Ground state as a :class:`GaussianPolynomial` (for ladder checks)."""
    g = ground_state_analytic(params)
    alpha, beta, gamma = g.exponents
    return GaussianPolynomial((alpha, beta, gamma), {(0, 0): g.normalization})


def excited_state(params: ParameterSet, n: int) -> GaussianPolynomial:
    """n-th Landau level state (ladder-raised vacuum) in closed form."""
    frame = oscillator_frame(params)
    raise_op = (frame.tuple_ops["Pi_x_tilde"] + (-1j) * frame.tuple_ops["Pi_y_tilde"]) * (1.0 / math.sqrt(2.0))
    psi = ground_state_polynomial(params)
    for k in range(n):
        psi = psi.apply(raise_op)
        psi = GaussianPolynomial((psi.alpha, psi.beta, psi.gamma),
                                 {key: val / math.sqrt(k + 1.0) for key, val in psi.coeffs.items()})
    return psi


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def edge_threshold(L: int) -> float:
    """Squared-eigenvalue threshold above which truncation is unreliable."""
    return L - 2.0 * math.sqrt(L)


def distinct_levels(eigs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Cluster a sorted eigenvalue list into distinct values."""
    eigs = np.sort(np.asarray(eigs))
    out = []
    for e in eigs:
        if not out or abs(e - out[-1][0] / out[-1][1]) > tol:
            out.append([e, 1])
        else:
            out[-1][0] += e
            out[-1][1] += 1
    return np.array([s / c for s, c in out])


def dirac_spectrum(params: ParameterSet, basis: BasisTruncation) -> dict:
    """Dirac eigenvalues in the oscillator frame.

    Returns raw eigenvalues, the distinct values sorted by magnitude,
    and the below-edge distinct values.  Interior distinct values are
    exact up to solver roundoff because the adapted matrix is
    degree-graded.
    """
    frame = oscillator_frame(params)
    D = frame.dirac_matrix(basis)
    eigs = np.linalg.eigvalsh(D.mat)
    distinct = distinct_levels(eigs, tol=1e-6)
    by_mag = distinct[np.argsort(np.abs(distinct), kind="stable")]
    thr = edge_threshold(basis.level_L)
    below_edge = by_mag[np.abs(by_mag) ** 2 <= thr]
    return {
        "eigenvalues": eigs,
        "distinct_by_magnitude": by_mag,
        "below_edge": below_edge,
        "edge_threshold_sq": thr,
    }


def hamiltonian_spectrum(params: ParameterSet, basis: BasisTruncation) -> dict:
    """Landau Hamiltonian eigensystem in the oscillator frame."""
    frame = oscillator_frame(params)
    H = frame.hamiltonian_matrix(basis)
    w, v = np.linalg.eigh(H.mat)
    return {"eigenvalues": w, "eigenvectors": v, "matrix": H}


def isospectrality_check(params1: ParameterSet, params2: ParameterSet,
                         basis: BasisTruncation, k: int = 7) -> dict:
    """Compare the k smallest-|lambda| distinct Dirac values of two presentations."""
    for p in (params1, params2):
        p.validate()
    same_sector = (
        params1.hbar0 == params2.hbar0
        and params1.theta0 == params2.theta0
        and params1.b0 == params2.b0
    )
    if not same_sector:
        raise ValidationError("presentations live over different sector constants")
    s1 = dirac_spectrum(params1, basis)["below_edge"][:k]
    s2 = dirac_spectrum(params2, basis)["below_edge"][:k]
    kk = min(len(s1), len(s2), k)
    dev = float(np.abs(s1[:kk] - s2[:kk]).max()) if kk else float("nan")
    return {
        "k": kk,
        "spectrum_1": s1[:kk],
        "spectrum_2": s2[:kk],
        "max_deviation": dev,
    }
