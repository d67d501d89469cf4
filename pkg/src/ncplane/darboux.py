"""Commutation form, Pfaffian, and linear Darboux factorization.

The kinematical tuple (X, Y, Pi_x, Pi_y) obeys [Z_i, Z_j] = i Sigma_ij
with a skew form Sigma fixed by the sector constants.  ``darboux_factor``
produces an invertible S with ``S^T Sigma S = hbar_eff J`` via skew
Gram-Schmidt with partial pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import ParameterSet

__all__ = [
    "sigma_matrix",
    "standard_j",
    "pfaffian4",
    "theta_eff",
    "DarbouxData",
    "darboux_factor",
    "validate_admissible",
]


def sigma_matrix(params: ParameterSet) -> np.ndarray:
    """Skew commutation form of (X, Y, Pi_x, Pi_y)."""
    h, t, b = params.hbar0, params.theta0, params.b0
    S = np.zeros((4, 4))
    S[0, 1] = t
    S[0, 2] = h
    S[1, 3] = h
    S[2, 3] = h * b
    return S - S.T


def standard_j(n: int = 2) -> np.ndarray:
    """Standard symplectic form [[0, I], [-I, 0]] on R^(2n)."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def _check_skew(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValidationError("matrix must be square")
    scale = max(1.0, np.abs(M).max())
    if np.abs(M + M.T).max() > tol * scale:
        raise ValidationError("matrix is not skew-symmetric within tolerance")
    return M


def pfaffian4(M: np.ndarray) -> float:
    """Pfaffian of a 4x4 skew matrix: M01*M23 - M02*M13 + M03*M12."""
    M = _check_skew(M)
    if M.shape != (4, 4):
        raise ValidationError("pfaffian4 expects a 4x4 matrix")
    return float(M[0, 1] * M[2, 3] - M[0, 2] * M[1, 3] + M[0, 3] * M[1, 2])


def theta_eff(params: ParameterSet) -> float:
    """Effective deformation scale theta0 / (1 - theta0*b0/hbar0)."""
    return params.theta_eff


@dataclass
class DarbouxData:
    """Result of the factorization S^T Sigma S = hbar_eff J."""

    sigma: np.ndarray
    S: np.ndarray
    hbar_eff: float
    J: np.ndarray
    pfaffian: float
    residual: float


def darboux_factor(sigma: np.ndarray, hbar_eff: float = 1.0) -> DarbouxData:
    """Factor a nondegenerate skew form to the scaled standard form.

    Builds a symplectic basis by skew Gram-Schmidt, pivoting on the
    largest-magnitude remaining pairing entry for stability.

    Parameters
    ----------
    sigma : ndarray
        Skew-symmetric matrix of even dimension 2n.
    hbar_eff : float
        Target normalization; any nonzero value is admissible.

    Returns
    -------
    DarbouxData
        With ``residual = ||S^T sigma S - hbar_eff J||_F``.
    """
    sigma = _check_skew(sigma)
    if hbar_eff == 0.0:
        raise ValidationError("hbar_eff must be nonzero")
    dim = sigma.shape[0]
    if dim % 2:
        raise ValidationError("skew form must have even dimension")
    n = dim // 2
    if dim == 4 and abs(pfaffian4(sigma)) < 1e-14 * max(1.0, np.abs(sigma).max()) ** 2:
        raise ValidationError("skew form is degenerate (vanishing pfaffian)")

    rest = [np.eye(dim)[:, i].copy() for i in range(dim)]
    es, fs = [], []
    for _ in range(n):
        m = len(rest)
        pair_mag = np.zeros((m, m))
        for i in range(m):
            for j in range(i + 1, m):
                pair_mag[i, j] = abs(rest[i] @ sigma @ rest[j])
        i0, j0 = np.unravel_index(np.argmax(pair_mag), pair_mag.shape)
        omega = rest[i0] @ sigma @ rest[j0]
        if abs(omega) < 1e-13 * max(1.0, np.abs(sigma).max()):
            raise ValidationError("skew form is degenerate (no usable pivot)")
        e = rest[i0]
        f = rest[j0] * (hbar_eff / omega)
        es.append(e)
        fs.append(f)
        new_rest = []
        for idx, u in enumerate(rest):
            if idx in (i0, j0):
                continue
            u = u - ((u @ sigma @ f) / hbar_eff) * e + ((u @ sigma @ e) / hbar_eff) * f
            new_rest.append(u)
        rest = new_rest
    S = np.column_stack(es + fs)
    J = standard_j(n)
    residual = float(np.linalg.norm(S.T @ sigma @ S - hbar_eff * J))
    pf = pfaffian4(sigma) if dim == 4 else float("nan")
    return DarbouxData(sigma=sigma, S=S, hbar_eff=float(hbar_eff), J=J,
                       pfaffian=pf, residual=residual)


def validate_admissible(params: ParameterSet) -> dict:
    """Report-style admissibility check listing every constraint."""
    checks = params.constraint_report()
    return {
        "constraints": checks,
        "all_pass": all(checks.values()),
        "pfaffian": pfaffian4(sigma_matrix(params)) if checks["sector_nondegenerate"] else 0.0,
    }
