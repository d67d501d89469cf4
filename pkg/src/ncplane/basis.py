"""Hermite/Fock basis infrastructure on the line and the plane.

The scalar model space is spanned by products ``h_m(x) h_n(y)`` of
L2-normalized Hermite functions with total degree ``m + n <= L``.  The
enumeration of pairs is total-degree-major and lexicographic within a
degree, which makes the index map a bijection and gives every lifted
operator a degree-graded block structure.

Truncation is orthogonal projection: matrix entries that couple out of
the retained index set are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError, ResolutionError, ValidationError

__all__ = [
    "hermite_eval",
    "hermite_table",
    "BasisTruncation",
    "OperatorMatrix",
    "QuadratureGrid",
    "build_1d_ops",
    "lift_2d",
    "inner_product",
]

_HERMITE_MAX_DEGREE = 3000
_HERMITE_MAX_ABSX = 300.0


def hermite_eval(n: int, x):
    """Evaluate the L2-normalized Hermite function h_n at x.

    Uses the normalized three-term recurrence
    ``h_{n+1} = x*sqrt(2/(n+1))*h_n - sqrt(n/(n+1))*h_{n-1}``,
    which avoids factorial overflow.

    Parameters
    ----------
    n : int
        Degree, n >= 0.
    x : float or ndarray
        Evaluation point(s).

    Returns
    -------
    float or ndarray
        h_n(x), satisfying the L2 normalization ``int h_n^2 = 1``.
    """
    if n < 0:
        raise RangeError("hermite degree must be nonnegative")
    if n > _HERMITE_MAX_DEGREE:
        raise RangeError(f"hermite degree {n} beyond stable range {_HERMITE_MAX_DEGREE}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > _HERMITE_MAX_ABSX):
        raise RangeError(f"|x| beyond stable range {_HERMITE_MAX_ABSX}")
    h_prev = np.pi ** (-0.25) * np.exp(-0.5 * xa * xa)
    if n == 0:
        return h_prev if isinstance(x, np.ndarray) else float(h_prev)
    h_cur = math.sqrt(2.0) * xa * h_prev
    for k in range(1, n):
        h_cur, h_prev = (
            xa * math.sqrt(2.0 / (k + 1)) * h_cur - math.sqrt(k / (k + 1.0)) * h_prev,
            h_cur,
        )
    return h_cur if isinstance(x, np.ndarray) else float(h_cur)


def hermite_table(nmax: int, x: np.ndarray) -> np.ndarray:
    """All h_0..h_nmax on a vector of points, shape (nmax+1, len(x))."""
    if nmax < 0:
        raise RangeError("hermite degree must be nonnegative")
    if nmax > _HERMITE_MAX_DEGREE:
        raise RangeError(f"hermite degree {nmax} beyond stable range")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1, x.size), dtype=float)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = x * math.sqrt(2.0 / (k + 1)) * out[k] - math.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


@dataclass(frozen=True)
class BasisTruncation:
    """Truncated 2D Hermite basis with total degree <= level_L."""

    level_L: int
    pairs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.level_L < 0:
            raise ValidationError("truncation level must be nonnegative")
        ps = tuple(
            (m, d - m) for d in range(self.level_L + 1) for m in range(d + 1)
        )
        object.__setattr__(self, "pairs", ps)

    @property
    def scalar_dim(self) -> int:
        return (self.level_L + 1) * (self.level_L + 2) // 2

    @property
    def spinor_dim(self) -> int:
        return 2 * self.scalar_dim

    def index_of(self, m: int, n: int) -> int:
        if m < 0 or n < 0 or m + n > self.level_L:
            raise ValidationError(f"pair ({m},{n}) outside truncation level {self.level_L}")
        d = m + n
        return d * (d + 1) // 2 + m

    def pair_of(self, i: int) -> tuple[int, int]:
        return self.pairs[i]

    def degrees(self) -> np.ndarray:
        """Total degree m+n for each scalar index."""
        return np.array([m + n for (m, n) in self.pairs])

    def interior_indices(self, margin: int = 2) -> np.ndarray:
        """Scalar indices with m+n <= level_L - margin."""
        return np.nonzero(self.degrees() <= self.level_L - margin)[0]

    def interior_projector(self, margin: int = 2, spinor: bool = False) -> np.ndarray:
        """Diagonal 0/1 matrix keeping the interior block."""
        keep = np.zeros(self.scalar_dim)
        keep[self.interior_indices(margin)] = 1.0
        if spinor:
            keep = np.concatenate([keep, keep])
        return np.diag(keep)


@dataclass
class OperatorMatrix:
    """Dense complex matrix of an operator in a truncated basis.

    Spinor matrices are stored spin-major: the matrix is a 2x2 array of
    scalar-basis blocks, i.e. ``kron(sigma, scalar_block)``.
    """

    mat: np.ndarray
    basis: BasisTruncation
    spinor: bool = False

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        want = self.basis.spinor_dim if self.spinor else self.basis.scalar_dim
        if self.mat.shape != (want, want):
            raise ValidationError(
                f"matrix shape {self.mat.shape} does not match basis dim {want}"
            )

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.mat - self.mat.conj().T).max() <= tol * max(1.0, np.abs(self.mat).max()))

    def antihermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.mat + self.mat.conj().T).max() <= tol * max(1.0, np.abs(self.mat).max()))

    def interior(self, margin: int = 2) -> np.ndarray:
        """Restriction of the matrix to the interior block m+n <= L - margin."""
        idx = self.basis.interior_indices(margin)
        if self.spinor:
            idx = np.concatenate([idx, idx + self.basis.scalar_dim])
        return self.mat[np.ix_(idx, idx)]

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.spinor != other.spinor:
            raise ValidationError("cannot compose scalar with spinor matrix")
        return OperatorMatrix(self.mat @ other.mat, self.basis, self.spinor)


def build_1d_ops(L: int) -> dict[str, np.ndarray]:
    """Position and derivative matrices in the 1D Hermite basis.

    Returns (L+1)x(L+1) real matrices: ``X1`` symmetric tridiagonal with
    X1[n, n+1] = sqrt((n+1)/2), ``Dx1`` antisymmetric with
    Dx1[n, n+1] = sqrt((n+1)/2).
    """
    if L < 1:
        raise ValidationError("need at least two levels for 1D operators")
    N = L + 1
    X1 = np.zeros((N, N))
    D1 = np.zeros((N, N))
    for n in range(N - 1):
        c = math.sqrt((n + 1) / 2.0)
        X1[n, n + 1] = c
        X1[n + 1, n] = c
        D1[n, n + 1] = c
        D1[n + 1, n] = -c
    return {"X1": X1, "Dx1": D1}


def lift_2d(op1: np.ndarray, axis: str, basis: BasisTruncation) -> np.ndarray:
    """Lift a 1D Hermite-basis matrix onto the truncated 2D basis.

    The operator acts on the chosen axis; the other index is untouched.
    Entries coupling out of the truncation set are dropped.
    """
    op1 = np.asarray(op1)
    if op1.shape[0] < basis.level_L + 1:
        raise ValidationError(
            f"1D operator dimension {op1.shape[0]} smaller than level {basis.level_L}+1"
        )
    if axis not in ("x", "y"):
        raise ValidationError("axis must be 'x' or 'y'")
    dim = basis.scalar_dim
    M = np.zeros((dim, dim), dtype=complex)
    index = {p: i for i, p in enumerate(basis.pairs)}
    rows, cols = np.nonzero(op1)
    by_col: dict[int, list[tuple[int, complex]]] = {}
    for rr, cc in zip(rows, cols):
        by_col.setdefault(cc, []).append((rr, op1[rr, cc]))
    for j, (m, n) in enumerate(basis.pairs):
        src = m if axis == "x" else n
        for tgt, val in by_col.get(src, ()):
            pair = (tgt, n) if axis == "x" else (m, tgt)
            i = index.get(pair)
            if i is not None:
                M[i, j] += val
    return M


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor quadrature on the square [-W, W]^2.

    The trapezoid rule uses N uniformly spaced nodes per axis with the
    right endpoint excluded, which coincides with the periodic trapezoid
    rule and is spectrally accurate for functions that decay inside the
    box.  ``gauss-hermite`` uses Gauss--Hermite nodes reweighted for
    plain (unweighted) integrals of Gaussian-decay integrands.
    """

    half_width: float = 8.0
    points_per_axis: int = 256
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValidationError("half_width must be positive")
        if self.points_per_axis < 8:
            raise ValidationError("need at least 8 points per axis")
        if self.rule not in ("trapezoid", "gauss-hermite"):
            raise ValidationError(f"unknown quadrature rule '{self.rule}'")

    def nodes_1d(self) -> tuple[np.ndarray, np.ndarray]:
        """1D nodes and weights."""
        if self.rule == "trapezoid":
            h = 2.0 * self.half_width / self.points_per_axis
            x = -self.half_width + h * np.arange(self.points_per_axis)
            w = np.full(self.points_per_axis, h)
            return x, w
        x, w = np.polynomial.hermite.hermgauss(self.points_per_axis)
        return x, w * np.exp(x * x)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x, _ = self.nodes_1d()
        return np.meshgrid(x, x, indexing="ij")

    def weights_2d(self) -> np.ndarray:
        _, w = self.nodes_1d()
        return np.outer(w, w)

    @classmethod
    def default_for_level(cls, L: int, points_per_axis: int = 256) -> "QuadratureGrid":
        """Box covering the classical turning radius of level L."""
        W = max(8.0, 2.0 * math.sqrt(2 * L + 1))
        return cls(half_width=W, points_per_axis=points_per_axis)


def inner_product(f, g, grid: QuadratureGrid) -> complex:
    """L2 inner product <f, g> = int conj(f) g by tensor quadrature.

    ``f`` and ``g`` are pointwise-evaluable functions of two array
    arguments (see :mod:`ncplane.functions`).
    """
    for fn in (f, g):
        hw = getattr(fn, "box_half_width", None)
        if hw is not None and hw > grid.half_width * (1 + 1e-12):
            raise ResolutionError(
                f"function declares decay half-width {hw} beyond grid half-width {grid.half_width}"
            )
    X, Y = grid.meshgrid()
    W2 = grid.weights_2d()
    fv = np.asarray(f(X, Y), dtype=complex)
    gv = np.asarray(g(X, Y), dtype=complex)
    return complex(np.sum(np.conj(fv) * gv * W2))
