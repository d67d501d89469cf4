"""Sector constants and kinematical presentation parameters.

A parameter set bundles the three central constants of the planar
kinematical algebra (``hbar0``, ``theta0``, ``b0``), the two presentation
parameters ``(r, s)`` that label unitarily equivalent realizations of the
same sector, the star-ordering parameter ``rho``, and the external gauge
data ``(e, b_ext)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ValidationError

__all__ = ["ParameterSet", "CANONICAL", "canonical_params"]


@dataclass(frozen=True)
class ParameterSet:
    """Immutable sector + presentation + gauge parameters.

    Attributes
    ----------
    hbar0, theta0, b0 : float
        Central constants of the sector.  All three must be nonzero and
        ``hbar0 - theta0*b0`` must be nonzero (nondegeneracy).
    r, s : float
        Presentation parameters.  ``r`` must avoid ``hbar0/(theta0*b0)``.
    rho : float
        Star-product ordering parameter (``1/2`` is symmetric Weyl order).
    e : float
        Gauge coupling.
    b_ext : float
        External magnetic field strength.
    """

    hbar0: float = 1.0
    theta0: float = 0.5
    b0: float = 1.0
    r: float = 1.5
    s: float = 1.0
    rho: float = 0.5
    e: float = 1.0
    b_ext: float = 0.2

    # -- derived sector quantities -------------------------------------

    @property
    def theta_eff(self) -> float:
        """Effective deformation scale theta0 / (1 - theta0*b0/hbar0)."""
        denom = 1.0 - self.theta0 * self.b0 / self.hbar0
        if denom == 0.0:
            raise ValidationError("degenerate sector: hbar0 - theta0*b0 = 0")
        return self.theta0 / denom

    @property
    def pi_x_coeffs(self) -> tuple[float, float]:
        """(y, p_x) coefficients of the kinetic momentum along x."""
        cy = (1.0 - self.r) * self.hbar0 * self.b0 / (self.hbar0 - self.r * self.theta0 * self.b0)
        cp = ((self.r + self.s - self.r * self.s) * self.theta0 * self.b0 - self.hbar0) / (
            self.r * self.theta0 * self.b0 - self.hbar0
        )
        return cy, cp

    @property
    def pi_y_coeffs(self) -> tuple[float, float]:
        """(x, p_y) coefficients of the kinetic momentum along y."""
        cx = -self.r * self.b0
        cq = 1.0 + self.r * (self.s - 1.0) * self.theta0 * self.b0 / self.hbar0
        return cx, cq

    @property
    def gaussian_constants(self) -> tuple[float, float, float, float]:
        """Constants (a, b, c, d) entering the lowest-level Gaussian data.

        These are the coefficients of the first-order annihilation
        equation written in the variables (y, d/dx, x, d/dy).
        """
        den = self.r * self.theta0 * self.b0 - self.hbar0
        a = (1.0 - self.r) * self.hbar0 * self.b0 / den
        b = self.hbar0 * ((self.r + self.s - self.r * self.s) * self.theta0 * self.b0 - self.hbar0) / den
        c = self.r * self.b0
        d = self.hbar0 * (1.0 + self.r * (self.s - 1.0) * self.theta0 * self.b0 / self.hbar0)
        return a, b, c, d

    @property
    def gauge_discriminant(self) -> float:
        """Radicand of the constant-field gauge potential coefficients."""
        return self.hbar0**2 - 4.0 * self.rho * (self.rho - 1.0) * self.e * self.hbar0 * self.theta_eff * self.b_ext

    # -- admissibility ---------------------------------------------------

    def constraint_report(self) -> dict[str, bool]:
        """Evaluate every admissibility constraint; never raises."""
        out: dict[str, bool] = {}
        out["hbar0_nonzero"] = self.hbar0 != 0.0
        out["theta0_nonzero"] = self.theta0 != 0.0
        out["b0_nonzero"] = self.b0 != 0.0
        out["sector_nondegenerate"] = self.hbar0 - self.theta0 * self.b0 != 0.0
        if out["theta0_nonzero"] and out["b0_nonzero"]:
            out["r_excluded_value"] = self.r != self.hbar0 / (self.theta0 * self.b0)
        else:
            out["r_excluded_value"] = False
        out["hbar0_b0_positive"] = self.hbar0 * self.b0 > 0.0
        if out["sector_nondegenerate"] and out["r_excluded_value"]:
            a, b, c, d = self.gaussian_constants
            out["gaussian_positivity"] = (b != 0.0 and d != 0.0 and c / b > 0.0 and a / d > 0.0)
        else:
            out["gaussian_positivity"] = False
        if out["sector_nondegenerate"]:
            out["gauge_discriminant_nonneg"] = self.gauge_discriminant >= 0.0
        else:
            out["gauge_discriminant_nonneg"] = False
        return out

    def validate(self) -> "ParameterSet":
        """Raise :class:`ValidationError` naming the first violated constraint."""
        for name, ok in self.constraint_report().items():
            if not ok:
                raise ValidationError(f"inadmissible parameters: constraint '{name}' violated")
        return self

    @property
    def is_admissible(self) -> bool:
        return all(self.constraint_report().values())

    def with_presentation(self, r: float, s: float) -> "ParameterSet":
        return replace(self, r=r, s=s)

    def momentum_scale(self) -> float:
        """Normalization sqrt(hbar0*b0) of the kinetic momenta."""
        prod = self.hbar0 * self.b0
        if prod <= 0.0:
            raise ValidationError("inadmissible parameters: constraint 'hbar0_b0_positive' violated")
        return math.sqrt(prod)


CANONICAL = ParameterSet()


def canonical_params(**overrides) -> ParameterSet:
    """The default sector used throughout the test corpus."""
    return replace(CANONICAL, **overrides)
