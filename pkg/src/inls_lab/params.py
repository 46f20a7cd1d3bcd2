"""Problem parameters and the critical-exponent algebra.

The equation under study is

    i u_t + div(|x|^b grad u) - V(x) u = -|x|^c |u|^p u   on R^n, n >= 3,

whose scaling structure is governed by the single combination
p_c = n*p - 2c.  Rescaling u -> lam^{(2-b+c)/p} u(lam x) preserves the
equation (with V rescaled) and acts on homogeneous Sobolev norms with
index s_c = n/2 - (2-b+c)/p; equivalently s_c = (p_c - 2(2-b)) / (2p).
The flow is mass-critical when s_c = 0, energy-critical when
p_c = (2-b)(p+2), and intercritical in between.  In the intercritical
window the mass/energy threshold quantities carry the exponent
sigma = (2-b-2s_c)/(2s_c), which has the equivalent closed form
((2-b)(p+2) - p_c)/(p_c - 4 + 2b); both are computed here and must
agree to rounding.

Everything in this module is exact arithmetic on floats: no grids, no
state.  Validation failures name the violated constraint so callers can
report precisely which hypothesis a parameter set breaks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "Criticality",
    "CriticalExponents",
    "ParameterError",
    "ProblemParams",
    "derive_exponents",
    "validate_gn_window",
]

# Relative tolerance for criticality tie-breaking.  p_c = n*p - 2c is a
# float expression; parameter sets meant to sit exactly on a boundary
# (e.g. p = 4/3 with n = 3, c = 0) land within a few ulp of it.
_TIE_RTOL = 1e-12


class ParameterError(ValueError):
    """A parameter set violates one of the standing hypotheses."""


class Criticality(enum.Enum):
    MASS_SUBCRITICAL = "MassSubcritical"
    MASS_CRITICAL = "MassCritical"
    INTERCRITICAL = "Intercritical"
    ENERGY_CRITICAL = "EnergyCritical"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class ProblemParams:
    """Parameters (n, b, c, p, omega) of the equation.

    Constraints enforced at construction:

    * n integer >= 3,
    * 2 - n < b < 2,
    * c >= b - 2,
    * p > 0 and 0 < p_c <= (2-b)(p+2),
    * omega > 0.
    """

    n: int
    b: float
    c: float
    p: float
    omega: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 3:
            raise ParameterError(f"dimension n must be an integer >= 3, got {self.n}")
        if not (2 - self.n < self.b < 2):
            raise ParameterError(
                f"dispersion exponent b={self.b} outside (2-n, 2) = ({2 - self.n}, 2)"
            )
        if self.c < self.b - 2:
            raise ParameterError(
                f"nonlinearity weight c={self.c} below b-2 = {self.b - 2}"
            )
        if not self.p > 0:
            raise ParameterError(f"nonlinearity power p={self.p} must be positive")
        pc = self.p_c
        upper = (2 - self.b) * (self.p + 2)
        tol = _TIE_RTOL * (1 + abs(upper))
        if not pc > 0:
            raise ParameterError(f"p_c = n*p - 2c = {pc} must be positive")
        if pc > upper + tol:
            raise ParameterError(
                f"p_c = {pc} exceeds the energy-critical bound (2-b)(p+2) = {upper}"
            )
        if not self.omega > 0:
            raise ParameterError(f"frequency omega={self.omega} must be positive")

    @property
    def p_c(self) -> float:
        """Scaling exponent n*p - 2c."""
        return self.n * self.p - 2 * self.c

    def with_omega(self, omega: float) -> "ProblemParams":
        """Same equation at a different frequency."""
        return ProblemParams(self.n, self.b, self.c, self.p, omega)


@dataclass(frozen=True)
class CriticalExponents:
    """Derived exponents of a parameter set.

    sigma is None outside the window p_c > 4 - 2b where the threshold
    exponent is defined (s_c <= 0 makes it meaningless).
    """

    p_c: float
    s_c: float
    sigma: float | None
    criticality: Criticality


def derive_exponents(params: ProblemParams) -> CriticalExponents:
    """Compute p_c, s_c, sigma, and the criticality label.

    sigma is evaluated by both closed forms, (2-b-2s_c)/(2s_c) and
    ((2-b)(p+2)-p_c)/(p_c-4+2b); they must agree to 1e-12 relative or
    the function refuses (that would indicate broken float algebra, not
    a bad parameter set).
    """
    n, b, c, p = params.n, params.b, params.c, params.p
    pc = params.p_c
    s_c = n / 2 - (2 - b + c) / p
    mass_line = 2 * (2 - b)
    energy_line = (2 - b) * (p + 2)
    tol = _TIE_RTOL * (1 + abs(energy_line))

    if abs(pc - mass_line) <= tol:
        label = Criticality.MASS_CRITICAL
    elif abs(pc - energy_line) <= tol:
        label = Criticality.ENERGY_CRITICAL
    elif pc < mass_line:
        label = Criticality.MASS_SUBCRITICAL
    else:
        label = Criticality.INTERCRITICAL

    sigma: float | None = None
    if label in (Criticality.INTERCRITICAL, Criticality.ENERGY_CRITICAL):
        sigma_a = (2 - b - 2 * s_c) / (2 * s_c)
        sigma_b = (energy_line - pc) / (pc - 4 + 2 * b)
        scale = max(abs(sigma_a), abs(sigma_b), 1.0)
        if abs(sigma_a - sigma_b) > 1e-12 * scale:
            raise ParameterError(
                f"sigma routes disagree: {sigma_a} vs {sigma_b} for {params}"
            )
        sigma = sigma_a

    return CriticalExponents(p_c=pc, s_c=s_c, sigma=sigma, criticality=label)


def validate_gn_window(params: ProblemParams) -> bool:
    """Hypothesis window of the weighted Gagliardo-Nirenberg inequality.

    True iff either
      b-2 <= c <= 0  and  -2c < p_c < (2-b)(p+2),   or
      c > 0          and  (2-b)p/2 < p_c < (2-b)(p+2).
    Both endpoints of the p_c window are excluded.
    """
    b, c, p = params.b, params.c, params.p
    pc = params.p_c
    upper = (2 - b) * (p + 2)
    if params.b - 2 <= c <= 0:
        return -2 * c < pc < upper
    if c > 0:
        return (2 - b) * p / 2 < pc < upper
    return False
