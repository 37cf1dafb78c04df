"""Closed-form current moments in a displaced squeezed Fock state.

Two variants are kept side by side:

``printed``
    the original formulas, verbatim. Their constant terms carry an extra
    zero-point contribution, so in vacuum the second moment and variance come
    out as 2 F^2 instead of F^2.
``rederived``
    worked out again from <a a^dag + a^dag a> = (2n + 1) cosh 2|xi| + 2|alpha|^2
    and <a^2> = (2n + 1) cosh|xi| sinh|xi| e^{i phi} + alpha^2. These agree with
    the Fock-space oracle and are the default everywhere downstream.

All moments are evaluated at t = 0 unless a time is given; a nonzero time
enters only through the phase beta*l - omega*t.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from scipy.constants import hbar

from .dispersion import CircuitParams, Dispersion
from .fock import DsfsParams

__all__ = [
    "MomentVariant",
    "Units",
    "ClosedFormMoments",
    "normalization_F",
    "mean_current",
    "second_moment",
    "variance",
    "closed_form_moments",
]


class MomentVariant(str, enum.Enum):
    PRINTED = "printed"
    REDERIVED = "rederived"


class Units(str, enum.Enum):
    SI = "si"
    NATURAL = "natural"


@dataclass(frozen=True)
class ClosedFormMoments:
    mean_j: float
    mean_j2: float
    var_j: float
    F: float
    variant: MomentVariant


def normalization_F(p: CircuitParams, units: Units | str = Units.SI) -> float:
    """Current scale sqrt(hbar omega (omega L G + 1) / (2 L z0)); 1 in natural units."""
    if Units(units) is Units.NATURAL:
        return 1.0
    return math.sqrt(hbar * p.omega * p.shunt_factor / (2.0 * p.L * p.z0))


def _phase(d: Dispersion, ell: float, t: float, omega: float | None) -> float:
    if t and omega is None:
        raise ValueError("a nonzero time needs omega")
    return d.beta * ell - (omega or 0.0) * t


def mean_current(
    F: float, d: Dispersion, p: DsfsParams, ell: float, t: float = 0.0, omega: float | None = None
) -> float:
    """<J> = 2 F e^{-sigma l} |alpha| cos(beta l - omega t + theta)."""
    chi = _phase(d, ell, t, omega)
    return 2.0 * F * math.exp(-d.sigma * ell) * p.alpha_mag * math.cos(chi + p.theta)


def _oscillatory(p: DsfsParams, chi: float) -> float:
    # [(2n+1) cosh sinh e^{i phi} + alpha^2] e^{2 i chi} + c.c.
    r = p.xi_mag
    coeff = (2 * p.n + 1) * math.cosh(r) * math.sinh(r) * cmath.exp(1j * p.phi) + p.alpha**2
    return 2.0 * (coeff * cmath.exp(2j * chi)).real


def second_moment(
    F: float,
    d: Dispersion,
    p: DsfsParams,
    ell: float,
    variant: MomentVariant | str = MomentVariant.REDERIVED,
    t: float = 0.0,
    omega: float | None = None,
) -> float:
    """<J^2> for the chosen variant."""
    chi = _phase(d, ell, t, omega)
    r, n = p.xi_mag, p.n
    if MomentVariant(variant) is MomentVariant.PRINTED:
        const = 2 * (n + 1) * math.cosh(r) ** 2 + 2 * n * math.sinh(r) ** 2
    else:
        const = (2 * n + 1) * math.cosh(2 * r)
    const += 2.0 * p.alpha_mag**2
    return F**2 * math.exp(-2.0 * d.sigma * ell) * (_oscillatory(p, chi) + const)


def variance(
    F: float,
    d: Dispersion,
    p: DsfsParams,
    ell: float,
    variant: MomentVariant | str = MomentVariant.REDERIVED,
    t: float = 0.0,
    omega: float | None = None,
) -> float:
    """<(dJ)^2>; independent of the displacement in both variants.

    printed:   (2n+1) F^2 e^{-2 sigma l} [sinh 2|xi| cos(phi + 2 chi) + cosh 2|xi| + 1]
    rederived: (2n+1) F^2 e^{-2 sigma l} [sinh 2|xi| cos(phi + 2 chi) + cosh 2|xi|]
    """
    chi = _phase(d, ell, t, omega)
    r = p.xi_mag
    bracket = math.sinh(2 * r) * math.cos(p.phi + 2 * chi) + math.cosh(2 * r)
    if MomentVariant(variant) is MomentVariant.PRINTED:
        bracket += 1.0
    return (2 * p.n + 1) * F**2 * math.exp(-2.0 * d.sigma * ell) * bracket


def closed_form_moments(
    F: float,
    d: Dispersion,
    p: DsfsParams,
    ell: float,
    variant: MomentVariant | str = MomentVariant.REDERIVED,
    t: float = 0.0,
    omega: float | None = None,
) -> ClosedFormMoments:
    variant = MomentVariant(variant)
    return ClosedFormMoments(
        mean_j=mean_current(F, d, p, ell, t, omega),
        mean_j2=second_moment(F, d, p, ell, variant, t, omega),
        var_j=variance(F, d, p, ell, variant, t, omega),
        F=F,
        variant=variant,
    )
