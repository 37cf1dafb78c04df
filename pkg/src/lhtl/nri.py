"""Refractive index of the line, directly from beta and from current fluctuations.

The fluctuation route inverts the variance for beta under the small-angle
expansion e^{+-2i beta l} ~ 1 +- 2i beta l. Writing
P = var_j e^{2 sigma l} / F^2 and r = |xi|:

printed (original form, verbatim)
    n_r = -(c0 / (omega l sin phi)) [(P - 1)/((2n+1) sinh 2r) - coth 2r - cos(phi)/2]
rederived (inverse of the rederived variance)
    n_r = (c0 / (omega l sin phi)) [P/(2 (2n+1) sinh 2r) - coth(2r)/2 - cos(phi)/2]

The two do not agree with each other, which :func:`roundtrip_error` makes
visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as C0

from .dispersion import CircuitParams, Dispersion, dispersion
from .fock import DsfsParams
from .moments import MomentVariant, Units, normalization_F, variance

__all__ = [
    "NriResult",
    "NriError",
    "SingularDirection",
    "ZeroSqueeze",
    "SMALL_ANGLE_LIMIT",
    "nri_from_beta",
    "nri_from_fluctuation",
    "roundtrip_error",
]

SMALL_ANGLE_LIMIT = 0.1
_DEGENERATE = 1e-12


class NriError(ArithmeticError):
    pass


class SingularDirection(NriError):
    """sin(phi) vanishes, the fluctuation inversion is undefined."""


class ZeroSqueeze(NriError):
    """|xi| vanishes, the fluctuation inversion is undefined."""


@dataclass(frozen=True)
class NriResult:
    n_r: float
    variant: MomentVariant | None = None
    small_angle_ok: bool = True

    @property
    def warnings(self) -> tuple[str, ...]:
        return () if self.small_angle_ok else ("small-angle",)


def nri_from_beta(d: Dispersion, omega: float) -> NriResult:
    """n_r = -c0 beta / omega on the left-handed branch."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return NriResult(n_r=-C0 * d.beta / omega)


def _prefactor(p: CircuitParams, ell: float, units: Units, ell_ref: float | None) -> float:
    if units is Units.NATURAL:
        # c0/(omega l) rescaled to 1 at the reference position
        return (ell if ell_ref is None else ell_ref) / ell
    return C0 / (p.omega * ell)


def nri_from_fluctuation(
    var_j: float,
    p: CircuitParams,
    q: DsfsParams,
    ell: float,
    variant: MomentVariant | str = MomentVariant.REDERIVED,
    units: Units | str = Units.SI,
    ell_ref: float | None = None,
) -> NriResult:
    """Recover n_r from a measured current variance at position ``ell``.

    In natural units F = 1 and c0/(omega l) becomes ``ell_ref / ell``
    (``ell_ref`` defaults to ``ell``), so ``var_j`` is read in units of F^2.
    """
    variant = MomentVariant(variant)
    units = Units(units)
    if ell <= 0:
        raise ValueError("position must be positive")
    s_phi = math.sin(q.phi)
    if abs(s_phi) < _DEGENERATE:
        raise SingularDirection(f"sin(phi) = {s_phi:.3e}")
    if q.xi_mag < _DEGENERATE:
        raise ZeroSqueeze(f"|xi| = {q.xi_mag:.3e}")

    d = dispersion(p)
    F = normalization_F(p, units)
    P = var_j * math.exp(2.0 * d.sigma * ell) / F**2
    two_r = 2.0 * q.xi_mag
    sh = math.sinh(two_r)
    coth = 1.0 / math.tanh(two_r)
    m = 2 * q.n + 1
    scale = _prefactor(p, ell, units, ell_ref) / s_phi
    if variant is MomentVariant.PRINTED:
        n_r = -scale * ((P - 1.0) / (m * sh) - coth - 0.5 * math.cos(q.phi))
    else:
        n_r = scale * (P / (2.0 * m * sh) - 0.5 * coth - 0.5 * math.cos(q.phi))
    if not math.isfinite(n_r):
        raise NriError(f"non-finite index for var_j={var_j!r}")
    return NriResult(n_r=n_r, variant=variant, small_angle_ok=d.beta * ell <= SMALL_ANGLE_LIMIT)


def roundtrip_error(
    p: CircuitParams,
    q: DsfsParams,
    ell: float,
    variant: MomentVariant | str = MomentVariant.REDERIVED,
) -> float:
    """Relative error of the fluctuation route against -c0 beta/omega.

    The forward variance is the exact, unexpanded rederived one (the form the
    oracle confirms) at (sigma, beta); ``variant`` selects the inversion.
    """
    d = dispersion(p)
    if d.beta <= 0:
        raise ValueError("roundtrip needs beta > 0")
    if d.beta * ell >= SMALL_ANGLE_LIMIT:
        raise ValueError(f"beta*l = {d.beta * ell:.3g} is outside the small-angle range")
    F = normalization_F(p)
    v = variance(F, d, q, ell, MomentVariant.REDERIVED)
    recovered = nri_from_fluctuation(v, p, q, ell, variant).n_r
    target = nri_from_beta(d, p.omega).n_r
    return abs(recovered - target) / abs(target)
