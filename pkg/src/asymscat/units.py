"""Physical <-> dimensionless conversions.

Every solver in this package works in one dimensionless unit system tied to
the half-width ``d`` of the interaction region: velocities are measured in
``v_d = hbar/(m*d)``, times in ``tau = m*d**2/hbar``, positions in ``d``, and
potential densities in ``V_0 = hbar**2/(m*d**3)``.  The scattering coordinate
is rescaled so the interaction region ``[-d, d]`` maps onto ``[0, 1]``:

    xbar = x/(2*d) + 1/2

and the natural parameters of a scattering instance become

    kbar     = sqrt(2*m*E) * 2*d / hbar = 2 * v/v_d
    Gammabar = (4*m*d**2/hbar) * (gamma - 2i*Delta) = 4*(tau*gamma - 2i*tau*Delta)
    Omegabar(xbar) = (4*m*d**2/hbar) * Omega(x) = 4*tau*Omega(x)

Conversion to and from SI happens only here, at the API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from .profiles import RabiProfile

HBAR = 1.054571817e-34  # J s

__all__ = [
    "HBAR",
    "PhysicalScales",
    "DimensionlessParams",
    "Channel2",
    "to_dimensionless",
    "velocity_from_ratio",
    "channel2_wavenumber",
    "gammabar_of",
]


@dataclass(frozen=True)
class PhysicalScales:
    """Natural scales for a particle of mass ``mass`` and half-width ``half_width_d``.

    Both inputs are SI (kg, m).  The derived velocity, time and
    potential-density scales satisfy ``v_d * tau == half_width_d`` exactly.
    """

    mass: float
    half_width_d: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.half_width_d <= 0:
            raise ValueError(f"half_width_d must be positive, got {self.half_width_d}")

    @property
    def v_d(self) -> float:
        """Velocity scale hbar/(m*d) in m/s."""
        return HBAR / (self.mass * self.half_width_d)

    @property
    def tau(self) -> float:
        """Time scale m*d^2/hbar in s."""
        return self.mass * self.half_width_d**2 / HBAR

    @property
    def V_0(self) -> float:
        """Potential-density scale hbar^2/(m*d^3) in J/m."""
        return HBAR**2 / (self.mass * self.half_width_d**3)


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless parameters of a scattering instance."""

    kbar: float
    Gammabar: complex
    velocity_ratio: float  # v / v_d


class Channel2(NamedTuple):
    kappa2: complex
    is_open: bool


def gammabar_of(tau_gamma: float, tau_delta: float) -> complex:
    """Gammabar = 4*(tau*gamma - 2i*tau*Delta)."""
    return 4.0 * (tau_gamma - 2.0j * tau_delta)


def to_dimensionless(
    profile: "RabiProfile", velocity: float, scales: PhysicalScales
) -> tuple[DimensionlessParams, Callable[[np.ndarray], np.ndarray]]:
    """Convert a physical scattering instance to dimensionless form.

    Parameters
    ----------
    profile : RabiProfile
        Coupling profile; if it carries ``d_meters`` it must match
        ``scales.half_width_d``.
    velocity : float
        Incident speed in m/s, must be positive.
    scales : PhysicalScales

    Returns
    -------
    (params, omega_bar)
        ``params`` holds ``kbar``, ``Gammabar`` and ``v/v_d``; ``omega_bar``
        evaluates the rescaled coupling 4*tau*Omega on xbar in [0, 1].
    """
    if velocity <= 0:
        raise ValueError(f"velocity must be positive, got {velocity}")
    if profile.d_meters is not None and not np.isclose(
        profile.d_meters, scales.half_width_d, rtol=1e-12, atol=0.0
    ):
        raise ValueError(
            f"profile half-width {profile.d_meters} m does not match "
            f"scales.half_width_d = {scales.half_width_d} m"
        )
    ratio = velocity / scales.v_d
    params = DimensionlessParams(
        kbar=2.0 * ratio,
        Gammabar=gammabar_of(profile.tau_gamma, profile.tau_delta),
        velocity_ratio=ratio,
    )
    return params, profile.omega_bar


def velocity_from_ratio(params: DimensionlessParams, scales: PhysicalScales) -> float:
    """Inverse of the velocity conversion: physical speed in m/s."""
    return params.velocity_ratio * scales.v_d


def channel2_wavenumber(kbar: float, Gammabar: complex) -> Channel2:
    """Asymptotic excited-channel wavenumber kappa2 = sqrt(kbar^2 + i*Gammabar).

    The branch with Im(kappa2) >= 0 is always taken; the channel is open when
    kappa2 is real (travelling wave) and closed when Im(kappa2) > 0
    (evanescent).  The branch choice makes kappa2 discontinuous where
    Im(kappa2) crosses zero; callers sweeping parameters across the threshold
    should expect a jump rather than a sign flip.
    """
    z = complex(kbar) ** 2 + 1j * complex(Gammabar)
    root = complex(np.sqrt(z))
    if root.imag < 0 or (root.imag == 0 and root.real < 0):
        root = -root
    return Channel2(kappa2=root, is_open=(root.imag == 0.0))
