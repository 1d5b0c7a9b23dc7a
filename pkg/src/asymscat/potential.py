"""Energy-dependent non-local kernel seen by the ground channel.

Eliminating the excited channel of the two-level problem leaves the ground
channel scattering off

    V(x, y) = (m/4) * exp(i*q*|x-y|) / (i*q) * Omega(x) * Omega(y)^*

with q = sqrt(2*m*E)/hbar * sqrt(1 + mu) on the Im(q) >= 0 branch and
mu = (2*Delta + i*gamma) / (2*E/hbar).  The kernel is non-local (it acts
through an integral) and non-Hermitian unless Re(q) = 0.

In the dimensionless units of :mod:`asymscat.units` this becomes, on
xbar, ybar in [0, 1] with kappa2 = kbar*sqrt(1+mu),

    V / V_0 = Omegabar(xbar) * Omegabar(ybar)^* * exp(i*kappa2*|xbar-ybar|) / (32*i*kappa2)

and the kernel entering the rescaled wave equation
k^2 phi = -phi'' + integral(U * phi) is U = 16 * (V/V_0).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .profiles import RabiProfile

__all__ = [
    "EffectiveParams",
    "NonlocalKernel",
    "ChannelThresholdError",
    "effective_params",
    "build_kernel",
    "kernel_csv_rows",
    "write_kernel_csv",
]

#: |1 + mu| below this is treated as the singular channel threshold q -> 0.
_THRESHOLD_EPS = 1e-12


class ChannelThresholdError(ValueError):
    """Raised at the degenerate channel threshold mu = -1, where q = 0 and
    the 1/q kernel prefactor is singular."""


@dataclass(frozen=True)
class EffectiveParams:
    """Energy-dependent kernel parameters at incident speed v = velocity_ratio * v_d.

    ``kappa2`` is the dimensionless q (i.e. q * 2d), on the Im >= 0 branch.
    """

    velocity_ratio: float
    mu: complex
    kappa2: complex

    @property
    def kbar(self) -> float:
        return 2.0 * self.velocity_ratio

    @property
    def is_open(self) -> bool:
        return self.kappa2.imag == 0.0


def effective_params(profile: RabiProfile, velocity_ratio: float) -> EffectiveParams:
    """Compute mu and q for a profile at a given incident speed.

    mu = i*Gammabar/kbar^2 reduces to (2*Delta + i*gamma)/(2*E/hbar); the
    energy enters only through kbar = 2*v/v_d.  For nonzero decay combined
    with an evanescent channel (complex mu with Im q > 0) the formula is
    applied as written on the upper-half-plane branch; that regime has no
    independent validation in this package's test suite.

    Raises
    ------
    ValueError
        If velocity_ratio <= 0 (non-positive energy).
    ChannelThresholdError
        If mu = -1 within 1e-12, where the kernel is singular.
    """
    if velocity_ratio <= 0:
        raise ValueError(f"velocity_ratio must be positive, got {velocity_ratio}")
    kbar = 2.0 * velocity_ratio
    mu = 1j * profile.Gammabar / kbar**2
    if abs(1.0 + mu) <= _THRESHOLD_EPS:
        raise ChannelThresholdError(
            f"degenerate channel threshold: mu = {mu} is -1 within {_THRESHOLD_EPS}; "
            "q = 0 makes the kernel singular"
        )
    kappa2 = complex(np.sqrt(kbar**2 * (1.0 + mu)))
    if kappa2.imag < 0 or (kappa2.imag == 0 and kappa2.real < 0):
        kappa2 = -kappa2
    return EffectiveParams(velocity_ratio=velocity_ratio, mu=mu, kappa2=kappa2)


@dataclass(frozen=True)
class NonlocalKernel:
    """Discretized kernel V(x_i, y_j)/V_0 on a uniform grid over [-d, d]."""

    grid_over_d: np.ndarray  # n points, endpoints included
    values_over_V0: np.ndarray  # n x n complex
    params: EffectiveParams

    @property
    def n(self) -> int:
        return self.grid_over_d.size

    def barred(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid and kernel in rescaled form: xbar in [0, 1] and U = 16*V/V_0,
        as used by the ground-channel wave equation."""
        return (self.grid_over_d + 1.0) / 2.0, 16.0 * self.values_over_V0


def build_kernel(profile: RabiProfile, velocity_ratio: float, n: int = 401) -> NonlocalKernel:
    """Evaluate the kernel on an n x n uniform grid including the endpoints +-d."""
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    params = effective_params(profile, velocity_ratio)
    u = np.linspace(-1.0, 1.0, n)
    om = np.asarray(profile.omega_tau(u)) * 4.0  # Omegabar on the grid
    xbar = (u + 1.0) / 2.0
    dist = np.abs(xbar[:, None] - xbar[None, :])
    k2 = params.kappa2
    values = om[:, None] * np.conj(om)[None, :] * np.exp(1j * k2 * dist) / (32j * k2)
    return NonlocalKernel(grid_over_d=u, values_over_V0=values, params=params)


def kernel_csv_rows(kernel: NonlocalKernel):
    """Yield (x_over_d, y_over_d, absV_over_V0, argV) for every grid node."""
    g = kernel.grid_over_d
    absv = np.abs(kernel.values_over_V0)
    argv = np.angle(kernel.values_over_V0)
    for i in range(kernel.n):
        for j in range(kernel.n):
            yield g[i], g[j], absv[i, j], argv[i, j]


def write_kernel_csv(kernel: NonlocalKernel, path: Union[str, Path], header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(header.rstrip("\n") + "\n")
        fh.write("x_over_d,y_over_d,absV_over_V0,argV\n")
        for x, y, a, p in kernel_csv_rows(kernel):
            fh.write(f"{x:.12g},{y:.12g},{a:.12g},{p:.12g}\n")
