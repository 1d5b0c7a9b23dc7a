"""Direct solver for the ground-channel non-local wave equation.

Independent cross-check for the invariant-imbedding solver: the ground
channel scatters off the energy-dependent kernel of
:mod:`asymscat.potential`, and the scattering state solves the integral
equation

    phi(x) = phi0(x) + integral dx' g0(x, x') integral dy U(x', y) phi(y)

with the outgoing free Green's function g0(x, x') = e^{i*kbar*|x-x'|}/(2i*kbar)
(rescaled coordinates, kernel U = 16*V/V_0).  A Nystrom discretization on the
uniform kernel grid with trapezoid weights turns this into one dense linear
solve per incidence side, written for the source density
sigma(x) = integral dy U(x, y) phi(y):

    (1 - U W g0 W) sigma = U W phi0,       phi = phi0 + g0 W sigma,

which is algebraically identical to eliminating phi directly but makes rows
of the system trivial wherever the coupling vanishes, and feeds the
transmission/reflection integrals without a second kernel application.
Incident waves are unnormalized plane waves e^{+-i*kbar*x}; same-channel
amplitude ratios are convention-free, so T and R are directly comparable to
the imbedding solver's ground-channel entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .potential import NonlocalKernel, build_kernel
from .profiles import RabiProfile

__all__ = [
    "GroundAmplitudes",
    "LSSystem",
    "SingularSystemError",
    "build_system",
    "solve_ground",
    "convergence_study",
    "ConvergenceRow",
]

#: Relative residual above which the dense solve is declared unreliable
#: (near a real-axis pole of the resolvent).
_RESIDUAL_TOL = 1e-8


class SingularSystemError(RuntimeError):
    """The discretized scattering system is (near-)singular."""


@dataclass(frozen=True)
class GroundAmplitudes:
    T: complex
    R: complex
    side: str
    n: int


@dataclass(frozen=True)
class LSSystem:
    """Dense Nystrom system for one (profile, energy, grid)."""

    xbar: np.ndarray  # n quadrature nodes on [0, 1]
    weights: np.ndarray  # trapezoid weights
    kernel: NonlocalKernel
    U: np.ndarray  # kernel in rescaled form, n x n
    system: np.ndarray  # 1 - U W g0 W, acting on the source density

    @property
    def kbar(self) -> float:
        return self.kernel.params.kbar


def build_system(profile: RabiProfile, velocity_ratio: float, n: int = 801) -> LSSystem:
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    kernel = build_kernel(profile, velocity_ratio, n)
    xbar, U = kernel.barred()
    w = np.full(n, xbar[1] - xbar[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    kbar = kernel.params.kbar
    g0 = np.exp(1j * kbar * np.abs(xbar[:, None] - xbar[None, :])) / (2j * kbar)
    # rows where the coupling vanishes reduce to identity rows
    system = np.eye(n, dtype=complex) - (U * w[None, :]) @ (g0 * w[None, :])
    return LSSystem(xbar=xbar, weights=w, kernel=kernel, U=U, system=system)


def _amplitudes(sys: LSSystem, side: str) -> GroundAmplitudes:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sign = 1.0 if side == "left" else -1.0
    kbar = sys.kbar
    phi0 = np.exp(sign * 1j * kbar * sys.xbar)
    rhs = sys.U @ (sys.weights * phi0)
    try:
        lu, piv = scipy.linalg.lu_factor(sys.system)
        source = scipy.linalg.lu_solve((lu, piv), rhs)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(f"dense solve failed: {exc}") from None
    scale = np.linalg.norm(rhs)
    if scale > 0.0:
        residual = np.linalg.norm(sys.system @ source - rhs) / scale
        if not np.isfinite(residual) or residual > _RESIDUAL_TOL:
            raise SingularSystemError(
                f"solution residual {residual:.3e} exceeds {_RESIDUAL_TOL:g}; "
                "system is near-singular (close to a scattering pole)"
            )
    t_int = np.sum(sys.weights * np.exp(-sign * 1j * kbar * sys.xbar) * source)
    r_int = np.sum(sys.weights * np.exp(sign * 1j * kbar * sys.xbar) * source)
    return GroundAmplitudes(
        T=complex(1.0 + t_int / (2j * kbar)),
        R=complex(r_int / (2j * kbar)),
        side=side,
        n=sys.xbar.size,
    )


def solve_ground(
    profile: RabiProfile, velocity_ratio: float, n: int = 801, side: str = "left"
) -> GroundAmplitudes:
    """Ground-channel T and R by one dense Nystrom solve.

    Requires an open ground channel (velocity_ratio > 0); kernel-threshold
    errors from :func:`asymscat.potential.effective_params` propagate.
    """
    return _amplitudes(build_system(profile, velocity_ratio, n), side)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    T: complex
    R: complex
    diff_T: float | None  # |T(n) - T(previous n)|
    diff_R: float | None


def convergence_study(
    profile: RabiProfile,
    velocity_ratio: float,
    n_list: Sequence[int],
    side: str = "left",
) -> list[ConvergenceRow]:
    """Amplitudes per grid size with successive differences.

    The observed convergence order can be estimated from the decay of the
    differences; the trapezoid baseline on this smooth kernel is order 2.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    rows: list[ConvergenceRow] = []
    prev: GroundAmplitudes | None = None
    for n in n_list:
        amp = solve_ground(profile, velocity_ratio, n=n, side=side)
        rows.append(
            ConvergenceRow(
                n=n,
                T=amp.T,
                R=amp.R,
                diff_T=None if prev is None else abs(amp.T - prev.T),
                diff_R=None if prev is None else abs(amp.R - prev.R),
            )
        )
        prev = amp
    return rows
