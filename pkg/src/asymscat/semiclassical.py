"""Approximate dynamics along a classical trajectory.

For an intuitive picture of the scattering asymmetry, replace the atom's
motion by a classical trajectory x = +-v*t crossing the coupling region: the
internal state then obeys a time-dependent two-level equation.  In tau units
(tbar = t/tau, u = x/d = +-(v/v_d)*tbar)

    i d/dtbar chi = (1/2) [[0, tau*Omega(u)], [conj(tau*Omega(u)), -2*tau*Delta]] chi.

Incidence from the left and from the right see the coupling in opposite time
order, which is the entire source of the asymmetry: for a two-lobe profile
the dynamics is approximately two consecutive Bloch-sphere rotations about
different axes, and rotations do not commute.

The square-pulse caricature replaces the two lobes by contiguous flat pulses:
a sigma_x pulse followed by a -sigma_y pulse (or the reverse), each of
duration T/2, on top of the detuning term (Delta/2)(sigma_z - 1).  Up to the
global phase e^{i*Delta*T/2} contributed by the -1, the evolution is the
composition of rotations R_j = exp(-i*beta*n_j.sigma/2) with

    beta = (T/2) * sqrt(Omega^2 + Delta^2),
    n1 = (Omega, 0, Delta)/sqrt(Omega^2+Delta^2),   (sigma_x pulse)
    n2 = (0, -Omega, Delta)/sqrt(Omega^2+Delta^2).  (-sigma_y pulse)

Orientation of the canonical model (Omega/Delta = sqrt(2), beta = 2*pi/3),
computed by direct 2x2 algebra and mirrored by the piecewise TDSE: applying
R1 first and then R2 returns the ground state to itself (population 1);
the reverse order R2-then-R1 transfers it fully to the excited state.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from scipy.integrate import solve_ivp

from .profiles import RabiProfile

__all__ = [
    "TrajectoryRun",
    "RotationModel",
    "CompositionResult",
    "integrate_trajectory",
    "compose_rotations",
    "integrate_square_pulses",
    "estimate_parameters",
]

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class TrajectoryRun:
    direction: str  # "left" (x = +v t) or "right" (x = -v t)
    velocity_ratio: float
    t_over_tau: np.ndarray
    amplitudes: np.ndarray  # shape (2, len(t))

    @property
    def pop_ground(self) -> np.ndarray:
        return np.abs(self.amplitudes[0]) ** 2

    @property
    def pop_excited(self) -> np.ndarray:
        return np.abs(self.amplitudes[1]) ** 2

    @property
    def final_populations(self) -> tuple[float, float]:
        return float(self.pop_ground[-1]), float(self.pop_excited[-1])


def _direction_sign(direction: str) -> float:
    if direction in ("left", "+"):
        return 1.0
    if direction in ("right", "-"):
        return -1.0
    raise ValueError(f"direction must be 'left'/'+' or 'right'/'-', got {direction!r}")


def integrate_trajectory(
    profile: RabiProfile,
    velocity_ratio: float,
    direction: str = "left",
    t_span: tuple[float, float] | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    n_store: int = 801,
) -> TrajectoryRun:
    """Integrate the two-level state along the trajectory x = +-v*t.

    Starts in the ground state well before the coupling region; by default
    the time window covers |x| <= d + 5*max(w), which makes the Gaussian
    tails negligible.  With zero decay the evolution is unitary.
    """
    if velocity_ratio <= 0:
        raise ValueError(f"velocity_ratio must be positive, got {velocity_ratio}")
    sign = _direction_sign(direction)
    if t_span is None:
        wmax = max((t.width_over_d for t in profile.terms), default=0.5)
        t_end = (1.0 + 5.0 * wmax) / velocity_ratio
        t_span = (-t_end, t_end)

    two_delta = 2.0 * profile.tau_delta
    gamma = profile.tau_gamma

    def rhs(t, chi):
        om = profile.omega_tau(sign * velocity_ratio * t)
        return [
            -0.5j * om * chi[1],
            -0.5j * (np.conj(om) * chi[0] - (two_delta + 1j * gamma) * chi[1]),
        ]

    t_eval = np.linspace(t_span[0], t_span[1], n_store)
    sol = solve_ivp(
        rhs, t_span, [1.0 + 0j, 0.0 + 0j], t_eval=t_eval, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise RuntimeError(f"trajectory integration failed: {sol.message}")
    return TrajectoryRun(
        direction="left" if sign > 0 else "right",
        velocity_ratio=velocity_ratio,
        t_over_tau=sol.t,
        amplitudes=sol.y,
    )


@dataclass(frozen=True)
class RotationModel:
    """Square-pulse two-rotation model, in tau units.

    omega_tau and delta_tau are the flat pulse height and detuning; T_tau is
    the total duration (two pulses of T/2 each).
    """

    omega_tau: float
    delta_tau: float
    T_tau: float

    @classmethod
    def canonical(cls, delta_tau: float) -> "RotationModel":
        """The model tuned for a perfect one-way outcome: Omega/Delta = sqrt(2)
        and T = 4*pi/(3*sqrt(3)*Delta), giving beta = 2*pi/3."""
        return cls(
            omega_tau=sqrt(2.0) * delta_tau,
            delta_tau=delta_tau,
            T_tau=4.0 * pi / (3.0 * sqrt(3.0) * delta_tau),
        )

    @property
    def beta(self) -> float:
        return 0.5 * self.T_tau * sqrt(self.omega_tau**2 + self.delta_tau**2)

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        norm = sqrt(self.omega_tau**2 + self.delta_tau**2)
        n1 = np.array([self.omega_tau, 0.0, self.delta_tau]) / norm
        n2 = np.array([0.0, -self.omega_tau, self.delta_tau]) / norm
        return n1, n2


@dataclass(frozen=True)
class CompositionResult:
    state: np.ndarray  # final two-level state, global detuning phase removed
    global_phase: complex  # e^{i*Delta*T/2}
    pop_ground: float
    pop_excited: float


def _rotation(beta: float, axis: np.ndarray) -> np.ndarray:
    n_sigma = axis[0] * _SIGMA_X + axis[1] * _SIGMA_Y + axis[2] * _SIGMA_Z
    return np.cos(beta / 2.0) * np.eye(2) - 1j * np.sin(beta / 2.0) * n_sigma


def compose_rotations(model: RotationModel, order: str = "R2R1") -> CompositionResult:
    """Apply the two rotations to the ground state in the given order.

    ``order`` is "R2R1" (R1 acts first; the sigma_x pulse comes first, i.e. a
    left-incidence time ordering for a profile whose real lobe sits on the
    left) or "R1R2" (the reverse).  The overall detuning phase e^{i*Delta*T/2}
    is returned separately so populations are phase-free.
    """
    key = order.upper().replace("*", "").replace(" ", "")
    if key not in ("R2R1", "R1R2"):
        raise ValueError(f"order must be 'R2R1' or 'R1R2', got {order!r}")
    n1, n2 = model.axes
    r1 = _rotation(model.beta, n1)
    r2 = _rotation(model.beta, n2)
    u = r2 @ r1 if key == "R2R1" else r1 @ r2
    state = u @ np.array([1.0, 0.0], dtype=complex)
    return CompositionResult(
        state=state,
        global_phase=np.exp(0.5j * model.delta_tau * model.T_tau),
        pop_ground=float(abs(state[0]) ** 2),
        pop_excited=float(abs(state[1]) ** 2),
    )


def integrate_square_pulses(
    model: RotationModel,
    order: str = "R2R1",
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> np.ndarray:
    """Independent check of the rotation picture: integrate the piecewise-
    constant two-level equation over both pulses, including the full detuning
    term (Delta/2)(sigma_z - 1).

    Returns the final state with the global phase e^{i*Delta*T/2} divided
    out, directly comparable to :func:`compose_rotations`.
    """
    key = order.upper().replace("*", "").replace(" ", "")
    if key not in ("R2R1", "R1R2"):
        raise ValueError(f"order must be 'R2R1' or 'R1R2', got {order!r}")
    h_x = 0.5 * (model.omega_tau * _SIGMA_X + model.delta_tau * (_SIGMA_Z - np.eye(2)))
    h_y = 0.5 * (-model.omega_tau * _SIGMA_Y + model.delta_tau * (_SIGMA_Z - np.eye(2)))
    pulses = (h_x, h_y) if key == "R2R1" else (h_y, h_x)

    chi = np.array([1.0, 0.0], dtype=complex)
    for h in pulses:
        sol = solve_ivp(
            lambda t, y, h=h: -1j * (h @ y),
            (0.0, model.T_tau / 2.0),
            chi,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(f"square-pulse integration failed: {sol.message}")
        chi = sol.y[:, -1]
    return chi / np.exp(0.5j * model.delta_tau * model.T_tau)


def estimate_parameters(velocity_ratio: float, w_over_d: float) -> tuple[float, float]:
    """Closed-form seed values (a_tau, delta_tau) for the transmit/absorb ansatz.

    Matching the Gaussian pulse area a*sqrt(pi)*w to the square-pulse area of
    the canonical rotation model gives

        a = (v0/w) * sqrt(pi) * (2/3)^(3/2),    Delta = a/2,

    returned in tau/d units.  Both scale linearly with the target speed.
    """
    if velocity_ratio <= 0 or w_over_d <= 0:
        raise ValueError("velocity_ratio and w_over_d must be positive")
    a_tau = (velocity_ratio / w_over_d) * sqrt(pi) * (2.0 / 3.0) ** 1.5
    return a_tau, a_tau / 2.0
