"""Gradient-ascent design of asymmetric scattering devices.

Searches the low-dimensional parameter space of one shaped-coupling family
(amplitudes, lobe offset, detuning) for a target one-way response at a target
velocity, GRAPE style: finite-difference gradients of a scalar device
fidelity, ascended with a backtracking line search.  The solver cost
dominates, so gradients are plain central differences rather than adjoint
propagation.

Device objectives (squared moduli of the ground-channel amplitudes):

    transmit/absorb ("ta")      J = T2l - R2l - T2r - R2r          (perfect: 1)
    reflect/absorb ("ra")       J = R2l - T2l - T2r - R2r          (perfect: 1)
    half transmit+reflect/absorb ("tra-half")
                                J = -(T2l-1/2)^2 - (R2l-1/2)^2 - T2r - R2r
                                                                    (perfect: 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .imbedding import IntegrationError, RiccatiBlowupError, ScatterJob, solve_both
from .profiles import DEVICE_RULES, RabiProfile, make_preset
from .semiclassical import estimate_parameters

__all__ = [
    "DeviceTarget",
    "OptState",
    "AnsatzError",
    "profile_from_theta",
    "auto_init",
    "objective",
    "fd_gradient",
    "optimize",
]

#: Symmetries satisfied by each ansatz family at generic parameter values.
_ANSATZ_SYMMETRIES = {
    "VIII": frozenset({"I", "VIII"}),
    "VI": frozenset({"I", "VI"}),
    "I": frozenset({"I"}),
}

#: Device-rule row used to vet the ansatz for each target kind.
_KIND_RULE = {"ta": "T/A", "ra": "R/A", "tra-half": "TR/A"}

_PARAM_NAMES = {
    "VIII": ("a_tau", "x0_over_d", "tau_delta"),
    "VI": ("b_tau", "c_tau", "x0_over_d", "tau_delta"),
    "I": ("b_tau", "c_tau", "x0_over_d", "tau_delta"),
}


class AnsatzError(ValueError):
    """The ansatz symmetry class forbids the requested device."""


@dataclass(frozen=True)
class DeviceTarget:
    """A device kind to realize at velocity v0 = v0_ratio * v_d with a given
    ansatz family ("VIII", "VI" or "I")."""

    kind: str
    v0_ratio: float
    ansatz: str
    w_over_d: float = math.sqrt(2.0) / 10.0

    def __post_init__(self):
        if self.kind not in _KIND_RULE:
            raise ValueError(f"kind must be one of {sorted(_KIND_RULE)}, got {self.kind!r}")
        ansatz = self.ansatz.upper()
        object.__setattr__(self, "ansatz", ansatz)
        if ansatz not in _ANSATZ_SYMMETRIES:
            raise ValueError(f"ansatz must be VIII, VI or I, got {self.ansatz!r}")
        if self.v0_ratio <= 0:
            raise ValueError(f"v0_ratio must be positive, got {self.v0_ratio}")
        if self.w_over_d <= 0:
            raise ValueError(f"w_over_d must be positive, got {self.w_over_d}")
        allowed = DEVICE_RULES[_KIND_RULE[self.kind]]
        if not _ANSATZ_SYMMETRIES[ansatz] <= allowed:
            raise AnsatzError(
                f"ansatz {ansatz} carries symmetries "
                f"{sorted(_ANSATZ_SYMMETRIES[ansatz])}, not all of which permit a "
                f"{_KIND_RULE[self.kind]} device (allowed: {sorted(allowed)})"
            )

    @property
    def param_names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self.ansatz]


@dataclass
class OptState:
    """Result of an ascent run: best parameters, objective, diagnostics."""

    theta: np.ndarray
    J: float
    gradient: np.ndarray | None
    n_iterations: int
    n_evals: int
    step_size: float
    stalled: bool
    trace: list[tuple[int, float, np.ndarray]] = field(default_factory=list)


def profile_from_theta(target: DeviceTarget, theta: Sequence[float]) -> RabiProfile:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(target.param_names),):
        raise ValueError(
            f"theta must have {len(target.param_names)} entries "
            f"{target.param_names}, got shape {theta.shape}"
        )
    if target.ansatz == "VIII":
        a, x0, delta = theta
        return make_preset(
            "VIII", a_tau=a, x0_over_d=x0, w_over_d=target.w_over_d, tau_delta=delta
        )
    b, c, x0, delta = theta
    return make_preset(
        target.ansatz, b_tau=b, c_tau=c, x0_over_d=x0, w_over_d=target.w_over_d,
        tau_delta=delta,
    )


def auto_init(target: DeviceTarget) -> np.ndarray:
    """Seed parameters from the square-pulse rotation estimates.

    Amplitude and detuning come from :func:`estimate_parameters`; the lobe
    offset starts at 0.15*d.  Two-amplitude ansatz families get a
    parity-broken split around the estimate.
    """
    a_est, delta_est = estimate_parameters(target.v0_ratio, target.w_over_d)
    x0 = 0.15
    if target.ansatz == "VIII":
        return np.array([a_est, x0, delta_est])
    if target.ansatz == "VI":
        return np.array([-1.2 * a_est, 0.8 * a_est, x0, delta_est])
    return np.array([a_est, a_est, x0, delta_est])


def objective(
    target: DeviceTarget,
    theta: Sequence[float],
    rtol: float = 1e-8,
    atol: float = 1e-12,
    robust: bool = False,
) -> float:
    """Device fidelity J(theta); see the module docstring for the formulas.

    With ``robust=True`` the fidelity is averaged over {0.9, 1.0, 1.1}*v0,
    trading peak quality for a broader velocity window.  Default is the
    single design velocity.
    """
    profile = profile_from_theta(target, theta)
    ratios = (0.9, 1.0, 1.1) if robust else (1.0,)
    total = 0.0
    for r in ratios:
        job = ScatterJob.from_profile(profile, r * target.v0_ratio)
        c = solve_both(job, rtol=rtol, atol=atol).ground_coefficients()
        if target.kind == "ta":
            total += c["T2l"] - c["R2l"] - c["T2r"] - c["R2r"]
        elif target.kind == "ra":
            total += c["R2l"] - c["T2l"] - c["T2r"] - c["R2r"]
        else:
            total += (
                -((c["T2l"] - 0.5) ** 2)
                - ((c["R2l"] - 0.5) ** 2)
                - c["T2r"]
                - c["R2r"]
            )
    return total / len(ratios)


def fd_gradient(
    target: DeviceTarget,
    theta: Sequence[float],
    rel_step: float = 1e-4,
    rtol: float = 1e-8,
    robust: bool = False,
) -> np.ndarray:
    """Central finite-difference gradient with per-parameter relative steps."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        h = rel_step * max(abs(theta[i]), 1.0)
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (
            objective(target, up, rtol=rtol, robust=robust)
            - objective(target, dn, rtol=rtol, robust=robust)
        ) / (2.0 * h)
    return grad


def optimize(
    target: DeviceTarget,
    init: str | Sequence[float] = "auto",
    budget: int = 500,
    rtol: float = 1e-8,
    fd_rel_step: float = 1e-4,
    initial_step: float = 0.1,
    max_halvings: int = 8,
    grad_tol: float = 1e-10,
    robust: bool = False,
) -> OptState:
    """Finite-difference gradient ascent with backtracking line search.

    The ascent runs in coordinates normalized by the initial parameter
    scales, so one step size is meaningful across amplitudes, offsets and
    detunings; each iteration's line search starts at ``initial_step`` times
    the current normalized parameter norm and halves on rejection, at most
    ``max_halvings`` times.  Every objective evaluation counts against
    ``budget``.  J is non-decreasing over accepted steps by construction.

    Returns the best point found; ``stalled`` is set when no step could be
    accepted (including a budget too small to finish a line search).
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    theta = auto_init(target) if isinstance(init, str) and init == "auto" else np.asarray(
        init, dtype=float
    ).copy()
    if theta.shape != (len(target.param_names),):
        raise ValueError(f"init has wrong shape {theta.shape} for {target.param_names}")

    scale = np.where(np.abs(theta) > 0, np.abs(theta), 1.0)
    z = theta / scale
    n_evals = 0

    def run(zv) -> float | None:
        nonlocal n_evals
        n_evals += 1
        try:
            return objective(target, zv * scale, rtol=rtol, robust=robust)
        except (RiccatiBlowupError, IntegrationError):
            return None

    J = run(z)
    if J is None:
        raise RiccatiBlowupError(float("nan"), 0.0)
    trace = [(0, J, (z * scale).copy())]
    gradient = None
    step = initial_step * float(np.linalg.norm(z))
    stalled = False
    iteration = 0

    while n_evals + 2 * theta.size < budget:
        iteration += 1
        # gradient in normalized coordinates
        g = np.empty_like(z)
        failed = False
        for i in range(z.size):
            h = fd_rel_step * max(abs(z[i]), 1.0)
            up = z.copy()
            dn = z.copy()
            up[i] += h
            dn[i] -= h
            ju = run(up)
            jd = run(dn)
            if ju is None or jd is None:
                failed = True
                break
            g[i] = (ju - jd) / (2.0 * h)
        if failed:
            stalled = True
            break
        gradient = g / scale  # report in original coordinates
        gnorm = float(np.linalg.norm(g))
        if gnorm < grad_tol:
            break

        direction = g / gnorm
        step = initial_step * float(np.linalg.norm(z))
        accepted = False
        for _ in range(max_halvings + 1):
            if n_evals >= budget:
                break
            j_new = run(z + step * direction)
            if j_new is not None and j_new > J:
                z = z + step * direction
                J = j_new
                trace.append((iteration, J, (z * scale).copy()))
                accepted = True
                break
            step *= 0.5
        if not accepted:
            stalled = True
            break

    return OptState(
        theta=z * scale,
        J=J,
        gradient=gradient,
        n_iterations=iteration,
        n_evals=n_evals,
        step_size=step,
        stalled=stalled,
        trace=trace,
    )
