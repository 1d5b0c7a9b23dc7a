"""Exact two-channel scattering amplitudes by invariant imbedding.

The two-channel wave equation on the rescaled interval [0, 1] is solved by
growing the interaction slab from its left edge: the 2x2 reflection and
transmission matrices for incidence from the right obey a closed Riccati-type
system in the slab edge eta, integrated in numerically stabilized variables
(see :mod:`asymscat._imbed_py`).  Amplitudes for incidence from the left are
obtained by solving the mirrored problem and relabelling the asymptotic plane
waves.

Amplitude conventions: the free ground-channel waves are e^{+-i*kbar*x}/sqrt(kbar)
and the excited-channel waves e^{+-i*kappa2*x}/kappa2^(1/2), which makes the
probability current of every travelling component equal to |amplitude|^2 when
the excited channel is open.  For a closed channel (Im kappa2 > 0) the
excited-channel entries are proportionality factors of evanescent tails, not
probability amplitudes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from ._backend import BACKEND, propagate_stabilized
from .potential import ChannelThresholdError
from .profiles import RabiProfile
from .units import channel2_wavenumber

__all__ = [
    "ScatterJob",
    "ChannelMatrices",
    "SweepPoint",
    "SweepResult",
    "RiccatiBlowupError",
    "IntegrationError",
    "MIRROR_THETA_T",
    "free_solutions",
    "solve_right_incidence",
    "solve_left_incidence",
    "solve_both",
    "sweep_velocity",
    "write_sweep_csv",
    "BACKEND",
]

#: Phase relabelling constant for the mirror construction of left-incidence
#: amplitudes: with the e^{+-i*kbar*x} conventions above, the ground-channel
#: transmission amplitude is invariant under mirroring, T_left = e^{i*theta_T}
#: * T_right[mirrored profile] with theta_T = 0, while the ground reflection
#: picks up R_left = e^{2i*kbar} * R_right[mirrored].  Verified against the
#: direct integral-equation solver (tests/test_nystrom.py, complex-amplitude
#: agreement including phases).
MIRROR_THETA_T = 0.0


def free_solutions(kbar: float, Gammabar: complex):
    """The two free 2x2 matrix solutions h+(x), h-(x) and their Wronskian.

    h+-(x) = diag(e^{+-i*kbar*x}/sqrt(kbar), e^{+-i*kappa2*x}/kappa2^(1/2)).
    Returns (h_plus, h_minus, wronskian) where the first two are callables of
    x and the Wronskian W(h+, h-) = h+' h- - h+ h-' is the constant 2i times
    the identity; its inverse normalizes the slab equations.
    """
    kappa2 = channel2_wavenumber(kbar, Gammabar).kappa2
    norm = np.diag([1.0 / np.sqrt(kbar), 1.0 / np.sqrt(kappa2)])
    wave = np.array([kbar, kappa2])

    def h_plus(x):
        return norm @ np.diag(np.exp(1j * wave * x))

    def h_minus(x):
        return norm @ np.diag(np.exp(-1j * wave * x))

    def wronskian(x):
        d_plus = 1j * np.diag(wave) @ h_plus(x)
        d_minus = -1j * np.diag(wave) @ h_minus(x)
        return d_plus @ h_minus(x) - h_plus(x) @ d_minus

    return h_plus, h_minus, wronskian


class RiccatiBlowupError(RuntimeError):
    """The stabilized reflection variable exceeded the blow-up guard.

    Blow-ups signal a resonance pole of the truncated problem at this exact
    (profile, velocity); perturb the velocity slightly to step off the pole.
    """

    def __init__(self, eta: float, limit: float):
        self.eta = eta
        super().__init__(
            f"reflection variable exceeded {limit:g} at eta = {eta:.6f}; "
            "likely a resonance pole -- perturb the velocity to move off it"
        )


class IntegrationError(RuntimeError):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, eta: float):
        self.eta = eta
        super().__init__(
            f"step size underflow at eta = {eta:.6f}; tolerance not attainable"
        )


@dataclass(frozen=True)
class ScatterJob:
    """A fully dimensionless scattering instance.

    The coupling is stored as Gaussians of the rescaled coordinate
    eta in [0, 1]: Omegabar(eta) = sum_j amps[j]*exp(-((eta-centers[j])/widths[j])^2).
    """

    kbar: float
    Gammabar: complex
    amps: np.ndarray
    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        if self.kbar <= 0:
            raise ValueError(f"kbar must be positive, got {self.kbar}")
        object.__setattr__(self, "amps", np.ascontiguousarray(self.amps, dtype=complex))
        object.__setattr__(self, "centers", np.ascontiguousarray(self.centers, dtype=float))
        object.__setattr__(self, "widths", np.ascontiguousarray(self.widths, dtype=float))

    @classmethod
    def from_profile(cls, profile: RabiProfile, velocity_ratio: float) -> "ScatterJob":
        if velocity_ratio <= 0:
            raise ValueError(f"velocity_ratio must be positive, got {velocity_ratio}")
        return cls(
            kbar=2.0 * velocity_ratio,
            Gammabar=profile.Gammabar,
            amps=np.array([4.0 * t.weight_tau for t in profile.terms], dtype=complex),
            centers=np.array(
                [(t.center_over_d + 1.0) / 2.0 for t in profile.terms], dtype=float
            ),
            widths=np.array([t.width_over_d / 2.0 for t in profile.terms], dtype=float),
        )

    @property
    def kappa2(self) -> complex:
        return channel2_wavenumber(self.kbar, self.Gammabar).kappa2

    @property
    def channel2_open(self) -> bool:
        return channel2_wavenumber(self.kbar, self.Gammabar).is_open

    def mirrored(self) -> "ScatterJob":
        return replace(self, centers=1.0 - self.centers)


@dataclass(frozen=True)
class ChannelMatrices:
    """The four 2x2 amplitude matrices of one scattering instance.

    R, T are for incidence from the left; Rt, Tt for incidence from the
    right.  Row = outgoing channel, column = incident channel (1 = ground,
    2 = excited).
    """

    kbar: float
    kappa2: complex
    R: np.ndarray
    T: np.ndarray
    Rt: np.ndarray
    Tt: np.ndarray

    @property
    def T_left(self) -> complex:
        return self.T[0, 0]

    @property
    def T_right(self) -> complex:
        return self.Tt[0, 0]

    @property
    def R_left(self) -> complex:
        return self.R[0, 0]

    @property
    def R_right(self) -> complex:
        return self.Rt[0, 0]

    def ground_coefficients(self) -> dict[str, float]:
        """Squared moduli of the ground-channel amplitudes plus per-side
        absorption (1 - transmission - reflection)."""
        t2l = abs(self.T_left) ** 2
        t2r = abs(self.T_right) ** 2
        r2l = abs(self.R_left) ** 2
        r2r = abs(self.R_right) ** 2
        return {
            "T2l": t2l,
            "T2r": t2r,
            "R2l": r2l,
            "R2r": r2r,
            "absorb_l": 1.0 - t2l - r2l,
            "absorb_r": 1.0 - t2r - r2r,
        }

    def outgoing_flux(self, side: str) -> float:
        """Total outgoing probability flux for ground-state incidence from
        one side, summed over both channels.  Meaningful only for an open
        excited channel, where it equals 1 for a flux-conserving problem."""
        if side == "left":
            R, T = self.R, self.T
        elif side == "right":
            R, T = self.Rt, self.Tt
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return float(
            abs(T[0, 0]) ** 2 + abs(T[1, 0]) ** 2 + abs(R[0, 0]) ** 2 + abs(R[1, 0]) ** 2
        )

    def unitarity_margins(self) -> dict[str, float]:
        """The four ground-channel unitarity bounds as margins 1 - (sum of two
        squared moduli); all must be >= 0 (up to numerical slack) whenever the
        underlying two-channel problem conserves flux."""
        r2l = abs(self.R_left) ** 2
        r2r = abs(self.R_right) ** 2
        t2l = abs(self.T_left) ** 2
        t2r = abs(self.T_right) ** 2
        return {
            "Rl+Tl": 1.0 - r2l - t2l,
            "Rr+Tr": 1.0 - r2r - t2r,
            "Rr+Tl": 1.0 - r2r - t2l,
            "Rl+Tr": 1.0 - r2l - t2r,
        }


def _propagate(job: ScatterJob, rtol: float, atol: float, s_limit: float):
    kappa2 = job.kappa2
    if abs(kappa2) ** 2 <= 1e-12 * job.kbar**2:
        raise ChannelThresholdError(
            f"excited-channel wavenumber kappa2 = {kappa2:.3e} vanishes at this "
            "energy/detuning; the channel equations are degenerate here"
        )
    s, t, info = propagate_stabilized(
        job.kbar, kappa2, job.amps, job.centers, job.widths, rtol, atol, s_limit
    )
    if info["status"] == 1:
        raise RiccatiBlowupError(info["eta"], s_limit)
    if info["status"] == 2:
        raise IntegrationError(info["eta"])
    return np.array(s, dtype=complex).reshape(2, 2), np.array(t, dtype=complex).reshape(2, 2)


def solve_right_incidence(
    job: ScatterJob, rtol: float = 1e-9, atol: float = 1e-12, s_limit: float = 1e8
) -> tuple[np.ndarray, np.ndarray]:
    """Reflection and transmission matrices (Rt, Tt) for incidence from the right.

    The stabilized slab variables are integrated over eta in [0, 1] and the
    amplitudes recovered with their plane-wave normalization factors:

        Rt[0,0] = e^{-2i*kbar} (S[0,0] - 1)
        Tt[0,0] = e^{-i*kbar}  That[0,0]

    and analogously for the excited channel with kappa2 and the
    sqrt(kappa2)/sqrt(kbar) current normalization.
    """
    S, That = _propagate(job, rtol, atol, s_limit)
    k = job.kbar
    k2 = job.kappa2
    rk = np.sqrt(k)
    rk2 = np.sqrt(k2)  # principal branch; real for an open channel
    ek = np.exp(-1j * k)
    ek2 = np.exp(-1j * k2)

    Rt = np.empty((2, 2), dtype=complex)
    Tt = np.empty((2, 2), dtype=complex)
    Rt[0, 0] = ek * ek * (S[0, 0] - 1.0)
    Rt[0, 1] = (rk / rk2) * ek * ek2 * S[0, 1]
    Rt[1, 0] = (rk2 / rk) * ek * ek2 * S[1, 0]
    Rt[1, 1] = ek2 * ek2 * (S[1, 1] - 1.0)
    Tt[0, 0] = ek * That[0, 0]
    Tt[0, 1] = (rk / rk2) * ek2 * That[0, 1]
    Tt[1, 0] = (rk2 / rk) * ek * That[1, 0]
    Tt[1, 1] = ek2 * That[1, 1]
    return Rt, Tt


def solve_left_incidence(
    job: ScatterJob, rtol: float = 1e-9, atol: float = 1e-12, s_limit: float = 1e8
) -> tuple[np.ndarray, np.ndarray]:
    """Reflection and transmission matrices (R, T) for incidence from the left.

    Solves the mirrored slab for right incidence and relabels the plane
    waves:  R = D Rt_m D  and  T = D^-1 Tt_m D  with D = diag(e^{i*kbar},
    e^{i*kappa2}).  Moduli equal those of the mirrored right-incidence
    solution whenever the excited channel is open; ground-channel phases
    carry MIRROR_THETA_T (= 0) and the 2*kbar reflection phase.
    """
    Rt_m, Tt_m = solve_right_incidence(job.mirrored(), rtol, atol, s_limit)
    D = np.diag([np.exp(1j * job.kbar), np.exp(1j * job.kappa2)])
    Dinv = np.diag([np.exp(-1j * job.kbar), np.exp(-1j * job.kappa2)])
    R = D @ Rt_m @ D
    T = Dinv @ Tt_m @ D
    return R, T


def solve_both(
    job: ScatterJob, rtol: float = 1e-9, atol: float = 1e-12, s_limit: float = 1e8
) -> ChannelMatrices:
    """All four amplitude matrices of one scattering instance."""
    Rt, Tt = solve_right_incidence(job, rtol, atol, s_limit)
    R, T = solve_left_incidence(job, rtol, atol, s_limit)
    return ChannelMatrices(kbar=job.kbar, kappa2=job.kappa2, R=R, T=T, Rt=Rt, Tt=Tt)


# -- velocity sweeps ----------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    v_over_vd: float
    T2l: float
    T2r: float
    R2l: float
    R2r: float
    absorb_l: float
    absorb_r: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    failures: tuple[tuple[float, str], ...]


def _max_workers(n_jobs: int) -> int:
    cap = os.environ.get("ASYM_THREADS")
    workers = os.cpu_count() or 1
    if cap is not None:
        try:
            workers = max(1, int(cap))
        except ValueError:
            raise ValueError(f"ASYM_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(workers, n_jobs))


def sweep_velocity(
    profile: RabiProfile,
    v_ratios: Sequence[float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> SweepResult:
    """Ground-channel coefficients over a list of velocities v/v_d.

    Points run concurrently (the compiled kernel releases the GIL); failures
    at individual velocities are recorded and the sweep continues.  Results
    are returned in input order.
    """
    v_ratios = [float(v) for v in v_ratios]
    if not v_ratios:
        return SweepResult(points=(), failures=())

    def solve_one(v):
        job = ScatterJob.from_profile(profile, v)
        return solve_both(job, rtol=rtol, atol=atol)

    results: list[SweepPoint | None] = [None] * len(v_ratios)
    failures: list[tuple[float, str]] = []
    with ThreadPoolExecutor(max_workers=_max_workers(len(v_ratios))) as pool:
        futures = {i: pool.submit(solve_one, v) for i, v in enumerate(v_ratios)}
        for i, fut in futures.items():
            v = v_ratios[i]
            try:
                cm = fut.result()
            except (RiccatiBlowupError, IntegrationError, ValueError) as exc:
                failures.append((v, str(exc)))
                continue
            c = cm.ground_coefficients()
            results[i] = SweepPoint(v_over_vd=v, **c)
    return SweepResult(
        points=tuple(p for p in results if p is not None), failures=tuple(failures)
    )


def write_sweep_csv(result: SweepResult, path: Union[str, Path], header: str = "") -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(header.rstrip("\n") + "\n")
        fh.write("v_over_vd,T2l,T2r,R2l,R2r,absorb_l,absorb_r\n")
        for p in result.points:
            fh.write(
                f"{p.v_over_vd:.12g},{p.T2l:.12g},{p.T2r:.12g},"
                f"{p.R2l:.12g},{p.R2r:.12g},{p.absorb_l:.12g},{p.absorb_r:.12g}\n"
            )
