import math

import numpy as np
import pytest

from asymscat.potential import (
    ChannelThresholdError,
    build_kernel,
    effective_params,
    kernel_csv_rows,
    write_kernel_csv,
)
from asymscat.profiles import GaussianTerm, RabiProfile, make_preset, preset_profile
from asymscat.units import HBAR, PhysicalScales

W = math.sqrt(2) / 10


def flat_gaussian(tau_delta=0.0, weight=1.0, center=0.0, width=0.5):
    return RabiProfile(terms=(GaussianTerm(weight, center, width),), tau_delta=tau_delta)


class TestEffectiveParams:
    def test_resonant_case(self):
        p = flat_gaussian(tau_delta=0.0)
        params = effective_params(p, 5.0)
        assert params.mu == 0.0
        assert params.kappa2 == pytest.approx(params.kbar, rel=1e-14)
        assert params.is_open

    def test_threshold_is_hard_error(self):
        # kbar = 4, tau_delta = -2 gives mu = 8*(-2)/16 = -1 exactly
        p = flat_gaussian(tau_delta=-2.0)
        with pytest.raises(ChannelThresholdError, match="degenerate channel threshold"):
            effective_params(p, 2.0)

    def test_nonpositive_energy(self):
        with pytest.raises(ValueError, match="velocity_ratio"):
            effective_params(flat_gaussian(), 0.0)
        with pytest.raises(ValueError, match="velocity_ratio"):
            effective_params(flat_gaussian(), -3.0)

    def test_transmit_absorb_regime_value(self):
        # v/v_d = 400, tau*Delta = 1413.01: mu = 2*1413.01/160000
        profile = flat_gaussian(tau_delta=1413.01)
        params = effective_params(profile, 400.0)
        assert params.mu == pytest.approx(0.017662625, rel=1e-12)
        assert params.kappa2.imag == 0.0
        # dual route: kbar^2*(1+mu) must equal kbar^2 + i*Gammabar
        kbar = 800.0
        assert params.kappa2**2 == pytest.approx(
            kbar**2 + 1j * profile.Gammabar, rel=1e-12
        )

    def test_branch_is_upper_half_plane(self, rng):
        for _ in range(100):
            p = RabiProfile(
                terms=(GaussianTerm(1.0, 0.0, 0.3),),
                tau_delta=float(rng.uniform(-50, 50)),
                tau_gamma=float(rng.uniform(0, 10)),
            )
            params = effective_params(p, float(rng.uniform(0.2, 20)))
            assert params.kappa2.imag >= 0


class TestBuildKernel:
    def test_zero_profile_zero_kernel(self):
        p = flat_gaussian(weight=0.0)
        kernel = build_kernel(p, 3.0, n=51)
        assert np.all(kernel.values_over_V0 == 0.0)

    def test_center_value_against_physical_oracle(self):
        # single Gaussian, resonant, v/v_d = 5: V(0,0) = (m/4)*Omega(0)^2/(i*q).
        # Independent oracle: evaluate that formula in SI units with concrete
        # scales and divide by V_0.
        scales = PhysicalScales(mass=1.49e-26, half_width_d=10e-6)
        profile = flat_gaussian(weight=1.0, center=0.0, width=0.5)
        vr = 5.0
        kernel = build_kernel(profile, vr, n=5)  # grid includes u = 0
        center = kernel.values_over_V0[2, 2]

        omega0 = 1.0 / scales.tau  # weight_tau = 1 at its center
        v = vr * scales.v_d
        q = scales.mass * v / HBAR  # sqrt(2mE)/hbar with mu = 0
        v_physical = (scales.mass / 4.0) * omega0**2 / (1j * q)
        assert center == pytest.approx(v_physical / scales.V_0, rel=1e-12)
        # and the closed dimensionless form: 4*4/(32i*kappa2)
        assert center == pytest.approx(16.0 / (32j * 10.0), rel=1e-12)

    def test_modulus_factorizes_through_coupling(self):
        # open channel: |V(x,y)| proportional to |Omega(x)||Omega(y)|
        profile, v0 = preset_profile("ta")
        kernel = build_kernel(profile, v0, n=101)
        om = np.abs(4.0 * profile.omega_tau(kernel.grid_over_d))
        denom = om[:, None] * om[None, :]
        mask = denom > 1e-6 * denom.max()
        ratio = np.abs(kernel.values_over_V0)[mask] / denom[mask]
        expected = 1.0 / (32.0 * abs(kernel.params.kappa2))
        assert np.allclose(ratio, expected, rtol=1e-12)

    def test_lobe_locations(self):
        # |V| peaks where both coupling lobes peak: the four (+-x0, +-x0) nodes
        profile, v0 = preset_profile("ta")
        kernel = build_kernel(profile, v0, n=201)
        absv = np.abs(kernel.values_over_V0)
        u = kernel.grid_over_d
        peak = absv.max()
        for cx in (-0.1532, 0.1532):
            for cy in (-0.1532, 0.1532):
                i = int(np.argmin(np.abs(u - cx)))
                j = int(np.argmin(np.abs(u - cy)))
                assert absv[i, j] > 0.9 * peak
        far = int(np.argmin(np.abs(u - 0.7)))
        assert absv[far, far] < 1e-6 * peak

    def test_grid_validation(self):
        with pytest.raises(ValueError, match="grid"):
            build_kernel(flat_gaussian(), 1.0, n=1)

    def test_threshold_error_propagates(self):
        with pytest.raises(ChannelThresholdError):
            build_kernel(flat_gaussian(tau_delta=-2.0), 2.0, n=11)


class TestKernelSymmetries:
    def check(self, values, transform, tol=1e-10):
        return np.max(np.abs(values - transform)) <= tol * np.max(np.abs(values))

    def test_viii_profile_antitranspose(self):
        profile, v0 = preset_profile("ta")
        v = build_kernel(profile, v0, n=129).values_over_V0
        # V(x, y) = V(-y, -x): reverse both axes then transpose
        assert self.check(v, v[::-1, ::-1].T)
        assert not self.check(v, v.T, tol=1e-3)  # VI relation must fail

    def test_vi_profile_transpose(self):
        profile, v0 = preset_profile("ra")
        v = build_kernel(profile, v0, n=129).values_over_V0
        assert self.check(v, v.T)
        assert not self.check(v, v[::-1, ::-1].T, tol=1e-3)  # VIII must fail

    def test_iii_profile_point_reflection(self):
        p = make_preset("VI", b_tau=4.0, c_tau=4.0, x0_over_d=0.2, w_over_d=0.15, tau_delta=2.0)
        v = build_kernel(p, 3.0, n=129).values_over_V0
        assert self.check(v, v[::-1, ::-1])

    def test_i_profile_has_no_kernel_symmetry(self):
        profile, v0 = preset_profile("tra-half")
        v = build_kernel(profile, v0, n=129).values_over_V0
        assert not self.check(v, v.T, tol=1e-3)
        assert not self.check(v, v[::-1, ::-1].T, tol=1e-3)
        assert not self.check(v, v[::-1, ::-1], tol=1e-3)

    def test_imaginary_q_gives_hermitian_kernel(self):
        # gamma = 0 and mu + 1 < 0: Re q = 0, so V(x,y) = V(y,x)^*
        p = RabiProfile(
            terms=(GaussianTerm(2.0 + 1.0j, -0.2, 0.2), GaussianTerm(1.0, 0.3, 0.15)),
            tau_delta=-3.0,
        )
        kernel = build_kernel(p, 1.0, n=129)  # kbar = 2, mu = -6
        assert kernel.params.kappa2.real == 0.0
        v = kernel.values_over_V0
        assert self.check(v, np.conj(v.T))

    def test_large_mu_kernel_localizes(self):
        # along the imaginary-q direction the off-diagonal range shrinks
        profile = flat_gaussian(width=0.4)
        masses = []
        for tau_delta in (-4.0, -8.0, -16.0, -32.0, -64.0):
            p = RabiProfile(terms=profile.terms, tau_delta=tau_delta)
            kernel = build_kernel(p, 1.0, n=201)
            assert kernel.params.kappa2.real == 0.0
            absv = np.abs(kernel.values_over_V0)
            u = kernel.grid_over_d
            off = np.abs(u[:, None] - u[None, :]) > 0.2
            masses.append(absv[off].sum() / absv.sum())
        assert all(b < a for a, b in zip(masses, masses[1:]))

    def test_energy_dependence(self):
        profile = flat_gaussian(tau_delta=10.0)
        k1 = build_kernel(profile, 4.0, n=33)
        k2 = build_kernel(profile, 4.0 * math.sqrt(2), n=33)  # doubled energy
        mu1 = k1.params.mu
        # mu halves when E doubles; q scales as sqrt(2E)(1 + mu/2)^(1/2)
        assert k2.params.mu == pytest.approx(mu1 / 2.0, rel=1e-12)
        assert k2.params.kappa2 == pytest.approx(
            math.sqrt(2) * k1.params.kbar * np.sqrt(1 + mu1 / 2.0), rel=1e-12
        )


class TestKernelCsv:
    def test_rows_and_file(self, tmp_path):
        profile, v0 = preset_profile("ta")
        kernel = build_kernel(profile, v0, n=7)
        rows = list(kernel_csv_rows(kernel))
        assert len(rows) == 49
        path = tmp_path / "kernel.csv"
        write_kernel_csv(kernel, path, header="# test")
        lines = path.read_text().splitlines()
        assert lines[0] == "# test"
        assert lines[1] == "x_over_d,y_over_d,absV_over_V0,argV"
        assert len(lines) == 2 + 49
        x, y, a, p = lines[2].split(",")
        assert float(x) == -1.0 and float(y) == -1.0
        assert float(a) == pytest.approx(abs(kernel.values_over_V0[0, 0]), rel=1e-10)
