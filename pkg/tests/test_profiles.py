import json
import math

import numpy as np
import pytest

from asymscat.potential import effective_params
from asymscat.profiles import (
    DEVICE_RULES,
    GaussianTerm,
    ProfileSchemaError,
    RabiProfile,
    SymmetryReport,
    allowed_devices,
    classify_profile,
    classify_with_energy,
    load_profile,
    make_preset,
    preset_profile,
    save_profile,
)

W = math.sqrt(2) / 10


class TestMakePreset:
    def test_viii_formula(self):
        p = make_preset("VIII", a_tau=2618.19, x0_over_d=0.1532, w_over_d=W, tau_delta=1413.01)
        # Omega = a*(g(x+x0) + i*g(x-x0))
        for u in (-0.3, 0.0, 0.1532, 0.4):
            g_minus = math.exp(-(((u + 0.1532) / W) ** 2))
            g_plus = math.exp(-(((u - 0.1532) / W) ** 2))
            assert p.omega_tau(u) == pytest.approx(
                2618.19 * (g_minus + 1j * g_plus), rel=1e-14
            )

    def test_vi_and_i_formulas(self):
        p6 = make_preset("VI", b_tau=2.0, c_tau=3.0, x0_over_d=0.2, w_over_d=0.1, tau_delta=0.0)
        p1 = make_preset("I", b_tau=2.0, c_tau=3.0, x0_over_d=0.2, w_over_d=0.1, tau_delta=0.0)
        u = 0.15
        gm = math.exp(-(((u + 0.2) / 0.1) ** 2))
        gp = math.exp(-(((u - 0.2) / 0.1) ** 2))
        assert p6.omega_tau(u) == pytest.approx(2.0 * gm + 3.0 * gp, rel=1e-14)
        assert p1.omega_tau(u) == pytest.approx(-2j * gm + 3.0 * gp, rel=1e-14)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError, match="width"):
            make_preset("VIII", a_tau=1.0, x0_over_d=0.1, w_over_d=0.0, tau_delta=0.0)
        with pytest.raises(ValueError, match="requires"):
            make_preset("VI", b_tau=1.0, x0_over_d=0.1, w_over_d=0.1, tau_delta=0.0)
        with pytest.raises(ValueError, match="unknown"):
            make_preset("IX", a_tau=1.0, x0_over_d=0.1, w_over_d=0.1, tau_delta=0.0)

    def test_profile_negligible_outside_half_width(self):
        for name in ("ta", "ra", "tra-half"):
            profile, _ = preset_profile(name)
            u = np.linspace(-1.5, 1.5, 3001)
            om = np.abs(profile.omega_tau(u))
            peak = om.max()
            outside = np.abs(profile.omega_tau(np.array([-1.0, 1.0, -1.3, 1.3])))
            assert np.all(outside < 1e-8 * peak)


class TestClassifyProfile:
    def test_reference_viii_profile(self):
        profile, _ = preset_profile("ta")
        rep = classify_profile(profile)
        assert rep.flags == {"I": True, "III": False, "VI": False, "VIII": True}
        assert rep.phases["VIII"] == pytest.approx(math.pi / 2, abs=1e-12)
        assert not rep.degenerate

    def test_reference_vi_profile(self):
        profile, _ = preset_profile("ra")
        rep = classify_profile(profile)
        assert rep.flags == {"I": True, "III": False, "VI": True, "VIII": False}
        # real profile: phase 0 (or 2*pi-equivalent)
        assert min(rep.phases["VI"], 2 * math.pi - rep.phases["VI"]) < 1e-12

    def test_reference_i_profile(self):
        profile, _ = preset_profile("tra-half")
        rep = classify_profile(profile)
        assert rep.flags == {"I": True, "III": False, "VI": False, "VIII": False}

    def test_even_vi_profile_also_parity_symmetric(self):
        p = make_preset("VI", b_tau=5.0, c_tau=5.0, x0_over_d=0.2, w_over_d=0.15, tau_delta=0.0)
        rep = classify_profile(p)
        assert rep.flags["III"] and rep.flags["VI"]

    def test_real_even_single_gaussian_has_all_three(self):
        p = RabiProfile(terms=(GaussianTerm(3.0, 0.0, 0.2),), tau_delta=1.0)
        rep = classify_profile(p)
        assert rep.flags == {"I": True, "III": True, "VI": True, "VIII": True}
        for phi in rep.phases.values():
            assert min(phi, 2 * math.pi - phi) < 1e-12

    def test_zero_profile_degenerate(self):
        p = RabiProfile(terms=(GaussianTerm(0.0, 0.0, 0.2),), tau_delta=1.0)
        rep = classify_profile(p)
        assert rep.degenerate
        assert all(rep.flags.values())

    def test_empty_terms_profile_degenerate(self):
        rep = classify_profile(RabiProfile(terms=(), tau_delta=1.0))
        assert rep.degenerate

    def test_global_phase_invariance(self, rng):
        profile, _ = preset_profile("ta")
        base = classify_profile(profile)
        for alpha in (0.3, 1.7, 4.4):
            rotated = RabiProfile(
                terms=tuple(
                    GaussianTerm(
                        t.weight_tau * np.exp(1j * alpha), t.center_over_d, t.width_over_d
                    )
                    for t in profile.terms
                ),
                tau_delta=profile.tau_delta,
            )
            rep = classify_profile(rotated)
            assert rep.flags == base.flags

    def test_grid_minimum(self):
        profile, _ = preset_profile("ta")
        with pytest.raises(ValueError, match="grid_n"):
            classify_profile(profile, grid_n=32)


class TestClassifyWithEnergy:
    def test_hermiticity_flag_from_sign_of_one_plus_mu(self):
        p = RabiProfile(terms=(GaussianTerm(1.0, 0.1, 0.2),), tau_delta=-2.0)
        # kbar = 2: mu = 8*tau_delta/kbar^2 = -4 -> 1+mu < 0 -> q imaginary -> II
        closed = classify_with_energy(p, kbar=2.0, mu=-4.0)
        assert closed.flags["II"]
        # open regime: q real, II false
        open_ = classify_with_energy(p, kbar=2.0, mu=0.5)
        assert not open_.flags["II"]

    def test_hermitian_case_forbids_all_devices(self):
        p = RabiProfile(terms=(GaussianTerm(1.0, 0.1, 0.2),), tau_delta=-2.0)
        rep = classify_with_energy(p, kbar=2.0, mu=-4.0)
        assert rep.devices == frozenset()

    def test_reference_viii_device_list(self):
        profile, v0 = preset_profile("ta")
        params = effective_params(profile, v0)
        rep = classify_with_energy(profile, params.kbar, params.mu)
        assert rep.devices == frozenset({"T/A", "TR/R"})

    def test_implication_lattice(self, rng):
        # IV => III, II, I; V => VI, II, I; VII => VIII, II, I; each of
        # II, III, VI, VIII => I; I always
        profiles = [preset_profile(n)[0] for n in ("ta", "ra", "tra-half")]
        profiles.append(RabiProfile(terms=(GaussianTerm(2.0, 0.0, 0.2),), tau_delta=-3.0))
        profiles.append(
            RabiProfile(terms=(GaussianTerm(1.0 + 2.0j, -0.2, 0.15),
                               GaussianTerm(0.5, 0.3, 0.2)), tau_delta=1.0)
        )
        for profile in profiles:
            for mu in (-4.0, -1.5, 0.0, 0.7):
                rep = classify_with_energy(profile, kbar=2.0, mu=mu)
                f = rep.flags
                assert f["I"]
                if f["IV"]:
                    assert f["III"] and f["II"]
                if f["V"]:
                    assert f["VI"] and f["II"]
                if f["VII"]:
                    assert f["VIII"] and f["II"]


class TestAllowedDevices:
    def _report(self, names):
        flags = {k: k in names for k in ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")}
        return SymmetryReport(flags=flags, phases={})

    def test_identity_only_allows_all_six(self):
        assert allowed_devices(self._report({"I"})) == frozenset(DEVICE_RULES)

    def test_vi_allows_reflect_type_devices(self):
        assert allowed_devices(self._report({"I", "VI"})) == frozenset({"R/A", "TR/T"})

    def test_viii_allows_transmit_type_devices(self):
        assert allowed_devices(self._report({"I", "VIII"})) == frozenset({"T/A", "TR/R"})

    def test_hermitian_allows_nothing(self):
        assert allowed_devices(self._report({"I", "II"})) == frozenset()


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        profile, _ = preset_profile("tra-half")
        path = tmp_path / "p.json"
        save_profile(profile, path)
        loaded = load_profile(path)
        assert loaded == profile

    def test_round_trip_with_d_meters(self, tmp_path):
        p = RabiProfile(
            terms=(GaussianTerm(1 + 2j, -0.1, 0.2),), tau_delta=3.0, tau_gamma=0.5,
            d_meters=1e-5,
        )
        path = tmp_path / "p.json"
        save_profile(p, path)
        assert load_profile(path) == p

    def test_schema_contents(self, tmp_path):
        profile, _ = preset_profile("ta")
        path = tmp_path / "p.json"
        save_profile(profile, path)
        raw = json.loads(path.read_text())
        assert set(raw) == {"terms", "tau_delta", "tau_gamma"}
        assert set(raw["terms"][0]) == {"re", "im", "center_over_d", "w_over_d"}

    @pytest.mark.parametrize(
        "doc",
        [
            "[]",
            '{"tau_delta": 1.0}',
            '{"terms": "nope", "tau_delta": 1.0}',
            '{"terms": [{"re": 1.0}], "tau_delta": 1.0}',
            '{"terms": [{"re": 1.0, "center_over_d": 0, "w_over_d": -1}], "tau_delta": 1.0}',
            "not json",
        ],
    )
    def test_schema_violations(self, tmp_path, doc):
        path = tmp_path / "bad.json"
        path.write_text(doc)
        with pytest.raises(ProfileSchemaError):
            load_profile(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ProfileSchemaError, match="not found"):
            load_profile(tmp_path / "nope.json")


class TestProfileHelpers:
    def test_mirrored_and_conjugated(self):
        profile, _ = preset_profile("tra-half")
        m = profile.mirrored()
        c = profile.conjugated()
        u = 0.37
        assert m.omega_tau(u) == pytest.approx(profile.omega_tau(-u), rel=1e-14)
        assert c.omega_tau(u) == pytest.approx(np.conj(profile.omega_tau(u)), rel=1e-14)

    def test_gamma_negative_rejected(self):
        with pytest.raises(ValueError, match="tau_gamma"):
            RabiProfile(terms=(GaussianTerm(1.0, 0.0, 0.2),), tau_delta=0.0, tau_gamma=-1.0)

    def test_unknown_preset_name(self):
        with pytest.raises(ValueError, match="unknown device preset"):
            preset_profile("nope")
