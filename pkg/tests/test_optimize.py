import numpy as np
import pytest

from asymscat.optimize import (
    AnsatzError,
    DeviceTarget,
    auto_init,
    fd_gradient,
    objective,
    optimize,
    profile_from_theta,
)
from asymscat.profiles import classify_profile

TA = DeviceTarget(kind="ta", v0_ratio=400.0, ansatz="VIII")
HALF = DeviceTarget(kind="tra-half", v0_ratio=8.0, ansatz="I")


class TestDeviceTarget:
    def test_ansatz_device_compatibility(self):
        DeviceTarget(kind="ta", v0_ratio=10.0, ansatz="VIII")
        DeviceTarget(kind="ta", v0_ratio=10.0, ansatz="I")
        DeviceTarget(kind="ra", v0_ratio=10.0, ansatz="VI")
        DeviceTarget(kind="tra-half", v0_ratio=10.0, ansatz="I")
        with pytest.raises(AnsatzError):
            DeviceTarget(kind="ra", v0_ratio=10.0, ansatz="VIII")
        with pytest.raises(AnsatzError):
            DeviceTarget(kind="ta", v0_ratio=10.0, ansatz="VI")
        with pytest.raises(AnsatzError):
            DeviceTarget(kind="tra-half", v0_ratio=10.0, ansatz="VI")

    def test_input_validation(self):
        with pytest.raises(ValueError):
            DeviceTarget(kind="nope", v0_ratio=10.0, ansatz="VIII")
        with pytest.raises(ValueError):
            DeviceTarget(kind="ta", v0_ratio=-1.0, ansatz="VIII")


class TestObjective:
    def test_zero_coupling_scores_zero(self):
        # free propagation transmits both ways: J = 1 - 0 - 1 - 0
        assert objective(TA, [0.0, 0.15, 1364.0]) == pytest.approx(0.0, abs=1e-8)

    def test_reference_parameters_score_high(self):
        j = objective(TA, [2618.19, 0.1532, 1413.01])
        assert j >= 0.85

    def test_auto_init_scores_high(self):
        j = objective(TA, auto_init(TA))
        assert j >= 0.9

    def test_theta_shape_checked(self):
        with pytest.raises(ValueError, match="theta"):
            objective(TA, [1.0, 2.0])

    def test_robust_objective_averages_over_velocity_window(self):
        theta = [2618.19, 0.1532, 1413.01]
        j_robust = objective(TA, theta, robust=True)
        singles = [
            objective(
                DeviceTarget(kind="ta", v0_ratio=r * 400.0, ansatz="VIII"), theta
            )
            for r in (0.9, 1.0, 1.1)
        ]
        assert j_robust == pytest.approx(np.mean(singles), abs=1e-10)


class TestGradient:
    def test_richardson_step_halving(self, rng):
        # central differences at rel step 1e-4 vs 5e-5 agree within 5 %
        theta0 = auto_init(TA)
        for _ in range(3):
            theta = theta0 * rng.uniform(0.85, 1.15, theta0.size)
            g1 = fd_gradient(TA, theta, rel_step=1e-4)
            g2 = fd_gradient(TA, theta, rel_step=5e-5)
            scale = np.abs(g2) + 1e-3 * np.max(np.abs(g2))
            assert np.all(np.abs(g1 - g2) <= 0.05 * scale)


class TestOptimize:
    def test_single_eval_budget_returns_init(self):
        theta0 = auto_init(HALF)
        state = optimize(HALF, budget=1)
        assert state.n_evals == 1
        assert np.allclose(state.theta, theta0)
        assert state.J == pytest.approx(objective(HALF, theta0), abs=1e-10)
        assert not state.stalled

    def test_ascent_improves_and_is_monotone(self):
        state = optimize(HALF, budget=120)
        js = [j for _, j, _ in state.trace]
        assert all(b > a for a, b in zip(js, js[1:]))
        assert state.J >= js[0]
        assert state.n_evals <= 120

    def test_reaches_reference_quality_quickly(self):
        state = optimize(TA, budget=120)
        assert state.J >= 0.9
        js = [j for _, j, _ in state.trace]
        assert all(b > a for a, b in zip(js, js[1:]))

    def test_iterates_preserve_ansatz_symmetry(self):
        state = optimize(TA, budget=60)
        for _, _, theta in state.trace:
            rep = classify_profile(profile_from_theta(TA, theta))
            assert rep.flags == {"I": True, "III": False, "VI": False, "VIII": True}

    def test_stalls_when_no_step_accepted(self):
        # a huge non-backtrackable step from a good point cannot improve
        state = optimize(
            TA, init=np.array([2618.19, 0.1532, 1413.01]), budget=60,
            initial_step=50.0, max_halvings=0,
        )
        assert state.stalled
        assert len(state.trace) == 1  # only the initial point

    def test_explicit_init_and_validation(self):
        with pytest.raises(ValueError, match="budget"):
            optimize(TA, budget=0)
        with pytest.raises(ValueError, match="init"):
            optimize(TA, init=np.array([1.0, 2.0]))
