import math
from dataclasses import replace

import numpy as np
import pytest

from adrc_lab.lti import InvalidInput, characteristic_polynomial
from adrc_lab.simulate import (
    ControllerConfig,
    PlantSpec,
    Scenario,
    SimulationDiverged,
    Trajectory,
    build_plant,
    gaussian_noise,
    run_closed_loop,
    simulate_plant,
)
from adrc_lab.controllers import PidGains
from adrc_lab.experiments import delta_u_std


def adrc1_scenario(**kw):
    defaults = dict(
        plant=PlantSpec(kind="first_order", K=1.0, T=1.0),
        controller=ControllerConfig(kind="adrc_continuous", order=1, b0=1.0,
                                    t_settle=1.0, k_eso=10.0),
        horizon=6.0,
    )
    defaults.update(kw)
    return Scenario(**defaults)


class TestBuildPlant:
    def test_first_order(self):
        model, delay = build_plant(PlantSpec(kind="first_order", K=1.0, T=1.0), 1e-3)
        assert model.n == 1 and delay == 0
        assert model.a[0, 0] == -1.0
        # DC gain: -C A^-1 B
        assert -model.c[0, 0] / model.a[0, 0] * model.b[0, 0] == 1.0

    def test_second_order_critical_poles(self):
        model, _ = build_plant(PlantSpec(kind="second_order", K=1.0, D=1.0, T=1.0),
                               1e-3)
        cp = characteristic_polynomial(model.a)
        np.testing.assert_allclose(cp.coefficients, [1.0, 2.0, 1.0], rtol=1e-15)

    def test_integrator_slope(self):
        traj = simulate_plant(
            build_plant(PlantSpec(kind="integrator", K_I=2.0), 1e-3)[0],
            ((0.0, 1.0),), 1e-3, 1.0)
        np.testing.assert_allclose(traj.y_clean, 2.0 * traj.t, atol=1e-10)

    def test_extra_pole_keeps_dc_gain(self):
        spec = PlantSpec(kind="first_order", K=3.0, T=0.5, extra_pole_T=0.05)
        model, _ = build_plant(spec, 1e-3)
        assert model.n == 2
        dc = -(model.c @ np.linalg.solve(model.a, model.b))[0, 0]
        assert math.isclose(dc, 3.0, rel_tol=1e-12)

    def test_dead_time_rounds_to_substeps(self):
        spec = PlantSpec(kind="first_order", K=1.0, T=1.0, dead_time=0.0506)
        assert build_plant(spec, 1e-3)[1] == 51

    def test_rejects_bad_time_constant(self):
        with pytest.raises(InvalidInput):
            PlantSpec(kind="first_order", K=1.0, T=0.0)


class TestGaussianNoise:
    def test_zero_variance_all_zero(self):
        assert not gaussian_noise(123, 1000, 0.0).any()

    def test_same_seed_identical(self):
        a = gaussian_noise(42, 5000, 1e-4)
        b = gaussian_noise(42, 5000, 1e-4)
        np.testing.assert_array_equal(a, b)
        assert gaussian_noise(43, 10, 1e-4)[0] != a[0]

    def test_moments_at_one_million(self):
        z = gaussian_noise(7, 10 ** 6, 1e-4)
        assert 0.000099 <= z.var() <= 0.000101
        assert abs(z.mean()) < 5e-5


class TestOpenLoopFidelity:
    def test_first_order_step_response(self):
        model, _ = build_plant(PlantSpec(kind="first_order", K=2.0, T=0.5), 1e-3)
        traj = simulate_plant(model, ((0.0, 1.0),), 1e-3, 3.0)
        analytic = 2.0 * (1.0 - np.exp(-2.0 * traj.t))
        assert np.max(np.abs(traj.y_clean - analytic)) < 1e-8

    def test_second_order_critically_damped_step(self):
        model, _ = build_plant(PlantSpec(kind="second_order", K=1.5, D=1.0, T=0.5),
                               1e-3)
        traj = simulate_plant(model, ((0.0, 1.0),), 1e-3, 4.0)
        analytic = 1.5 * (1.0 - (1.0 + traj.t / 0.5) * np.exp(-traj.t / 0.5))
        assert np.max(np.abs(traj.y_clean - analytic)) < 1e-8

    def test_dead_time_is_exact_shift(self):
        model, delay = build_plant(
            PlantSpec(kind="first_order", K=1.0, T=0.7, dead_time=0.05), 1e-3)
        plain = simulate_plant(model, ((0.0, 1.0),), 1e-3, 2.0)
        delayed = simulate_plant(model, ((0.0, 1.0),), 1e-3, 2.0,
                                 delay_steps=delay)
        assert delay == 50
        np.testing.assert_array_equal(delayed.y_clean[delay:],
                                      plain.y_clean[:-delay])
        assert not delayed.y_clean[:delay].any()


class TestClosedLoop:
    def test_quiescent_loop_stays_at_zero(self):
        traj = run_closed_loop(adrc1_scenario(reference=(), horizon=2.0))
        assert not traj.y_clean.any()
        assert not traj.u_raw.any()

    def test_nominal_tracking(self):
        traj = run_closed_loop(adrc1_scenario())
        i1 = int(round(1.0 / 1e-3))
        assert 0.97 <= traj.y_clean[i1] <= 1.00
        assert np.all(np.diff(traj.y_clean[:i1 + 1]) >= -1e-12)

    def test_tracking_band_after_settling(self):
        traj = run_closed_loop(adrc1_scenario())
        mask = traj.t > 1.0
        assert np.max(np.abs(traj.y_clean[mask] - traj.r[mask])) < 0.025

    def test_determinism_bit_exact(self):
        scn = adrc1_scenario()
        a, b = run_closed_loop(scn), run_closed_loop(scn)
        np.testing.assert_array_equal(a.y_clean, b.y_clean)
        np.testing.assert_array_equal(a.u_raw, b.u_raw)

        noisy = replace(adrc1_scenario(horizon=3.0),
                        controller=ControllerConfig(kind="adrc_discrete", order=1,
                                                    b0=1.0, t_settle=1.0, k_eso=5.0),
                        controller_sample_time=0.01, noise_variance=1e-4,
                        noise_seed=99)
        c, d = run_closed_loop(noisy), run_closed_loop(noisy)
        np.testing.assert_array_equal(c.y, d.y)
        np.testing.assert_array_equal(c.u_raw, d.u_raw)

    def test_saturation_never_exceeded(self):
        # A 2.0 step makes the initial raw demand k_p * r = 8 > 5.
        traj = run_closed_loop(adrc1_scenario(reference=((0.0, 2.0),),
                                              saturation_limit=5.0, horizon=3.0))
        assert np.max(np.abs(traj.u_lim)) <= 5.0
        assert np.max(np.abs(traj.u_raw)) > 5.0  # raw demand exceeds the limit

    def test_rk4_halving_convergence(self):
        base = adrc1_scenario(horizon=3.0)
        coarse = run_closed_loop(base)
        fine = run_closed_loop(replace(base, sim_step=5e-4))
        assert np.max(np.abs(coarse.y_clean - fine.y_clean[::2])) < 1e-6

    def test_antiwindup_converges_under_permanent_saturation(self):
        scn = adrc1_scenario(plant=PlantSpec(kind="first_order", K=0.1, T=1.0),
                             saturation_limit=5.0, horizon=20.0)
        traj = run_closed_loop(scn)
        mid = len(traj.t) // 2
        assert abs(traj.u_raw[-1] - traj.u_raw[mid]) < 1e-3
        # Raw output bounded by (k_p |r| + |f_hat|) / |b0| at all times.
        f_hat = traj.x_hat[:, -1]
        bound = (4.0 * np.abs(traj.r) + np.abs(f_hat)) / 1.0
        assert np.all(np.abs(traj.u_raw) <= bound + 1e-9)

    def test_antiwindup_no_divergence_long_horizon(self):
        scn = adrc1_scenario(plant=PlantSpec(kind="first_order", K=0.1, T=1.0),
                             saturation_limit=5.0, horizon=200.0)
        traj = run_closed_loop(scn)
        assert abs(traj.u_raw[-1] - 7.0) < 1e-6

    def test_observer_deadtime_compensation_reduces_oscillation(self):
        dead = adrc1_scenario(
            plant=PlantSpec(kind="first_order", K=1.0, T=1.0, dead_time=0.1),
            controller=ControllerConfig(kind="adrc_continuous", order=1, b0=1.0,
                                        t_settle=1.0, k_eso=2.0),
            horizon=8.0)
        comp = replace(dead, controller=replace(dead.controller, t_dead_eso=0.05))
        jitter_plain = delta_u_std(run_closed_loop(dead), 2.0, 1e-3)
        jitter_comp = delta_u_std(run_closed_loop(comp), 2.0, 1e-3)
        assert jitter_comp < jitter_plain

    def test_divergence_aborts_with_time(self):
        scn = adrc1_scenario(controller=ControllerConfig(
            kind="adrc_continuous", order=1, b0=-1.0, t_settle=1.0, k_eso=10.0))
        with pytest.raises(SimulationDiverged, match="t="):
            run_closed_loop(scn)

    def test_sample_time_must_divide(self):
        scn = adrc1_scenario(
            controller=ControllerConfig(kind="adrc_discrete", order=1, b0=1.0,
                                        t_settle=1.0, k_eso=5.0),
            controller_sample_time=0.0015)
        with pytest.raises(InvalidInput):
            run_closed_loop(scn)

    def test_integrating_plant_uses_b0_equal_to_ki(self):
        # Same design steps as for a lag plant, with b0 set to the
        # integrator gain.
        scn = adrc1_scenario(plant=PlantSpec(kind="integrator", K_I=2.0),
                             controller=ControllerConfig(
                                 kind="adrc_continuous", order=1, b0=2.0,
                                 t_settle=1.0, k_eso=10.0))
        from adrc_lab.experiments import compute_metrics
        m = compute_metrics(run_closed_loop(scn), 0.0)
        assert 0.9 <= m.settling_time_2pct <= 1.1
        assert m.overshoot_pct < 2.0

    def test_optimized_matches_direct_under_saturation(self):
        base = adrc1_scenario(
            plant=PlantSpec(kind="second_order", K=1.0, D=1.0, T=1.0),
            controller=ControllerConfig(kind="adrc_discrete", order=2, b0=1.0,
                                        t_settle=5.0, k_eso=10.0),
            controller_sample_time=0.01, saturation_limit=1.2,
            noise_variance=1e-4, noise_seed=5, horizon=25.0)
        direct = run_closed_loop(base)
        optimized = run_closed_loop(replace(
            base, controller=replace(base.controller, kind="adrc_optimized")))
        assert np.max(np.abs(direct.u_raw - optimized.u_raw)) < 1e-10
        assert np.max(np.abs(direct.y_clean - optimized.y_clean)) < 1e-10

    def test_pi_loop_runs(self):
        scn = adrc1_scenario(
            controller=ControllerConfig(kind="pi",
                                        gains=PidGains(form="PI", k_p=3.85,
                                                       k_i=3.85)),
            horizon=4.0)
        traj = run_closed_loop(scn)
        assert traj.x_hat is None
        assert abs(traj.y_clean[-1] - 1.0) < 0.01


class TestTrajectoryCsv:
    def test_round_trip(self, tmp_path):
        traj = run_closed_loop(adrc1_scenario(horizon=0.5))
        path = tmp_path / "traj.csv"
        traj.write_csv(path)
        text = path.read_text()
        assert text.splitlines()[0] == "t,r,y,y_clean,u_raw,u_lim,xhat1,xhat2"
        assert "\r" not in text
        back = Trajectory.read_csv(path)
        np.testing.assert_allclose(back.y_clean, traj.y_clean, rtol=1e-9)
        np.testing.assert_allclose(back.x_hat, traj.x_hat, rtol=1e-9, atol=1e-12)

    def test_columns_consistent(self):
        traj = run_closed_loop(adrc1_scenario(horizon=0.2))
        n = len(traj.t)
        assert all(len(col) == n for col in
                   (traj.r, traj.y, traj.y_clean, traj.u_raw, traj.u_lim))
        assert np.all(np.diff(traj.t) > 0)
