import math
from dataclasses import replace

import numpy as np
import pytest

from adrc_lab.design import (
    design_first_order,
    design_second_order,
    discrete_gains_for,
    extended_chain_model,
)
from adrc_lab.controllers import assemble_discrete_eso
from adrc_lab.equivalence import (
    build_augmented_design,
    design_feedback,
    disturbance_gain,
    gain_compensation,
    observer_gain_ackermann,
    prediction_observer_gains,
    verify_equivalence,
)
from adrc_lab.lti import InvalidInput, characteristic_polynomial, zoh_discretize


class TestDesignFeedback:
    def test_first_order_case(self):
        assert design_feedback([[0.0]], [1.0], -4.0, 1) == [4.0]

    def test_second_order_case(self):
        k = design_feedback([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0], -1.2, 2)
        np.testing.assert_allclose(k, [1.44, 2.4], rtol=1e-15)

    def test_pole_placement_oracle(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.array([0.0, 2.0])
        k = design_feedback(a, b, -1.0, 2)
        np.testing.assert_allclose(k, [0.5, 1.0], rtol=1e-15)
        closed = a - np.outer(b, k)
        cp = characteristic_polynomial(closed)
        np.testing.assert_allclose(cp.coefficients, [1.0, 2.0, 1.0], atol=1e-14)


class TestGainCompensation:
    def test_matches_k1_first_order(self):
        k = design_feedback([[0.0]], [1.0], -4.0, 1)
        assert gain_compensation([[0.0]], [1.0], [1.0], k) == 4.0

    def test_matches_k1_second_order(self):
        a = [[0.0, 1.0], [0.0, 0.0]]
        b = [0.0, 1.0]
        k = design_feedback(a, b, -1.2, 2)
        assert math.isclose(gain_compensation(a, b, [1.0, 0.0], k), 1.44,
                            rel_tol=1e-15)

    def test_unit_dc_gain_by_simulation(self):
        # Oracle: step the closed loop x' = (A-BK)x + BGr and check y -> 1.
        a = np.array([[0.0, 1.0], [-2.0, -3.0]])
        b = np.array([0.0, 1.5])
        c = np.array([1.0, 0.0])
        k = np.array([2.0, 1.0])
        g = gain_compensation(a, b, c, k)
        closed = a - np.outer(b, k)
        x = np.zeros(2)
        h = 1e-3
        for _ in range(20000):
            k1 = closed @ x + b * g
            k2 = closed @ (x + 0.5 * h * k1) + b * g
            k3 = closed @ (x + 0.5 * h * k2) + b * g
            k4 = closed @ (x + h * k3) + b * g
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        assert abs(c @ x - 1.0) < 1e-6

    def test_singular_closed_loop_rejected(self):
        with pytest.raises(InvalidInput):
            gain_compensation([[0.0]], [1.0], [1.0], [0.0])


class TestDisturbanceGain:
    def test_first_order_case(self):
        assert disturbance_gain([1.0], [1.0 / 0.7], 0.7) == 1.0 / 0.7 * 0.7

    def test_scaled_input_gain(self):
        assert disturbance_gain([0.0, 4.0], [0.0, 1.0], 1.0) == 0.25

    def test_scaling_cancels(self):
        base = disturbance_gain([1.0], [2.0], 0.5)
        for alpha in (0.1, 3.0, 42.0):
            scaled = disturbance_gain([1.0], [2.0 * alpha], 0.5 / alpha)
            assert math.isclose(scaled, base, rel_tol=1e-12)

    def test_infeasible_matching_reported(self):
        with pytest.raises(InvalidInput, match="infeasible"):
            disturbance_gain([0.0, 1.0], [1.0, 1.0], 1.0)


class TestAckermann:
    def test_places_triple_pole(self):
        a = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
        c = np.array([1.0, 0.0, 0.0])
        l = observer_gain_ackermann(a, c, -12.0)
        err = a - np.outer(l, c)
        cp = characteristic_polynomial(err)
        target = np.convolve(np.convolve([1.0, 12.0], [1.0, 12.0]), [1.0, 12.0])
        np.testing.assert_allclose(cp.coefficients, target, rtol=1e-12)
        # Eigensolver sanity only: a triple root scatters as eps**(1/3).
        eig = np.linalg.eigvals(err)
        np.testing.assert_allclose(eig.real, [-12.0] * 3, atol=5e-3)


class TestVerifyEquivalence:
    def test_first_order_nominal(self):
        report = verify_equivalence(design_first_order(1.0, 1.0, 10.0))
        assert report.passed
        assert report.max_deviation < 1e-12

    def test_second_order_nominal(self):
        report = verify_equivalence(design_second_order(1.0, 5.0, 10.0))
        assert report.passed
        assert report.max_deviation < 1e-12

    def test_perturbed_observer_gain_flagged(self):
        d = design_second_order(1.0, 5.0, 10.0)
        tampered = replace(d, l_cont=(d.l_cont[0], d.l_cont[1] + 1e-3,
                                      d.l_cont[2]))
        report = verify_equivalence(tampered)
        assert not report.passed
        assert report.failed_names() == ["l2"]

    def test_random_designs_both_orders(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            b0 = rng.uniform(0.1, 10.0)
            t_settle = rng.uniform(0.2, 20.0)
            k_eso = rng.uniform(1.0, 100.0)
            for make in (design_first_order, design_second_order):
                report = verify_equivalence(make(b0, t_settle, k_eso))
                assert report.passed, report.failed_names()

    def test_augmented_matrices_shapes(self):
        aug = build_augmented_design(2, 1.0, -1.2, -12.0)
        assert aug.a.shape == (2, 2)
        assert len(aug.l_aug) == 3
        assert aug.a_d_gen == 0.0
        assert aug.c_d_gen == 1.0


class TestPredictionObserverReference:
    @pytest.mark.parametrize("order", [1, 2])
    def test_same_pole_set_as_current_observer(self, order):
        # Both observer flavors place all poles at z_eso; their error
        # matrices differ but their characteristic polynomials agree.
        make = design_first_order if order == 1 else design_second_order
        d = make(1.0, 1.0 if order == 1 else 5.0, 5.0)
        ts = 0.01
        gains = discrete_gains_for(d, ts)
        current = assemble_discrete_eso(d, gains)
        lp = prediction_observer_gains(order, d.b0, gains.z_eso, ts)
        disc = zoh_discretize(extended_chain_model(order, d.b0), ts)
        pred_err = disc.a - np.outer(lp, disc.c.ravel())
        cp_pred = characteristic_polynomial(pred_err)
        cp_curr = characteristic_polynomial(current.a_obs)
        np.testing.assert_allclose(cp_pred.coefficients, cp_curr.coefficients,
                                   atol=1e-9)
        assert not np.allclose(pred_err, current.a_obs)
