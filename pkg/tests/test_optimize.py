"""Tests for the violation-ratio objective and its restart-based maximizers."""

import math

import numpy as np
import pytest

from bellgap import (
    BellFunctional,
    DegenerateObjectiveError,
    DomainError,
    OptimizerConfig,
    Scenario,
    absorb_into_box,
    error_propagation,
    evaluate,
    lhv_bound,
    maximize_r,
    objective_r,
    poisson_sample,
    r_value,
    sdn,
    tilted_behavior,
    tilted_functional,
    uniform_behavior,
)
from bellgap import optimize as optimize_module
from bellgap.lhv import make_joint_bound_oracle, strategy_behavior
from bellgap.lhv import DeterministicStrategy
from bellgap.optimize import PENALTY_R, _CountModel, _sdn_signal

from helpers import random_functional, random_ns_behavior

CHSH = Scenario(2, 2)
DM = 4.0

# Shared count tables; sampling is cheap but optimization is not, so the
# heavier maximize_r checks reuse these and keep budgets small.
TILTED_COUNTS = poisson_sample(tilted_behavior(1.0), 100_000, seed=21)
UNIFORM_COUNTS = poisson_sample(uniform_behavior(CHSH), 100_000, seed=5)
VERTEX_COUNTS = poisson_sample(
    strategy_behavior(DeterministicStrategy((0, 1), (1, 0)), CHSH), 100_000, seed=6
)

FAST = OptimizerConfig(restarts=6, seed=123)


class TestOptimizerConfig:
    def test_defaults_are_valid(self):
        cfg = OptimizerConfig()
        assert cfg.engine == "gradient"
        assert cfg.restarts == 200

    def test_unknown_engine_rejected(self):
        with pytest.raises(DomainError):
            OptimizerConfig(engine="newton")

    @pytest.mark.parametrize("field", ["restarts", "max_iters"])
    def test_counts_must_be_positive(self, field):
        with pytest.raises(DomainError):
            OptimizerConfig(**{field: 0})

    @pytest.mark.parametrize("field", ["step_init", "convergence_tol", "denom_floor"])
    def test_scales_must_be_positive(self, field):
        with pytest.raises(DomainError):
            OptimizerConfig(**{field: 0.0})


class TestSdn:
    def test_gap_in_error_units(self):
        np.testing.assert_allclose(sdn(4.0, 0.5, 2.0), 4.0, rtol=0)

    def test_zero_error_rejected(self):
        with pytest.raises(DomainError):
            sdn(4.0, 0.0, 2.0)

    def test_signal_variant_extends_to_zero_error(self):
        assert _sdn_signal(3.0, 0.0, 2.0) == math.inf
        assert _sdn_signal(1.0, 0.0, 2.0) == -math.inf
        assert _sdn_signal(2.0, 0.0, 2.0) == 0.0
        np.testing.assert_allclose(_sdn_signal(4.0, 0.5, 2.0), 4.0, rtol=0)


class TestRValue:
    def test_plain_ratio(self):
        np.testing.assert_allclose(r_value(3.0, 0.1, 2.0, 4.0), 6.9 / 6.0, rtol=1e-15)

    def test_penalty_below_denominator_floor(self):
        assert r_value(3.0, 0.1, -4.0, 4.0) == PENALTY_R
        assert r_value(3.0, 0.1, -4.0 + 2e-6, 4.0, denom_floor=1e-6) != PENALTY_R


class TestAbsorbIntoBox:
    def test_in_box_joint_only_is_unchanged(self):
        f = tilted_functional(0.0)
        g, divisor = absorb_into_box(f)
        assert divisor == 1.0
        np.testing.assert_array_equal(g.joint, f.joint)

    @pytest.mark.parametrize("seed", range(3))
    def test_result_is_joint_only_in_box_and_value_scales(self, seed):
        rng = np.random.default_rng(800 + seed)
        f = random_functional(CHSH, rng, scale=3.0)
        g, divisor = absorb_into_box(f)
        assert g.is_joint_only
        assert np.abs(g.joint).max() <= 1.0 + 1e-15
        assert divisor >= 1.0
        for _ in range(5):
            b = random_ns_behavior(CHSH, rng)
            np.testing.assert_allclose(
                evaluate(g, b) * divisor, evaluate(f, b), rtol=1e-12, atol=1e-12
            )

    def test_tilted_alpha_two_needs_rescaling(self):
        g, divisor = absorb_into_box(tilted_functional(2.0))
        # alpha/2 folds into the x = 0 rows on top of unit entries.
        np.testing.assert_allclose(divisor, 2.0, rtol=1e-15)
        assert np.abs(g.joint).max() == 1.0


class TestObjectiveR:
    def test_rejects_marginal_blocks(self):
        with pytest.raises(DomainError):
            objective_r(tilted_functional(1.0), TILTED_COUNTS)

    def test_rejects_out_of_box_coefficients(self):
        f = BellFunctional(CHSH, 1.5 * tilted_functional(0.0).joint)
        with pytest.raises(DomainError):
            objective_r(f, TILTED_COUNTS)

    def test_matches_reference_assembly(self):
        rng = np.random.default_rng(13)
        f = BellFunctional(CHSH, rng.uniform(-1.0, 1.0, CHSH.joint_shape))
        rep = error_propagation(f, TILTED_COUNTS)
        expect = r_value(rep.q, rep.delta_q, lhv_bound(f).bound, DM)
        np.testing.assert_allclose(objective_r(f, TILTED_COUNTS), expect, rtol=1e-14)

    def test_chsh_corner_beats_the_baseline_on_tilted_data(self):
        assert objective_r(tilted_functional(0.0), TILTED_COUNTS) > 1.0


class TestCountModel:
    def test_q_dq_match_error_propagation(self):
        rng = np.random.default_rng(14)
        s = rng.uniform(-1.0, 1.0, 16)
        model = _CountModel(TILTED_COUNTS)
        q, dq = model.q_dq(s)
        rep = error_propagation(
            BellFunctional(CHSH, s.reshape(CHSH.joint_shape)), TILTED_COUNTS
        )
        np.testing.assert_allclose(q, rep.q, rtol=1e-13)
        np.testing.assert_allclose(dq, rep.delta_q, rtol=1e-13)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(15)
        s = rng.uniform(-1.0, 1.0, 16)
        model = _CountModel(TILTED_COUNTS)
        q0, dq0, grad_q, grad_dq = model.q_dq_grads(s)
        h = 1e-7
        for k in range(0, 16, 3):
            e = np.zeros(16)
            e[k] = h
            q_up, dq_up = model.q_dq(s + e)
            q_dn, dq_dn = model.q_dq(s - e)
            np.testing.assert_allclose(grad_q[k], (q_up - q_dn) / (2 * h), atol=1e-8)
            np.testing.assert_allclose(grad_dq[k], (dq_up - dq_dn) / (2 * h), atol=1e-6)

    def test_dq_gradient_is_zeroed_at_the_kink(self):
        model = _CountModel(TILTED_COUNTS)
        _, dq, _, grad_dq = model.q_dq_grads(np.zeros(16))
        assert dq == 0.0
        np.testing.assert_array_equal(grad_dq, np.zeros(16))


class TestMaximizeR:
    def test_finds_violation_on_tilted_data(self):
        res = maximize_r(TILTED_COUNTS, FAST)
        assert res.is_nonlocal
        assert res.r > 1.0
        assert res.sdn > optimize_module.SIGNIFICANCE_SDN
        assert res.q - res.c > optimize_module.SIGNIFICANCE_SDN * res.delta_q

    def test_beats_the_known_chsh_witness(self):
        res = maximize_r(TILTED_COUNTS, FAST)
        assert res.r >= objective_r(tilted_functional(0.0), TILTED_COUNTS) - 1e-9

    def test_result_fields_are_mutually_consistent(self):
        res = maximize_r(TILTED_COUNTS, FAST)
        rep = error_propagation(res.functional, TILTED_COUNTS)
        np.testing.assert_allclose(res.q, rep.q, rtol=0, atol=1e-12)
        np.testing.assert_allclose(res.delta_q, rep.delta_q, rtol=0, atol=1e-12)
        np.testing.assert_allclose(res.c, lhv_bound(res.functional).bound, rtol=0, atol=1e-12)
        np.testing.assert_allclose(
            res.r, r_value(res.q, res.delta_q, res.c, DM), rtol=0, atol=1e-12
        )
        assert res.is_nonlocal == (res.r > 1.0)
        assert res.functional.is_joint_only
        assert np.abs(res.functional.joint).max() <= 1.0 + 1e-12

    def test_runs_are_reproducible(self):
        a = maximize_r(TILTED_COUNTS, FAST)
        b = maximize_r(TILTED_COUNTS, FAST)
        np.testing.assert_array_equal(a.functional.joint, b.functional.joint)
        assert a.r == b.r
        assert a.engine_trace == b.engine_trace

    def test_restart_prefix_is_stable(self):
        short = maximize_r(TILTED_COUNTS, OptimizerConfig(restarts=3, seed=123))
        long = maximize_r(TILTED_COUNTS, OptimizerConfig(restarts=6, seed=123))
        assert long.engine_trace[:3] == short.engine_trace
        assert len(long.engine_trace) == 6

    def test_negative_seed_is_accepted(self):
        res = maximize_r(TILTED_COUNTS, OptimizerConfig(restarts=2, seed=-7))
        assert len(res.engine_trace) == 2

    def test_uniform_data_falls_back_to_the_zero_functional(self):
        res = maximize_r(UNIFORM_COUNTS, FAST)
        assert res.r == 1.0
        assert not res.is_nonlocal
        assert not res.functional.joint.any()
        assert res.q == 0.0 and res.delta_q == 0.0 and res.c == 0.0
        assert res.sdn == 0.0

    def test_fluke_violations_are_filtered_not_reported(self):
        # Raw restart scores on local data exceed 1 by noise-level margins;
        # the significance gate must still return the exact baseline.
        res = maximize_r(UNIFORM_COUNTS, FAST)
        assert any(t > 1.0 for t in res.engine_trace)
        assert res.r == 1.0

    def test_vertex_data_is_local(self):
        res = maximize_r(VERTEX_COUNTS, FAST)
        assert res.r == 1.0
        assert not res.is_nonlocal

    @pytest.mark.parametrize("engine", ["nelder_mead", "differential_evolution"])
    def test_direct_search_engines_satisfy_the_same_contract(self, engine):
        cfg = OptimizerConfig(engine=engine, restarts=2, seed=123, max_iters=40)
        res = maximize_r(TILTED_COUNTS, cfg)
        assert len(res.engine_trace) == 2
        np.testing.assert_allclose(
            res.r, r_value(res.q, res.delta_q, res.c, DM), rtol=0, atol=1e-12
        )
        assert res.is_nonlocal == (res.r > 1.0)

    def test_annealing_engine_smoke(self):
        cfg = OptimizerConfig(engine="simulated_annealing", restarts=1, seed=123, max_iters=30)
        res = maximize_r(TILTED_COUNTS, cfg)
        assert len(res.engine_trace) == 1
        assert res.is_nonlocal == (res.r > 1.0)

    def test_all_penalized_restarts_raise(self, monkeypatch):
        monkeypatch.setattr(
            optimize_module, "_run_gradient", lambda *a: (np.zeros(16), PENALTY_R)
        )
        with pytest.raises(DegenerateObjectiveError):
            maximize_r(TILTED_COUNTS, OptimizerConfig(restarts=3, seed=0))


class TestGradientEngineInternals:
    def test_start_inside_penalty_region_returns_immediately(self):
        model = _CountModel(TILTED_COUNTS)
        oracle = make_joint_bound_oracle(CHSH)
        cfg = OptimizerConfig(restarts=1, denom_floor=1e-6)
        s0 = -np.ones(16)  # C = -4 exactly, so C + dm sits below the floor
        s, r = optimize_module._run_gradient(model, oracle, DM, cfg, s0)
        assert r == PENALTY_R
        np.testing.assert_array_equal(s, s0)

    def test_iterates_stay_inside_the_box(self):
        model = _CountModel(TILTED_COUNTS)
        oracle = make_joint_bound_oracle(CHSH)
        cfg = OptimizerConfig(restarts=1, max_iters=200)
        rng = np.random.default_rng(99)
        s, r = optimize_module._run_gradient(model, oracle, DM, cfg, rng.uniform(-1, 1, 16))
        assert np.abs(s).max() <= 1.0
        assert r > PENALTY_R
