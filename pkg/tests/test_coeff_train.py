import numpy as np
import pytest

from unso.coeff_train import (
    QUINTIC_EQUIV_INIT,
    CesistaStepParams,
    TrainConfig,
    compose_quintic_steps,
    loss,
    read_step_triples,
    train,
    train_cesista,
    write_step_triples,
)
from unso.errors import ParseError, TrainingDivergedError
from unso.rng import uniforms
from unso.scalarpoly import BRule, CoefficientSet, constraint_point, eval_f


class TestLoss:
    def test_near_one_sample_gives_near_zero(self):
        cs = CoefficientSet(14, np.ones(13), BRule.EXACT)
        assert loss(cs, [1.0 - 1e-12]) < 1e-20

    def test_pinned_point_under_exact_rule(self):
        cs = CoefficientSet(8, np.ones(7), BRule.EXACT)
        assert loss(cs, [constraint_point(8)]) < 1e-15

    def test_empty_sample_vector_rejected(self):
        with pytest.raises(ValueError):
            loss(CoefficientSet(4, np.ones(3)), [])

    def test_trained_coefficients_fit_the_target(self, trained_coeffs):
        grid = np.linspace(0.01, 1.0, 1000)
        assert loss(trained_coeffs, grid) <= 1e-3


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(decay_factor=1.5)
        with pytest.raises(ValueError):
            TrainConfig(sample_low=0.7, sample_high=0.5)

    def test_lr_schedule_is_exact_step_decay(self):
        cfg = TrainConfig()
        assert cfg.lr_at(0) == 0.1
        assert cfg.lr_at(9999) == 0.1
        assert cfg.lr_at(10000) == 0.05
        assert cfg.lr_at(19999) == 0.05
        assert cfg.lr_at(20000) == 0.025


class TestTrain:
    def test_zero_epochs_leaves_initial_state(self):
        state = train(TrainConfig(epochs=0))
        assert np.array_equal(state.coeffs.a, np.ones(13))
        assert state.loss_history == []
        assert state.step == 0
        assert state.current_lr == 0.1

    def test_determinism_bit_identical(self):
        cfg = TrainConfig(epochs=40, samples_per_step=64, seed=5)
        a = train(cfg).coeffs.a
        b = train(cfg).coeffs.a
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = train(TrainConfig(epochs=40, samples_per_step=64, seed=1)).coeffs.a
        b = train(TrainConfig(epochs=40, samples_per_step=64, seed=2)).coeffs.a
        assert not np.array_equal(a, b)

    def test_loss_decreases(self):
        state = train(TrainConfig(epochs=400, samples_per_step=200, seed=3))
        assert state.loss_history[-1] < state.loss_history[0]

    def test_smoothed_loss_trend_over_full_run(self, loss_history):
        early = loss_history[100:200].mean()
        late = loss_history[-100:].mean()
        assert late < early

    def test_seed_42_defaults_reach_flat_curve(self):
        state = train(TrainConfig(seed=42))
        grid = np.linspace(0.01, 1.0, 2000)
        assert np.max(np.abs(eval_f(state.coeffs, grid) - 1.0)) <= 0.1

    def test_divergence_guard_reports_last_state(self):
        # a step large enough that the squared residual overflows float64
        cfg = TrainConfig(epochs=400, samples_per_step=16, learning_rate=1e200, seed=0)
        with pytest.raises(TrainingDivergedError) as exc:
            train(cfg)
        assert exc.value.state is not None
        assert np.all(np.isfinite(exc.value.state.coeffs.a))

    def test_final_lr_matches_schedule(self):
        state = train(TrainConfig(epochs=30, samples_per_step=16, decay_every=10))
        assert state.current_lr == pytest.approx(0.1 * 0.5**3)


class TestCesista:
    def test_identity_init_zero_epochs(self):
        params = train_cesista(1, TrainConfig(epochs=0), init=np.zeros((1, 3)))
        assert np.array_equal(params.triples, np.zeros((1, 3)))
        xs = uniforms(0, 0, 500)
        composed = compose_quintic_steps(params.triples, xs)
        assert np.array_equal(composed, xs)  # gamma = 0 is the identity map
        baseline = float(np.mean((xs - 1.0) ** 2))
        resid = composed - 1.0
        assert float(np.mean(resid * resid)) == pytest.approx(baseline, abs=1e-15)

    def test_default_init_matches_fixed_quintic(self):
        from unso.ortho import MUON_COEFFICIENTS, expand_cesista_rows

        params = train_cesista(3, TrainConfig(epochs=0))
        rows = expand_cesista_rows(params.triples)
        assert np.allclose(rows, np.tile(MUON_COEFFICIENTS, (3, 1)), atol=1e-7)

    def test_quintic_expansion_identity(self):
        # multiplied-out coefficients reproduce the product form on a grid
        gamma, r, l = 0.8, 0.25, 0.1
        p, q = (1 + r) ** 2, (1 - l) ** 2
        a, b, c = 1 + gamma * p * q, -gamma * (p + q), gamma
        grid = np.linspace(0.0, 1.0, 20)
        product_form = compose_quintic_steps([[gamma, r, l]], grid)
        poly_form = a * grid + b * grid**3 + c * grid**5
        assert np.max(np.abs(product_form - poly_form)) < 1e-12

    def test_trained_schedule_flattens_composition(self):
        cfg = TrainConfig(
            seed=42,
            learning_rate=0.01,
            epochs=1200,
            samples_per_step=300,
            decay_every=600,
        )
        params = train_cesista(5, cfg)
        grid = np.linspace(0.1, 1.0, 500)
        composed = compose_quintic_steps(params.triples, grid)
        assert np.max(np.abs(composed - 1.0)) <= 0.35

    def test_determinism(self):
        cfg = TrainConfig(epochs=15, samples_per_step=32, learning_rate=0.01, seed=9)
        a = train_cesista(2, cfg).triples
        b = train_cesista(2, cfg).triples
        assert np.array_equal(a, b)

    def test_step_count_validation(self):
        with pytest.raises(ValueError):
            train_cesista(0, TrainConfig(epochs=0))
        with pytest.raises(ValueError):
            CesistaStepParams(np.zeros((0, 3)))

    def test_init_equivalence_triple_is_exact(self):
        gamma, r, l = QUINTIC_EQUIV_INIT
        p, q = (1 + r) ** 2, (1 - l) ** 2
        assert 1 + gamma * p * q == pytest.approx(3.4445, abs=1e-12)
        assert -gamma * (p + q) == pytest.approx(-4.7750, abs=1e-12)
        assert gamma == 2.0315


class TestScheduleFiles:
    def test_round_trip(self, tmp_path):
        triples = np.array([[0.1, 0.2, 0.3], [1.5, -0.5, 0.25]])
        path = tmp_path / "sched.txt"
        write_step_triples(path, triples)
        assert np.array_equal(read_step_triples(path), triples)

    @pytest.mark.parametrize("content", ["", "1 2\n", "1 2 x\n", "1 2 inf\n"])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(ParseError):
            read_step_triples(path)
