import json

import numpy as np
import pytest

from moperturb import (
    LinearExtrapolationPredictor,
    MlpParams,
    MlpPredictor,
    MotionSequence,
    SplitSequence,
    SynthConfig,
    ZeroVelocityPredictor,
    central_difference_gradient,
    finite_diff_gradient,
    generate,
    load_predictor,
    mpjpe,
    prediction_loss,
    save_predictor,
    train_mlp,
)
from moperturb.predict import predictor_from_dict, predictor_to_dict

from conftest import random_sequence, random_split


def random_mlp(rng, t_h=6, t_f=4, j=5, hidden=16):
    d_in, d_out = t_h * j * 3, t_f * j * 3
    params = MlpParams(
        rng.uniform(-1, 1, (hidden, d_in)) / np.sqrt(d_in),
        rng.uniform(-1, 1, hidden) / np.sqrt(d_in),
        rng.uniform(-1, 1, (d_out, hidden)) / np.sqrt(hidden),
        rng.uniform(-1, 1, d_out) / np.sqrt(hidden),
    )
    return MlpPredictor(t_h, t_f, j, params)


class TestZeroVelocity:
    def test_repeats_last_frame(self, rng):
        x = random_sequence(rng, t=4, j=3)
        p = ZeroVelocityPredictor(4, 3, 3).forward(x)
        assert np.array_equal(p.frames, np.repeat(x.frames[-1:], 3, axis=0))

    def test_vjp_sums_onto_last_frame(self, rng):
        x = random_sequence(rng, t=4, j=3)
        g = ZeroVelocityPredictor(4, 3, 3).vjp(x, np.ones((3, 3, 3)))
        assert np.array_equal(g[-1], np.full((3, 3), 3.0))
        assert np.all(g[:-1] == 0.0)

    def test_mpjpe_equals_last_frame_distance(self, rng):
        # substituting the repeated pose into the error reduces it to the
        # distance between the observed pose and the target frame
        x = random_sequence(rng, t=5, j=4)
        y = random_sequence(rng, t=6, j=4)
        p = ZeroVelocityPredictor(5, 6, 4).forward(x)
        for t in (0, 3, 5):
            direct = np.linalg.norm(x.frames[-1] - y.frames[t], axis=1).mean()
            assert mpjpe(p, y, t) == pytest.approx(direct, rel=1e-12)


class TestLinearExtrapolation:
    def test_constant_history_stays_constant(self):
        frames = np.tile(np.arange(6.0).reshape(1, 2, 3), (4, 1, 1))
        p = LinearExtrapolationPredictor(4, 3, 2).forward(MotionSequence(frames))
        assert np.array_equal(p.frames, np.tile(frames[-1:], (3, 1, 1)))

    def test_arithmetic_progression(self):
        frames = np.zeros((2, 1, 3))
        frames[1, 0, 0] = 1.0
        p = LinearExtrapolationPredictor(2, 3, 1).forward(MotionSequence(frames))
        assert p.frames[:, 0, 0].tolist() == [2.0, 3.0, 4.0]

    def test_needs_two_frames(self):
        with pytest.raises(ValueError):
            LinearExtrapolationPredictor(1, 3, 1)

    def test_vjp_against_finite_differences(self, rng):
        pred = LinearExtrapolationPredictor(5, 4, 3)
        x = random_sequence(rng, t=5, j=3)
        g = rng.normal(size=(4, 3, 3))
        analytic = pred.vjp(x, g)
        numeric = central_difference_gradient(
            lambda arr: float((g * pred.forward(x.with_frames(arr)).frames).sum()),
            x.frames,
        )
        denom = np.maximum(np.abs(numeric), 1e-8)
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-6


class TestMlp:
    def test_zero_weights_zero_output(self):
        params = MlpParams(np.zeros((4, 2 * 1 * 3)), np.zeros(4), np.zeros((3, 4)), np.zeros(3))
        pred = MlpPredictor(2, 1, 1, params)
        out = pred.forward(MotionSequence(np.ones((2, 1, 3))))
        assert np.all(out.frames == 0.0)

    def test_hidden_one_constant_bias(self, rng):
        b2 = rng.normal(size=3)
        params = MlpParams(np.zeros((1, 6)), np.zeros(1), rng.normal(size=(3, 1)), b2)
        pred = MlpPredictor(2, 1, 1, params)
        out = pred.forward(MotionSequence(rng.normal(size=(2, 1, 3))))
        assert np.allclose(out.frames.ravel(), b2)

    def test_shape_mismatch(self, rng):
        pred = random_mlp(rng)
        with pytest.raises(ValueError):
            pred.forward(random_sequence(rng, t=3, j=5))

    def test_vjp_against_finite_differences(self, rng):
        pred = random_mlp(rng)
        x = random_sequence(rng, t=6, j=5)
        g = rng.normal(size=(4, 5, 3))
        analytic = pred.vjp(x, g)
        numeric = central_difference_gradient(
            lambda arr: float((g * pred.forward(x.with_frames(arr)).frames).sum()),
            x.frames,
        )
        denom = np.maximum(np.abs(numeric), 1e-8)
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-5

    def test_vjp_linearity(self, rng):
        x = random_sequence(rng, t=6, j=5)
        g1 = rng.normal(size=(4, 5, 3))
        g2 = rng.normal(size=(4, 5, 3))
        a, b = 0.3, -1.9
        for pred in (
            ZeroVelocityPredictor(6, 4, 5),
            LinearExtrapolationPredictor(6, 4, 5),
            random_mlp(rng),
        ):
            lhs = pred.vjp(x, a * g1 + b * g2)
            rhs = a * pred.vjp(x, g1) + b * pred.vjp(x, g2)
            assert np.abs(lhs - rhs).max() < 1e-10


class TestScaleEquivariance:
    def test_exact_for_binary_scale_factors(self, rng):
        x = random_sequence(rng, t=6, j=5)
        for pred in (ZeroVelocityPredictor(6, 4, 5), LinearExtrapolationPredictor(6, 4, 5)):
            base = pred.forward(x).frames
            for k in (0.5, 2.0, 1024.0):
                scaled = pred.forward(x.with_frames(k * x.frames)).frames
                assert np.array_equal(scaled, k * base)

    def test_close_for_general_factors(self, rng):
        x = random_sequence(rng, t=6, j=5)
        for pred in (ZeroVelocityPredictor(6, 4, 5), LinearExtrapolationPredictor(6, 4, 5)):
            base = pred.forward(x).frames
            scaled = pred.forward(x.with_frames(3.7 * x.frames)).frames
            assert np.allclose(scaled, 3.7 * base, rtol=1e-12)


class TestTrainMlp:
    def test_learns_constant_sequences(self, rng):
        frames = np.tile(rng.normal(size=(1, 3, 3)), (8, 1, 1))
        split = SplitSequence(MotionSequence(frames[:5]), MotionSequence(frames[5:]))
        result = train_mlp([split] * 6, hidden=8, lr=0.05, epochs=40, batch=4, seed=1)
        assert result.epoch_losses[-1] < result.epoch_losses[0]

    def test_seeded_determinism(self, rng):
        splits = [random_split(rng, t_h=5, t_f=3, j=3) for _ in range(6)]
        a = train_mlp(splits, hidden=8, lr=0.02, epochs=15, batch=4, seed=9)
        b = train_mlp(splits, hidden=8, lr=0.02, epochs=15, batch=4, seed=9)
        for name in ("w1", "b1", "w2", "b2"):
            assert np.array_equal(getattr(a.predictor.params, name), getattr(b.predictor.params, name))

    def test_beats_zero_velocity_on_held_out_oscillations(self):
        train = generate(SynthConfig(n_sequences=80, t_h=10, t_f=25, seed=31, family="oscillation"))
        held = generate(SynthConfig(n_sequences=30, t_h=10, t_f=25, seed=77, family="oscillation"))
        pred = train_mlp(train.sequences, hidden=32, lr=0.05, epochs=200, batch=8, seed=0).predictor
        zero = ZeroVelocityPredictor(10, 25, 5)
        horizon = 24
        mlp_err = np.mean([mpjpe(pred.forward(s.history), s.future, horizon) for s in held.sequences])
        zero_err = np.mean([mpjpe(zero.forward(s.history), s.future, horizon) for s in held.sequences])
        assert mlp_err < zero_err

    def test_rejects_bad_input(self, rng):
        with pytest.raises(ValueError):
            train_mlp([], hidden=4)
        splits = [random_split(rng, t_h=5, t_f=3), random_split(rng, t_h=6, t_f=3)]
        with pytest.raises(ValueError):
            train_mlp(splits, hidden=4)
        with pytest.raises(ValueError):
            train_mlp([random_split(rng)], hidden=0)


class TestFiniteDifferences:
    def test_linear_loss_gives_constant_gradient(self, rng):
        x = rng.normal(size=(3, 2, 3))
        for h in (1e-5, 1e-3):
            grad = central_difference_gradient(lambda arr: float(arr.sum()), x, h)
            assert np.allclose(grad, 1.0, atol=1e-9)

    def test_quadratic_loss_recovers_point(self, rng):
        x = rng.normal(size=(3, 2, 3))
        grad = central_difference_gradient(lambda arr: float(0.5 * (arr**2).sum()), x, 1e-5)
        assert np.allclose(grad, x, atol=1e-9)

    def test_matches_analytic_attack_gradient_on_mlp(self, rng):
        pred = random_mlp(rng)
        x = random_sequence(rng, t=6, j=5)
        y = random_sequence(rng, t=4, j=5)
        p = pred.forward(x)
        _, g_pred = prediction_loss(p, y)
        analytic = pred.vjp(x, g_pred)
        numeric = finite_diff_gradient(pred, lambda pp, yy: prediction_loss(pp, yy)[0], x, y)
        denom = np.maximum(np.abs(numeric), 1e-8)
        assert np.max(np.abs(analytic - numeric) / denom) < 1e-4


class TestSerialization:
    def test_round_trip_all_kinds(self, rng, tmp_path):
        preds = [
            ZeroVelocityPredictor(6, 4, 5),
            LinearExtrapolationPredictor(6, 4, 5),
            random_mlp(rng),
        ]
        x = random_sequence(rng, t=6, j=5)
        for pred in preds:
            path = tmp_path / f"{pred.kind}.json"
            save_predictor(path, pred)
            loaded = load_predictor(path)
            assert loaded.kind == pred.kind
            assert np.array_equal(loaded.forward(x).frames, pred.forward(x).frames)

    def test_documented_fields(self, rng):
        d = predictor_to_dict(random_mlp(rng))
        assert set(d) == {"kind", "t_h", "t_f", "j", "hidden", "w1", "b1", "w2", "b2"}
        assert d["kind"] == "mlp"
        assert json.dumps(d)  # JSON-serializable as-is

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            predictor_from_dict({"kind": "rnn", "t_h": 2, "t_f": 2, "j": 2})
