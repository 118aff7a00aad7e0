import numpy as np
import pytest

from besn.bidirectional import (
    BiStates,
    aggregate,
    aggregate_unidirectional,
    backward_weights_for,
    reverse_sequence,
    run_bidirectional,
)
from besn.config import ReservoirConfig
from besn.reservoir import init_weights, run_forward

from test_reservoir import recurrence_oracle


@pytest.fixture
def small_setup():
    config = ReservoirConfig(n_units=5, density=1.0, leak_rate=0.4, seed=31)
    weights = init_weights(config, input_dim=3)
    return config, weights


class TestReverseSequence:
    def test_explicit(self):
        out = reverse_sequence(np.array([[1.0], [2.0], [3.0]]))
        assert np.array_equal(out, np.array([[3.0], [2.0], [1.0]]))

    def test_single_frame_identity(self):
        seq = np.array([[4.0, 5.0]])
        assert np.array_equal(reverse_sequence(seq), seq)

    def test_involution(self):
        seq = np.random.default_rng(2).uniform(-1, 1, (17, 4))
        assert np.array_equal(reverse_sequence(reverse_sequence(seq)), seq)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            reverse_sequence(np.empty((0, 3)))


class TestRunBidirectional:
    def test_backward_is_reversed_forward_of_reversed_input(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(4).uniform(-1, 1, (12, 3))
        bi = run_bidirectional(weights, seq, config)
        fwd_of_rev = run_forward(weights, reverse_sequence(seq), config)
        assert np.array_equal(bi.backward, fwd_of_rev[::-1])
        assert np.array_equal(bi.forward, run_forward(weights, seq, config))

    def test_palindromic_input_symmetry(self, small_setup):
        config, weights = small_setup
        rng = np.random.default_rng(6)
        half = rng.uniform(-1, 1, (5, 3))
        seq = np.vstack([half, half[::-1]])  # s == reverse(s)
        bi = run_bidirectional(weights, seq, config)
        backward_raw = bi.backward[::-1]
        assert np.array_equal(bi.forward, backward_raw)

    def test_matches_scripted_recurrence_oracle(self):
        rng = np.random.default_rng(23)
        config = ReservoirConfig(n_units=2, density=1.0, leak_rate=0.7, bias_scale=0.1, seed=8)
        weights = init_weights(config, input_dim=2)
        seq = rng.uniform(-1, 1, (3, 2))
        bi = run_bidirectional(weights, seq, config)
        w_r = weights.w_r.toarray()
        expected_fwd = recurrence_oracle(w_r, weights.w_in, weights.b, config.leak_rate, seq)
        expected_bwd = recurrence_oracle(w_r, weights.w_in, weights.b, config.leak_rate, seq[::-1])
        np.testing.assert_allclose(bi.forward, expected_fwd, atol=1e-12)
        np.testing.assert_allclose(bi.backward, expected_bwd[::-1], atol=1e-12)

    def test_separate_weights_differ(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(9).uniform(-1, 1, (6, 3))
        shared = run_bidirectional(weights, seq, config, shared_weights=True)
        separate = run_bidirectional(weights, seq, config, shared_weights=False)
        assert np.array_equal(shared.forward, separate.forward)
        assert not np.array_equal(shared.backward, separate.backward)
        # explicit backward weights give the same result as the derived ones
        w_b = backward_weights_for(config, 3)
        explicit = run_bidirectional(
            weights, seq, config, shared_weights=False, backward_weights=w_b
        )
        assert np.array_equal(separate.backward, explicit.backward)

    def test_mismatched_trajectories_rejected(self):
        with pytest.raises(ValueError, match="shapes differ"):
            BiStates(forward=np.zeros((3, 2)), backward=np.zeros((4, 2)))


class TestAggregate:
    def test_final_is_last_consumed_state_per_direction(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(10).uniform(-1, 1, (9, 3))
        bi = run_bidirectional(weights, seq, config)
        feats = aggregate(bi, "final")
        np.testing.assert_array_equal(feats[:5], bi.forward[-1])
        np.testing.assert_array_equal(feats[5:], bi.backward[0])

    def test_width_matches_total_units(self, small_setup):
        config = ReservoirConfig(n_units=100, seed=0)
        weights = init_weights(config, input_dim=3)
        seq = np.random.default_rng(12).uniform(-1, 1, (20, 3))
        bi = run_bidirectional(weights, seq, config)
        assert aggregate(bi, "final").shape == (200,)
        assert aggregate(bi, "mean").shape == (200,)
        assert aggregate(bi, "mean_plus_final").shape == (400,)

    def test_single_frame_final_equals_mean(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(13).uniform(-1, 1, (1, 3))
        bi = run_bidirectional(weights, seq, config)
        np.testing.assert_array_equal(aggregate(bi, "final"), aggregate(bi, "mean"))

    def test_mean_matches_column_average_oracle(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(14).uniform(-1, 1, (11, 3))
        bi = run_bidirectional(weights, seq, config)
        feats = aggregate(bi, "mean")
        expected_f = np.array([bi.forward[:, j].sum() / 11 for j in range(5)])
        expected_b = np.array([bi.backward[:, j].sum() / 11 for j in range(5)])
        np.testing.assert_allclose(feats, np.concatenate([expected_f, expected_b]), atol=1e-12)

    def test_mean_plus_final_layout(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(15).uniform(-1, 1, (7, 3))
        bi = run_bidirectional(weights, seq, config)
        feats = aggregate(bi, "mean_plus_final")
        np.testing.assert_array_equal(feats[:10], aggregate(bi, "mean"))
        np.testing.assert_array_equal(feats[10:], aggregate(bi, "final"))

    def test_forward_and_backward_blocks_differ_on_nonpalindromic_input(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(16).uniform(-1, 1, (15, 3))
        feats = aggregate(run_bidirectional(weights, seq, config), "final")
        assert not np.array_equal(feats[:5], feats[5:])

    def test_washout_affects_mean_not_final(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(18).uniform(-1, 1, (10, 3))
        bi = run_bidirectional(weights, seq, config)
        with_washout = aggregate(bi, "mean", washout=4)
        np.testing.assert_allclose(with_washout[:5], bi.forward[4:].mean(axis=0), atol=1e-15)
        np.testing.assert_allclose(
            with_washout[5:], bi.backward[::-1][4:].mean(axis=0), atol=1e-15
        )
        assert np.array_equal(aggregate(bi, "final", washout=4), aggregate(bi, "final"))

    def test_washout_bounds(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(19).uniform(-1, 1, (5, 3))
        bi = run_bidirectional(weights, seq, config)
        with pytest.raises(ValueError, match="washout"):
            aggregate(bi, "mean", washout=5)

    def test_unknown_mode_rejected(self, small_setup):
        config, weights = small_setup
        bi = run_bidirectional(weights, np.zeros((2, 3)), config)
        with pytest.raises(ValueError, match="aggregation mode"):
            aggregate(bi, "max")


class TestUnidirectional:
    def test_matches_forward_half_of_pipeline(self, small_setup):
        config, weights = small_setup
        seq = np.random.default_rng(20).uniform(-1, 1, (8, 3))
        states = run_forward(weights, seq, config)
        bi = run_bidirectional(weights, seq, config)
        for mode in ("final", "mean"):
            uni = aggregate_unidirectional(states, mode)
            assert uni.shape == (5,)
            np.testing.assert_array_equal(uni, aggregate(bi, mode)[:5])
        mpf = aggregate_unidirectional(states, "mean_plus_final")
        np.testing.assert_array_equal(mpf[:5], aggregate_unidirectional(states, "mean"))
        np.testing.assert_array_equal(mpf[5:], aggregate_unidirectional(states, "final"))
