"""SVD beamforming tests: decomposition structure, phase convention,
stream selection, and the large-array gain prediction."""

import warnings

import numpy as np
import pytest

from bicmb.beamforming import (
    StreamGains,
    decompose,
    numerical_rank,
    predicted_gains,
    singular_values,
    stream_gains,
)
from bicmb.channel import ArrayGeometry, FadingProfile, draw_channel
from bicmb.errors import NumericalError


@pytest.fixture()
def channel():
    profile = FadingProfile.homogeneous(2, 2, -10.0, 2)
    rx, tx = ArrayGeometry(8), ArrayGeometry(8)
    return draw_channel(profile, rx, tx, np.random.default_rng(314), seed=314)


class TestDecompose:
    def test_reconstruction_and_unitarity(self, channel):
        d = decompose(channel)
        u, s, v = d.left_vectors, d.singular_values, d.right_vectors
        np.testing.assert_allclose(u @ np.diag(s) @ v.conj().T, channel.h,
                                   atol=1e-12)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(s.size), atol=1e-12)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(s.size), atol=1e-12)
        assert np.all(np.diff(s) <= 1e-12)
        assert np.all(s >= 0.0)

    def test_matches_plain_svd_values(self, channel):
        d = decompose(channel)
        np.testing.assert_allclose(d.singular_values, singular_values(channel))
        np.testing.assert_allclose(d.singular_values,
                                   np.linalg.svd(channel.h, compute_uv=False))

    def test_phase_pivot_is_real_positive(self, channel):
        d = decompose(channel)
        for k in range(d.singular_values.size):
            col = d.right_vectors[:, k]
            mags = np.abs(col)
            nz = np.flatnonzero(mags > 1e-8 * mags.max())
            pivot = col[nz[0]]
            assert pivot.imag == pytest.approx(0.0, abs=1e-12)
            assert pivot.real > 0.0

    def test_phase_convention_makes_decomposition_unique(self, channel):
        d1 = decompose(channel)
        # scramble the input by a global phase; the retained-mode vectors
        # must come out identical
        d2 = decompose(channel.h * np.exp(0.4j))
        r = d1.rank
        np.testing.assert_allclose(d1.right_vectors[:, :r],
                                   d2.right_vectors[:, :r], atol=1e-9)

    def test_accepts_plain_matrix(self):
        h = np.array([[3.0, 0.0], [0.0, 1.0]], dtype=complex)
        d = decompose(h)
        np.testing.assert_allclose(d.singular_values, [3.0, 1.0])

    def test_svd_failure_carries_seed(self, monkeypatch, channel):
        def boom(*args, **kwargs):
            raise np.linalg.LinAlgError("SVD did not converge")
        monkeypatch.setattr(np.linalg, "svd", boom)
        with pytest.raises(NumericalError, match="seed=314"):
            decompose(channel)
        with pytest.raises(NumericalError, match="seed=314"):
            singular_values(channel)


class TestStreamGains:
    def test_selects_strongest_modes(self, channel):
        d = decompose(channel)
        g = stream_gains(d, 3)
        assert g.n_streams == 3
        np.testing.assert_array_equal(g.gains, d.singular_values[:3])

    def test_validation(self, channel):
        d = decompose(channel)
        with pytest.raises(ValueError):
            stream_gains(d, 0)
        with pytest.raises(ValueError):
            stream_gains(d, d.singular_values.size + 1)
        with pytest.raises(ValueError):
            StreamGains(np.array([1.0, 2.0]))  # increasing
        with pytest.raises(ValueError):
            StreamGains(np.zeros((2, 2)))

    def test_warns_when_streams_exceed_paths(self, channel):
        d = decompose(channel)
        with pytest.warns(UserWarning, match="propagation"):
            stream_gains(d, 5, l_t=4)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            stream_gains(d, 4, l_t=4)  # at the limit: no warning


class TestPredictedGains:
    def test_formula_on_known_blocks(self):
        profile = FadingProfile(np.array([[0.5, 2.0]]), np.array([[2, 1]]))
        rx, tx = ArrayGeometry(4), ArrayGeometry(8)
        ch = draw_channel(profile, rx, tx, np.random.default_rng(6))
        pred = predicted_gains(ch.blocks, profile, 4, 8)
        want = []
        for j in range(2):
            ps = ch.blocks[0][j]
            want.extend(np.sqrt(profile.beta[0, j] * 32 / ps.n_paths)
                        * np.abs(ps.gains))
        np.testing.assert_allclose(pred, np.sort(want)[::-1])
        assert np.all(np.diff(pred) <= 0.0)

    def test_large_arrays_approach_prediction(self):
        # steering vectors decorrelate as the arrays grow, so measured
        # singular values converge on the per-path prediction
        profile = FadingProfile.homogeneous(1, 1, 0.0, 4)
        rng = np.random.default_rng(21)
        errs = []
        for n in (8, 256):
            ch = draw_channel(profile, ArrayGeometry(n), ArrayGeometry(n), rng)
            sv = singular_values(ch)[:4]
            pred = predicted_gains(ch.blocks, profile, n, n)
            errs.append(np.max(np.abs(sv - pred) / pred.max()))
        assert errs[1] < 0.05
        assert errs[1] < errs[0]


class TestNumericalRank:
    def test_counts_relative_to_largest(self):
        assert numerical_rank(np.array([4.0, 2.0, 4.0e-9, 0.0])) == 2
        assert numerical_rank(np.array([1.0])) == 1
        assert numerical_rank(np.zeros(3)) == 0
        assert numerical_rank(np.array([])) == 0

    def test_channel_rank_is_total_paths(self, channel):
        assert decompose(channel).rank == 8
