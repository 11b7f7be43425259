import numpy as np
import pytest

from kickedatom import ObservableSeries, geometric_checkpoints


def _sample(with_hist=False):
    K = np.array([0, 1, 2, 5, 10])
    n_bins = np.arange(1, 6) if with_hist else None
    hist = np.random.default_rng(0).random((5, 5)) if with_hist else None
    return ObservableSeries(
        K=K, t_au=K * 3.5, P_sur=np.array([1.0, 0.9, 0.8, 0.5, 0.25]),
        mean_n=np.array([5.0, 5.1, 5.2, 4.0, np.nan]),
        norm=np.ones(5), engine="classical", n_bins=n_bins, hist=hist,
        meta={"n_i": 5, "seed": 3})


class TestObservableSeries:
    def test_text_round_trip(self):
        s = _sample()
        t = s.to_text()
        s2 = ObservableSeries.from_text(t)
        assert np.array_equal(s.K, s2.K)
        np.testing.assert_array_equal(s.P_sur, s2.P_sur)
        np.testing.assert_array_equal(s.norm, s2.norm)
        assert np.isnan(s2.mean_n[-1])
        assert s2.engine == "classical"
        # serialisation is a fixed-point: text -> series -> text is identical
        assert s2.to_text() == t

    def test_save_load_with_hist(self, tmp_path):
        s = _sample(with_hist=True)
        path = tmp_path / "series.txt"
        s.save(path)
        s2 = ObservableSeries.load(path)
        np.testing.assert_array_equal(s.hist, s2.hist)
        np.testing.assert_array_equal(s.n_bins, s2.n_bins)

    def test_load_without_hist(self, tmp_path):
        s = _sample()
        path = tmp_path / "series.txt"
        s.save(path)
        s2 = ObservableSeries.load(path)
        assert s2.hist is None

    def test_rejects_non_increasing_K(self):
        with pytest.raises(ValueError):
            ObservableSeries(K=np.array([0, 2, 1]), t_au=np.zeros(3),
                             P_sur=np.zeros(3), mean_n=np.zeros(3),
                             norm=np.zeros(3))


class TestGeometricCheckpoints:
    @pytest.mark.parametrize("K_max", [0, 1, 2, 10, 1000, 123456])
    def test_endpoints_and_monotonicity(self, K_max):
        cps = geometric_checkpoints(K_max)
        assert cps[0] == 0 and cps[-1] == K_max
        assert np.all(np.diff(cps) > 0)

    def test_geometric_tail(self):
        cps = geometric_checkpoints(100000, ratio=1.25)
        ratios = cps[-10:-1].astype(float)
        np.testing.assert_allclose(cps[-9:-1] / ratios[:-1] * 0 + np.diff(
            np.log(cps[-10:].astype(float)))[:-1], np.log(1.25), atol=0.01)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            geometric_checkpoints(-1)
