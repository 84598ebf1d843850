import numpy as np
import pytest

from coneinf.montecarlo import WORKERS_ENV, binomial_se, default_workers, replicate, replication_rng


class TestReplicate:
    def test_order_and_length(self):
        out = replicate(lambda rng: rng.random(), 17, seed=3)
        assert out.shape == (17,)

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_worker_count_invariance(self, workers):
        serial = replicate(lambda rng: rng.normal(size=4).sum(), 101, 42, (5,), workers=1)
        sharded = replicate(lambda rng: rng.normal(size=4).sum(), 101, 42, (5,), workers=workers)
        np.testing.assert_array_equal(serial, sharded)

    def test_replication_i_uses_its_own_stream(self):
        out = replicate(lambda rng: rng.random(), 5, 9, (1, 2))
        assert out[3] == replication_rng(9, 1, 2, 3).random()

    def test_streams_differ(self):
        a = replicate(lambda rng: rng.random(), 10, 1, (0,))
        b = replicate(lambda rng: rng.random(), 10, 1, (1,))
        assert not np.array_equal(a, b)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            replicate(lambda rng: 0, 0, 1)


class TestWorkers:
    def test_env_default(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "4")
        assert default_workers() == 4

    @pytest.mark.parametrize("value", ["", "x", "0", "-3"])
    def test_bad_env_falls_back(self, monkeypatch, value):
        monkeypatch.setenv(WORKERS_ENV, value)
        assert default_workers() == 1


def test_binomial_se():
    assert binomial_se(0.5, 100) == pytest.approx(0.05)
    assert binomial_se(1.0, 1) == 0.0
