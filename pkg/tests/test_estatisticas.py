import numpy as np
import pytest

from app.services.estatisticas import (batch_means, batch_slope, ks_test, ks_two_sample, loglog_slope,
                                       ratio_batch_means, within_tolerance)


def test_medias_por_lotes():
    bm = batch_means(np.arange(16), 8)
    assert bm.estimate == pytest.approx(7.5)
    assert bm.stderr == pytest.approx(2 * np.std(np.arange(8), ddof=1) / np.sqrt(8))
    assert bm.n_batches == 8


def test_lotes_insuficientes():
    with pytest.raises(ValueError):
        batch_means(np.arange(4), 8)
    with pytest.raises(ValueError):
        batch_means(np.arange(16), 1)


def test_razao_por_lotes():
    den = np.linspace(1, 2, 16)
    bm = ratio_batch_means(2 * den, den, 8)
    assert bm.estimate == pytest.approx(2.0)
    assert bm.stderr == pytest.approx(0.0, abs=1e-12)


def test_inclinacao_loglog():
    x = np.array([0.1, 0.2, 0.4])
    assert loglog_slope(x, x ** 3) == pytest.approx(3.0)
    assert np.isnan(loglog_slope(x, np.array([1.0, 0.0, 2.0])))


def test_inclinacao_por_lotes():
    x = np.array([0.1, 0.2, 0.4])
    per_replica = np.outer(np.linspace(1, 2, 16), x ** 2)
    bm = batch_slope(x, per_replica, 8)
    assert bm.estimate == pytest.approx(2.0)
    assert bm.stderr == pytest.approx(0.0, abs=1e-10)


def test_tolerancia():
    assert within_tolerance(1.05, 0.02, 1.0, k=3)
    assert not within_tolerance(1.1, 0.02, 1.0, k=3)
    assert within_tolerance(1.1, 0.0, 1.0, rel_tol=0.1 + 1e-12)
    assert within_tolerance(1.1, float('nan'), 1.0, abs_tol=0.2)
    assert not within_tolerance(float('nan'), 0.0, 1.0, abs_tol=1.0)


def test_ks():
    stratified = (np.arange(500) + 0.5) / 500
    assert ks_test(stratified, lambda x: np.clip(x, 0, 1)) > 0.99
    normal = np.random.default_rng(0).normal(size=500)
    assert ks_test(normal, lambda x: np.clip(x, 0, 1)) < 1e-6
    assert ks_two_sample(stratified, stratified) == pytest.approx(1.0)
