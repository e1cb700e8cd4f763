"""Médias por lotes, razões, inclinações log-log e testes de aderência."""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

MIN_BATCHES = 8


@dataclass
class BatchMeans:
    estimate: float
    stderr: float
    n_batches: int


def _split(values: np.ndarray, n_batches: int):
    if n_batches < 2:
        raise ValueError('são necessários ao menos 2 lotes')
    if len(values) < n_batches:
        raise ValueError(f'{len(values)} réplicas não preenchem {n_batches} lotes')
    # atribuição fixa e contígua por índice de réplica
    return np.array_split(np.asarray(values, float), n_batches)


def batch_means(values: Sequence[float], n_batches: int = MIN_BATCHES) -> BatchMeans:
    values = np.asarray(values, float)
    means = np.array([b.mean(axis=0) for b in _split(values, n_batches)])
    return BatchMeans(float(values.mean()), float(means.std(ddof=1) / np.sqrt(n_batches)), n_batches)


def ratio_batch_means(num: Sequence[float], den: Sequence[float], n_batches: int = MIN_BATCHES) -> BatchMeans:
    num = np.asarray(num, float)
    den = np.asarray(den, float)
    ratios = np.array([a.mean() / b.mean() for a, b in zip(_split(num, n_batches), _split(den, n_batches))])
    return BatchMeans(float(num.mean() / den.mean()), float(ratios.std(ddof=1) / np.sqrt(n_batches)), n_batches)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(x <= 0) or np.any(y <= 0):
        return float('nan')
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def batch_slope(x: Sequence[float], per_replica: np.ndarray, n_batches: int = MIN_BATCHES) -> BatchMeans:
    """Inclinação log-log das médias; erro padrão pela dispersão das inclinações por lote."""
    per_replica = np.asarray(per_replica, float)
    slopes = np.array([loglog_slope(x, b.mean(axis=0)) for b in _split(per_replica, n_batches)])
    slope = loglog_slope(x, per_replica.mean(axis=0))
    finite = slopes[np.isfinite(slopes)]
    stderr = float(finite.std(ddof=1) / np.sqrt(finite.size)) if finite.size > 1 else float('nan')
    return BatchMeans(slope, stderr, n_batches)


def within_tolerance(estimate: float, stderr: float, target: float, k: float = 3.0,
                     rel_tol: float = 0.0, abs_tol: float = 0.0) -> bool:
    if not np.isfinite(estimate):
        return False
    se = stderr if np.isfinite(stderr) else 0.0
    return bool(abs(estimate - target) <= k * se + rel_tol * abs(target) + abs_tol)


def ks_test(samples: Sequence[float], cdf: Callable) -> float:
    """p-valor do teste KS de uma amostra."""
    return float(stats.kstest(np.asarray(samples, float), cdf).pvalue)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    return float(stats.ks_2samp(np.asarray(a, float), np.asarray(b, float)).pvalue)
