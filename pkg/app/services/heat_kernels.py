"""Núcleos de calor em [0,1] com Dirichlet, núcleo da semirreta e covariâncias q_t, q^t, q_∞.

Autopares de A = ½∂²/∂θ²: (-k²π²/2, √2 sin(kπθ)).
Para t pequeno usa-se a soma de imagens; para t grande a série de senos com
cota de cauda geométrica.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from scipy.special import erfc, polygamma

from app.services.grid import ScalarField, VectorField3

logger = logging.getLogger(__name__)

PI2 = np.pi ** 2
# abaixo deste t a série de senos perde para as imagens
CROSSOVER_T = 0.05
METHODS = ('auto', 'series', 'images')

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class KernelParams:
    truncation_K: int = 200
    tail_tol: float = 1e-10
    method: str = 'auto'

    def __post_init__(self) -> None:
        if int(self.truncation_K) != self.truncation_K or self.truncation_K < 1:
            raise ValueError('truncation_K deve ser um inteiro >= 1')
        if not self.tail_tol > 0:
            raise ValueError('tail_tol deve ser positivo')
        if self.method not in METHODS:
            raise ValueError(f'método inválido: {self.method}')


DEFAULT_PARAMS = KernelParams()


class KernelValue(NamedTuple):
    value: ArrayLike
    err_bound: float


def _scalar_or_array(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def _check_interior(*thetas: ArrayLike) -> None:
    for th in thetas:
        th = np.asarray(th)
        if np.any(th <= 0) or np.any(th >= 1):
            raise ValueError('theta deve estar em (0,1)')


def _check_positive_time(t: ArrayLike) -> None:
    if np.any(np.asarray(t) <= 0):
        raise ValueError('t deve ser positivo')


def series_tail_bound(t: float, K: int) -> float:
    """Cota de 2·Σ_{k>K} e^{-k²π²t/2}."""
    a = PI2 * t / 2
    return float(2 * np.exp(-K ** 2 * a) / -np.expm1(-(2 * K + 1) * a))


def _use_images(t: float, params: KernelParams) -> bool:
    if params.method == 'images':
        return True
    if params.method == 'series':
        return False
    return t < CROSSOVER_T


def _image_range(t: float) -> np.ndarray:
    m = int(np.ceil(5 * np.sqrt(t))) + 2
    return np.arange(-m, m + 1)


def _gaussian(x: np.ndarray, var: float) -> np.ndarray:
    return np.exp(-x ** 2 / (2 * var)) / np.sqrt(2 * np.pi * var)


def _g_images(t: float, theta: np.ndarray, theta_p: np.ndarray) -> KernelValue:
    m = _image_range(t)
    d = np.subtract.outer(theta - theta_p, -2.0 * m)
    s = np.subtract.outer(theta + theta_p, -2.0 * m)
    value = _gaussian(d, t).sum(axis=-1) - _gaussian(s, t).sum(axis=-1)
    # imagens omitidas ficam a distância >= 2|m|-1
    err = float(4 * _gaussian(np.array(2.0 * m[-1] - 1), t))
    return KernelValue(value, err)


def _g_series(t: float, theta: np.ndarray, theta_p: np.ndarray, params: KernelParams) -> KernelValue:
    K = params.truncation_K
    bound = series_tail_bound(t, K)
    if bound > params.tail_tol:
        raise ValueError(f'truncamento K={K} insuficiente para t={t}: cauda {bound:.3e} > {params.tail_tol:.1e}')
    k = np.arange(1, K + 1)
    weight = np.exp(-k ** 2 * PI2 * t / 2)
    s1 = np.sin(np.multiply.outer(theta, k * np.pi))
    s2 = np.sin(np.multiply.outer(theta_p, k * np.pi))
    return KernelValue(2 * np.sum(weight * s1 * s2, axis=-1), bound)


def heat_kernel_g_bound(t: float, theta: ArrayLike, theta_p: ArrayLike,
                        params: Optional[KernelParams] = None) -> KernelValue:
    params = params or DEFAULT_PARAMS
    _check_positive_time(t)
    _check_interior(theta, theta_p)
    theta, theta_p = np.broadcast_arrays(np.asarray(theta, float), np.asarray(theta_p, float))
    if _use_images(t, params):
        value, err = _g_images(t, theta, theta_p)
    else:
        value, err = _g_series(t, theta, theta_p, params)
    return KernelValue(_scalar_or_array(np.maximum(value, 0.0)), err)


def heat_kernel_g(t: float, theta: ArrayLike, theta_p: ArrayLike,
                  params: Optional[KernelParams] = None) -> ArrayLike:
    """g_t(θ,θ′): núcleo do calor com Dirichlet homogêneo em [0,1]."""
    return heat_kernel_g_bound(t, theta, theta_p, params).value


def kernel_G(t: float, a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """G_t(a,b) da semirreta absorvente (princípio da reflexão)."""
    _check_positive_time(t)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError('a e b devem ser não negativos')
    value = np.exp(-(a - b) ** 2 / (2 * t)) * -np.expm1(-2 * a * b / t) / np.sqrt(2 * np.pi * t)
    return _scalar_or_array(value)


def q_infinity(theta: ArrayLike, theta_p: ArrayLike) -> ArrayLike:
    """q_∞(θ,θ′) = θ∧θ′ - θθ′, covariância da ponte browniana."""
    theta = np.asarray(theta, float)
    theta_p = np.asarray(theta_p, float)
    return _scalar_or_array(np.minimum(theta, theta_p) - theta * theta_p)


def _primitive_images(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    # ∫₀ᵗ φ_{2s}(x) ds
    ax = np.abs(x)
    return np.sqrt(t / np.pi) * np.exp(-x ** 2 / (4 * t)) - 0.5 * ax * erfc(ax / (2 * np.sqrt(t)))


def _q_images(t: np.ndarray, theta: np.ndarray, theta_p: np.ndarray) -> KernelValue:
    m = _image_range(float(np.max(t)))
    shifts = 2.0 * m
    tt = t[..., None]
    d = (theta - theta_p)[..., None] + shifts
    s = (theta + theta_p)[..., None] + shifts
    value = _primitive_images(tt, d).sum(axis=-1) - _primitive_images(tt, s).sum(axis=-1)
    tmax = float(np.max(t))
    err = float(4 * tmax * _gaussian(np.array(2.0 * m[-1] - 1), 2 * tmax))
    return KernelValue(value, err)


def _complement_series(t: np.ndarray, theta: np.ndarray, theta_p: np.ndarray,
                       params: KernelParams) -> KernelValue:
    K = params.truncation_K
    tmin = float(np.min(t))
    bound = float(2 / (K ** 2 * PI2) * np.exp(-K ** 2 * PI2 * tmin) / -np.expm1(-(2 * K + 1) * PI2 * tmin))
    if bound > params.tail_tol:
        raise ValueError(f'truncamento K={K} insuficiente para t={tmin}: cauda {bound:.3e}')
    k = np.arange(1, K + 1)
    coef = 2 * np.sin(theta[..., None] * k * np.pi) * np.sin(theta_p[..., None] * k * np.pi) / (k ** 2 * PI2)
    value = np.sum(coef * np.exp(-np.multiply.outer(t, k ** 2 * PI2)), axis=-1)
    return KernelValue(value, bound)


def _split_by_method(t: np.ndarray, params: KernelParams) -> np.ndarray:
    if params.method == 'images':
        return np.ones(t.shape, bool)
    if params.method == 'series':
        return np.zeros(t.shape, bool)
    return t < CROSSOVER_T


def q_kernel_bound(t: ArrayLike, theta: ArrayLike, theta_p: ArrayLike,
                   params: Optional[KernelParams] = None) -> KernelValue:
    params = params or DEFAULT_PARAMS
    _check_positive_time(t)
    _check_interior(theta, theta_p)
    t, theta, theta_p = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float),
                                            np.asarray(theta_p, float))
    qinf = np.minimum(theta, theta_p) - theta * theta_p
    out = np.array(qinf, dtype=float, copy=True)
    err = 0.0
    finite = np.isfinite(t)
    small = _split_by_method(np.where(finite, t, np.inf), params) & finite
    large = finite & ~small
    if np.any(small):
        v, e = _q_images(t[small], theta[small], theta_p[small])
        out[small] = v
        err = max(err, e)
    if np.any(large):
        v, e = _complement_series(t[large], theta[large], theta_p[large], params)
        out[large] = qinf[large] - v
        err = max(err, e)
    return KernelValue(_scalar_or_array(np.maximum(out, 0.0)), err)


def q_kernel(t: ArrayLike, theta: ArrayLike, theta_p: ArrayLike,
             params: Optional[KernelParams] = None) -> ArrayLike:
    """q_t(θ,θ′) = ∫₀ᵗ g_{2s}(θ,θ′)ds; aceita t = np.inf."""
    return q_kernel_bound(t, theta, theta_p, params).value


def q_complement_bound(t: ArrayLike, theta: ArrayLike, theta_p: ArrayLike,
                       params: Optional[KernelParams] = None) -> KernelValue:
    params = params or DEFAULT_PARAMS
    if np.any(np.asarray(t) < 0):
        raise ValueError('t deve ser não negativo')
    _check_interior(theta, theta_p)
    t, theta, theta_p = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float),
                                            np.asarray(theta_p, float))
    qinf = np.minimum(theta, theta_p) - theta * theta_p
    out = np.zeros(t.shape)
    err = 0.0
    zero = t == 0
    out[zero] = qinf[zero]
    small = _split_by_method(t, params) & ~zero & np.isfinite(t)
    large = ~small & ~zero & np.isfinite(t)
    if np.any(small):
        v, e = _q_images(t[small], theta[small], theta_p[small])
        out[small] = qinf[small] - v
        err = max(err, e)
    if np.any(large):
        v, e = _complement_series(t[large], theta[large], theta_p[large], params)
        out[large] = v
        err = max(err, e)
    return KernelValue(_scalar_or_array(np.maximum(out, 0.0)), err)


def q_complement(t: ArrayLike, theta: ArrayLike, theta_p: ArrayLike,
                 params: Optional[KernelParams] = None) -> ArrayLike:
    """q^t = q_∞ - q_t = ∫_t^∞ g_{2s} ds; t = 0 devolve q_∞."""
    return q_complement_bound(t, theta, theta_p, params).value


def q_infinity_series(theta: ArrayLike, theta_p: ArrayLike, K: int) -> ArrayLike:
    """Série de senos de q_∞ truncada em K, com a cauda exata da parte ressonante.

    Σ_{k>K} 1/k² = ψ′(K+1) entra quando θ = θ′; a parte oscilante da cauda é O(1/K²).
    """
    _check_interior(theta, theta_p)
    theta, theta_p = np.broadcast_arrays(np.asarray(theta, float), np.asarray(theta_p, float))
    k = np.arange(1, K + 1)
    terms = np.sin(theta[..., None] * k * np.pi) * np.sin(theta_p[..., None] * k * np.pi) / k ** 2
    value = 2 * terms.sum(axis=-1) / PI2
    resonant = np.isclose(theta, theta_p, rtol=0, atol=1e-14)
    value = value + np.where(resonant, polygamma(1, K + 1) / PI2, 0.0)
    return _scalar_or_array(value)


def semigroup_apply(t: float, field: Union[ScalarField, VectorField3],
                    params: Optional[KernelParams] = None):
    """e^{tA} via amortecimento dos coeficientes de seno: c_k ↦ c_k·e^{-k²π²t/2}."""
    if t < 0:
        raise ValueError('t deve ser não negativo')
    if t == 0:
        return field.with_values(field.values.copy())
    coefs = field.sine_coefficients()
    k = np.arange(1, field.grid.N + 1)
    damp = np.exp(-k ** 2 * PI2 * t / 2)
    if isinstance(field, VectorField3):
        damp = damp[:, None]
    return field.from_coefficients(coefs * damp)


def estq_weight(t: ArrayLike) -> ArrayLike:
    """max(t^{-3/4}, 1)."""
    t = np.asarray(t, float)
    with np.errstate(divide='ignore'):
        return np.maximum(np.where(np.isfinite(t), t, 1.0) ** -0.75, 1.0)


def check_estq(theta_list: Iterable[float], t_list: Iterable[float],
               params: Optional[KernelParams] = None) -> float:
    """Menor Ĉ₀ com (θ(1-θ)/q_t(θ,θ))^{3/2} ≤ Ĉ₀·max(t^{-3/4},1) no reticulado."""
    theta = np.asarray(list(theta_list), float)
    t = np.asarray(list(t_list), float)
    tt, th = np.meshgrid(t, theta, indexing='ij')
    q = q_kernel(tt, th, th, params)
    ratio = (th * (1 - th) / q) ** 1.5
    c0 = float(np.max(ratio / estq_weight(tt)))
    logger.debug(f'Ĉ₀ ajustado em {theta.size}x{t.size} pontos: {c0:.6g}')
    return c0


KERNELS = ('g', 'G', 'q', 'q_complement')


def kernel_table(t_list: Iterable[float], theta_list: Iterable[float],
                 params: Optional[KernelParams] = None) -> pd.DataFrame:
    """Tabela kernel,t,theta,theta_p,value,err_bound em todos os pares (θ,θ′)."""
    rows = []
    thetas = list(theta_list)
    for t in t_list:
        for th in thetas:
            for thp in thetas:
                g = heat_kernel_g_bound(t, th, thp, params)
                q = q_kernel_bound(t, th, thp, params)
                qc = q_complement_bound(t, th, thp, params)
                rows.append(('g', t, th, thp, g.value, g.err_bound))
                rows.append(('G', t, th, thp, kernel_G(t, th, thp), 0.0))
                rows.append(('q', t, th, thp, q.value, q.err_bound))
                rows.append(('q_complement', t, th, thp, qc.value, qc.err_bound))
    return pd.DataFrame(rows, columns=['kernel', 't', 'theta', 'theta_p', 'value', 'err_bound'])
