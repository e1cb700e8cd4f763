"""Potenciais U₃^{θ,a}, Γ₃^θ, densidade marginal ρ_θ e alvos estacionários de Revuz.

A quadratura em t usa t = s⁴ (o que absorve a singularidade integrável t^{-3/4}
da densidade gaussiana em t → 0) e painéis geométricos de Gauss-Legendre em s.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import erf, gamma, gammainc
from scipy.stats import chi, chi2, ncx2

from app.services.grid import SpaceTimeGrid, VectorField3
from app.services.heat_kernels import PI2, KernelParams, check_estq, estq_weight, q_kernel
from app.services.samplers import RngStream, sample_brownian_bridge_3d

logger = logging.getLogger(__name__)

OMEGA_3 = 4 * np.pi / 3
SQRT_8_PI = np.sqrt(8 / np.pi)
SQRT_2_PI = np.sqrt(2 / np.pi)
T_CUTOFF = 25.0
RADIAL_NODES = 64
RADIAL_HALF_WIDTH = 12.0
# malha com θ = 0.5, 0.1 e 0.01 como nós
POTENTIAL_GRID_N = 199
ORACLE_CHUNK = 10_000


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeQuadrature:
    """Nós e pesos para ∫₀^{T_q} f(t)dt, com a cota de cauda e^{-T_q}."""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    cutoff: float

    @classmethod
    def graded(cls, cutoff: float = T_CUTOFF, panels: int = 40, order: int = 16,
               ratio: float = 0.6) -> 'TimeQuadrature':
        if not cutoff > 0 or panels < 1 or order < 2:
            raise QuadratureError('parâmetros de quadratura inválidos')
        s_max = cutoff ** 0.25
        edges = np.concatenate([[0.0], s_max * ratio ** np.arange(panels - 1, -1, -1)])
        x, w = np.polynomial.legendre.leggauss(order)
        lo, hi = edges[:-1, None], edges[1:, None]
        s = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
        ws = (0.5 * (hi - lo) * w).ravel()
        return cls(nodes=s ** 4, weights=ws * 4 * s ** 3, cutoff=cutoff)

    def tail_bound(self, q_cut: float) -> float:
        return float(np.exp(-self.cutoff) * (2 * np.pi * q_cut) ** -1.5)


DEFAULT_QUADRATURE = TimeQuadrature.graded()


@dataclass
class PotentialQuery:
    theta: float
    a: np.ndarray
    xbar: VectorField3
    quadrature: TimeQuadrature = DEFAULT_QUADRATURE

    def __post_init__(self) -> None:
        if not 0 < self.theta < 1:
            raise ValueError('theta deve estar em (0,1)')
        self.a = np.asarray(self.a, float).reshape(3)
        if self.xbar.values.ndim != 2:
            raise ValueError('xbar deve ser um único campo')
        if np.any(self.quadrature.weights <= 0):
            raise QuadratureError('pesos de quadratura devem ser positivos')


def _propagated_mean(xbar: VectorField3, theta: float, t: np.ndarray) -> np.ndarray:
    """e^{tA}x̄(θ) para cada nó t; shape (n_t, 3)."""
    k = np.arange(1, xbar.grid.N + 1)
    coefs = xbar.sine_coefficients()
    basis = np.sqrt(2.0) * np.sin(k * np.pi * theta)
    damp = np.exp(-np.multiply.outer(t, k ** 2 * PI2 / 2))
    return (damp * basis) @ coefs


def _diag_q(theta: float, t: np.ndarray, params: Optional[KernelParams]) -> np.ndarray:
    return np.asarray(q_kernel(t, theta, theta, params), float)


def _gaussian_integrand(q: PotentialQuery, params: Optional[KernelParams]):
    t = q.quadrature.nodes
    qt = _diag_q(q.theta, t, params)
    m = _propagated_mean(q.xbar, q.theta, t)
    return t, qt, m


def u3_potential(q: PotentialQuery, params: Optional[KernelParams] = None) -> float:
    """∫₀^∞ e^{-t}(2πq_t)^{-3/2}·exp(-|e^{tA}x̄(θ)-a|²/(2q_t))dt."""
    t, qt, m = _gaussian_integrand(q, params)
    d2 = np.sum((m - q.a) ** 2, axis=1)
    f = np.exp(-t) * (2 * np.pi * qt) ** -1.5 * np.exp(-d2 / (2 * qt))
    value = float(np.dot(q.quadrature.weights, f))
    if not np.isfinite(value):
        raise QuadratureError(f'quadratura de U₃ falhou em theta={q.theta}')
    return value


def psi(y: np.ndarray) -> np.ndarray:
    """ψ(y) = y·exp(-|y|²/2) em ℝ³."""
    return y * np.exp(-0.5 * np.sum(y ** 2, axis=-1, keepdims=True))


def u3_directional_derivative(q: PotentialQuery, hbar: VectorField3,
                              params: Optional[KernelParams] = None) -> float:
    """Derivada de U₃ na direção h̄ de x̄."""
    t, qt, m = _gaussian_integrand(q, params)
    h_t = _propagated_mean(hbar, q.theta, t)
    y = (m - q.a) / np.sqrt(qt)[:, None]
    f = -np.exp(-t) * (2 * np.pi) ** -1.5 * qt ** -2 * np.sum(h_t * psi(y), axis=1)
    value = float(np.dot(q.quadrature.weights, f))
    if not np.isfinite(value):
        raise QuadratureError('quadratura da derivada direcional falhou')
    return value


def noncentral_norm_mean(mu: np.ndarray) -> np.ndarray:
    """M(μ) = E|Z + μe| para Z normal padrão em ℝ³, por quadratura radial."""
    mu = np.atleast_1d(np.asarray(mu, float))
    x, w = np.polynomial.legendre.leggauss(RADIAL_NODES)
    lo = np.maximum(0.0, mu - RADIAL_HALF_WIDTH)[:, None]
    hi = (mu + RADIAL_HALF_WIDTH)[:, None]
    r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    wr = 0.5 * (hi - lo) * w
    m = mu[:, None]
    phi = lambda z: np.exp(-0.5 * z ** 2) / np.sqrt(2 * np.pi)
    small = m < 1.0
    safe = np.where(m > 0, m, 1.0)
    # forma com sinh evita cancelamento para μ pequeno
    sinh_ratio = np.where(m > 0, np.sinh(r * m) / safe, r)
    dens_small = 2 * r ** 2 * sinh_ratio * phi(r) * np.exp(-0.5 * m ** 2)
    dens_large = r ** 2 / safe * (phi(r - m) - phi(r + m))
    return np.sum(wr * np.where(small, dens_small, dens_large), axis=1)


def noncentral_norm_mean_closed(mu: np.ndarray) -> np.ndarray:
    mu = np.asarray(mu, float)
    safe = np.where(mu > 0, mu, 1.0)
    val = SQRT_2_PI * np.exp(-mu ** 2 / 2) + (mu + 1 / safe) * erf(mu / np.sqrt(2))
    return np.where(mu > 0, val, SQRT_8_PI)


def gamma3(xbar: VectorField3, theta: float, quadrature: TimeQuadrature = DEFAULT_QUADRATURE,
           params: Optional[KernelParams] = None) -> float:
    """Γ₃^θ(x̄) = ∫₀^∞ e^{-t}·√(q_t/θ)·M(|e^{tA}x̄(θ)|/√q_t)dt."""
    if not 0 < theta < 1:
        raise ValueError('theta deve estar em (0,1)')
    t = quadrature.nodes
    qt = _diag_q(theta, t, params)
    m = _propagated_mean(xbar, theta, t)
    mu = np.linalg.norm(m, axis=1) / np.sqrt(qt)
    f = np.exp(-t) * np.sqrt(qt / theta) * noncentral_norm_mean(mu)
    value = float(np.dot(quadrature.weights, f))
    if not np.isfinite(value):
        raise QuadratureError(f'quadratura de Γ₃ falhou em theta={theta}')
    return value


def c_theta(theta: float) -> float:
    """E_{μ₃}[Γ₃^θ] = √(1-θ)·√(8/π)."""
    return float(np.sqrt(1 - theta) * SQRT_8_PI)


def marginal_density(theta: float, a):
    """ρ_θ(a) = √(2/π)·a²·(θ(1-θ))^{-3/2}·exp(-a²/(2θ(1-θ)))."""
    if not 0 < theta < 1:
        raise ValueError('theta deve estar em (0,1)')
    a = np.asarray(a, float)
    if np.any(a < 0):
        raise ValueError('a deve ser não negativo')
    s = theta * (1 - theta)
    value = SQRT_2_PI * a ** 2 * s ** -1.5 * np.exp(-a ** 2 / (2 * s))
    return float(value) if value.ndim == 0 else value


def marginal_cdf(theta: float, a):
    """Função de distribuição de ρ_θ: lei qui com 3 graus e escala √(θ(1-θ))."""
    return chi.cdf(a, df=3, scale=np.sqrt(theta * (1 - theta)))


def band_mass(theta: float, lo: float, hi: float) -> float:
    """∫_lo^hi ρ_θ(α)dα."""
    return float(marginal_cdf(theta, hi) - marginal_cdf(theta, lo))


@dataclass
class RevuzTargets:
    theta: float
    eta_density_mass: float
    l_mass: float
    boundary_integrand: float
    interval: Optional[Tuple[float, float]] = None
    interval_mass: Optional[float] = None


def eta_mass_density(theta):
    """E_ν[η([0,1],θ)] = 1/(2√(2πθ³(1-θ)³))."""
    theta = np.asarray(theta, float)
    return 1 / (2 * np.sqrt(2 * np.pi * theta ** 3 * (1 - theta) ** 3))


def _interval_primitive(theta: float) -> float:
    # primitiva de ½(2πθ³(1-θ)³)^{-1/2}
    return (2 * theta - 1) / (np.sqrt(2 * np.pi) * np.sqrt(theta * (1 - theta)))


def revuz_targets(theta: float, interval: Optional[Tuple[float, float]] = None) -> RevuzTargets:
    """Alvos estacionários por unidade de tempo para η e l em θ (e num intervalo I)."""
    if not 0 < theta < 1:
        raise ValueError('theta deve estar em (0,1)')
    eta = float(eta_mass_density(theta))
    mass = None
    if interval is not None:
        lo, hi = interval
        if not 0 < lo < hi < 1:
            raise ValueError('intervalo deve estar contido em (0,1) sem tocar a fronteira (massa infinita)')
        mass = float(_interval_primitive(hi) - _interval_primitive(lo))
    return RevuzTargets(theta=theta, eta_density_mass=eta, l_mass=4 * eta, boundary_integrand=eta,
                        interval=interval, interval_mass=mass)


def interval_mass_quadrature(lo: float, hi: float) -> float:
    val, _ = integrate.quad(lambda th: float(eta_mass_density(th)), lo, hi, epsabs=1e-13, epsrel=1e-12)
    return val


def boundary_surrogate(eps: float, a_cut: float = 0.5) -> float:
    """√ε·∫₀^{a_cut}(1∧θ/ε)·E_ν η(dθ) em ε finito; tende a √(2/π)."""
    if not 0 < eps < a_cut < 1:
        raise ValueError('exige 0 < eps < a_cut < 1')
    # θ = x² remove a singularidade θ^{-1/2} em [0,ε]
    inner, _ = integrate.quad(lambda x: 2 * x * (x * x / eps) * float(eta_mass_density(x * x)),
                              0, np.sqrt(eps), epsabs=1e-13, epsrel=1e-12)
    outer, _ = integrate.quad(lambda th: float(eta_mass_density(th)), eps, a_cut,
                              epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(np.sqrt(eps) * (inner + outer))


def renormalized_target(theta: float, eps: float, T: float = 1.0) -> float:
    """Média estacionária exata de (3/ε³)·ocupação de [0,ε) até T."""
    return 3 * T * band_mass(theta, 0, eps) / eps ** 3


def level_target(theta: float, a: float, band_eps: float, T: float = 1.0) -> float:
    """Média estacionária de a⁻²·(1/ε)·ocupação de [a,a+ε) até T."""
    return T * band_mass(theta, a, a + band_eps) / (band_eps * a ** 2)


def uniform_bound_constant(c0: float, quadrature: Optional[TimeQuadrature] = None) -> float:
    """Ĉ₀·(2π)^{-3/2}·∫₀^∞e^{-t}max(t^{-3/4},1)dt (ou a soma discreta, se maior)."""
    weight_integral = gamma(0.25) * gammainc(0.25, 1.0) + np.exp(-1.0)
    if quadrature is not None:
        discrete = np.dot(quadrature.weights, np.exp(-quadrature.nodes) * estq_weight(quadrature.nodes))
        weight_integral = max(weight_integral, float(discrete) + np.exp(-quadrature.cutoff))
    return float(c0 * (2 * np.pi) ** -1.5 * weight_integral)


@dataclass
class UniformBoundReport:
    max_scaled: float
    bound: float
    c0: float

    @property
    def holds(self) -> bool:
        return self.max_scaled <= self.bound * (1 + 1e-9)


def check_uniform_bound(thetas: Iterable[float], a_list: Iterable[np.ndarray], xbars: Iterable[VectorField3],
                        quadrature: TimeQuadrature = DEFAULT_QUADRATURE,
                        params: Optional[KernelParams] = None) -> UniformBoundReport:
    """θ^{3/2}(1-θ)^{3/2}·U₃ contra a cota uniforme, com Ĉ₀ ajustado nos nós da quadratura."""
    thetas = list(thetas)
    a_list = list(a_list)
    xbars = list(xbars)
    c0 = check_estq(thetas, quadrature.nodes, params)
    bound = uniform_bound_constant(c0, quadrature)
    best = 0.0
    for th in thetas:
        for a in a_list:
            for xb in xbars:
                val = (th * (1 - th)) ** 1.5 * u3_potential(PotentialQuery(th, a, xb, quadrature), params)
                best = max(best, val)
    return UniformBoundReport(best, bound, c0)


def u3_ball_quadrature(q: PotentialQuery, eps: float, params: Optional[KernelParams] = None) -> float:
    """(1/ω₃ε³)·∫e^{-t}P(|z₃(t,θ)-a| ≤ ε)dt com a probabilidade exata da bola."""
    t, qt, m = _gaussian_integrand(q, params)
    nc = np.sum((m - q.a) ** 2, axis=1) / qt
    x = eps ** 2 / qt
    prob = np.where(nc > 1e-12, ncx2.cdf(x, 3, np.maximum(nc, 1e-12)), chi2.cdf(x, 3))
    return float(np.dot(q.quadrature.weights, np.exp(-t) * prob) / (OMEGA_3 * eps ** 3))


def u3_band_oracle(q: PotentialQuery, eps: float, rng: RngStream, n_samples: int = 200_000,
                   params: Optional[KernelParams] = None) -> Tuple[float, float]:
    """Monte Carlo de (1/ω₃ε³)·E[1{|z₃(τ,θ)-a| ≤ ε}] com τ ~ Exp(1); devolve (estimativa, erro padrão)."""
    if n_samples < 2:
        raise ValueError('n_samples deve ser >= 2')
    gen = rng.generator()
    hits = 0
    for start in range(0, n_samples, ORACLE_CHUNK):
        n = min(ORACLE_CHUNK, n_samples - start)
        tau = gen.exponential(1.0, n)
        qt = _diag_q(q.theta, tau, params)
        m = _propagated_mean(q.xbar, q.theta, tau)
        z = m + np.sqrt(qt)[:, None] * gen.standard_normal((n, 3))
        hits += int(np.count_nonzero(np.sum((z - q.a) ** 2, axis=1) <= eps ** 2))
    p = hits / n_samples
    scale = 1 / (OMEGA_3 * eps ** 3)
    # erro padrão de Bernoulli
    return float(p * scale), float(np.sqrt(p * (1 - p) / (n_samples - 1)) * scale)


def zero_field(grid: Optional[SpaceTimeGrid] = None) -> VectorField3:
    grid = grid or SpaceTimeGrid(POTENTIAL_GRID_N, 1.0, 1.0)
    return VectorField3(grid, np.zeros((grid.N, 3)))


def gamma3_ensemble(theta: float, n_draws: int, rng: RngStream,
                    quadrature: TimeQuadrature = DEFAULT_QUADRATURE, N: int = POTENTIAL_GRID_N) -> np.ndarray:
    """Γ₃^θ avaliado em n_draws pontes x̄ ~ μ₃."""
    grid = SpaceTimeGrid(N, 1.0, 1.0)
    draws = sample_brownian_bridge_3d(grid, rng, n_draws)
    return np.array([gamma3(VectorField3(grid, v), theta, quadrature) for v in draws.values])


def potential_table(thetas: Iterable[float], a_list: Iterable[float],
                    quadrature: TimeQuadrature = DEFAULT_QUADRATURE) -> pd.DataFrame:
    """θ, a, U₃ (x̄ = 0, a radial), Γ₃(0), ρ_θ(a) e alvos de Revuz."""
    xb = zero_field()
    rows = []
    for th in thetas:
        tg = revuz_targets(th)
        g3 = gamma3(xb, th, quadrature)
        for a in a_list:
            u3 = u3_potential(PotentialQuery(th, np.array([a, 0.0, 0.0]), xb, quadrature))
            rows.append({'theta': th, 'a': a, 'u3': u3, 'gamma3': g3, 'rho': marginal_density(th, a),
                         'eta_density_mass': tg.eta_density_mass, 'l_mass': tg.l_mass,
                         'c_theta': c_theta(th)})
    return pd.DataFrame(rows)
