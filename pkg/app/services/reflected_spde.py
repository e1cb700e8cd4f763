"""Equação do calor estocástica refletida em [0,1] e o problema de Skorohod unidimensional.

Passo implícito de Euler: M u^{n+1} = u^n + √(dt/h)·Z^n + dt·m^n, com
M = I - (dt/2)·D₂, u^{n+1} ≥ 0, m^n ≥ 0 e u^{n+1}·m^n = 0. O registro guarda a
densidade η_i(t_n) = Σ m·dt.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.stats import norm
from scipy import integrate

from app.services.grid import ScalarField, SpaceTimeGrid, second_difference
from app.services.heat_kernels import PI2
from app.services.samplers import RngStream, implicit_operator, sample_white_noise_increment
from app.services.tridiagonal import (apply_matrix, lcp_active_set, penalty_active_set,
                                      projected_gauss_seidel, solve_constant)

logger = logging.getLogger(__name__)

SCHEMES = ('lcp', 'penalized')
X0_CLAMP_TOL = 1e-12
PGS_TOL = 1e-12
PGS_MAX_ITER = 10_000
NEGATIVE_TOL = 1e-12
WEAK_FORM_OPERATORS = ('spectral', 'discrete')


class LCPConvergenceError(RuntimeError):
    def __init__(self, step: int, scheme: str) -> None:
        super().__init__(f'solver {scheme} não convergiu no passo {step}')
        self.step = step
        self.scheme = scheme


@dataclass
class ReflectionLedger:
    """Densidade acumulada η_i(t_n) nos instantes dos instantâneos; shape (n_snap, N)."""

    grid: SpaceTimeGrid
    times: np.ndarray
    values: np.ndarray

    def final(self) -> np.ndarray:
        return self.values[-1]

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def interval_mass(self, lo: float, hi: float, n: int = -1) -> float:
        """η([0,t_n] × [lo,hi]) somando densidade·h nos sítios do intervalo."""
        theta = self.grid.theta
        mask = (theta >= lo) & (theta <= hi)
        return float(self.values[n, mask].sum() * self.grid.h)


@dataclass
class Trajectory:
    grid: SpaceTimeGrid
    times: np.ndarray
    u: np.ndarray
    ledger: ReflectionLedger
    x0: np.ndarray
    scheme: str
    snapshot_every: int
    provenance: dict
    noise: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    delta: Optional[float] = None
    negative_count: int = 0
    steps_with_reflection: int = 0
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def snapshot_dt(self) -> float:
        return self.grid.dt * self.snapshot_every

    def snapshot_field(self, n: int) -> ScalarField:
        return ScalarField(self.grid, self.u[n])

    def complementarity_residual(self) -> float:
        """Σ u^{n+1}_i·m_i·h·dt sobre todos os passos armazenados."""
        return float(np.sum(self.u[1:] * self.ledger.increments()) * self.grid.h)


def _prepare_x0(x0: ScalarField, grid: SpaceTimeGrid) -> np.ndarray:
    if x0.grid.N != grid.N:
        raise ValueError('x0 definido em outra malha')
    values = np.asarray(x0.values, float)
    if values.ndim != 1:
        raise ValueError('x0 deve ser um único campo')
    if not x0.is_nonnegative(X0_CLAMP_TOL):
        raise ValueError(f'x0 com valor negativo {values.min():.3e} além da tolerância')
    return np.maximum(values, 0.0)


def solve_reflected(x0: ScalarField, grid: SpaceTimeGrid, rng: RngStream, scheme: str = 'lcp',
                    delta: Optional[float] = None, snapshot_every: int = 1, paired: bool = False,
                    store_noise: bool = True, noise_scale: float = 1.0) -> Trajectory:
    """Avança a equação refletida de 0 a T.

    scheme='lcp' resolve o problema de complementaridade exato a cada passo;
    scheme='penalized' troca a reflexão pela deriva implícita δ⁻¹max(-u,0).
    Com paired=True a convolução w é avançada com o mesmo ruído e o mesmo
    operador implícito.
    """
    if scheme not in SCHEMES:
        raise ValueError(f'esquema inválido: {scheme}')
    if scheme == 'penalized' and not (delta is not None and delta > 0):
        raise ValueError('esquema penalizado exige delta > 0')
    if snapshot_every < 1:
        raise ValueError('snapshot_every deve ser >= 1')
    u = _prepare_x0(x0, grid)
    x0_values = u.copy()
    N, h, dt = grid.N, grid.h, grid.dt
    n_steps = grid.n_steps
    diag, off = implicit_operator(grid, dt)
    pen = dt / delta if scheme == 'penalized' else 0.0
    scale = noise_scale * np.sqrt(dt / h)
    max_iter = N + 10

    n_snap = n_steps // snapshot_every + 1
    u_snap = np.empty((n_snap, N))
    eta_snap = np.empty((n_snap, N))
    w_snap = np.empty((n_snap, N)) if paired else None
    noise = np.empty((n_steps, N)) if store_noise else None
    u_snap[0] = u
    eta_snap[0] = 0.0
    if paired:
        w_snap[0] = 0.0
    eta = np.zeros(N)
    w = np.zeros(N)
    negatives = 0
    reflecting = 0
    # ξ̄ de célula; z = ξ̄·√(h·dt) é normal padrão
    cell_noise = sample_white_noise_increment(grid, dt, rng, n_steps=n_steps).values
    sqrt_hdt = np.sqrt(h * dt)
    s = 1
    for n in range(n_steps):
        z = cell_noise[n] * sqrt_hdt
        if store_noise:
            noise[n] = noise_scale * z
        b = u + scale * z
        if scheme == 'lcp':
            u_new, incr, its = lcp_active_set(diag, off, b, max_iter)
            if its < 0:
                u_new, its = projected_gauss_seidel(diag, off, 0.0, b, np.maximum(b, 0.0), PGS_TOL, PGS_MAX_ITER)
                if its < 0:
                    raise LCPConvergenceError(n + 1, scheme)
                incr = np.where(u_new > 0.0, 0.0, np.maximum(apply_matrix(diag, off, u_new) - b, 0.0))
            else:
                incr = np.maximum(incr, 0.0)
        else:
            u_new, its = penalty_active_set(diag, off, pen, b, max_iter)
            if its < 0:
                u_new, its = projected_gauss_seidel(diag, off, pen, b, b.copy(), PGS_TOL, PGS_MAX_ITER)
                if its < 0:
                    raise LCPConvergenceError(n + 1, scheme)
            incr = np.maximum(-u_new, 0.0) * pen
            negatives += int(np.sum(u_new < -NEGATIVE_TOL))
        if np.any(incr > 0):
            reflecting += 1
        eta += incr
        u = u_new
        if paired:
            w = solve_constant(diag, off, w + scale * z)
        if (n + 1) % snapshot_every == 0:
            u_snap[s] = np.maximum(u, 0.0)
            eta_snap[s] = eta
            if paired:
                w_snap[s] = w
            s += 1

    if negatives:
        logger.warning(f'esquema penalizado (delta={delta}): {negatives} valores negativos corrigidos para 0')
    times = np.arange(n_snap) * dt * snapshot_every
    return Trajectory(
        grid=grid, times=times, u=u_snap, ledger=ReflectionLedger(grid, times, eta_snap), x0=x0_values,
        scheme=scheme, snapshot_every=snapshot_every, provenance=rng.provenance(), noise=noise,
        w=w_snap, delta=delta, negative_count=negatives, steps_with_reflection=reflecting,
    )


@dataclass
class SkorohodPath:
    X: np.ndarray
    L: np.ndarray

    def complementarity(self) -> np.ndarray:
        """Σ X(t_n)·ΔL_n por trajetória."""
        return np.sum(self.X[..., 1:] * np.diff(self.L, axis=-1), axis=-1)


def skorohod_1d(x: float, driver: np.ndarray, path_minima: Optional[np.ndarray] = None) -> SkorohodPath:
    """Mapa de Skorohod: L = max(0, sup_{s≤t} -(x + B(s))), X = x + B + L.

    `path_minima` (mínimos do motorista em cada intervalo) torna L exato entre
    os nós de amostragem.
    """
    if x < 0:
        raise ValueError('x deve ser não negativo')
    driver = np.asarray(driver, float)
    if np.any(driver[..., 0] != 0):
        raise ValueError('o motorista deve começar em 0')
    low = driver if path_minima is None else np.concatenate([driver[..., :1], path_minima], axis=-1)
    L = np.maximum(np.maximum.accumulate(-(x + low), axis=-1), 0.0)
    return SkorohodPath(X=x + driver + L, L=L)


def sample_brownian_driver(n_paths: int, n_steps: int, dt: float, rng: RngStream,
                           with_minima: bool = False):
    """Movimento browniano nos nós k·dt; opcionalmente o mínimo exato de cada ponte."""
    gen = rng.generator()
    inc = gen.standard_normal((n_paths, n_steps)) * np.sqrt(dt)
    B = np.concatenate([np.zeros((n_paths, 1)), np.cumsum(inc, axis=1)], axis=1)
    if not with_minima:
        return B
    u = gen.random((n_paths, n_steps))
    a, b = B[:, :-1], B[:, 1:]
    minima = 0.5 * (a + b - np.sqrt((b - a) ** 2 - 2 * dt * np.log1p(-u)))
    return B, minima


def skorohod_band_estimator(path: SkorohodPath, eps: float, dt: float) -> np.ndarray:
    """(1/2ε)·∫₀ᵀ 1_{[0,ε)}(X) ds com amostras à direita de cada passo."""
    if not eps > 0:
        raise ValueError('eps deve ser positivo')
    inside = path.X[..., 1:] < eps
    return inside.sum(axis=-1) * dt / (2 * eps)


def skorohod_band_target(eps: float, T: float = 1.0) -> float:
    """Média exata do estimador de banda para |B| partindo de 0."""
    val, _ = integrate.quad(lambda s: 2 * norm.cdf(eps / np.sqrt(s)) - 1, 0, T, limit=200)
    return val / (2 * eps)


def _test_values(grid: SpaceTimeGrid, test_fn: Union[np.ndarray, Callable]) -> np.ndarray:
    values = test_fn(grid.theta) if callable(test_fn) else np.asarray(test_fn, float)
    if values.shape != (grid.N,):
        raise ValueError('função teste incompatível com a malha')
    return values


def _apply_generator(grid: SpaceTimeGrid, hv: np.ndarray, operator: str) -> np.ndarray:
    if operator == 'discrete':
        return 0.5 * second_difference(hv, grid.h)
    field = ScalarField(grid, hv)
    k = np.arange(1, grid.N + 1)
    return field.from_coefficients(field.sine_coefficients() * (-k ** 2 * PI2 / 2)).values


def check_weak_form(traj: Trajectory, test_fn: Union[np.ndarray, Callable],
                    operator: str = 'spectral') -> float:
    """Resíduo máximo da formulação fraca ao longo dos instantâneos.

    ⟨u(t),h⟩ - ⟨x,h⟩ - ∫⟨u,Ah⟩ds - ∫∫h dW - ∫h dη, com ⟨f,g⟩ = h·Σ f_i g_i e
    o ruído montado a partir dos incrementos armazenados.
    """
    if traj.noise is None:
        raise ValueError('trajetória sem o registro do ruído')
    if traj.snapshot_every != 1:
        raise ValueError('forma fraca exige instantâneos em todos os passos')
    if operator not in WEAK_FORM_OPERATORS:
        raise ValueError(f'operador inválido: {operator}')
    grid = traj.grid
    hv = _test_values(grid, test_fn)
    Ah = _apply_generator(grid, hv, operator)
    ip = lambda arr: arr @ hv * grid.h
    drift = np.concatenate([[0.0], np.cumsum(traj.u[1:] @ Ah * grid.h * grid.dt)])
    noise = np.concatenate([[0.0], np.cumsum(ip(traj.noise) * np.sqrt(grid.dt / grid.h))])
    residual = ip(traj.u) - ip(traj.x0) - drift - noise - ip(traj.ledger.values)
    return float(np.max(np.abs(residual)))


@dataclass
class ClosedFormulaReport:
    sk_residual: float
    eqfu_residual: float
    fully_residual: float
    boundary_v: float
    sign_violation: float
    v: np.ndarray = field(repr=False)


def check_closed_formula(traj: Trajectory) -> ClosedFormulaReport:
    """Identidade de Skorohod sítio a sítio com a convolução pareada.

    v = ∫(u-w)ds (soma à direita) e S(t) = -(x + w + ½D₂v); verifica
    η(t) = max_{s≤t} S(s) ∨ 0, u = x + w + ½D₂v + η e a equação de v.
    """
    if traj.w is None:
        raise ValueError('trajetória sem convolução pareada')
    if traj.snapshot_every != 1:
        raise ValueError('fórmula fechada exige instantâneos em todos os passos')
    grid = traj.grid
    dt = grid.dt
    diff = traj.u - traj.w
    v = np.concatenate([np.zeros((1, grid.N)), np.cumsum(diff[1:], axis=0) * dt])
    half_d2v = 0.5 * second_difference(v, grid.h)
    drive = -(traj.x0 + traj.w + half_d2v)
    sup = np.maximum(np.maximum.accumulate(drive, axis=0), 0.0)
    eta = traj.ledger.values
    sk = float(np.max(np.abs(eta - sup)))
    eqfu = float(np.max(np.abs(traj.u - (traj.x0 + traj.w + half_d2v + sup))))
    dv = np.diff(v, axis=0) / dt
    fully = float(np.max(np.abs(dv - (half_d2v[1:] + traj.x0 + sup[1:]))))
    padded = np.pad(v, ((0, 0), (1, 1)))
    boundary = float(np.max(np.abs(padded[:, [0, -1]])))
    untouched = eta[-1] == 0
    sign = float(np.max(sup[:, untouched], initial=0.0))
    return ClosedFormulaReport(sk, eqfu, fully, boundary, sign, v)
