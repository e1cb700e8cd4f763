"""Estimadores de tempo local, densidades de ocupação e estatísticas do conjunto de zeros.

Todos são funções puras de uma Trajectory. As somas de Riemann usam o valor à
direita de cada intervalo (instantâneos n ≥ 1), o que torna cada estimador
exatamente aditivo em janelas de tempo disjuntas. Bandas são semiabertas [a, a+ε).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.services.reflected_spde import Trajectory

logger = logging.getLogger(__name__)

# dt ≤ C_DT·ε² para que as permanências na banda sejam resolvidas
C_DT = 0.1
RATIO_FLOOR = 1e-12
CLUSTER_GAP = 2
DEFAULT_DELTAS = (0.2, 0.1, 0.05, 0.025)

Window = Optional[Tuple[float, float]]


@dataclass
class OccupationEstimate:
    theta: float
    a: float
    eps: float
    value: float
    n_in_band: int
    resolution_ok: bool


@dataclass
class RenormalizedEstimate:
    theta: float
    eps: float
    value: float
    occupation: float
    resolution_ok: bool


@dataclass
class EtaDensityCheck:
    theta: float
    eps: float
    eta: float
    renormalized: float
    ratio: float
    inconclusive: bool


@dataclass
class DecompositionStats:
    steps_with_mass: int
    max_u_on_support: float
    zero_cluster_count: int
    single_cluster_fraction: float
    cluster_histogram: Dict[int, int] = field(default_factory=dict)


@dataclass
class ZeroSetStats:
    tol: float
    fraction_time_touching: float
    gap_histogram: Tuple[np.ndarray, np.ndarray]
    window_coverage: float
    touching_steps: int


def _site_series(traj: Trajectory, theta_i: float, window: Window = None) -> np.ndarray:
    i = traj.grid.site_index(theta_i)
    t = traj.times[1:]
    values = traj.u[1:, i]
    if window is not None:
        lo, hi = window
        values = values[(t > lo) & (t <= hi)]
    return values


def resolution_ok(traj: Trajectory, eps: float, c_dt: float = C_DT) -> bool:
    ok = traj.snapshot_dt <= c_dt * eps ** 2
    if not ok:
        logger.warning(f'passo {traj.snapshot_dt:.2e} grosso para a banda eps={eps} (limite {c_dt * eps ** 2:.2e})')
    return ok


def occupation_band(traj: Trajectory, theta_i: float, a: float, eps: float,
                    window: Window = None) -> OccupationEstimate:
    """(1/ε)·Σ_n 1_{[a,a+ε)}(u(t_n,θ))·dt."""
    if a < 0:
        raise ValueError('a deve ser não negativo')
    if not eps > 0:
        raise ValueError('eps deve ser positivo')
    values = _site_series(traj, theta_i, window)
    inside = int(np.count_nonzero((values >= a) & (values < a + eps)))
    return OccupationEstimate(theta_i, a, eps, inside * traj.snapshot_dt / eps, inside,
                              resolution_ok(traj, eps))


def renormalized_local_time(traj: Trajectory, theta_i: float, eps: float,
                            window: Window = None) -> RenormalizedEstimate:
    """(3/ε³)·tempo de ocupação de [0,ε); l = 4·densidade de η."""
    occ = occupation_band(traj, theta_i, 0.0, eps, window)
    occupation = occ.value * eps
    return RenormalizedEstimate(theta_i, eps, 3 * occupation / eps ** 3, occupation, occ.resolution_ok)


def eta_density_check(traj: Trajectory, theta_i: float, eps: float) -> EtaDensityCheck:
    eta = float(traj.ledger.final()[traj.grid.site_index(theta_i)])
    ren = renormalized_local_time(traj, theta_i, eps).value
    if eta < RATIO_FLOOR and ren < RATIO_FLOOR:
        return EtaDensityCheck(theta_i, eps, eta, ren, float('nan'), True)
    ratio = eta / (0.25 * ren) if ren > 0 else float('inf')
    return EtaDensityCheck(theta_i, eps, eta, ren, ratio, False)


def small_level_rescale(traj: Trajectory, theta_i: float, a: float, band_eps: float,
                        window: Window = None) -> float:
    """a⁻²·ocupação de banda em a; com a = 0 devolve (1/ε)·ocupação de [0,ε)."""
    if a < 0:
        raise ValueError('a deve ser não negativo')
    occ = occupation_band(traj, theta_i, a, band_eps, window).value
    if a == 0:
        return occ
    return occ / a ** 2


def occupation_formula_residual(traj: Trajectory, theta_i: float, F: Callable[[np.ndarray], np.ndarray],
                                level_grid: Iterable[float]) -> float:
    """|∫F(u)ds - Σ_a F(a)·l̂^a·Δa| / |∫F(u)ds|, com l̂^a a ocupação de [a, a+Δa)."""
    edges = np.asarray(list(level_grid), float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError('reticulado de níveis deve ser crescente com ao menos 2 pontos')
    values = _site_series(traj, theta_i)
    if values.size == 0:
        raise ValueError('faixa vazia: trajetória sem instantâneos')
    if values.min() < edges[0] or values.max() >= edges[-1]:
        raise ValueError('reticulado de níveis não cobre a faixa de u')
    dt = traj.snapshot_dt
    lhs = float(np.sum(F(values)) * dt)
    counts = np.bincount(np.searchsorted(edges, values, side='right') - 1, minlength=edges.size - 1)
    widths = np.diff(edges)
    local_time = counts[:edges.size - 1] * dt / widths
    rhs = float(np.sum(F(edges[:-1]) * local_time * widths))
    if lhs == 0:
        return abs(rhs)
    return abs(lhs - rhs) / abs(lhs)


def _side_distance(theta: np.ndarray, side: str) -> np.ndarray:
    if side == 'left':
        return theta
    if side == 'right':
        return 1 - theta
    raise ValueError(f'lado inválido: {side}')


def boundary_functional(traj: Trajectory, eps: float, a_cut: float = 0.5, side: str = 'left') -> float:
    """√ε·Σ_i (1∧d_i/ε)·η_i(T)·h sobre d_i < a_cut, d_i a distância à fronteira."""
    grid = traj.grid
    if not 0 < eps < a_cut < 1:
        raise ValueError('exige 0 < eps < a_cut < 1')
    if eps < 2 * grid.h:
        raise ValueError(f'eps={eps} abaixo da resolução da malha (2h={2 * grid.h:.4g})')
    d = _side_distance(grid.theta, side)
    mask = d < a_cut
    weight = np.minimum(1.0, d[mask] / eps)
    return float(np.sqrt(eps) * np.sum(weight * traj.ledger.final()[mask]) * grid.h)


def boundary_value_functional(traj: Trajectory, eps: float, side: str = 'left') -> float:
    """(1/(2√ε))·∫₀ᵀ u(s, ε)ds no sítio a distância ε da fronteira."""
    if side not in ('left', 'right'):
        raise ValueError(f'lado inválido: {side}')
    theta = eps if side == 'left' else 1 - eps
    values = _site_series(traj, theta)
    return float(values.sum() * traj.snapshot_dt / (2 * np.sqrt(eps)))


def boundary_gap(traj: Trajectory, eps: float) -> float:
    """Diferença entre o funcional de valor e o funcional de η perto de θ=0."""
    return boundary_value_functional(traj, eps) - boundary_functional(traj, eps)


def total_mass_profile(traj: Trajectory, deltas: Iterable[float] = DEFAULT_DELTAS) -> Dict[float, float]:
    """η([0,T] × [δ,1-δ]) para cada δ; cresce sem limite quando δ↓0."""
    return {float(d): traj.ledger.interval_mass(d, 1 - d) for d in deltas}


def _clusters(sites: np.ndarray) -> int:
    if sites.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(sites) > CLUSTER_GAP))


def check_decomposition(traj: Trajectory, tol_zero: float = 1e-10) -> DecompositionStats:
    """Para cada passo com incremento de η: máximo de u no suporte e aglomerados de sítios."""
    if traj.snapshot_every != 1:
        raise ValueError('decomposição exige instantâneos em todos os passos')
    incr = traj.ledger.increments()
    steps = np.flatnonzero(np.any(incr > 0, axis=1))
    max_u = 0.0
    counts: List[int] = []
    for n in steps:
        support = np.flatnonzero(incr[n] > 0)
        max_u = max(max_u, float(traj.u[n + 1, support].max()))
        counts.append(_clusters(support))
    if max_u > tol_zero:
        logger.warning(f'u = {max_u:.3e} no suporte de η acima de {tol_zero:.1e}')
    hist: Dict[int, int] = {}
    for c in counts:
        hist[c] = hist.get(c, 0) + 1
    single = hist.get(1, 0) / len(counts) if counts else 0.0
    return DecompositionStats(
        steps_with_mass=int(steps.size), max_u_on_support=max_u,
        zero_cluster_count=int(sum(counts)), single_cluster_fraction=single, cluster_histogram=hist,
    )


def zero_set_stats(traj: Trajectory, tol: float, window: float = 0.1, bins: int = 10) -> ZeroSetStats:
    """Fração de passos com min_i u ≤ tol, histograma dos intervalos entre toques e cobertura por janelas."""
    if not tol > 0:
        raise ValueError('tol deve ser positivo')
    t = traj.times[1:]
    touching = traj.u[1:].min(axis=1) <= tol
    fraction = float(touching.mean()) if touching.size else 0.0
    touch_times = t[touching]
    gaps = np.diff(touch_times)
    hist = np.histogram(gaps, bins=bins) if gaps.size else (np.zeros(bins, int), np.zeros(bins + 1))
    n_windows = max(1, int(round(traj.grid.T / window)))
    slots = np.unique(np.minimum((touch_times / window - 1e-12).astype(int), n_windows - 1))
    coverage = slots.size / n_windows
    return ZeroSetStats(tol, fraction, hist, float(coverage), int(touching.sum()))
