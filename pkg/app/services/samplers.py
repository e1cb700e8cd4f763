"""Geração reprodutível dos objetos gaussianos do laboratório.

Cada operação lê o fluxo (seed, stream_id) desde o início: duas chamadas com o
mesmo RngStream consomem exatamente os mesmos números. É assim que a
convolução estocástica e a solução refletida compartilham o mesmo ruído.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.services.grid import ScalarField, SpaceTimeGrid, VectorField3
from app.services.heat_kernels import PI2, KernelParams
from app.services.tridiagonal import solve_constant

logger = logging.getLogger(__name__)

MAX_UINT64 = 2 ** 64
CONVOLUTION_SCHEMES = ('spectral', 'implicit')
# subchave do fluxo filho com o resíduo condicional dos modos
RESIDUAL_KEY = 7


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    subkeys: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for nome, valor in (('seed', self.seed), ('stream_id', self.stream_id)):
            if not 0 <= int(valor) < MAX_UINT64:
                raise ValueError(f'{nome} deve ser um inteiro de 64 bits sem sinal')

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed),
                                     spawn_key=(int(self.stream_id),) + tuple(self.subkeys))
        return np.random.Generator(np.random.PCG64(seq))

    def spawn(self, *keys: int) -> 'RngStream':
        return RngStream(self.seed, self.stream_id, tuple(self.subkeys) + tuple(int(k) for k in keys))

    def provenance(self) -> dict:
        return {'seed': int(self.seed), 'stream_id': int(self.stream_id), 'subkeys': list(self.subkeys)}


def _batch_shape(n_draws: Optional[int]) -> tuple:
    if n_draws is None:
        return ()
    if n_draws < 1:
        raise ValueError('n_draws deve ser >= 1')
    return (int(n_draws),)


def sample_brownian_bridge_3d(grid: SpaceTimeGrid, rng: RngStream,
                              n_draws: Optional[int] = None) -> VectorField3:
    """Ponte browniana em ℝ³ condicionando um passeio gaussiano; exata nos sítios."""
    gen = rng.generator()
    inc = gen.standard_normal(_batch_shape(n_draws) + (grid.N + 1, 3)) * np.sqrt(grid.h)
    walk = np.cumsum(inc, axis=-2)
    theta = grid.theta[:, None]
    bridge = walk[..., :-1, :] - theta * walk[..., -1:, :]
    return VectorField3(grid, bridge)


def sample_bessel3_bridge(grid: SpaceTimeGrid, rng: RngStream,
                          n_draws: Optional[int] = None) -> ScalarField:
    """Ponte de Bessel de dimensão 3: módulo sítio a sítio da ponte em ℝ³."""
    return sample_brownian_bridge_3d(grid, rng, n_draws).norm()


def sample_white_noise_increment(grid: SpaceTimeGrid, dt: float, rng: RngStream,
                                 components: int = 1, n_steps: Optional[int] = None):
    """Médias de célula do ruído branco: N(0, 1/(h·dt)) independentes por célula."""
    if not dt > 0:
        raise ValueError('dt deve ser positivo')
    if components not in (1, 3):
        raise ValueError('components deve ser 1 ou 3')
    shape = _batch_shape(n_steps) + (grid.N,) + ((3,) if components == 3 else ())
    values = rng.generator().standard_normal(shape) / np.sqrt(grid.h * dt)
    return VectorField3(grid, values) if components == 3 else ScalarField(grid, values)


def _mode_basis(grid: SpaceTimeGrid, n_modes: int) -> np.ndarray:
    k = np.arange(1, n_modes + 1)
    return np.sqrt(2.0) * np.sin(np.multiply.outer(k * np.pi, grid.theta))


def string_transition(xbar: VectorField3, t: float, rng: RngStream,
                      params: Optional[KernelParams] = None,
                      n_draws: Optional[int] = None, n_modes: Optional[int] = None) -> VectorField3:
    """Transição exata da corda aleatória em ℝ³: N(e^{tA}x̄, Q_t) nas coordenadas de seno.

    A média usa os N coeficientes discretos de x̄; o ruído usa n_modes modos
    (padrão: params.truncation_K, ou N sem params) com variância
    (1-e^{-k²π²t})/(k²π²) por modo e componente.
    """
    if not t > 0:
        raise ValueError('t deve ser positivo')
    grid = xbar.grid
    K = int(n_modes or (params.truncation_K if params is not None else grid.N))
    k = np.arange(1, grid.N + 1)
    mean = xbar.from_coefficients(xbar.sine_coefficients() * np.exp(-k ** 2 * PI2 * t / 2)[:, None])
    kk = np.arange(1, K + 1)
    std = np.sqrt(-np.expm1(-kk ** 2 * PI2 * t) / (kk ** 2 * PI2))
    batch = _batch_shape(n_draws) if n_draws is not None else xbar.values.shape[:-2]
    xi = rng.generator().standard_normal(tuple(batch) + (3, K))
    noise = np.swapaxes((xi * std) @ _mode_basis(grid, K), -1, -2)
    return VectorField3(grid, mean.values + noise)


@dataclass
class ConvolutionPath:
    """w(t_n,·) nos instantes `times`; values tem shape (n_snap, [n_paths,] N)."""

    grid: SpaceTimeGrid
    times: np.ndarray
    values: np.ndarray
    scheme: str
    provenance: dict

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, n: int) -> ScalarField:
        return ScalarField(self.grid, self.values[n])

    def fields(self) -> List[ScalarField]:
        return [self[n] for n in range(len(self))]


def implicit_operator(grid: SpaceTimeGrid, dt: float) -> Tuple[float, float]:
    """Diagonal e fora-da-diagonal de M = I - (dt/2)·D₂."""
    r = dt / grid.h ** 2
    return 1.0 + r, -0.5 * r


def stochastic_convolution_path(grid: SpaceTimeGrid, dt: float, n_steps: int, rng: RngStream,
                                params: Optional[KernelParams] = None, scheme: str = 'spectral',
                                n_paths: Optional[int] = None, snapshot_every: int = 1) -> ConvolutionPath:
    """Convolução estocástica w com w(0)=0, dirigida pelo ruído de célula do fluxo `rng`.

    'spectral': OU exato por modo; o incremento Δβ_k é a projeção do ruído de
    célula e o resto da integral estocástica vem de um fluxo filho.
    'implicit': o mesmo operador implícito do solver refletido, sem reflexão.
    No esquema espectral só os min(params.truncation_K, N) primeiros modos são
    avançados; os demais ficam em zero.
    """
    if not dt > 0 or n_steps < 1:
        raise ValueError('dt deve ser positivo e n_steps >= 1')
    if scheme not in CONVOLUTION_SCHEMES:
        raise ValueError(f'esquema de convolução inválido: {scheme}')
    if snapshot_every < 1:
        raise ValueError('snapshot_every deve ser >= 1')
    batch = _batch_shape(n_paths)
    gen = rng.generator()
    N, h = grid.N, grid.h
    w = np.zeros(batch + (N,))
    snaps = [w.copy()]
    times = [0.0]
    if scheme == 'spectral':
        res_gen = rng.spawn(RESIDUAL_KEY).generator()
        k = np.arange(1, N + 1)
        lam = k ** 2 * PI2 / 2
        active = k <= (min(params.truncation_K, N) if params is not None else N)
        decay = np.exp(-lam * dt)
        gain = -np.expm1(-lam * dt) / (lam * dt)
        var_total = -np.expm1(-2 * lam * dt) / (2 * lam)
        res_std = np.sqrt(np.maximum(var_total - gain ** 2 * dt, 0.0))
        field = ScalarField(grid, w)
        coefs = np.zeros(batch + (N,))
        for n in range(1, n_steps + 1):
            z = gen.standard_normal(batch + (N,))
            dbeta = ScalarField(grid, z).sine_coefficients() * np.sqrt(dt / h)
            coefs = decay * coefs + gain * dbeta + res_std * res_gen.standard_normal(batch + (N,))
            coefs = np.where(active, coefs, 0.0)
            if n % snapshot_every == 0:
                snaps.append(field.from_coefficients(coefs).values)
                times.append(n * dt)
    else:
        diag, off = implicit_operator(grid, dt)
        scale = np.sqrt(dt / h)
        flat = w.reshape(-1, N)
        for n in range(1, n_steps + 1):
            z = gen.standard_normal(batch + (N,)).reshape(-1, N)
            for j in range(flat.shape[0]):
                flat[j] = solve_constant(diag, off, flat[j] + scale * z[j])
            if n % snapshot_every == 0:
                snaps.append(flat.reshape(batch + (N,)).copy())
                times.append(n * dt)
    logger.debug(f'convolução {scheme}: {n_steps} passos, N={N}')
    return ConvolutionPath(grid, np.asarray(times), np.asarray(snaps), scheme, rng.provenance())
