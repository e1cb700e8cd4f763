"""Conversão de trajetórias e amostras em tabelas longas para CSV.

Campos escalares saem como t,theta,value; campos em ℝ³ como t,theta,v1,v2,v3.
Com mais de uma amostra acrescenta-se a coluna draw no fim. A solução
refletida gera também o registro t,theta,eta_density.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from app.services.grid import ScalarField, SpaceTimeGrid
from app.services.reflected_spde import solve_reflected
from app.services.samplers import (RngStream, sample_bessel3_bridge, sample_brownian_bridge_3d,
                                   stochastic_convolution_path, string_transition)

FLOAT_FORMAT = '%.12g'
PROCESSOS = ('bridge3', 'bessel3', 'string', 'convolution', 'reflected')
INICIAIS = ('nu', 'bessel3', 'zero', 'file')
MAX_LINHAS = 2_000_000
THETA_TOL = 1e-9


@dataclass
class Simulacao:
    frame: pd.DataFrame
    ledger: Optional[pd.DataFrame] = None


def campo_frame(times, theta, values, coluna: str = 'value') -> pd.DataFrame:
    """Tabela longa t, theta, valor para values de shape (n_t, N)."""
    values = np.asarray(values, float)
    tt, th = np.meshgrid(np.asarray(times, float), np.asarray(theta, float), indexing='ij')
    return pd.DataFrame({'t': tt.ravel(), 'theta': th.ravel(), coluna: values.ravel()})


def amostras_frame(t: float, theta, values, vetorial: bool = False) -> pd.DataFrame:
    """Amostras num único instante t; values de shape ([n,] N) ou ([n,] N, 3) se vetorial."""
    theta = np.asarray(theta, float)
    values = np.asarray(values, float)
    lote = values.ndim > (2 if vetorial else 1)
    values = values.reshape((-1, theta.size) + ((3,) if vetorial else ()))
    n = values.shape[0]
    frame = pd.DataFrame({'t': np.full(n * theta.size, float(t)), 'theta': np.tile(theta, n)})
    if vetorial:
        for c in range(3):
            frame[f'v{c + 1}'] = values[..., c].ravel()
    else:
        frame['value'] = values.ravel()
    if lote:
        frame['draw'] = np.repeat(np.arange(n), theta.size)
    return frame


def registro_frame(traj) -> pd.DataFrame:
    """Densidade acumulada η_i(t) de cada instantâneo."""
    return campo_frame(traj.ledger.times, traj.grid.theta, traj.ledger.values, coluna='eta_density')


def ler_x0(caminho, grid: SpaceTimeGrid) -> ScalarField:
    """Lê x₀ de um CSV com coluna value (e, opcionalmente, theta) nos N sítios da malha."""
    try:
        tabela = pd.read_csv(caminho)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ValueError(f'não foi possível ler x0 de {caminho}: {e}')
    if 'value' not in tabela.columns:
        raise ValueError('CSV de x0 precisa da coluna value')
    if len(tabela) != grid.N:
        raise ValueError(f'CSV de x0 tem {len(tabela)} linhas; a malha tem N={grid.N} sítios')
    if 'theta' in tabela.columns and not np.allclose(tabela['theta'].to_numpy(float), grid.theta,
                                                     rtol=0.0, atol=THETA_TOL):
        raise ValueError('coluna theta do CSV de x0 não coincide com os sítios da malha')
    values = tabela['value'].to_numpy(float)
    if not np.all(np.isfinite(values)):
        raise ValueError('x0 contém valores não finitos')
    return ScalarField(grid, values)


def simular(processo: str, N: int, dt: float, T: float, seed: int, draws: int = 1,
            scheme: str = 'lcp', delta: Optional[float] = None, init: str = 'bessel3',
            snapshot_every: int = 1, conv_scheme: str = 'spectral', x0_path: Optional[str] = None) -> Simulacao:
    """Simula um processo e devolve a tabela de instantâneos (e o registro de η, se refletida)."""
    if processo not in PROCESSOS:
        raise ValueError(f'processo inválido: {processo} (opções: {", ".join(PROCESSOS)})')
    if draws < 1:
        raise ValueError('draws deve ser >= 1')
    if init not in INICIAIS:
        raise ValueError(f'condição inicial inválida: {init} (opções: {", ".join(INICIAIS)})')
    grid = SpaceTimeGrid(N, dt, T)
    linhas = grid.N * (draws if processo in ('bridge3', 'bessel3', 'string')
                       else grid.n_steps // max(snapshot_every, 1) + 1)
    if linhas > MAX_LINHAS:
        raise ValueError(f'saída com {linhas} linhas excede o limite de {MAX_LINHAS}')
    lote = draws if draws > 1 else None
    rng = RngStream(seed)
    if processo == 'bridge3':
        return Simulacao(amostras_frame(0.0, grid.theta, sample_brownian_bridge_3d(grid, rng, lote).values,
                                         vetorial=True))
    if processo == 'bessel3':
        return Simulacao(amostras_frame(0.0, grid.theta, sample_bessel3_bridge(grid, rng, lote).values))
    if processo == 'string':
        xbar = sample_brownian_bridge_3d(grid, rng.spawn(0), lote)
        return Simulacao(amostras_frame(T, grid.theta, string_transition(xbar, T, rng.spawn(1)).values,
                                         vetorial=True))
    if processo == 'convolution':
        path = stochastic_convolution_path(grid, dt, grid.n_steps, rng, scheme=conv_scheme,
                                           snapshot_every=snapshot_every)
        return Simulacao(campo_frame(path.times, grid.theta, path.values))

    if init == 'file':
        if not x0_path:
            raise ValueError('init=file exige o caminho do CSV de x0')
        x0 = ler_x0(x0_path, grid)
    elif init == 'zero':
        x0 = ScalarField(grid, np.zeros(grid.N))
    else:
        x0 = sample_bessel3_bridge(grid, rng.spawn(0))
    traj = solve_reflected(x0, grid, rng.spawn(1), scheme=scheme, delta=delta, snapshot_every=snapshot_every,
                           store_noise=False)
    return Simulacao(campo_frame(traj.times, grid.theta, traj.u), registro_frame(traj))


def caminho_registro(saida: Optional[str], padrao_dir: str) -> Path:
    """Registro ao lado da saída (<nome>_ledger.csv) ou no diretório padrão."""
    if saida:
        destino = Path(saida)
        return destino.with_name(f'{destino.stem}_ledger.csv')
    return Path(padrao_dir) / 'reflected_ledger.csv'


def para_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
