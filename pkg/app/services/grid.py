"""Malha espaço-tempo e campos discretos em [0,1] com fronteira de Dirichlet."""

from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np
from scipy.fft import dst, idst

SITE_TOL = 1e-9


@dataclass(frozen=True)
class SpaceTimeGrid:
    """N sítios interiores com espaçamento h = 1/(N+1), passo dt e horizonte T."""

    N: int
    dt: float
    T: float

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 1:
            raise ValueError('N deve ser um inteiro >= 1')
        if not self.dt > 0:
            raise ValueError('dt deve ser positivo')
        if self.T < self.dt * (1 - 1e-12):
            raise ValueError('T deve ser >= dt')

    @property
    def h(self) -> float:
        return 1.0 / (self.N + 1)

    @property
    def theta(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.h

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def site_index(self, theta: float) -> int:
        """Índice (base 0) do sítio em theta; theta precisa ser um nó da malha."""
        pos = theta / self.h
        i = int(round(pos))
        if abs(pos - i) > SITE_TOL * (self.N + 1) or not 1 <= i <= self.N:
            raise ValueError(f'theta={theta} não é um sítio interior da malha N={self.N}')
        return i - 1

    def refine(self) -> 'SpaceTimeGrid':
        """Metade de h e um quarto de dt (razão dt/h² preservada)."""
        return SpaceTimeGrid(N=2 * self.N + 1, dt=self.dt / 4, T=self.T)

    def to_dict(self) -> Dict[str, Any]:
        return {'N': self.N, 'h': self.h, 'dt': self.dt, 'T': self.T, 'n_steps': self.n_steps}


class _GridField:
    # eixo dos sítios, contado a partir do fim
    site_axis = -1

    def __init__(self, grid: SpaceTimeGrid, values: Any) -> None:
        values = np.asarray(values, dtype=float)
        if values.ndim < -self.site_axis or values.shape[self.site_axis] != grid.N:
            raise ValueError(f'valores incompatíveis com a malha N={grid.N}: shape {values.shape}')
        self.grid = grid
        self.values = values

    def with_values(self, values: np.ndarray):
        return type(self)(self.grid, values)

    def sine_coefficients(self) -> np.ndarray:
        """Coeficientes c_k na base √2·sin(kπθ), k = 1..N (DST-I ortonormal)."""
        return dst(self.values, type=1, norm='ortho', axis=self.site_axis) * np.sqrt(self.grid.h)

    def from_coefficients(self, coefs: np.ndarray):
        values = idst(coefs / np.sqrt(self.grid.h), type=1, norm='ortho', axis=self.site_axis)
        return self.with_values(values)

    def evaluate_at(self, theta: Union[float, np.ndarray]) -> np.ndarray:
        """Avalia o polinômio trigonométrico interpolante fora da malha."""
        k = np.arange(1, self.grid.N + 1)
        basis = np.sqrt(2.0) * np.sin(np.multiply.outer(np.atleast_1d(theta), k * np.pi))
        coefs = np.moveaxis(self.sine_coefficients(), self.site_axis, -1)
        out = np.moveaxis(coefs @ basis.T, -1, self.site_axis)
        return out if np.ndim(theta) else np.take(out, 0, axis=self.site_axis)

    def padded(self) -> np.ndarray:
        """Valores com as fronteiras θ=0 e θ=1 (nulas) incluídas."""
        pad = [(0, 0)] * self.values.ndim
        pad[self.site_axis] = (1, 1)
        return np.pad(self.values, pad)

    def __repr__(self) -> str:
        return f'{type(self).__name__}(N={self.grid.N}, shape={self.values.shape})'


class ScalarField(_GridField):
    """Campo escalar nos sítios; shape (..., N), eixos anteriores são lotes."""

    site_axis = -1

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= -tol))


class VectorField3(_GridField):
    """Campo em ℝ³ nos sítios; shape (..., N, 3)."""

    site_axis = -2

    def __init__(self, grid: SpaceTimeGrid, values: Any) -> None:
        super().__init__(grid, values)
        if self.values.shape[-1] != 3:
            raise ValueError('VectorField3 exige última dimensão 3')

    def norm(self) -> ScalarField:
        return ScalarField(self.grid, np.linalg.norm(self.values, axis=-1))

    def rotate(self, rotation: np.ndarray) -> 'VectorField3':
        return self.with_values(self.values @ np.asarray(rotation).T)


def second_difference(values: np.ndarray, h: float) -> np.ndarray:
    """D₂ com fronteiras nulas, aplicado no último eixo."""
    pad = [(0, 0)] * (values.ndim - 1) + [(1, 1)]
    p = np.pad(values, pad)
    return (p[..., 2:] - 2.0 * p[..., 1:-1] + p[..., :-2]) / h ** 2
