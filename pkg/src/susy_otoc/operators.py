"""Position and momentum matrices on the tensor basis.

Matrices are assembled element by element from the bosonic data of a
:class:`~susy_otoc.models.SpectralModel` and the exact two-level fermion:

    X[(n_B,n_F),(k_B,k_F)] = x_B[n_B,k_B] [n_F == k_F] + [n_B == k_B] x_F[n_F,k_F]

with ``x_F[0,1] = x_F[1,0] = 1/sqrt(2 omega_F)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import SpectralModel


@dataclass(frozen=True)
class OperatorContent:
    """Which displacement terms enter ``x`` and ``p``.

    ``momentum_substitution_factor`` is the coefficient phi in
    ``p_km = i * phi * x_km * (E_k - E_m)``; phi = 1 is the exact
    eigenbasis identity ``p = i[H, x]``.
    """

    include_bosonic_displacement: bool = True
    include_fermionic_displacement: bool = True
    momentum_substitution_factor: float = 1.0

    def __post_init__(self):
        if not (self.include_bosonic_displacement or self.include_fermionic_displacement):
            raise ValueError("at least one displacement term must be included")
        f = self.momentum_substitution_factor
        if not (math.isfinite(f) and f > 0):
            raise ValueError(f"momentum_substitution_factor must be positive, got {f!r}")

    @classmethod
    def full(cls, factor: float = 1.0) -> "OperatorContent":
        return cls(True, True, factor)

    @classmethod
    def bosonic_only(cls, factor: float = 1.0) -> "OperatorContent":
        return cls(True, False, factor)

    @classmethod
    def from_mode(cls, mode: str, factor: float = 1.0) -> "OperatorContent":
        modes = {"full": cls.full, "bosonic-only": cls.bosonic_only}
        if mode not in modes:
            raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(modes)}")
        return modes[mode](factor)

    @property
    def mode(self) -> str:
        if self.include_bosonic_displacement and self.include_fermionic_displacement:
            return "full"
        if self.include_bosonic_displacement:
            return "bosonic-only"
        return "fermionic-only"


def _labels(model: SpectralModel):
    idx = np.arange(model.dimension)
    return idx // 2, idx % 2


def _check_square(m: np.ndarray, model: SpectralModel) -> None:
    d = model.dimension
    if m.shape != (d, d):
        raise ValueError(f"matrix has shape {m.shape}, basis dimension is {d}")


def fermion_position(omega_F: float) -> np.ndarray:
    s = 1.0 / math.sqrt(2.0 * omega_F)
    return np.array([[0.0, s], [s, 0.0]], dtype=complex)


def fermion_momentum(omega_F: float) -> np.ndarray:
    # p_F[k, m] = i sqrt(omega_F/2) ([k = m+1, m = 0] - [k = m-1, m = 1])
    s = 1j * math.sqrt(omega_F / 2.0)
    return np.array([[0.0, -s], [s, 0.0]], dtype=complex)


def bosonic_momentum(model: SpectralModel) -> np.ndarray:
    """Bosonic momentum block in the model eigenbasis.

    The analytic oscillator uses the ladder form
    ``p_B[k, m] = i sqrt(omega/2) (sqrt(m+1) [k = m+1] - sqrt(m) [k = m-1])``;
    all other models use ``p_B[n, k] = i (E_n - E_k) x_B[n, k]``.
    """
    if model.provenance == "analytic":
        omega = model.meta.get("omega", model.omega_F)
        nb = model.basis.n_bosonic
        p = np.zeros((nb, nb), dtype=complex)
        m = np.arange(nb - 1)
        p[m + 1, m] = 1j * math.sqrt(omega / 2.0) * np.sqrt(m + 1)
        p[m, m + 1] = -1j * math.sqrt(omega / 2.0) * np.sqrt(m + 1)
        return p
    e = model.energy_B
    return 1j * (e[:, None] - e[None, :]) * model.x_B


def _assemble(model: SpectralModel, content: OperatorContent,
              boson: np.ndarray, fermion: np.ndarray) -> np.ndarray:
    nB, nF = _labels(model)
    same_F = nF[:, None] == nF[None, :]
    same_B = nB[:, None] == nB[None, :]
    out = np.zeros((model.dimension, model.dimension), dtype=complex)
    if content.include_bosonic_displacement:
        out += boson[nB[:, None], nB[None, :]] * same_F
    if content.include_fermionic_displacement:
        out += same_B * fermion[nF[:, None], nF[None, :]]
    return out


def position_matrix(model: SpectralModel, content: OperatorContent) -> np.ndarray:
    return _assemble(model, content, model.x_B, fermion_position(model.omega_F))


def momentum_matrix_direct(model: SpectralModel, content: OperatorContent) -> np.ndarray:
    return _assemble(model, content, bosonic_momentum(model), fermion_momentum(model.omega_F))


def momentum_matrix_from_energy(x: np.ndarray, model: SpectralModel, factor: float = 1.0) -> np.ndarray:
    """``P[n, m] = i * factor * x[n, m] * (E_n - E_m)`` on the tensor basis."""
    if not (math.isfinite(factor) and factor > 0):
        raise ValueError(f"factor must be positive, got {factor!r}")
    x = np.asarray(x)
    _check_square(x, model)
    e = model.total_energies()
    return 1j * factor * x * (e[:, None] - e[None, :])


def phase_dress(m: np.ndarray, model: SpectralModel, t: float) -> np.ndarray:
    """Heisenberg evolution in the energy eigenbasis: ``M[n, k] e^{i (E_n - E_k) t}``."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    m = np.asarray(m)
    _check_square(m, model)
    e = model.total_energies()
    return m * np.exp(1j * t * (e[:, None] - e[None, :]))
