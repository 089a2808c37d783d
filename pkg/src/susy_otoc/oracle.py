"""Brute-force reference path.

Operators are built from explicit ladder matrices and Kronecker products,
evolved by conjugation with the diagonal propagator, and contracted with
``numpy.linalg.matrix_power`` and a density-matrix trace. Nothing here uses
the element formulas of :mod:`susy_otoc.operators`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .basis import SusyState, interior_cutoff
from .models import SpectralModel
from .operators import OperatorContent


@dataclass(frozen=True, eq=False)
class LadderSet:
    a: np.ndarray
    a_dag: np.ndarray
    c: np.ndarray
    c_dag: np.ndarray
    id_B: np.ndarray
    id_F: np.ndarray


def build_ladders(n_max: int) -> LadderSet:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    # c|1> = |0>
    c = np.array([[0, 1], [0, 0]], dtype=complex)
    return LadderSet(a, a.conj().T, c, c.conj().T,
                     np.eye(n_max + 1, dtype=complex), np.eye(2, dtype=complex))


def oracle_operators(ladders: LadderSet, content: OperatorContent, omega: float,
                     omega_F: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """x and p of the SUSY oscillator from ``(a +- a^dag)`` and ``(c +- c^dag)``."""
    omega_F = omega if omega_F is None else omega_F
    L = ladders
    dim = L.id_B.shape[0] * 2
    x = np.zeros((dim, dim), dtype=complex)
    p = np.zeros((dim, dim), dtype=complex)
    if content.include_bosonic_displacement:
        x += np.kron(L.a + L.a_dag, L.id_F) / np.sqrt(2 * omega)
        p += 1j * np.sqrt(omega / 2) * np.kron(L.a_dag - L.a, L.id_F)
    if content.include_fermionic_displacement:
        x += np.kron(L.id_B, L.c + L.c_dag) / np.sqrt(2 * omega_F)
        p += 1j * np.sqrt(omega_F / 2) * np.kron(L.id_B, L.c_dag - L.c)
    return x, p


def hamiltonian(model: SpectralModel) -> np.ndarray:
    return (np.kron(np.diag(model.energy_B), np.eye(2))
            + np.kron(np.eye(model.basis.n_bosonic), np.diag([0.0, model.omega_F])))


def model_operators(model: SpectralModel, content: OperatorContent) -> tuple[np.ndarray, np.ndarray]:
    """Oracle x and p for any model.

    The analytic oscillator goes through the ladder construction. Other
    models take ``x = x_B (x) 1 + 1 (x) x_F`` and ``p = i [H, x]``.
    """
    if model.provenance == "analytic":
        omega = model.meta.get("omega", model.omega_F)
        return oracle_operators(build_ladders(model.n_max), content, omega, model.omega_F)
    L = build_ladders(model.n_max)
    x = np.zeros((model.dimension, model.dimension), dtype=complex)
    if content.include_bosonic_displacement:
        x += np.kron(model.x_B, L.id_F)
    if content.include_fermionic_displacement:
        x += np.kron(L.id_B, L.c + L.c_dag) / np.sqrt(2 * model.omega_F)
    h = hamiltonian(model)
    return x, 1j * (h @ x - x @ h)


def _evolve(m: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    # e^{iHt} M e^{-iHt}; H is diagonal in this basis
    u = np.diag(np.exp(-1j * np.diag(h) * t))
    return u.conj().T @ m @ u


def commutator_power(model: SpectralModel, content: OperatorContent, order_N: int,
                     t1: float, t2: float) -> np.ndarray:
    """``(-i [x(t1), p(t2)])^N`` as a full matrix."""
    x, p = model_operators(model, content)
    h = hamiltonian(model)
    xt = _evolve(x, h, t1)
    pt = _evolve(p, h, t2)
    comm = -1j * (xt @ pt - pt @ xt)
    return np.linalg.matrix_power(comm, order_N)


def _interior_projector(model: SpectralModel, order_N: int) -> np.ndarray:
    cut = interior_cutoff(model.n_max, order_N)
    if cut < 0:
        raise ValueError(f"n_max={model.n_max} leaves no interior states for N={order_N}")
    keep_B = (np.arange(model.basis.n_bosonic) <= cut).astype(float)
    return np.kron(np.diag(keep_B), np.eye(2))


def oracle_thermal_values(model: SpectralModel, content: OperatorContent, order_N: int,
                          t1: float, t2: float, betas: Sequence[float]) -> list[tuple[complex, float]]:
    """Thermal values ``Tr(rho M)`` per beta, with rho restricted to interior states."""
    m = commutator_power(model, content, order_N, t1, t2)
    h = hamiltonian(model)
    proj = _interior_projector(model, order_N)
    out = []
    for beta in betas:
        e = np.diag(h)
        rho = np.diag(np.exp(-beta * (e - e.min())))
        z_all = np.trace(rho).real
        rho = proj @ rho
        z_in = np.trace(rho).real
        out.append((complex(np.trace(rho @ m) / z_in), float((z_all - z_in) / z_all)))
    return out


def oracle_state_values(model: SpectralModel, content: OperatorContent, order_N: int,
                        t1: float, t2: float, states: Sequence[SusyState]) -> list[complex]:
    m = commutator_power(model, content, order_N, t1, t2)
    out = []
    for s in states:
        vec = np.kron(np.eye(model.basis.n_bosonic)[s[0]], np.eye(2)[s[1]])
        out.append(complex(vec.conj() @ m @ vec))
    return out


def oracle_otoc(model: SpectralModel, content: OperatorContent, order_N: int, t1: float, t2: float,
                beta: Optional[float] = None, state: Optional[SusyState] = None) -> complex:
    """Literal ``<(-i[x(t1), p(t2)])^N>`` at one inverse temperature or in one state."""
    if (beta is None) == (state is None):
        raise ValueError("give exactly one of beta, state")
    if state is not None:
        if SusyState(*state).n_B > interior_cutoff(model.n_max, order_N):
            raise ValueError(f"state {tuple(state)} is in the truncation buffer for N={order_N}")
        return oracle_state_values(model, content, order_N, t1, t2, [state])[0]
    return oracle_thermal_values(model, content, order_N, t1, t2, [beta])[0][0]
