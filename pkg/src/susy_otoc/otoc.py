"""Eigenstate-sum OTOC pipeline.

The engine reports the normalised commutator power

    C = < (-i [x(t1), p(t2)])^N >

either in a single basis state (microcanonical) or Boltzmann averaged
(thermal). ``N = 2`` is the usual four-point function ``-<[x, p]^2>``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .basis import SusyState, interior_cutoff
from .models import SpectralModel
from .operators import (OperatorContent, momentum_matrix_from_energy, phase_dress,
                        position_matrix)

METHODS = ("eigensum", "oracle")
MICROCANONICAL = "microcanonical"
DEFAULT_TAIL_EPSILON = 1e-12

_MINUS_I_POWERS = (1.0 + 0j, -1j, -1.0 + 0j, 1j)


class TruncationError(ValueError):
    """A requested quantity lies in the truncation buffer zone."""


class ConvergenceWarning(RuntimeWarning):
    """The truncated Boltzmann sum has a non-negligible tail."""


@dataclass(frozen=True)
class PowerConvention:
    """How reported values relate to the raw ``<[x(t1), p(t2)]^N>``."""

    description: str = "reported value is <(-i[x(t1),p(t2)])^N>"

    @staticmethod
    def prefactor(order_N: int) -> complex:
        return _MINUS_I_POWERS[order_N % 4]

    def normalize(self, raw: complex, order_N: int) -> complex:
        return self.prefactor(order_N) * raw

    def raw(self, value: complex, order_N: int) -> complex:
        """Undo :meth:`normalize`: multiply by ``i^N``."""
        return _MINUS_I_POWERS[(-order_N) % 4] * value


def normalized_commutator_power_sign() -> PowerConvention:
    return PowerConvention()


@dataclass(frozen=True)
class OtocRequest:
    order_N: int
    betas: Sequence[float]
    time_pairs: Sequence[tuple[float, float]]
    content: OperatorContent = field(default_factory=OperatorContent.bosonic_only)
    method: str = "eigensum"
    tail_epsilon: float = DEFAULT_TAIL_EPSILON

    def __post_init__(self):
        if int(self.order_N) != self.order_N or self.order_N < 1:
            raise ValueError(f"order_N must be an integer >= 1, got {self.order_N!r}")
        betas = tuple(float(b) for b in self.betas)
        if any(not (math.isfinite(b) and b > 0) for b in betas):
            raise ValueError(f"betas must be positive and finite, got {betas}")
        pairs = tuple((float(a), float(b)) for a, b in self.time_pairs)
        if any(not (math.isfinite(a) and math.isfinite(b)) for a, b in pairs):
            raise ValueError("time pairs must be finite")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "order_N", int(self.order_N))
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "time_pairs", pairs)


@dataclass(frozen=True)
class OtocResult:
    t1: float
    t2: float
    beta: Union[float, str]
    order_N: int
    value: complex
    method: str
    mode: str
    state: Optional[SusyState] = None
    # Boltzmann weight of the excluded buffer zone, relative to the full Z.
    truncation_weight: Optional[float] = None


def commutator_matrix(model: SpectralModel, content: OperatorContent,
                      t1: float, t2: float) -> np.ndarray:
    """Matrix ``d[n, m] = <n| [x(t1), p(t2)] |m>``; anti-Hermitian."""
    x = position_matrix(model, content)
    p = momentum_matrix_from_energy(x, model, content.momentum_substitution_factor)
    xt = phase_dress(x, model, t1)
    pt = phase_dress(p, model, t2)
    return xt @ pt - pt @ xt


def b_matrix(model: SpectralModel, content: OperatorContent, t1: float, t2: float) -> np.ndarray:
    """Hermitian ``b = -i d``."""
    return -1j * commutator_matrix(model, content, t1, t2)


def _interior_indices(model: SpectralModel, order_N: int) -> np.ndarray:
    cut = interior_cutoff(model.n_max, order_N)
    if cut < 0:
        raise TruncationError(
            f"n_max={model.n_max} leaves no interior states for N={order_N}; "
            f"need n_max >= {order_N + 2}")
    return np.arange(2 * (cut + 1))


def _chain_diagonal(b: np.ndarray, rows: np.ndarray, order_N: int) -> np.ndarray:
    # sum over k_1..k_{N-1} of b[n,k_1] b[k_1,k_2] ... b[k_{N-1},n], for each n in rows
    acc = b[rows, :]
    for _ in range(order_N - 1):
        acc = acc @ b
    return acc[np.arange(rows.size), rows]


def microcanonical_otoc(model: SpectralModel, content: OperatorContent, n: SusyState,
                        order_N: int, t1: float, t2: float) -> complex:
    """State-resolved ``<n| (-i[x(t1), p(t2)])^N |n>``."""
    n = SusyState(*n)
    if order_N < 1:
        raise ValueError(f"order_N must be >= 1, got {order_N}")
    i = model.basis.index_of(n)
    cut = interior_cutoff(model.n_max, order_N)
    if n.n_B > cut:
        raise TruncationError(
            f"state {n} is within the truncation buffer for N={order_N} "
            f"(interior needs n_B <= {cut}); increase n_max to at least {n.n_B + order_N + 2}")
    b = b_matrix(model, content, t1, t2)
    return complex(_chain_diagonal(b, np.array([i]), order_N)[0])


def microcanonical_values(model: SpectralModel, content: OperatorContent, order_N: int,
                          t1: float, t2: float) -> np.ndarray:
    """Microcanonical values for every interior state, in flat-index order."""
    rows = _interior_indices(model, order_N)
    return _chain_diagonal(b_matrix(model, content, t1, t2), rows, order_N)


def _tail_check(weights: np.ndarray, z: float, tail_epsilon: float, beta: float) -> None:
    if weights[-1] > tail_epsilon * z:
        warnings.warn(
            f"beta={beta}: last Boltzmann weight is {weights[-1] / z:.3g} of Z "
            f"(tolerance {tail_epsilon:g}); spectrum truncation is not converged",
            ConvergenceWarning, stacklevel=3)


def boltzmann_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-beta (E - E_min))``, unnormalised."""
    energies = np.asarray(energies, dtype=float)
    return np.exp(-beta * (energies - energies.min()))


def partition_function(model: SpectralModel, beta: float,
                       tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> float:
    """``Z = sum_n exp(-beta E_n)`` over all ``2 (n_max + 1)`` states."""
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive, got {beta!r}")
    e = model.total_energies()
    w = boltzmann_weights(e, beta)
    z_rel = float(np.sum(w))
    _tail_check(w, z_rel, tail_epsilon, beta)
    return z_rel * math.exp(-beta * float(e.min()))


def thermal_average(values: np.ndarray, model: SpectralModel, beta: float,
                    tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> tuple[complex, float]:
    """Boltzmann average of interior ``values`` and the excluded buffer weight.

    ``values`` holds one entry per interior state (flat-index order). The
    ensemble is restricted to those states; the second return value is the
    weight of the remaining buffer states relative to the full truncated Z.
    """
    w = boltzmann_weights(model.total_energies(), beta)
    z = float(np.sum(w))
    _tail_check(w, z, tail_epsilon, beta)
    k = values.size
    w_in = w[:k]
    z_in = float(np.sum(w_in))
    return complex(np.dot(w_in, values) / z_in), (z - z_in) / z


def thermal_otoc(model: SpectralModel, request: OtocRequest) -> list[OtocResult]:
    """One record per (beta, t1, t2), beta-major then in time-pair order."""
    content = request.content
    if request.method == "oracle":
        from .oracle import oracle_thermal_values
        per_pair = [oracle_thermal_values(model, content, request.order_N, t1, t2, request.betas)
                    for t1, t2 in request.time_pairs]
    else:
        per_pair = []
        for t1, t2 in request.time_pairs:
            c = microcanonical_values(model, content, request.order_N, t1, t2)
            per_pair.append([thermal_average(c, model, beta, request.tail_epsilon)
                             for beta in request.betas])
    out = []
    for j, beta in enumerate(request.betas):
        for (t1, t2), vals in zip(request.time_pairs, per_pair):
            value, buffer_weight = vals[j]
            out.append(OtocResult(t1, t2, beta, request.order_N, value, request.method,
                                  content.mode, None, buffer_weight))
    return out


def microcanonical_sweep(model: SpectralModel, request: OtocRequest,
                         states: Sequence[SusyState]) -> list[OtocResult]:
    """State-resolved records, state-major then in time-pair order."""
    content = request.content
    states = [SusyState(*s) for s in states]
    cut = interior_cutoff(model.n_max, request.order_N)
    for s in states:
        model.basis.index_of(s)
        if s.n_B > cut:
            raise TruncationError(
                f"state {s} is within the truncation buffer for N={request.order_N} "
                f"(interior needs n_B <= {cut})")
    if request.method == "oracle":
        from .oracle import oracle_state_values
        table = [oracle_state_values(model, content, request.order_N, t1, t2, states)
                 for t1, t2 in request.time_pairs]
    else:
        rows = np.array([model.basis.index_of(s) for s in states])
        table = [_chain_diagonal(b_matrix(model, content, t1, t2), rows, request.order_N)
                 for t1, t2 in request.time_pairs]
    out = []
    for i, s in enumerate(states):
        for (t1, t2), vals in zip(request.time_pairs, table):
            out.append(OtocResult(t1, t2, MICROCANONICAL, request.order_N, complex(vals[i]),
                                  request.method, content.mode, s, None))
    return out
