"""Truncated tensor-product basis for one boson and one two-level fermion.

States are labelled ``(n_B, n_F)`` and flattened as ``index = 2*n_B + n_F``,
so the fermionic label runs fastest and ``np.kron(bosonic, fermionic)``
produces matrices in the same ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple


class SusyState(NamedTuple):
    n_B: int
    n_F: int

    def __str__(self) -> str:
        return f"({self.n_B},{self.n_F})"


@dataclass(frozen=True)
class BasisMap:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a nonnegative integer, got {self.n_max!r}")

    @property
    def dimension(self) -> int:
        return 2 * (self.n_max + 1)

    @property
    def n_bosonic(self) -> int:
        return self.n_max + 1

    def contains(self, s: SusyState) -> bool:
        n_B, n_F = s
        return 0 <= n_B <= self.n_max and n_F in (0, 1)

    def index_of(self, s: SusyState) -> int:
        if not self.contains(s):
            raise ValueError(f"state {tuple(s)} is outside the basis with n_max={self.n_max}")
        return 2 * s[0] + s[1]

    def state_of(self, i: int) -> SusyState:
        if not 0 <= i < self.dimension:
            raise IndexError(f"index {i} out of range [0, {self.dimension})")
        return SusyState(i // 2, i % 2)

    def states(self) -> Iterator[SusyState]:
        for i in range(self.dimension):
            yield self.state_of(i)

    def __len__(self) -> int:
        return self.dimension


def build_basis(n_max: int) -> BasisMap:
    return BasisMap(n_max)


def index_of(basis: BasisMap, s: SusyState) -> int:
    return basis.index_of(SusyState(*s))


def state_of(basis: BasisMap, i: int) -> SusyState:
    return basis.state_of(i)


def interior_cutoff(n_max: int, order_N: int) -> int:
    """Largest bosonic level whose order-N commutator chain is edge-free.

    Each commutator application spreads at most one bosonic level, so the
    top ``order_N + 2`` levels form a buffer. Negative means no interior.
    """
    return n_max - order_N - 2


def is_interior(s: SusyState, n_max: int, order_N: int) -> bool:
    return 0 <= s[0] <= interior_cutoff(n_max, order_N)
