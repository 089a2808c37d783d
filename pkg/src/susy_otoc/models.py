"""Spectral models: bosonic spectrum, bosonic position matrix, fermion splitting.

Three providers produce a :class:`SpectralModel`:

* :func:`susy_ho_model` -- the analytic supersymmetric harmonic oscillator,
* :func:`grid_model` -- a finite-difference solve of ``-(1/2) d^2/dx^2 + V(x)``,
* :func:`load_model` -- a JSON model file (see :func:`save_model`).

Units are hbar = m = 1 throughout. Providers shift the bosonic ground state
to zero and put the fermionic levels at ``{0, omega_F}``.
"""
from __future__ import annotations

import json
import math
import numbers
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from .basis import BasisMap, SusyState

HERMITIAN_TOL = 1e-12

PROVENANCES = ("analytic", "file", "grid")

_MODEL_FIELDS = {"energies_B", "omega_F", "x_B", "n_max"}

# Central second-derivative weights, keyed by accuracy order: [c0, c1, c2, ...].
_STENCILS = {
    2: (-2.0, 1.0),
    4: (-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0),
    6: (-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0),
    8: (-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0),
}


class ModelValidationError(ValueError):
    """Raised when model data violates the SpectralModel invariants."""


class GridSolveError(RuntimeError):
    """Raised when the finite-difference eigensolve fails."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Truncated spectrum plus bosonic position matrix elements.

    Attributes
    ----------
    basis : BasisMap
        Tensor basis; ``basis.n_max + 1`` bosonic levels are kept.
    energy_B : ndarray, shape (n_max+1,)
        Bosonic eigenvalues, nondecreasing.
    omega_F : float
        Fermionic splitting; fermion energies are ``{0, omega_F}``.
    x_B : ndarray, shape (n_max+1, n_max+1), complex
        Hermitian position matrix in the bosonic eigenbasis.
    provenance : str
        One of ``"analytic"``, ``"file"``, ``"grid"``.
    """

    basis: BasisMap
    energy_B: np.ndarray
    omega_F: float
    x_B: np.ndarray
    provenance: str = "file"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nb = self.basis.n_bosonic
        energy = np.array(self.energy_B, dtype=float)
        x = np.array(self.x_B, dtype=complex)
        if energy.shape != (nb,):
            raise ModelValidationError(f"energy_B has shape {energy.shape}, expected ({nb},)")
        if not np.all(np.isfinite(energy)):
            raise ModelValidationError("energy_B contains non-finite values")
        drops = np.nonzero(np.diff(energy) < 0)[0]
        if drops.size:
            i = int(drops[0]) + 1
            raise ModelValidationError(
                f"energy_B not sorted: energy_B[{i}]={energy[i]!r} < energy_B[{i - 1}]={energy[i - 1]!r}"
            )
        if not (math.isfinite(self.omega_F) and self.omega_F > 0):
            raise ModelValidationError(f"omega_F must be positive, got {self.omega_F!r}")
        if x.shape != (nb, nb):
            raise ModelValidationError(f"x_B has shape {x.shape}, expected ({nb}, {nb})")
        if not np.all(np.isfinite(x)):
            raise ModelValidationError("x_B contains non-finite values")
        bad = np.argwhere(np.abs(x - x.conj().T) > HERMITIAN_TOL)
        if bad.size:
            n, k = (int(v) for v in bad[0])
            raise ModelValidationError(
                f"x_B not Hermitian at ({n},{k}): {x[n, k]!r} vs conj of {x[k, n]!r}"
            )
        if self.provenance not in PROVENANCES:
            raise ModelValidationError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "energy_B", _readonly(energy))
        object.__setattr__(self, "x_B", _readonly(x))
        object.__setattr__(self, "omega_F", float(self.omega_F))

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def energy(self, s: SusyState) -> float:
        """Total energy ``energy_B[n_B] + n_F * omega_F``."""
        n_B, n_F = s
        if not self.basis.contains(SusyState(n_B, n_F)):
            raise ValueError(f"state {tuple(s)} is outside the basis with n_max={self.n_max}")
        return float(self.energy_B[n_B] + n_F * self.omega_F)

    def total_energies(self) -> np.ndarray:
        """Total energies in flat-index order."""
        return np.repeat(self.energy_B, 2) + np.tile([0.0, self.omega_F], self.basis.n_bosonic)

    def shifted(self, c: float) -> "SpectralModel":
        """Same model with ``c`` added to every bosonic energy."""
        return SpectralModel(self.basis, self.energy_B + c, self.omega_F, self.x_B.copy(),
                             self.provenance, dict(self.meta))

    def equals(self, other: "SpectralModel", atol: float = 0.0) -> bool:
        return (
            self.n_max == other.n_max
            and abs(self.omega_F - other.omega_F) <= atol
            and np.allclose(self.energy_B, other.energy_B, rtol=0, atol=atol)
            and np.allclose(self.x_B, other.x_B, rtol=0, atol=atol)
        )


def susy_ho_model(n_max: int, omega: float = 1.0) -> SpectralModel:
    """Analytic SUSY harmonic oscillator with ``E = omega * (n_B + n_F)``."""
    if n_max < 1:
        raise ModelValidationError(f"n_max must be >= 1, got {n_max}")
    if not (math.isfinite(omega) and omega > 0):
        raise ModelValidationError(f"omega must be positive, got {omega!r}")
    n = np.arange(n_max + 1)
    x = np.diag(np.sqrt(n[1:] / (2.0 * omega)), k=1)
    x = x + x.T
    return SpectralModel(BasisMap(n_max), omega * n.astype(float), omega, x,
                         "analytic", {"omega": float(omega)})


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform grid ``x_min..x_max`` (endpoints included) with potential samples."""

    x_min: float
    x_max: float
    points: int
    potential: np.ndarray

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ModelValidationError(f"x_min={self.x_min} must be < x_max={self.x_max}")
        if int(self.points) != self.points or self.points < 3:
            raise ModelValidationError(f"points must be an integer >= 3, got {self.points!r}")
        v = np.array(self.potential, dtype=float)
        if v.shape != (self.points,):
            raise ModelValidationError(f"potential has {v.size} samples, expected {self.points}")
        if not np.all(np.isfinite(v)):
            raise ModelValidationError("potential must be finite on the grid")
        object.__setattr__(self, "potential", _readonly(v))
        object.__setattr__(self, "points", int(self.points))

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.points - 1)

    @classmethod
    def from_function(cls, x_min: float, x_max: float, points: int,
                      potential: Callable[[np.ndarray], np.ndarray]) -> "GridSpec":
        x = np.linspace(x_min, x_max, points)
        return cls(x_min, x_max, points, np.asarray(potential(x), dtype=float))


def _solve_banded(diag: np.ndarray, h: float, order: int, n_keep: int):
    coeffs = _STENCILS[order]
    if order == 2:
        off = np.full(diag.size - 1, -0.5 * coeffs[1] / h**2)
        return linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, n_keep - 1))
    m = diag.size
    offsets = [0]
    bands = [diag]
    for j, c in enumerate(coeffs[1:], start=1):
        band = np.full(m - j, -0.5 * c / h**2)
        offsets += [j, -j]
        bands += [band, band]
    mat = sparse.diags(bands, offsets, shape=(m, m), format="csc")
    # the kinetic stencil is positive definite, so min(V) bounds the spectrum from below
    sigma = float(diag.min() + 0.5 * coeffs[0] / h**2) - 1.0
    v0 = np.random.default_rng(0).standard_normal(m)
    w, v = sparse_linalg.eigsh(mat, k=n_keep, sigma=sigma, which="LM", tol=0, v0=v0)
    order_idx = np.argsort(w)
    return w[order_idx], v[:, order_idx]


def grid_model(spec: GridSpec, omega_F: float, n_keep: int, stencil_order: int = 6) -> SpectralModel:
    """Finite-difference bosonic spectrum with Dirichlet walls at the grid ends.

    The kinetic term uses a symmetric central stencil of the given accuracy
    order (2 gives the classic tridiagonal matrix). Eigenvectors are real,
    normalised on the grid, and signed so their largest component is positive.
    """
    if stencil_order not in _STENCILS:
        raise ModelValidationError(f"stencil_order must be one of {sorted(_STENCILS)}")
    if not (math.isfinite(omega_F) and omega_F > 0):
        raise ModelValidationError(f"omega_F must be positive, got {omega_F!r}")
    interior = spec.points - 2
    if n_keep < 2 or n_keep > interior:
        raise ModelValidationError(f"n_keep={n_keep} must lie in [2, points-2={interior}]")
    if interior < len(_STENCILS[stencil_order]):
        raise ModelValidationError(f"grid too small for a order-{stencil_order} stencil")

    h = spec.spacing
    x = spec.grid[1:-1]
    diag = spec.potential[1:-1] - 0.5 * _STENCILS[stencil_order][0] / h**2
    try:
        w, v = _solve_banded(diag, h, stencil_order, n_keep)
    except (linalg.LinAlgError, sparse_linalg.ArpackError, ValueError) as exc:
        raise GridSolveError(f"finite-difference eigensolve failed ({interior} points, "
                             f"order {stencil_order}): {exc}") from exc
    if w.size != n_keep or not np.all(np.isfinite(w)):
        raise GridSolveError(f"eigensolve returned {w.size} finite eigenvalues, expected {n_keep}")

    peak = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[peak, np.arange(n_keep)])
    # v columns are unit vectors, so psi = v / sqrt(h) and sum(psi x psi) h = v^T x v.
    xb = v.T @ (x[:, None] * v)
    xb = 0.5 * (xb + xb.T)
    meta = {"x_min": spec.x_min, "x_max": spec.x_max, "points": spec.points,
            "stencil_order": stencil_order, "ground_energy": float(w[0])}
    return SpectralModel(BasisMap(n_keep - 1), w - w[0], omega_F, xb, "grid", meta)


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def model_to_dict(model: SpectralModel) -> dict:
    quads = [[int(n), int(k), float(model.x_B[n, k].real), float(model.x_B[n, k].imag)]
             for n, k in zip(*np.nonzero(model.x_B))]
    return {
        "n_max": model.n_max,
        "energies_B": [float(e) for e in model.energy_B],
        "omega_F": model.omega_F,
        "x_B": quads,
    }


def save_model(model: SpectralModel, path) -> None:
    """Write ``model`` as JSON; floats are emitted with round-trip precision."""
    _atomic_write_text(Path(path), json.dumps(model_to_dict(model), indent=1) + "\n")


def _is_real(v) -> bool:
    return isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, numbers.Integral) and not isinstance(v, bool)


def model_from_dict(data) -> SpectralModel:
    if not isinstance(data, dict):
        raise ModelValidationError("model file must contain a JSON object")
    unknown = sorted(set(data) - _MODEL_FIELDS)
    if unknown:
        raise ModelValidationError(f"unknown field(s): {', '.join(unknown)}")
    missing = sorted(_MODEL_FIELDS - set(data))
    if missing:
        raise ModelValidationError(f"missing field(s): {', '.join(missing)}")

    energies = data["energies_B"]
    if not isinstance(energies, list) or not energies:
        raise ModelValidationError("energies_B must be a non-empty array")
    for i, e in enumerate(energies):
        if not _is_real(e):
            raise ModelValidationError(f"energies_B[{i}] is not a finite real: {e!r}")
    for i in range(1, len(energies)):
        if energies[i] < energies[i - 1]:
            raise ModelValidationError(
                f"energies_B not nondecreasing at index {i}: {energies[i]!r} < {energies[i - 1]!r}")

    n_max = data["n_max"]
    if not _is_int(n_max) or n_max < 0:
        raise ModelValidationError(f"n_max must be a nonnegative integer, got {n_max!r}")
    if len(energies) != n_max + 1:
        raise ModelValidationError(f"energies_B has {len(energies)} entries, n_max={n_max} needs {n_max + 1}")

    omega_F = data["omega_F"]
    if not _is_real(omega_F) or omega_F <= 0:
        raise ModelValidationError(f"omega_F must be a positive real, got {omega_F!r}")

    entries = data["x_B"]
    if not isinstance(entries, list):
        raise ModelValidationError("x_B must be an array of [n, k, re, im] entries")
    x = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    seen = set()
    for j, q in enumerate(entries):
        if not (isinstance(q, list) and len(q) == 4 and _is_int(q[0]) and _is_int(q[1])
                and _is_real(q[2]) and _is_real(q[3])):
            raise ModelValidationError(f"x_B[{j}] must be [n, k, re, im], got {q!r}")
        n, k = q[0], q[1]
        if not (0 <= n <= n_max and 0 <= k <= n_max):
            raise ModelValidationError(f"x_B[{j}] index ({n},{k}) outside [0, {n_max}]")
        if (n, k) in seen:
            raise ModelValidationError(f"x_B[{j}] duplicates entry ({n},{k})")
        seen.add((n, k))
        x[n, k] = complex(q[2], q[3])
    for n, k in sorted(seen):
        if (k, n) not in seen:
            x[k, n] = x[n, k].conjugate()
    for n, k in sorted(seen):
        if abs(x[n, k] - x[k, n].conjugate()) > HERMITIAN_TOL:
            raise ModelValidationError(
                f"x_B not Hermitian at ({n},{k}): {x[n, k]!r} vs conj of {x[k, n]!r}")
    x = 0.5 * (x + x.conj().T)
    return SpectralModel(BasisMap(n_max), np.array(energies, dtype=float), float(omega_F), x, "file")


def load_model(path) -> SpectralModel:
    """Read and validate a JSON model file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(data)


def load_grid_spec(path) -> tuple[GridSpec, dict]:
    """Read a grid description file.

    Fields: ``x_min``, ``x_max``, ``points`` and exactly one of ``potential``
    (list of samples) or ``potential_coefficients`` (polynomial coefficients,
    constant term first). Optional: ``omega_F`` (default 1), ``n_keep``
    (default 20), ``stencil_order`` (default 6).
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ModelValidationError("grid file must contain a JSON object")
    allowed = {"x_min", "x_max", "points", "potential", "potential_coefficients",
               "omega_F", "n_keep", "stencil_order"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ModelValidationError(f"unknown field(s): {', '.join(unknown)}")
    for key in ("x_min", "x_max"):
        if not _is_real(data.get(key)):
            raise ModelValidationError(f"{key} must be a finite real")
    if not _is_int(data.get("points")):
        raise ModelValidationError("points must be an integer")
    if ("potential" in data) == ("potential_coefficients" in data):
        raise ModelValidationError("give exactly one of potential, potential_coefficients")
    if "potential" in data:
        samples = data["potential"]
    else:
        coeffs: Sequence[float] = data["potential_coefficients"]
        if not isinstance(coeffs, list) or not coeffs or not all(_is_real(c) for c in coeffs):
            raise ModelValidationError("potential_coefficients must be a non-empty array of reals")
        x = np.linspace(data["x_min"], data["x_max"], data["points"])
        samples = np.polynomial.polynomial.polyval(x, coeffs)
    try:
        spec = GridSpec(data["x_min"], data["x_max"], data["points"], np.asarray(samples, dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelValidationError):
            raise
        raise ModelValidationError(f"potential: {exc}") from exc
    opts = {"omega_F": data.get("omega_F", 1.0), "n_keep": data.get("n_keep", 20),
            "stencil_order": data.get("stencil_order", 6)}
    if not _is_real(opts["omega_F"]):
        raise ModelValidationError("omega_F must be a finite real")
    for key in ("n_keep", "stencil_order"):
        if not _is_int(opts[key]):
            raise ModelValidationError(f"{key} must be an integer")
    return spec, opts
