"""Independent 1D Schrodinger eigensolver used as the quantum reference.

Second-order central finite differences on a uniform grid with Dirichlet
boundaries give the symmetric tridiagonal matrix

    diagonal   hbar^2/(m h^2) + V(x_i)
    off-diag  -hbar^2/(2 m h^2)

whose low eigenpairs are computed by Sturm-sequence bisection plus inverse
iteration (LAPACK stebz/stein through scipy). The h^2 convergence law of the
stencil is what the self-validation tests lean on. If inverse iteration
stalls (it can on the nearly degenerate double-well doublet), the dense
tridiagonal QL driver is used as the documented fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericError, UsageError
from .potentials import Potential


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 64:
            raise UsageError(f"grid needs at least 64 points, got {self.n}")
        if not self.x_max > self.x_min:
            raise UsageError("grid needs x_max > x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass
class SpectrumResult:
    """Lowest-k eigenpairs; wavefunctions row-wise, normalized sum(psi^2) h = 1."""

    energies: np.ndarray
    wavefunctions: np.ndarray
    grid: Grid1D
    hbar: float
    mass: float

    def __post_init__(self):
        self.energies = np.asarray(self.energies, float)
        if np.any(np.diff(self.energies) <= 0):
            raise NumericError("eigenvalues not strictly ascending; solver failure "
                               f"(got {self.energies.tolist()})")
        norms = np.sum(self.wavefunctions ** 2, axis=1) * self.grid.h
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise NumericError("wavefunction normalization off by more than 1e-10")


def eigensolve(V: Potential, grid: Grid1D, hbar: float, mass: float, k: int,
               require_confining: bool = True) -> SpectrumResult:
    """Lowest k bound states of -hbar^2/2m psi'' + V psi on the grid.

    Dirichlet walls at the grid edges are part of the discretization, so a
    non-confining V still produces a discrete spectrum of the boxed problem;
    require_confining=False opts into that reading (used for particle-in-a-box
    setups). With the default True, any computed energy at or above
    min(V(x_min), V(x_max)) raises DomainError.
    """
    if not (hbar > 0 and mass > 0):
        raise UsageError("hbar and mass must be positive")
    if k < 1:
        raise UsageError("need k >= 1 eigenvalues")
    if k > grid.n // 4:
        raise UsageError(f"k = {k} too large for grid n = {grid.n} (need k <= n/4)")
    xs = grid.points()
    Vx = V.eval_real(xs)
    h = grid.h
    kin = hbar * hbar / (2.0 * mass * h * h)
    diag = 2.0 * kin + Vx
    off = np.full(grid.n - 1, -kin)

    try:
        w, vecs = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, k - 1), lapack_driver="stebz"
        )
    except (scipy.linalg.LinAlgError, ValueError):
        try:
            w_all, vecs_all = scipy.linalg.eigh_tridiagonal(diag, off, lapack_driver="stev")
        except scipy.linalg.LinAlgError as exc:
            raise NumericError(
                f"tridiagonal eigensolve failed for n={grid.n}, hbar={hbar}: {exc}"
            ) from exc
        w, vecs = w_all[:k], vecs_all[:, :k]

    if require_confining:
        edge = min(float(Vx[0]), float(Vx[-1]))
        if float(w[-1]) >= edge:
            raise DomainError(
                f"potential not confining on the grid: level {k - 1} at E={float(w[-1]):g} "
                f"reaches the edge value min(V(x_min), V(x_max))={edge:g}; widen the "
                "grid or pass require_confining=False for a boxed problem"
            )

    psis = vecs.T.copy()
    psis /= np.sqrt(np.sum(psis ** 2, axis=1) * h)[:, None]
    for row in psis:  # deterministic sign: largest-magnitude component positive
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return SpectrumResult(np.asarray(w, float), psis, grid, float(hbar), float(mass))


def well_probabilities(result: SpectrumResult, level: int, split_at: float):
    """(P_left, P_right) of |psi_level|^2 split at x = split_at; P_right = 1 - P_left."""
    if level >= len(result.energies):
        raise UsageError(f"level {level} not computed (have {len(result.energies)})")
    xs = result.grid.points()
    psi = result.wavefunctions[level]
    p_left = float(np.sum(psi[xs < split_at] ** 2) * result.grid.h)
    return p_left, 1.0 - p_left


def localized_combination(result: SpectrumResult, level: int = 0,
                          sign: int = 1) -> np.ndarray:
    """(psi_level + sign*psi_level+1)/sqrt(2), the well-localized combination."""
    if level + 1 >= len(result.energies):
        raise UsageError(
            f"doublet combination needs levels {level} and {level + 1} "
            f"(have {len(result.energies)})"
        )
    if sign not in (1, -1):
        raise UsageError("sign must be +1 or -1")
    return (result.wavefunctions[level]
            + sign * result.wavefunctions[level + 1]) / math.sqrt(2.0)


def grid_probability_split(psi: np.ndarray, grid: Grid1D, split_at: float):
    """(P_left, P_right) for an arbitrary grid wavefunction (direct grid sums)."""
    xs = grid.points()
    p_left = float(np.sum(psi[xs < split_at] ** 2) * grid.h)
    return p_left, 1.0 - p_left
