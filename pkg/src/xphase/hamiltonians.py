"""Hamiltonians on the doubled phase space X = (x, y, p, q).

Two flavors share this 4D space:

* MFQM (mean-field quantum): generator
      H+ = (p^2 + q^2)/2m + [V(x+y) + V(x-y)]/2,
  with conserved partner H- = pq/m + [V(x+y) - V(x-y)]/2. The chord ends
  z+- = (x +- y, p +- q) each follow the ordinary classical flow.

* CCM (complex classical): write Z = x + iy, P = p - iq; then
      H_cl(Z, P) = P^2/2m + V(Z) = H_R + i H_I,
  the flow is generated by H_R and conserves H_I. Explicitly
      H_R = (p^2 - q^2)/2m + Re V(x+iy),  H_I = Im V(x+iy) - pq/m.

Both conservation laws are the same mechanism: with the symplectic form
Omega = [[0, I], [-I, 0]], the gradients are linked by dH- = Gamma dH+ and
dH_I = Lambda dH_R, and Omega*Gamma, Omega*Lambda are antisymmetric, which
kills the Poisson brackets {H-, H+} and {H_I, H_R} identically.

A third flavor, ClassicalReal, is the plain (x, p) flow with (y, q) frozen;
it is what the ensemble transport and classical-limit comparisons run on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UsageError
from .potentials import Potential


class Flavor(enum.Enum):
    MFQM = "mfqm"
    CCM = "ccm"
    CLASSICAL_REAL = "classical"


class PhasePoint(NamedTuple):
    """A point in the doubled phase space. Behaves as the tuple (x, y, p, q)."""

    x: float
    y: float
    p: float
    q: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class GradedValue(NamedTuple):
    """A scalar together with its exact gradient (d/dx, d/dy, d/dp, d/dq)."""

    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class ExtendedSystem:
    """Potential + mass + flavor + hbar scale; owns the flow definition.

    hbar only enters classical-limit sweeps (initial data scaled y = hbar*ybar,
    q = hbar*qbar); the equations of motion themselves are hbar-free.
    """

    potential: Potential
    mass: float = 1.0
    flavor: Flavor = Flavor.MFQM
    hbar: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise UsageError(f"mass must be positive and finite, got {self.mass!r}")
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise UsageError(f"hbar must be positive and finite, got {self.hbar!r}")
        if not isinstance(self.flavor, Flavor):
            object.__setattr__(self, "flavor", Flavor(self.flavor))


# Block structure over (x, y | p, q). Omega is the symplectic form used by
# the bracket; Gamma links dH- to dH+; Lambda links dH_I to dH_R. Lambda's
# sign convention below is the one fixed by the finite-difference gradient
# oracle in the tests (the xy block rotates one way, the pq block the other).
_OMEGA = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)
_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
_GAMMA = np.zeros((4, 4))
_GAMMA[:2, :2] = _SIGMA1
_GAMMA[2:, 2:] = _SIGMA1
_LAMBDA = np.zeros((4, 4))
_LAMBDA[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
_LAMBDA[2:, 2:] = [[0.0, 1.0], [-1.0, 0.0]]
_OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class StructureMatrices:
    omega: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray
    omega2: np.ndarray


def structure_matrices() -> StructureMatrices:
    """Fresh copies of Omega, Gamma, Lambda and the 2x2 omega2."""
    return StructureMatrices(_OMEGA.copy(), _GAMMA.copy(), _LAMBDA.copy(), _OMEGA2.copy())


def _require_flavor(sys: ExtendedSystem, flavor: Flavor, op: str):
    if sys.flavor is not flavor:
        raise UsageError(f"{op} requires flavor {flavor.value!r}, system is {sys.flavor.value!r}")


def h_classical(sys: ExtendedSystem, x: float, p: float) -> float:
    """Ordinary H_cl = p^2/2m + V(x)."""
    return p * p / (2.0 * sys.mass) + sys.potential.eval_real(x)


def h_plus(sys: ExtendedSystem, X) -> GradedValue:
    """MFQM generator with exact gradient."""
    _require_flavor(sys, Flavor.MFQM, "h_plus")
    x, y, p, q = (float(v) for v in X)
    V = sys.potential
    m = sys.mass
    vp_plus = V.deriv_real(x + y)
    vp_minus = V.deriv_real(x - y)
    value = (p * p + q * q) / (2.0 * m) + 0.5 * (V.eval_real(x + y) + V.eval_real(x - y))
    grad = np.array(
        [
            0.5 * (vp_plus + vp_minus),
            0.5 * (vp_plus - vp_minus),
            p / m,
            q / m,
        ]
    )
    return GradedValue(value, grad)


def h_minus(sys: ExtendedSystem, X) -> GradedValue:
    """MFQM constraint H- = pq/m + [V(x+y) - V(x-y)]/2 with exact gradient."""
    _require_flavor(sys, Flavor.MFQM, "h_minus")
    x, y, p, q = (float(v) for v in X)
    V = sys.potential
    m = sys.mass
    vp_plus = V.deriv_real(x + y)
    vp_minus = V.deriv_real(x - y)
    value = p * q / m + 0.5 * (V.eval_real(x + y) - V.eval_real(x - y))
    grad = np.array(
        [
            0.5 * (vp_plus - vp_minus),
            0.5 * (vp_plus + vp_minus),
            q / m,
            p / m,
        ]
    )
    return GradedValue(value, grad)


def h_r(sys: ExtendedSystem, X) -> GradedValue:
    """CCM generator: Re[P^2/2m + V(Z)] at Z = x+iy, P = p-iq."""
    _require_flavor(sys, Flavor.CCM, "h_r")
    x, y, p, q = (float(v) for v in X)
    m = sys.mass
    vz = sys.potential.eval_complex(complex(x, y))
    dvz = sys.potential.deriv_complex(complex(x, y))
    value = (p * p - q * q) / (2.0 * m) + vz.real
    grad = np.array([dvz.real, -dvz.imag, p / m, -q / m])
    return GradedValue(value, grad)


def h_i(sys: ExtendedSystem, X) -> GradedValue:
    """CCM constraint: Im[P^2/2m + V(Z)] = Im V(x+iy) - pq/m."""
    _require_flavor(sys, Flavor.CCM, "h_i")
    x, y, p, q = (float(v) for v in X)
    m = sys.mass
    dvz = sys.potential.deriv_complex(complex(x, y))
    value = sys.potential.eval_complex(complex(x, y)).imag - p * q / m
    grad = np.array([dvz.imag, dvz.real, -q / m, -p / m])
    return GradedValue(value, grad)


def generator(sys: ExtendedSystem, X) -> GradedValue:
    """The flavor's flow generator (H+ for MFQM, H_R for CCM, H_cl otherwise)."""
    if sys.flavor is Flavor.MFQM:
        return h_plus(sys, X)
    if sys.flavor is Flavor.CCM:
        return h_r(sys, X)
    x, _, p, _ = (float(v) for v in X)
    value = h_classical(sys, x, p)
    grad = np.array([sys.potential.deriv_real(x), 0.0, p / sys.mass, 0.0])
    return GradedValue(value, grad)


def constraint(sys: ExtendedSystem, X) -> GradedValue:
    """The flavor's conserved partner (H- for MFQM, H_I for CCM, 0 otherwise)."""
    if sys.flavor is Flavor.MFQM:
        return h_minus(sys, X)
    if sys.flavor is Flavor.CCM:
        return h_i(sys, X)
    return GradedValue(0.0, np.zeros(4))


def poisson_bracket(f: GradedValue, g: GradedValue) -> float:
    """Omega-contraction {f, g} = df . Omega dg of two gradients at one point."""
    return float(f.gradient @ (_OMEGA @ g.gradient))


def vector_field(sys: ExtendedSystem, X) -> np.ndarray:
    """Hamilton's equations Xdot = Omega dH for the flavor's generator.

    Vectorized: X may be shape (4,) or (4, n); the result matches.
    """
    X = np.asarray(X, dtype=float)
    x, y, p, q = X[0], X[1], X[2], X[3]
    m = sys.mass
    V = sys.potential
    if sys.flavor is Flavor.MFQM:
        vp_plus = V.deriv_real(x + y)
        vp_minus = V.deriv_real(x - y)
        return np.array(
            [p / m, q / m, -0.5 * (vp_plus + vp_minus), -0.5 * (vp_plus - vp_minus)]
        )
    if sys.flavor is Flavor.CCM:
        dv = V.deriv_complex(x + 1j * y)
        return np.array([p / m, -q / m, -np.real(dv), np.imag(dv)])
    zeros = np.zeros_like(x)
    return np.array([p / m, zeros, -V.deriv_real(x), zeros])


def check_gamma_relation(sys: ExtendedSystem, X) -> float:
    """Max-norm residual of dH- = Gamma dH+ (exact for polynomial gradients)."""
    gp = h_plus(sys, X).gradient
    gm = h_minus(sys, X).gradient
    return float(np.max(np.abs(gm - _GAMMA @ gp)))


def check_lambda_relation(sys: ExtendedSystem, X) -> float:
    """Max-norm residual of dH_I = Lambda dH_R (the Cauchy-Riemann link)."""
    gr = h_r(sys, X).gradient
    gi = h_i(sys, X).gradient
    return float(np.max(np.abs(gi - _LAMBDA @ gr)))


def complexification_identity(sys_mfqm: ExtendedSystem, sys_ccm: ExtendedSystem, X):
    """Residuals of H+(x, iy, p, -iq) = H_R(X) and H-(x, iy, p, -iq) = i H_I(X).

    Both sides are evaluated independently: the left by brute-force complex
    substitution into the shifted-argument forms, the right by the real CCM
    formulas. Same potential and mass required in both systems.
    """
    if sys_mfqm.potential != sys_ccm.potential or sys_mfqm.mass != sys_ccm.mass:
        raise UsageError("complexification identity needs matching potential and mass")
    x, y, p, q = (float(v) for v in X)
    V = sys_mfqm.potential
    m = sys_mfqm.mass
    zy = complex(0.0, y)
    zq = complex(0.0, -q)
    v_plus = V.eval_complex(x + zy)
    v_minus = V.eval_complex(x - zy)
    hp_sub = (p * p + zq * zq) / (2.0 * m) + 0.5 * (v_plus + v_minus)
    hm_sub = p * zq / m + 0.5 * (v_plus - v_minus)
    hr_val = h_r(sys_ccm, X).value
    hi_val = h_i(sys_ccm, X).value
    return abs(hp_sub - hr_val), abs(hm_sub - 1j * hi_val)


def chord_ends(X):
    """The two chord ends z+- = (x +- y, p +- q) as ((x+, p+), (x-, p-))."""
    x, y, p, q = (float(v) for v in X)
    return (x + y, p + q), (x - y, p - q)
