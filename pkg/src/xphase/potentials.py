"""Polynomial potential catalogue.

Every potential used here is a real polynomial V(x) = sum_k c_k x^k of degree
at most 8. Polynomials keep the analytic continuation to complex argument
exact (evaluate the same coefficients at z = x + iy) and make differentiation
a coefficient operation, so gradient checks elsewhere have an independent
oracle that is not itself numerical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError

MAX_DEGREE = 8

_KINDS = ("harmonic", "inverted_harmonic", "double_well", "custom")


def _trimmed(coefficients) -> tuple[float, ...]:
    cs = [float(c) for c in coefficients]
    if not cs:
        raise UsageError("potential needs at least one coefficient")
    for c in cs:
        if not math.isfinite(c):
            raise UsageError(f"non-finite potential coefficient {c!r}")
    while len(cs) > 1 and cs[-1] == 0.0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class Potential:
    """Real polynomial potential with exact derivatives.

    Attributes:
        coefficients: (c_0, .., c_d) with V(x) = sum c_k x^k, trailing zeros
            stripped so the stored degree is the true degree.
        label: one of "harmonic", "inverted_harmonic", "double_well", "custom".
    """

    coefficients: tuple[float, ...]
    label: str = "custom"
    _dcoeffs: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cs = _trimmed(self.coefficients)
        if len(cs) - 1 > MAX_DEGREE:
            raise UsageError(
                f"potential degree {len(cs) - 1} exceeds the supported maximum {MAX_DEGREE}"
            )
        if self.label not in _KINDS:
            raise UsageError(f"unknown potential label {self.label!r}")
        object.__setattr__(self, "coefficients", cs)
        dcs = tuple(k * cs[k] for k in range(1, len(cs))) or (0.0,)
        object.__setattr__(self, "_dcoeffs", dcs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def eval_real(self, x):
        """Evaluate V at real x (scalar or array) by Horner's rule."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("potential evaluated at non-finite argument")
        acc = np.zeros_like(x)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)

    def eval_complex(self, z):
        """Analytic continuation: same coefficients, complex Horner."""
        z = np.asarray(z, dtype=complex)
        if not np.all(np.isfinite(z)):
            raise DomainError("potential evaluated at non-finite argument")
        acc = np.zeros_like(z)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc if acc.ndim else complex(acc)

    def derivative(self) -> "Potential":
        """Exact derivative polynomial. Degree drops by one; d/dx const = 0."""
        return Potential(self._dcoeffs, "custom")

    def deriv_real(self, x):
        """V'(x) without building an intermediate Potential (hot path)."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self._dcoeffs):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)

    def deriv_complex(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in reversed(self._dcoeffs):
            acc = acc * z + c
        return acc if acc.ndim else complex(acc)

    def deriv_coefficients(self) -> np.ndarray:
        """Derivative coefficients as a float array (consumed by the kernels)."""
        return np.asarray(self._dcoeffs, dtype=float)

    def __call__(self, x):
        return self.eval_real(x)


def harmonic() -> Potential:
    """V(x) = x^2 / 2 (unit curvature convention; mass lives in the system)."""
    return Potential((0.0, 0.0, 0.5), "harmonic")


def inverted_harmonic() -> Potential:
    """V(x) = -x^2 / 2, the barrier with separatrix p^2 = x^2 at m=1."""
    return Potential((0.0, 0.0, -0.5), "inverted_harmonic")


def double_well() -> Potential:
    """V(x) = (x^2 - 1)^2, wells at x = +-1, barrier height V(0) = 1.

    Other well placements are available through custom coefficients.
    """
    return Potential((1.0, 0.0, -2.0, 0.0, 1.0), "double_well")


def from_config(kind: str, coefficients=None) -> Potential:
    """Build a potential from its config representation.

    Args:
        kind: "harmonic" | "inverted_harmonic" | "double_well" | "custom".
        coefficients: required for "custom", ignored otherwise.
    """
    if kind == "harmonic":
        return harmonic()
    if kind == "inverted_harmonic":
        return inverted_harmonic()
    if kind == "double_well":
        return double_well()
    if kind == "custom":
        if coefficients is None:
            raise UsageError("potential.kind 'custom' requires potential.coefficients")
        return Potential(tuple(coefficients), "custom")
    raise UsageError(f"unknown potential.kind {kind!r}")
