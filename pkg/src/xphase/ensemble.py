"""Phase-space densities evolved by transport along classical characteristics.

A density is represented by weighted samples (x_i, p_i, w_i). Transport moves
the samples along the real classical flow and leaves the weights alone, which
is exactly Liouville incompressibility in particle form. For Gaussian Wigner
initial data (minimum-uncertainty states) the density is positive, so plain
Monte Carlo sampling applies; for quadratic potentials the transported
moments must match the analytic linear pushforward, which the tests use as
an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import UsageError
from .hamiltonians import ExtendedSystem, Flavor

_TABLEAU_A = (
    (_kernels._A21,),
    (_kernels._A31, _kernels._A32),
    (_kernels._A41, _kernels._A42, _kernels._A43),
    (_kernels._A51, _kernels._A52, _kernels._A53, _kernels._A54),
    (_kernels._A61, _kernels._A62, _kernels._A63, _kernels._A64, _kernels._A65),
    (_kernels._B1, 0.0, _kernels._B3, _kernels._B4, _kernels._B5, _kernels._B6),
)
_ERR = (_kernels._E1, 0.0, _kernels._E3, _kernels._E4, _kernels._E5, _kernels._E6, _kernels._E7)


@dataclass
class SampleSet:
    """Weighted phase-space samples; arrays share length n."""

    x: np.ndarray
    p: np.ndarray
    weight: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.p = np.asarray(self.p, float)
        self.weight = np.asarray(self.weight, float)
        if not (len(self.x) == len(self.p) == len(self.weight)):
            raise UsageError("sample arrays must share one length")
        if not np.all(np.isfinite(self.weight)):
            raise UsageError("sample weights must be finite")

    def __len__(self):
        return len(self.x)


@dataclass(frozen=True)
class MomentSummary:
    mean_x: float
    mean_p: float
    cov_xx: float
    cov_xp: float
    cov_pp: float


def sample_gaussian_wigner(x0, p0, sigma_x, sigma_p, n, seed, hbar=None) -> SampleSet:
    """n draws from the product Gaussian centered (x0, p0); weights 1/n.

    The Wigner function of a minimum-uncertainty state is this positive
    Gaussian, so sampling it is exact state preparation. sigma_x*sigma_p is
    recorded in meta (with the hbar/2 floor when hbar is given) rather than
    enforced; squeezed inputs are the caller's business.
    """
    if n <= 0:
        raise UsageError("need at least one sample")
    if not (sigma_x > 0 and sigma_p > 0):
        raise UsageError("sigma_x and sigma_p must be positive")
    rng = np.random.default_rng(seed)
    xs = rng.normal(x0, sigma_x, n)
    ps = rng.normal(p0, sigma_p, n)
    w = np.full(n, 1.0 / n)
    meta = {
        "sigma_x": float(sigma_x),
        "sigma_p": float(sigma_p),
        "uncertainty_product": float(sigma_x * sigma_p),
        "seed": seed,
    }
    if hbar is not None:
        meta["hbar_over_two"] = 0.5 * float(hbar)
        meta["minimum_uncertainty_ok"] = bool(sigma_x * sigma_p >= 0.5 * hbar - 1e-15)
    return SampleSet(xs, ps, w, meta)


def transport(samples: SampleSet, sys: ExtendedSystem, t: float, cfg=None) -> SampleSet:
    """Advance every sample along the classical (x, p) flow for time t.

    Weights are untouched (incompressibility). All samples share one adaptive
    step; the error norm is the max over the batch, so accuracy follows the
    worst sample.
    """
    if sys.flavor is not Flavor.CLASSICAL_REAL:
        raise UsageError("transport runs on the classical flow; build the system "
                         f"with flavor 'classical', got {sys.flavor.value!r}")
    if not math.isfinite(t):
        raise UsageError("transport time must be finite")
    rtol = cfg.rel_tol if cfg is not None else 1e-10
    atol = cfg.abs_tol if cfg is not None else 1e-12
    if t == 0.0:
        return SampleSet(samples.x.copy(), samples.p.copy(), samples.weight.copy(),
                         dict(samples.meta))

    m = sys.mass
    V = sys.potential

    def f(state):
        return np.stack([state[1] / m, -V.deriv_real(state[0])])

    state = np.stack([samples.x, samples.p]).astype(float)
    tau = 0.0
    s = 1.0 if t > 0 else -1.0
    f0 = f(state)
    scale = atol + rtol * np.abs(state)
    d0 = float(np.sqrt(np.mean((state / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h = s * min(0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6, abs(t))

    k = [None] * 7
    k[0] = f0
    while s * (tau - t) < 0:
        clamped = False
        if s * (tau + h - t) > 0:
            h = t - tau
            clamped = True
        for i, row in enumerate(_TABLEAU_A):
            inc = sum(a * k[j] for j, a in enumerate(row) if a != 0.0)
            k[i + 1] = f(state + h * inc)
        y_new = state + h * sum(a * k[j] for j, a in enumerate(_TABLEAU_A[-1]) if a != 0.0)
        err_vec = h * sum(a * k[j] for j, a in enumerate(_ERR) if a != 0.0)
        sc = atol + rtol * np.maximum(np.abs(state), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / sc))
        if not np.isfinite(err) or err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2) if np.isfinite(err) else 0.5
            if abs(h) < 1e-13:
                raise UsageError("transport step underflow (unbounded classical flow?)")
            continue
        tau = t if clamped else tau + h
        state = y_new
        k[0] = k[6]
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 1e-30 else 5.0))
    return SampleSet(state[0], state[1], samples.weight.copy(), dict(samples.meta))


def moments(samples: SampleSet) -> MomentSummary:
    w = samples.weight / np.sum(samples.weight)
    mx = float(np.sum(w * samples.x))
    mp = float(np.sum(w * samples.p))
    dx = samples.x - mx
    dp = samples.p - mp
    return MomentSummary(
        mx, mp,
        float(np.sum(w * dx * dx)),
        float(np.sum(w * dx * dp)),
        float(np.sum(w * dp * dp)),
    )


def separatrix_fraction(samples: SampleSet, sys: ExtendedSystem) -> float:
    """Weighted fraction of samples on the barrier-crossing side p^2 > m x^2.

    Only meaningful for the inverted harmonic barrier V = -x^2/2, whose
    separatrix is H_cl = 0; anything else is rejected.
    """
    if sys.potential.label != "inverted_harmonic":
        raise UsageError("separatrix_fraction needs the inverted_harmonic potential, "
                         f"got {sys.potential.label!r}")
    crossing = samples.p ** 2 - sys.mass * samples.x ** 2 > 0
    return float(np.sum(samples.weight[crossing]) / np.sum(samples.weight))
