"""Experiment recipes built on the integrator: ellipse fits, double-well
runs in both flavors, dwell-time bookkeeping, parameter sweeps, and the
side-by-side comparison against the 1D eigenvalue oracle.

Functions here resolve physical inputs (which well, which energy shell,
which momentum branch) into initial phase points, run the flow, and reduce
trajectories to small summary records. They do not write files; see io.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate,
    refine_crossing,
    well_crossings,
)
from .errors import DomainError, UsageError
from .hamiltonians import (
    ExtendedSystem,
    Flavor,
    check_gamma_relation,
    check_lambda_relation,
    complexification_identity,
    constraint,
    generator,
    poisson_bracket,
)
from .oracle import (
    Grid1D,
    SpectrumResult,
    eigensolve,
    grid_probability_split,
    localized_combination,
    well_probabilities,
)
from .potentials import Potential


# ---------------------------------------------------------------------------
# potential geometry helpers


def stationary_points(V: Potential) -> np.ndarray:
    """Real roots of V', sorted ascending."""
    dc = V.deriv_coefficients()
    while len(dc) and dc[-1] == 0.0:
        dc = dc[:-1]
    if len(dc) <= 1:
        return np.array([0.0]) if len(dc) and dc[0] == 0.0 else np.array([])
    roots = np.roots(dc[::-1])
    real = roots[np.abs(roots.imag) < 1e-9].real
    return np.sort(real)


def well_minima(V: Potential) -> np.ndarray:
    """Local minima of V (second derivative positive), sorted ascending."""
    d2 = V.derivative().derivative()
    pts = stationary_points(V)
    return pts[d2.eval_real(pts) > 0] if len(pts) else pts


def barrier_height(V: Potential) -> float | None:
    """V at the highest local maximum separating two minima, else None."""
    minima = well_minima(V)
    if len(minima) < 2:
        return None
    d2 = V.derivative().derivative()
    pts = stationary_points(V)
    tops = [x for x in pts if minima[0] < x < minima[-1] and d2.eval_real(np.array([x]))[0] < 0]
    if not tops:
        return None
    return float(max(V.eval_real(np.array(tops))))


def _resolve_well(V: Potential, x0) -> float:
    if isinstance(x0, str):
        minima = well_minima(V)
        if len(minima) == 0:
            raise UsageError(
                f"potential {V.label!r} has no local minimum; pass x0 as a number"
            )
        if x0 == "left":
            return float(minima[0])
        if x0 == "right":
            return float(minima[-1])
        raise UsageError(f"x0 must be 'left', 'right', or a number, got {x0!r}")
    return float(x0)


# ---------------------------------------------------------------------------
# tilted ellipse fit (harmonic MFQM runs)


@dataclass(frozen=True)
class SHOEllipseParams:
    """x(t) = A sin(w t + alpha1), y(t) = B sin(w t + alpha2) fit results.

    constraint_estimate is m w^2 A B cos(alpha1 - alpha2), the conserved
    off-diagonal energy the tilt angle encodes; residual_rms is the
    root-mean-square misfit over both coordinates.
    """

    A: float
    B: float
    alpha1: float
    alpha2: float
    omega: float
    residual_rms: float
    constraint_estimate: float


def fit_sho_ellipse(traj: Trajectory, sys: ExtendedSystem) -> SHOEllipseParams:
    """Least-squares sinusoid fit of (x(t), y(t)) for a harmonic system."""
    if sys.potential.label != "harmonic":
        raise UsageError("ellipse fit is defined for the harmonic potential only")
    c2 = sys.potential.coefficients[2] if sys.potential.degree >= 2 else 0.0
    omega = math.sqrt(2.0 * c2 / sys.mass)
    t = traj.times
    design = np.column_stack([np.sin(omega * t), np.cos(omega * t)])
    target = traj.points[:, :2]
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    (ax, ay), (bx, by) = coef
    A = math.hypot(ax, bx)
    B = math.hypot(ay, by)
    alpha1 = math.atan2(bx, ax)
    alpha2 = math.atan2(by, ay)
    return SHOEllipseParams(
        A=A, B=B, alpha1=alpha1, alpha2=alpha2, omega=omega,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        constraint_estimate=sys.mass * omega**2 * A * B * math.cos(alpha1 - alpha2),
    )


# ---------------------------------------------------------------------------
# dwell-time bookkeeping


@dataclass(frozen=True)
class DwellSummary:
    """Time spent on each side of x = x_split, excursions excluded.

    flips counts refined interior crossings. ratio is time_left/time_right,
    or None when the right-side time is zero. excursion_time collects the
    stretches with |x| > x_well_max (CCM runs leave the well region on the
    way to their blow-up; that time belongs to neither well).
    time_left + time_right + excursion_time recovers the trajectory span.
    """

    time_left: float
    time_right: float
    excursion_time: float
    flips: int
    ratio: float | None
    termination: str

    @property
    def fraction_left(self) -> float | None:
        tot = self.time_left + self.time_right
        return self.time_left / tot if tot > 0 else None


def _excursion_portions(traj, ta, tb, x_well_max):
    """Total time inside [ta, tb] with |x(t)| > x_well_max."""

    def g(t):
        return float(abs(traj.sample_dense([t])[0, 0])) - x_well_max

    i0 = int(np.searchsorted(traj.times, ta, side="right"))
    i1 = int(np.searchsorted(traj.times, tb, side="left"))
    knots = [ta] + [float(t) for t in traj.times[i0:i1]] + [tb]
    vals = [g(t) for t in knots]
    marks = [ta]
    for k in range(len(knots) - 1):
        if vals[k] * vals[k + 1] < 0:
            marks.append(refine_crossing(g, (knots[k], knots[k + 1])))
    marks.append(tb)
    total = 0.0
    for k in range(len(marks) - 1):
        mid = 0.5 * (marks[k] + marks[k + 1])
        if g(mid) > 0:
            total += marks[k + 1] - marks[k]
    return total


def dwell_analysis(traj: Trajectory, x_split: float = 0.0,
                   x_well_max: float = 3.0) -> DwellSummary:
    """Partition a forward trajectory by side of x = x_split.

    Crossings are recomputed for the given split (bisection-refined on the
    dense interpolant), so the split need not match the one used at
    integration time. Segments are attributed by the sign of x at their
    midpoint; time with |x| > x_well_max is reported as excursion_time and
    excluded from both sides.
    """
    if len(traj.times) >= 2 and traj.times[-1] < traj.times[0]:
        raise UsageError("dwell analysis expects a forward-in-time trajectory")
    events = well_crossings(traj, x_split)
    bounds = [float(traj.times[0])] + [e.time for e in events] + [float(traj.times[-1])]
    time_left = 0.0
    time_right = 0.0
    excursion = 0.0
    for k in range(len(bounds) - 1):
        ta, tb = bounds[k], bounds[k + 1]
        if tb <= ta:
            continue
        out = _excursion_portions(traj, ta, tb, x_well_max)
        excursion += out
        inside = (tb - ta) - out
        x_mid = float(traj.sample_dense([0.5 * (ta + tb)])[0, 0])
        if x_mid >= x_split:
            time_right += inside
        else:
            time_left += inside
    ratio = time_left / time_right if time_right > 0 else None
    return DwellSummary(
        time_left=time_left, time_right=time_right, excursion_time=excursion,
        flips=len(events), ratio=ratio, termination=traj.termination,
    )


# ---------------------------------------------------------------------------
# CCM initial data and double-well runs


def ccm_initial_momenta(sys: ExtendedSystem, e_r: float, delta_e: float,
                        x0: float, y0: float = 0.0, branch: int = 1):
    """Momenta putting (x0, y0) on the surface H_R = e_r, H_I = delta_e.

    With w = V(x0 + i y0) the pair solves p^2 - q^2 = 2m(e_r - Re w) and
    pq = m(Im w - delta_e) in closed form. Of the two sign-related solutions
    the one with p >= 0 and minimal |q| is returned (q >= 0 on ties);
    branch=-1 selects the other, (-p, -q).
    """
    if sys.flavor is not Flavor.CCM:
        raise UsageError("ccm_initial_momenta needs a CCM-flavor system")
    if branch not in (1, -1):
        raise UsageError("branch must be +1 or -1")
    m = sys.mass
    w = complex(sys.potential.eval_complex(np.complex128(x0 + 1j * y0)))
    a = 2.0 * m * (e_r - w.real)
    b = m * (w.imag - delta_e)
    disc = math.hypot(a, 2.0 * b)
    if a >= 0:
        p = math.sqrt(0.5 * (a + disc))
        q = b / p if p > 0 else 0.0
    else:
        q = math.copysign(math.sqrt(0.5 * (disc - a)), b) if b != 0 else math.sqrt(-a)
        p = b / q if b != 0 else 0.0
        if b == 0:
            # p = 0; both q signs give |q| equal, take q >= 0
            q = abs(q)
    return branch * p, branch * q


def ccm_double_well_run(sys: ExtendedSystem, e_r: float, delta_e: float,
                        x0="right", cfg: IntegratorConfig | None = None,
                        t_span=(0.0, 100.0), x_split: float = 0.0,
                        branch: int = 1) -> Trajectory:
    """CCM run started at a well bottom on the (e_r, delta_e) surface.

    x0 may be 'left'/'right' (resolved to the outermost minima of V) or an
    explicit abscissa. e_r must sit below the barrier when the potential has
    one, and delta_e must be nonzero; the run flips between wells through
    large excursions and eventually blows up in finite time.

    Keep the default (large) escape radius for dwell and sweep work: most
    excursions peak around |X| ~ 1e3..1e5 and return to the wells, so a
    small radius misclassifies them as escapes and truncates the flip
    sequence. Small radii (~50) are the right tool only when measuring
    conservation up to termination, where float64 evaluation of the
    conserved pair degrades beyond |X| ~ 1e2.
    """
    if sys.flavor is not Flavor.CCM:
        raise UsageError("ccm_double_well_run needs a CCM-flavor system")
    if delta_e == 0.0:
        raise UsageError("delta_e must be nonzero (the real slice never escapes)")
    top = barrier_height(sys.potential)
    if top is not None and e_r >= top:
        raise UsageError(
            f"e_r = {e_r!r} is not below the barrier V = {top!r}; "
            "dwell-ratio runs need sub-barrier real energy"
        )
    x_start = _resolve_well(sys.potential, x0)
    p, q = ccm_initial_momenta(sys, e_r, delta_e, x_start, 0.0, branch)
    if cfg is None:
        cfg = IntegratorConfig()
    return integrate(sys, (x_start, 0.0, p, q), t_span, cfg, x_split=x_split)


def mfqm_double_well_run(sys: ExtendedSystem, e: float, delta_e_prime: float,
                         x0="right", cfg: IntegratorConfig | None = None,
                         t_span=(0.0, 100.0), x_split: float = 0.0) -> Trajectory:
    """MFQM run whose chord ends straddle the barrier.

    Both chord ends start at the chosen well bottom x_b with y = 0: z- on
    the classical shell e - delta_e_prime (trapped) and z+ on the shell
    e + delta_e_prime (over the barrier), momenta taken positive. The chord
    midpoint then flips between wells while each end conserves its own
    classical energy.
    """
    if sys.flavor is not Flavor.MFQM:
        raise UsageError("mfqm_double_well_run needs an MFQM-flavor system")
    if delta_e_prime <= 0.0:
        raise UsageError("delta_e_prime must be positive")
    x_b = _resolve_well(sys.potential, x0)
    v_b = float(sys.potential.eval_real(np.array([x_b]))[0])
    e_minus = e - delta_e_prime
    e_plus = e + delta_e_prime
    if e_minus < v_b:
        raise DomainError(
            f"lower shell e - delta_e_prime = {e_minus!r} dips below the well "
            f"bottom V({x_b!r}) = {v_b!r}; no real momentum exists there"
        )
    top = barrier_height(sys.potential)
    if top is not None and not (e_minus < top < e_plus):
        raise DomainError(
            f"energy split must straddle the barrier: need e - delta_e_prime < "
            f"{top!r} < e + delta_e_prime, got ({e_minus!r}, {e_plus!r})"
        )
    m = sys.mass
    p_minus = math.sqrt(2.0 * m * (e_minus - v_b))
    p_plus = math.sqrt(2.0 * m * (e_plus - v_b))
    X0 = (x_b, 0.0, 0.5 * (p_plus + p_minus), 0.5 * (p_plus - p_minus))
    if cfg is None:
        cfg = IntegratorConfig()
    return integrate(sys, X0, t_span, cfg, x_split=x_split)


def chord_energy_logs(sys: ExtendedSystem, traj: Trajectory):
    """Classical energy of each chord end, per node: (E at z+, E at z-)."""
    x, y, p, q = (traj.points[:, i] for i in range(4))
    m = sys.mass
    V = sys.potential
    e_plus = (p + q) ** 2 / (2 * m) + V.eval_real(x + y)
    e_minus = (p - q) ** 2 / (2 * m) + V.eval_real(x - y)
    return e_plus, e_minus


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class UncertaintySweepRow:
    delta_e: float
    delta_t: float | None
    product: float | None
    flips: int
    termination: str


def uncertainty_sweep(sys: ExtendedSystem, e_r: float, delta_e_list,
                      x0="right", cfg: IntegratorConfig | None = None,
                      t_max: float = 600.0, x_split: float = 0.0):
    """First-return statistics for a list of delta_e values.

    delta_t is the gap between the first two refined crossings of x_split
    (the first full stay in the far well); rows where fewer than two
    crossings occur within t_max carry delta_t = None rather than a guess.
    Rows keep the input order.
    """
    rows = []
    for de in delta_e_list:
        de = float(de)
        if de <= 0:
            raise UsageError("delta_e values must be positive in a sweep")
        traj = ccm_double_well_run(sys, e_r, de, x0, cfg, (0.0, t_max),
                                   x_split=x_split)
        crossings = [ev for ev in traj.events if ev.kind == "well_crossing"]
        if len(crossings) >= 2:
            dt = crossings[1].time - crossings[0].time
            rows.append(UncertaintySweepRow(de, dt, de * dt, len(crossings),
                                            traj.termination))
        else:
            rows.append(UncertaintySweepRow(de, None, None, len(crossings),
                                            traj.termination))
    return rows


def classical_limit_sweep(sys: ExtendedSystem, hbar_list, xbar0,
                          t_span=(0.0, 8.0), n_samples: int = 400,
                          cfg: IntegratorConfig | None = None):
    """Deviation of MFQM (x, p) from the real classical flow as hbar shrinks.

    xbar0 = (x0, ybar0, p0, qbar0) fixes the initial point in rescaled
    coordinates; the run at each hbar starts from (x0, hbar*ybar0, p0,
    hbar*qbar0) while the reference starts from (x0, 0, p0, 0) under the
    classical flavor. Deviation is the max norm over a shared uniform time
    grid of the (x, p) difference. Returns [(hbar, deviation), ...] in
    input order.
    """
    if sys.flavor is not Flavor.MFQM:
        raise UsageError("classical_limit_sweep compares MFQM against classical")
    x0, ybar0, p0, qbar0 = (float(v) for v in xbar0)
    ts = np.linspace(float(t_span[0]), float(t_span[1]), n_samples)
    sys_cl = dataclasses.replace(sys, flavor=Flavor.CLASSICAL_REAL)
    ref = integrate(sys_cl, (x0, 0.0, p0, 0.0), t_span, cfg).sample_dense(ts)
    rows = []
    for hb in hbar_list:
        hb = float(hb)
        if hb <= 0:
            raise UsageError("hbar values must be positive")
        sys_h = dataclasses.replace(sys, hbar=hb)
        run = integrate(sys_h, (x0, hb * ybar0, p0, hb * qbar0), t_span, cfg)
        diff = run.sample_dense(ts)[:, [0, 2]] - ref[:, [0, 2]]
        rows.append((hb, float(np.max(np.abs(diff)))))
    return rows


# ---------------------------------------------------------------------------
# inverted harmonic rebound


@dataclass(frozen=True)
class ReboundReport:
    """Single-run rebound diagnostics plus the ensemble transmission check.

    A sub-separatrix start (E_x < 0, x < 0) never reaches x = 0; the closest
    approach is sqrt(-2 E_x) for the inverted harmonic potential. The
    Monte Carlo fraction counts how much of a Gaussian cloud at the same
    center sits above the separatrix and so does cross.
    """

    e_x: float
    crossings: int
    min_abs_x: float
    expected_min_abs_x: float
    separatrix_fraction: float
    n_samples: int
    termination: str


def rebound_check(sys: ExtendedSystem, X0, t_span=(0.0, 20.0),
                  cfg: IntegratorConfig | None = None,
                  sigma_x: float = 2**-0.5, sigma_p: float = 2**-0.5,
                  n_samples: int = 100_000, seed: int = 2024) -> ReboundReport:
    from .ensemble import sample_gaussian_wigner, separatrix_fraction

    if sys.potential.label != "inverted_harmonic" or sys.flavor is not Flavor.MFQM:
        raise UsageError("rebound_check runs MFQM on the inverted harmonic potential")
    X0 = np.asarray(X0, float).reshape(4)
    m = sys.mass
    e_x = X0[2] ** 2 / (2 * m) + float(sys.potential.eval_real(X0[:1])[0])
    if not (e_x < 0 and X0[0] < 0):
        raise UsageError(
            f"rebound needs a start below the separatrix: E_x = {e_x!r} must be "
            f"negative and x0 = {X0[0]!r} must sit left of the barrier top"
        )
    traj = integrate(sys, X0, t_span, cfg, x_split=0.0)
    crossings = sum(1 for ev in traj.events if ev.kind == "well_crossing")
    ts = np.linspace(float(traj.times[0]), float(traj.times[-1]), 4096)
    xs = traj.sample_dense(ts)[:, 0]
    min_abs = float(min(np.min(np.abs(xs)), np.min(np.abs(traj.points[:, 0]))))
    samples = sample_gaussian_wigner(float(X0[0]), float(X0[2]), sigma_x, sigma_p,
                                     n_samples, seed, hbar=sys.hbar)
    sys_cl = dataclasses.replace(sys, flavor=Flavor.CLASSICAL_REAL)
    frac = separatrix_fraction(samples, sys_cl)
    return ReboundReport(
        e_x=float(e_x), crossings=crossings, min_abs_x=min_abs,
        expected_min_abs_x=math.sqrt(-2.0 * e_x), separatrix_fraction=frac,
        n_samples=n_samples, termination=traj.termination,
    )


# ---------------------------------------------------------------------------
# CCM dwell ratios against the eigenvalue oracle


@dataclass(frozen=True)
class ComparisonRow:
    delta_e: float
    time_left: float
    time_right: float
    fraction_left: float | None
    ratio: float | None
    flips: int
    termination: str


@dataclass(frozen=True)
class ComparisonTable:
    """Dwell fractions per delta_e next to the quantum well probabilities.

    extrapolated_ratio is the linear delta_e -> 0 extrapolation of the dwell
    ratio over the three smallest delta_e with a defined ratio, or None when
    fewer than three qualify. The table reports both sides; it asserts no
    agreement.
    """

    rows: tuple
    e_r: float
    level: int
    convention: str
    quantum_p_left: float
    quantum_p_right: float
    doublet: tuple
    extrapolated_ratio: float | None


def ccm_vs_quantum_report(sys: ExtendedSystem, delta_e_list, e_r: float | None = None,
                          level: int = 0, convention: str = "symmetric",
                          x0="right", grid: Grid1D | None = None,
                          spectrum: SpectrumResult | None = None,
                          cfg: IntegratorConfig | None = None,
                          t_max: float = 600.0, x_split: float = 0.0,
                          x_well_max: float = 3.0) -> ComparisonTable:
    """Run the CCM double well over delta_e_list and tabulate dwell ratios
    next to eigenstate well probabilities at the same hbar.

    e_r defaults to the oracle energy of the requested level. convention
    'symmetric' reports the probabilities of eigenstate `level`;
    'localized' reports those of (psi_level + psi_level+1)/sqrt(2) signed to
    localize in the starting well.
    """
    if sys.flavor is not Flavor.CCM:
        raise UsageError("ccm_vs_quantum_report needs a CCM-flavor system")
    if convention not in ("symmetric", "localized"):
        raise UsageError(f"unknown state convention {convention!r}")
    if grid is None:
        grid = Grid1D(-4.0, 4.0, 4001)
    if spectrum is None:
        spectrum = eigensolve(sys.potential, grid, hbar=sys.hbar, mass=sys.mass,
                              k=level + 2)
    if e_r is None:
        e_r = float(spectrum.energies[level])
    if convention == "symmetric":
        p_left, p_right = well_probabilities(spectrum, level, x_split)
    else:
        start_right = _resolve_well(sys.potential, x0) >= x_split
        cands = [grid_probability_split(localized_combination(spectrum, level, s),
                                        grid, x_split) for s in (1, -1)]
        key = (lambda c: c[1]) if start_right else (lambda c: c[0])
        p_left, p_right = max(cands, key=key)
    rows = []
    for de in delta_e_list:
        traj = ccm_double_well_run(sys, e_r, float(de), x0, cfg, (0.0, t_max),
                                   x_split=x_split)
        dw = dwell_analysis(traj, x_split, x_well_max)
        rows.append(ComparisonRow(
            delta_e=float(de), time_left=dw.time_left, time_right=dw.time_right,
            fraction_left=dw.fraction_left, ratio=dw.ratio, flips=dw.flips,
            termination=dw.termination,
        ))
    defined = sorted((r for r in rows if r.ratio is not None),
                     key=lambda r: r.delta_e)[:3]
    extrapolated = None
    if len(defined) == 3:
        xs = np.array([r.delta_e for r in defined])
        ys = np.array([r.ratio for r in defined])
        extrapolated = float(np.polyfit(xs, ys, 1)[1])
    return ComparisonTable(
        rows=tuple(rows), e_r=float(e_r), level=level, convention=convention,
        quantum_p_left=float(p_left), quantum_p_right=float(p_right),
        doublet=(float(spectrum.energies[level]), float(spectrum.energies[level + 1])),
        extrapolated_ratio=extrapolated,
    )


# ---------------------------------------------------------------------------
# structural identity battery


def identity_battery(V: Potential, mass: float = 1.0, hbar: float = 0.1,
                     n: int = 1000, seed: int = 7, box: float = 2.0) -> dict:
    """Max residuals of the structural identities at n random points.

    Checks, per point: the generator/constraint Poisson brackets in both
    flavors, the Gamma and Lambda gradient relations, and the two
    complexification identities tying the flavors together. All residuals
    should sit at rounding level for polynomial potentials.
    """
    if n <= 0:
        raise UsageError("need n > 0 sample points")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-box, box, size=(n, 4))
    sys_m = ExtendedSystem(V, mass, Flavor.MFQM, hbar)
    sys_c = ExtendedSystem(V, mass, Flavor.CCM, hbar)
    out = {
        "bracket_mfqm": 0.0,
        "bracket_ccm": 0.0,
        "gamma": 0.0,
        "lambda": 0.0,
        "complexification_r": 0.0,
        "complexification_i": 0.0,
    }
    for X in pts:
        gm = generator(sys_m, X)
        cm = constraint(sys_m, X)
        out["bracket_mfqm"] = max(out["bracket_mfqm"], abs(poisson_bracket(cm, gm)))
        gc = generator(sys_c, X)
        cc = constraint(sys_c, X)
        out["bracket_ccm"] = max(out["bracket_ccm"], abs(poisson_bracket(cc, gc)))
        out["gamma"] = max(out["gamma"], check_gamma_relation(sys_m, X))
        out["lambda"] = max(out["lambda"], check_lambda_relation(sys_c, X))
        r1, r2 = complexification_identity(sys_m, sys_c, X)
        out["complexification_r"] = max(out["complexification_r"], r1)
        out["complexification_i"] = max(out["complexification_i"], r2)
    return out


# ---------------------------------------------------------------------------
# level-set geometry and samplers (boundedness checks)


def _vbar_min_along(V, s: float, other: np.ndarray, axis: int) -> float:
    """min over the other coordinate of Vbar at x = s (axis 0) or y = s."""
    line = 0.5 * (V.eval_real(s + other) + V.eval_real(s - other))
    j = int(np.argmin(line))
    a = other[max(j - 2, 0)]
    b = other[min(j + 2, len(other) - 1)]
    if a == b:
        return float(line[j])

    def f(t):
        if axis == 0:
            pts = np.array([s + t, s - t])
        else:
            pts = np.array([t + s, t - s])
        v = V.eval_real(pts)
        return 0.5 * float(v[0] + v[1])

    res = optimize.minimize_scalar(f, bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12})
    return min(float(res.fun), float(line[j]))


def _coordinate_bound(V, e: float, vals: np.ndarray, other: np.ndarray,
                      col_min: np.ndarray, axis: int) -> float:
    """Largest |s| with min_other Vbar(s, .) <= e, boundary-refined."""
    feasible = np.nonzero(col_min <= e)[0]
    lo, hi = int(feasible[0]), int(feasible[-1])
    n = len(vals)
    if lo == 0 or hi == n - 1:
        raise DomainError(
            f"the region Vbar <= {e!r} touches the scan box edge; "
            "increase extent"
        )

    def g(s):
        return _vbar_min_along(V, float(s), other, axis) - e

    out = 0.0
    for inner, step in ((hi, 1), (lo, -1)):
        k = inner + step
        while 0 < k < n - 1 and g(vals[k]) <= 0:
            k += step
        a, b = vals[inner], vals[k]
        root = optimize.brentq(g, min(a, b), max(a, b), xtol=1e-12) \
            if g(vals[inner]) <= 0 else vals[inner]
        out = max(out, abs(float(root)))
    return out


def mfqm_level_set_bound(sys: ExtendedSystem, e: float, extent: float = 2.5,
                         n: int = 601) -> float:
    """Largest coordinate magnitude attainable on the surface H+ = e.

    On that surface (x, y) are confined to {Vbar <= e} with
    Vbar(x, y) = (V(x+y) + V(x-y))/2 and max(|p|, |q|) <=
    sqrt(2m(e - min Vbar)). A grid scan brackets the feasible region, a
    bounded 1D minimization refines the cross-section minima, and the
    coordinate extremes come from root-finding on the boundary, so the
    result is accurate to ~1e-10 rather than one grid cell.
    """
    if sys.flavor is not Flavor.MFQM:
        raise UsageError("the level-set bound applies to the MFQM generator")
    V = sys.potential
    m = sys.mass
    xs = np.linspace(-extent, extent, n)
    ys = xs.copy()
    Xg, Yg = np.meshgrid(xs, ys, indexing="ij")
    vbar = 0.5 * (V.eval_real(Xg + Yg) + V.eval_real(Xg - Yg))
    if not (vbar <= e).any():
        raise DomainError(
            f"no point of [{-extent}, {extent}]^2 satisfies Vbar <= {e!r}"
        )
    bound_x = _coordinate_bound(V, e, xs, ys, vbar.min(axis=1), axis=0)
    bound_y = _coordinate_bound(V, e, ys, xs, vbar.min(axis=0), axis=1)
    i, j = np.unravel_index(int(np.argmin(vbar)), vbar.shape)
    res = optimize.minimize(
        lambda z: 0.5 * float(np.sum(V.eval_real(np.array([z[0] + z[1],
                                                           z[0] - z[1]])))),
        x0=[xs[i], ys[j]], method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14})
    v_min = min(float(res.fun), float(vbar[i, j]))
    mom_bound = math.sqrt(2.0 * m * max(e - v_min, 0.0))
    return max(bound_x, bound_y, mom_bound)


def sample_mfqm_level_set(sys: ExtendedSystem, e: float, n: int, seed: int,
                          extent: float = 2.0) -> np.ndarray:
    """n points exactly on H+ = e: rejection-sample (x, y) in the feasible
    box, then put the momenta on the circle p^2 + q^2 = 2m(e - Vbar) at a
    uniform angle. Returns an (n, 4) array."""
    if sys.flavor is not Flavor.MFQM:
        raise UsageError("sample_mfqm_level_set needs an MFQM-flavor system")
    if n <= 0:
        raise UsageError("need n > 0 samples")
    rng = np.random.default_rng(seed)
    V = sys.potential
    m = sys.mass
    kept_xy = []
    kept_v = []
    total = 0
    for _ in range(1000):
        xy = rng.uniform(-extent, extent, size=(max(4 * n, 256), 2))
        vbar = 0.5 * (V.eval_real(xy[:, 0] + xy[:, 1]) + V.eval_real(xy[:, 0] - xy[:, 1]))
        ok = vbar <= e
        kept_xy.append(xy[ok])
        kept_v.append(vbar[ok])
        total += int(ok.sum())
        if total >= n:
            break
    else:
        raise DomainError(
            f"could not find points with Vbar <= {e!r} inside the sampling box; "
            "the surface may be empty at this energy"
        )
    xy = np.concatenate(kept_xy)[:n]
    vbar = np.concatenate(kept_v)[:n]
    r = np.sqrt(2.0 * m * (e - vbar))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    out = np.empty((n, 4))
    out[:, 0] = xy[:, 0]
    out[:, 1] = xy[:, 1]
    out[:, 2] = r * np.cos(theta)
    out[:, 3] = r * np.sin(theta)
    return out


def sample_ccm_level_set(sys: ExtendedSystem, e_r: float, delta_e: float,
                         n: int, seed: int, extent: float = 2.0) -> np.ndarray:
    """n points exactly on H_R = e_r, H_I = delta_e: (x, y) uniform over the
    box, momenta from the closed form with a random branch sign."""
    if sys.flavor is not Flavor.CCM:
        raise UsageError("sample_ccm_level_set needs a CCM-flavor system")
    if n <= 0:
        raise UsageError("need n > 0 samples")
    rng = np.random.default_rng(seed)
    out = np.empty((n, 4))
    for i in range(n):
        x, y = rng.uniform(-extent, extent, size=2)
        branch = 1 if rng.random() < 0.5 else -1
        p, q = ccm_initial_momenta(sys, e_r, delta_e, float(x), float(y), branch)
        out[i] = (x, y, p, q)
    return out
