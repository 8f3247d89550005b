import math

import numpy as np
import pytest

from xphase import DomainError, ExtendedSystem, Flavor, IntegratorConfig, UsageError, integrate
from xphase.analysis import (
    barrier_height,
    ccm_double_well_run,
    ccm_initial_momenta,
    ccm_vs_quantum_report,
    chord_energy_logs,
    classical_limit_sweep,
    dwell_analysis,
    fit_sho_ellipse,
    identity_battery,
    mfqm_double_well_run,
    mfqm_level_set_bound,
    rebound_check,
    sample_ccm_level_set,
    sample_mfqm_level_set,
    stationary_points,
    uncertainty_sweep,
    well_minima,
)
from xphase.hamiltonians import h_i, h_plus, h_r
from xphase.potentials import double_well, harmonic, inverted_harmonic

# largest |coordinate| on the double-well surface H+ = 1/2: the feasible
# region edge solves [V(x) + V(-x)]/2 = 1/2, giving x^2 = 1 + 2**-0.5
DW_BOUND_HALF = math.sqrt(1.0 + 2.0 ** -0.5)


def _dw(flavor):
    return ExtendedSystem(double_well(), flavor=flavor)


# ---------------------------------------------------------------- potentials


def test_stationary_structure():
    np.testing.assert_allclose(stationary_points(double_well()), [-1.0, 0.0, 1.0],
                               atol=1e-9)
    np.testing.assert_allclose(well_minima(double_well()), [-1.0, 1.0], atol=1e-9)
    assert barrier_height(double_well()) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(well_minima(harmonic()), [0.0], atol=1e-12)
    assert barrier_height(harmonic()) is None
    assert len(well_minima(inverted_harmonic())) == 0
    assert barrier_height(inverted_harmonic()) is None


# -------------------------------------------------------------- ellipse fits


def test_ellipse_fit_hand_case():
    sys = ExtendedSystem(harmonic(), flavor=Flavor.MFQM)
    traj = integrate(sys, [1.0, 0.0, 0.0, 1.0], (0.0, 4.0 * math.pi))
    fit = fit_sho_ellipse(traj, sys)
    assert fit.omega == pytest.approx(1.0, abs=1e-9)
    assert fit.A == pytest.approx(1.0, abs=1e-8)
    assert fit.B == pytest.approx(1.0, abs=1e-8)
    assert fit.alpha1 == pytest.approx(math.pi / 2.0, abs=1e-8)
    assert fit.alpha2 == pytest.approx(0.0, abs=1e-8)
    assert fit.residual_rms < 1e-8
    # m w^2 A B cos(alpha1 - alpha2) with a 90 degree offset vanishes
    assert abs(fit.constraint_estimate) < 1e-8
    assert abs(traj.constraint_log[0]) < 1e-12


def test_ellipse_fit_agrees_across_flavors():
    X0 = [1.0, 0.5, 0.0, 0.0]
    fits = []
    for flavor in (Flavor.MFQM, Flavor.CCM):
        sys = ExtendedSystem(harmonic(), flavor=flavor)
        traj = integrate(sys, X0, (0.0, 10.0 * 2.0 * math.pi))
        fit = fit_sho_ellipse(traj, sys)
        assert fit.residual_rms < 1e-8
        # fitted invariant reproduces the logged conserved partner
        assert fit.constraint_estimate == pytest.approx(
            float(traj.constraint_log[0]), abs=1e-8)
        fits.append(fit)
    a, b = fits
    assert a.A == pytest.approx(b.A, abs=1e-8)
    assert a.B == pytest.approx(b.B, abs=1e-8)
    assert a.constraint_estimate == pytest.approx(0.5, abs=1e-8)
    assert b.constraint_estimate == pytest.approx(0.5, abs=1e-8)


def test_ellipse_fit_requires_harmonic():
    sys = _dw(Flavor.MFQM)
    traj = integrate(sys, [1.0, 0.1, 0.0, 0.0], (0.0, 5.0))
    with pytest.raises(UsageError, match="harmonic"):
        fit_sho_ellipse(traj, sys)


# ------------------------------------------------------------ dwell analysis


def test_dwell_on_a_shifted_sine():
    # x(t) = sin(t + phi): left/right dwell both equal pi over one period
    phi = 0.7
    sys = ExtendedSystem(harmonic(), flavor=Flavor.CLASSICAL_REAL)
    X0 = [math.sin(phi), 0.0, math.cos(phi), 0.0]
    traj = integrate(sys, X0, (0.0, 2.0 * math.pi))
    d = dwell_analysis(traj)
    assert d.flips == 2
    assert d.time_left == pytest.approx(math.pi, abs=1e-6)
    assert d.time_right == pytest.approx(math.pi, abs=1e-6)
    assert d.excursion_time == 0.0
    assert d.ratio == pytest.approx(1.0, abs=1e-6)
    assert d.fraction_left == pytest.approx(0.5, abs=1e-6)


def test_dwell_partition_sums_to_duration():
    sys = _dw(Flavor.CCM)
    traj = ccm_double_well_run(sys, 0.5, 0.2, t_span=(0.0, 150.0))
    d = dwell_analysis(traj)
    total = d.time_left + d.time_right + d.excursion_time
    assert total == pytest.approx(traj.duration, abs=1e-9)
    assert d.termination == traj.termination


def test_dwell_rejects_backward_runs():
    sys = ExtendedSystem(harmonic(), flavor=Flavor.CLASSICAL_REAL)
    traj = integrate(sys, [1.0, 0.0, 0.0, 0.0], (0.0, -3.0))
    with pytest.raises(UsageError):
        dwell_analysis(traj)


# ------------------------------------------------------- level-surface setup


def test_ccm_initial_momenta_hand_case():
    # harmonic at x0 = 1: V(1) = 1/2 = e_r, so p^2 = q^2 and pq = -1/4
    sys = ExtendedSystem(harmonic(), flavor=Flavor.CCM)
    p, q = ccm_initial_momenta(sys, 0.5, 0.25, 1.0)
    assert (p, q) == (0.5, -0.5)
    p2, q2 = ccm_initial_momenta(sys, 0.5, 0.25, 1.0, branch=-1)
    assert (p2, q2) == (-0.5, 0.5)


def test_ccm_initial_momenta_negative_a_branch():
    # start on the barrier top where e_r < V(x0)
    sys = _dw(Flavor.CCM)
    p, q = ccm_initial_momenta(sys, 0.5, 0.1, 0.0)
    X = np.array([0.0, 0.0, p, q])
    assert h_r(sys, X).value == pytest.approx(0.5, abs=1e-12)
    assert h_i(sys, X).value == pytest.approx(0.1, abs=1e-12)
    assert q < 0 < p


def test_ccm_initial_momenta_always_on_surface():
    sys = _dw(Flavor.CCM)
    rng = np.random.default_rng(17)
    for _ in range(60):
        e_r = rng.uniform(-1.0, 2.0)
        de = rng.uniform(-0.5, 0.5)
        x0 = rng.uniform(-1.8, 1.8)
        y0 = rng.uniform(-0.8, 0.8)
        branch = 1 if rng.random() < 0.5 else -1
        p, q = ccm_initial_momenta(sys, e_r, de, x0, y0, branch)
        X = np.array([x0, y0, p, q])
        assert h_r(sys, X).value == pytest.approx(e_r, abs=1e-11)
        assert h_i(sys, X).value == pytest.approx(de, abs=1e-11)


def test_ccm_initial_momenta_degenerate_case():
    sys = _dw(Flavor.CCM)
    p, q = ccm_initial_momenta(sys, 0.0, 0.0, 0.0)  # a < 0 with b = 0
    assert p == 0.0
    assert abs(q) == pytest.approx(math.sqrt(2.0), abs=1e-12)


# ------------------------------------------------------------ prepared runs


def test_ccm_run_stays_put_at_tiny_leak():
    sys = _dw(Flavor.CCM)
    traj = ccm_double_well_run(sys, 0.5, 0.01, t_span=(0.0, 20.0))
    assert traj.termination == "completed"
    assert len([ev for ev in traj.events if ev.kind == "well_crossing"]) == 0
    assert np.min(traj.points[:, 0]) > 0.0


def test_ccm_run_flips_wells():
    sys = _dw(Flavor.CCM)
    traj = ccm_double_well_run(sys, 0.3, 0.2, t_span=(0.0, 300.0))
    d = dwell_analysis(traj)
    assert d.flips >= 1
    assert d.time_left > 0.0


def test_ccm_run_input_guards():
    sys = _dw(Flavor.CCM)
    with pytest.raises(UsageError):
        ccm_double_well_run(sys, 0.5, 0.0)
    with pytest.raises(UsageError):
        ccm_double_well_run(sys, 1.2, 0.1)  # at/above the barrier


def test_ccm_left_start_mirrors_right_start():
    # V is even, so negating all coordinates maps solutions to solutions
    sys = _dw(Flavor.CCM)
    right = ccm_double_well_run(sys, 0.5, 0.2, x0="right", branch=1,
                                t_span=(0.0, 100.0))
    left = ccm_double_well_run(sys, 0.5, 0.2, x0="left", branch=-1,
                               t_span=(0.0, 100.0))
    dr = dwell_analysis(right)
    dl = dwell_analysis(left)
    assert dl.time_left == pytest.approx(dr.time_right, abs=1e-9)
    assert dl.time_right == pytest.approx(dr.time_left, abs=1e-9)
    assert dl.flips == dr.flips


def test_mfqm_run_chord_energies_are_pinned():
    sys = _dw(Flavor.MFQM)
    traj = mfqm_double_well_run(sys, 0.6, 0.6, t_span=(0.0, 100.0))
    e_plus, e_minus = chord_energy_logs(sys, traj)
    assert np.max(np.abs(e_plus - 1.2)) < 1e-8
    assert np.max(np.abs(e_minus - 0.0)) < 1e-8
    # generator log equals the shell mean, constraint log the half-difference
    assert traj.generator_log[0] == pytest.approx(0.6, abs=1e-12)
    assert traj.constraint_log[0] == pytest.approx(0.6, abs=1e-12)


def test_mfqm_run_rejects_bad_shells():
    sys = _dw(Flavor.MFQM)
    with pytest.raises(DomainError):
        mfqm_double_well_run(sys, 0.6, 0.2)  # both shells below the barrier
    with pytest.raises(DomainError):
        mfqm_double_well_run(sys, 0.1, 0.3)  # lower shell under the well floor


# --------------------------------------------------------------- the sweeps


def test_uncertainty_sweep_decade():
    sys = _dw(Flavor.CCM)
    rows = uncertainty_sweep(sys, 0.5, [1.0, 0.5, 0.2, 0.1])
    assert [r.delta_e for r in rows] == [1.0, 0.5, 0.2, 0.1]
    assert all(r.delta_t is not None for r in rows)
    products = [r.product for r in rows]
    assert min(products) > 4.5
    assert max(products) < 8.0
    # regenerating the sweep reproduces it float-for-float
    again = uncertainty_sweep(sys, 0.5, [1.0, 0.5, 0.2, 0.1])
    assert [(r.delta_e, r.delta_t) for r in again] == [(r.delta_e, r.delta_t) for r in rows]


def test_uncertainty_sweep_rejects_nonpositive_delta_e():
    sys = _dw(Flavor.CCM)
    with pytest.raises(UsageError):
        uncertainty_sweep(sys, 0.5, [0.5, 0.0])


def test_classical_limit_sweep_double_well():
    sys = _dw(Flavor.MFQM)
    rows = classical_limit_sweep(sys, [0.4, 0.2, 0.1, 0.05], [0.8, 1.0, 0.4, 1.0])
    devs = [dev for _, dev in rows]
    assert all(devs[i] > devs[i + 1] for i in range(3))
    np.testing.assert_allclose(
        devs,
        [0.9804597280616445, 0.6324247922372462, 0.25323151222675394,
         0.0698333205029048],
        rtol=1e-6,
    )


def test_classical_limit_sweep_sho_is_exact():
    # quadratic potentials decouple (x, p) from the width pair entirely,
    # so the deviation sits at integration tolerance for every hbar
    sys = ExtendedSystem(harmonic(), flavor=Flavor.MFQM)
    rows = classical_limit_sweep(sys, [0.4, 0.1], [0.8, 1.0, 0.4, 1.0])
    for _, dev in rows:
        assert dev < 1e-7


def test_classical_limit_sweep_requires_mfqm():
    sys = _dw(Flavor.CCM)
    with pytest.raises(UsageError):
        classical_limit_sweep(sys, [0.1], [0.8, 1.0, 0.4, 1.0])


# ------------------------------------------------------------------- rebound


def test_rebound_no_crossing_below_separatrix():
    sys = ExtendedSystem(inverted_harmonic(), flavor=Flavor.MFQM)
    report = rebound_check(sys, [-3.0, 1.0, 0.0, 2.0], n_samples=20_000)
    assert report.e_x == pytest.approx(-4.5, abs=1e-12)
    assert report.crossings == 0
    assert report.min_abs_x == pytest.approx(3.0, abs=1e-6)
    assert report.expected_min_abs_x == pytest.approx(3.0, abs=1e-12)


def test_rebound_turning_point_matches_energy():
    sys = ExtendedSystem(inverted_harmonic(), flavor=Flavor.MFQM)
    report = rebound_check(sys, [-3.0, 0.0, 2.0, 0.0], n_samples=20_000)
    assert report.crossings == 0
    expected = math.sqrt(5.0)
    assert report.expected_min_abs_x == pytest.approx(expected, abs=1e-12)
    assert report.min_abs_x >= expected - 1e-9
    assert report.min_abs_x == pytest.approx(expected, abs=1e-4)


def test_rebound_fraction_matches_oracle():
    sys = ExtendedSystem(inverted_harmonic(), flavor=Flavor.MFQM)
    report = rebound_check(sys, [-3.0, 0.0, 0.0, 0.0])
    assert report.n_samples == 100_000
    assert abs(report.separatrix_fraction - 0.002696151613868509) < 3.0 / math.sqrt(1e5)


def test_rebound_rejects_over_the_barrier_energies():
    sys = ExtendedSystem(inverted_harmonic(), flavor=Flavor.MFQM)
    with pytest.raises(UsageError, match="separatrix"):
        rebound_check(sys, [-3.0, 0.0, 3.1, 0.0], n_samples=100)


# -------------------------------------------------------- quantum comparison


def test_ccm_vs_quantum_report():
    sys = _dw(Flavor.CCM)
    table = ccm_vs_quantum_report(sys, [0.4, 0.2, 0.1], t_max=300.0)
    assert table.quantum_p_left == pytest.approx(0.5, abs=1e-6)
    assert table.quantum_p_right == pytest.approx(0.5, abs=1e-6)
    e0, e1 = table.doublet
    assert 0.0 < e1 - e0 < 1e-6
    assert table.e_r == pytest.approx(0.1388109830820899, abs=1e-10)
    assert [r.delta_e for r in table.rows] == [0.4, 0.2, 0.1]
    for row in table.rows:
        assert row.time_left + row.time_right > 0.0
    defined = [r for r in table.rows if r.ratio is not None]
    if len(defined) >= 3:
        assert table.extrapolated_ratio is not None
        assert math.isfinite(table.extrapolated_ratio)


def test_ccm_vs_quantum_localized_convention():
    sys = _dw(Flavor.CCM)
    table = ccm_vs_quantum_report(sys, [0.4], convention="localized", t_max=60.0)
    assert table.convention == "localized"
    # the combination is picked to localize in the starting (right) well
    assert table.quantum_p_right > 0.999
    with pytest.raises(UsageError):
        ccm_vs_quantum_report(sys, [0.4], convention="both", t_max=60.0)


# ------------------------------------------------------- identities, bounds


def test_identity_battery_residuals():
    for V in (harmonic(), inverted_harmonic(), double_well()):
        out = identity_battery(V, n=200)
        assert set(out) == {"bracket_mfqm", "bracket_ccm", "gamma", "lambda",
                            "complexification_r", "complexification_i"}
        for key, val in out.items():
            assert val < 1e-10, (V.label, key, val)


def test_level_set_bound_double_well():
    sys = _dw(Flavor.MFQM)
    bound = mfqm_level_set_bound(sys, 0.5)
    assert bound == pytest.approx(DW_BOUND_HALF, abs=1e-9)


def test_level_set_bound_harmonic_and_momentum_regimes():
    sho = ExtendedSystem(harmonic(), flavor=Flavor.MFQM)
    assert mfqm_level_set_bound(sho, 0.5) == pytest.approx(1.0, abs=1e-9)
    # at e = 1.5 on the double well the momentum circle is the widest direction
    sys = _dw(Flavor.MFQM)
    assert mfqm_level_set_bound(sys, 1.5) == pytest.approx(math.sqrt(3.0), abs=1e-9)


def test_level_set_bound_guards():
    sho = ExtendedSystem(harmonic(), flavor=Flavor.MFQM)
    with pytest.raises(DomainError):
        mfqm_level_set_bound(sho, -0.5)  # empty level set
    sys = _dw(Flavor.MFQM)
    with pytest.raises(DomainError, match="extent"):
        mfqm_level_set_bound(sys, 3.0, extent=1.2)  # region spills past the box


def test_mfqm_sampler_is_exactly_on_shell():
    sys = _dw(Flavor.MFQM)
    pts = sample_mfqm_level_set(sys, 0.5, 64, seed=5)
    assert pts.shape == (64, 4)
    bound = mfqm_level_set_bound(sys, 0.5)
    for X in pts:
        assert h_plus(sys, X).value == pytest.approx(0.5, abs=1e-12)
        assert np.max(np.abs(X)) <= bound + 1e-9
    again = sample_mfqm_level_set(sys, 0.5, 64, seed=5)
    np.testing.assert_array_equal(pts, again)


def test_ccm_sampler_is_exactly_on_shell():
    sys = _dw(Flavor.CCM)
    pts = sample_ccm_level_set(sys, 0.5, 0.1, 64, seed=5)
    assert pts.shape == (64, 4)
    for X in pts:
        assert h_r(sys, X).value == pytest.approx(0.5, abs=1e-10)
        assert h_i(sys, X).value == pytest.approx(0.1, abs=1e-10)
