"""Mean-field fixed points, stability classification, bifurcation threshold."""

import math

import numpy as np
import pytest

from jjmaser.fock import bessel_j1, bessel_j1_prime
from jjmaser.models import JosephsonParams
from jjmaser.semiclassical import (
    AMPLITUDE_LOCKED,
    PHASE_LOCKED,
    ScState,
    bifurcation_scan,
    eom_rhs,
    find_fixed_points,
    integrate_trajectory,
)

X_FIRST_MAX = 1.8411837813406593  # first maximum of J_1


def params(ej, delta0=0.1):
    return JosephsonParams(ej_star_ratio=ej, delta0=delta0, cutoff=2)


def analytic_threshold(delta0):
    return X_FIRST_MAX**2 / (4.0 * delta0**2 * bessel_j1(X_FIRST_MAX))


# ---------------------------------------------------------------------------
# equations of motion
# ---------------------------------------------------------------------------


def test_phase_rate_vanishes_at_zero_phase():
    for amp in (0.2, 1.0, 4.0):
        dphi, _ = eom_rhs(ScState(amplitude=amp, phase=0.0), params(30.0))
        assert dphi == 0.0


def test_phase_rate_vanishes_at_bessel_maximum():
    delta0 = 0.25
    amp = X_FIRST_MAX / (2.0 * delta0)
    for phase in (0.4, 1.1, 2.9):
        dphi, _ = eom_rhs(ScState(amplitude=amp, phase=phase), params(30.0, delta0))
        assert abs(dphi) < 1e-12 * 30.0


def test_small_amplitude_radial_rate():
    p = params(12.0, 0.2)
    amp = 1e-8
    _, damp = eom_rhs(ScState(amplitude=amp, phase=0.0), p)
    assert damp == pytest.approx(-0.5 * amp + 0.5 * 12.0 * 0.2, rel=1e-9)


def test_zero_amplitude_never_raises():
    dphi, damp = eom_rhs(ScState(amplitude=0.0, phase=0.0), params(12.0, 0.2))
    assert dphi == 0.0
    assert damp == pytest.approx(0.5 * 12.0 * 0.2, rel=1e-12)


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------


def test_undriven_fixed_point_is_vacuum():
    pts = find_fixed_points(params(0.0))
    assert len(pts) == 1
    assert pts[0].state.amplitude == 0.0
    assert pts[0].stable


def test_weak_drive_unique_stable_phase_locked_point():
    pts = find_fixed_points(params(30.0))
    stable = [p for p in pts if p.stable]
    assert len(stable) == 1
    assert stable[0].kind == PHASE_LOCKED
    assert stable[0].state.phase == 0.0
    assert 2.0 * 0.1 * stable[0].state.amplitude < X_FIRST_MAX


def test_strong_drive_amplitude_locked_pair():
    pts = find_fixed_points(params(300.0))
    stable = [p for p in pts if p.stable]
    assert {p.kind for p in stable} == {AMPLITUDE_LOCKED}
    assert len(stable) == 2
    amp = X_FIRST_MAX / (2.0 * 0.1)
    for p in stable:
        assert p.state.amplitude == pytest.approx(amp, rel=1e-10)
    assert stable[0].state.phase == pytest.approx(-stable[1].state.phase, abs=1e-12)
    unstable_pl = [p for p in pts if p.kind == PHASE_LOCKED and not p.stable]
    assert unstable_pl  # the old branch persists but repels


def test_fixed_point_residuals_and_kind_invariants():
    for ej in (5.0, 50.0, 145.0, 300.0):
        for fp in find_fixed_points(params(ej)):
            dphi, damp = eom_rhs(fp.state, params(ej))
            assert max(abs(dphi), abs(damp)) < 1e-9
            if fp.kind == PHASE_LOCKED:
                assert abs(math.sin(fp.state.phase)) < 1e-9
            else:
                assert abs(bessel_j1_prime(2.0 * 0.1 * fp.state.amplitude)) < 1e-9


# ---------------------------------------------------------------------------
# bifurcation scan
# ---------------------------------------------------------------------------


def test_threshold_matches_analytic_value():
    scan = bifurcation_scan(params(1.0), np.linspace(50.0, 250.0, 9))
    want = analytic_threshold(0.1)
    assert scan.threshold == pytest.approx(want, rel=1e-5)


def test_branch_kinds_change_at_threshold():
    scan = bifurcation_scan(params(1.0), np.linspace(50.0, 250.0, 9))
    for ej, fp in scan.rows:
        if not fp.stable:
            continue
        if ej < scan.threshold:
            assert fp.kind == PHASE_LOCKED
        elif ej > scan.threshold * (1 + 1e-9):
            assert fp.kind == AMPLITUDE_LOCKED


def test_threshold_continuous_in_delta0():
    t1 = bifurcation_scan(params(1.0, 0.100), np.linspace(100.0, 200.0, 5)).threshold
    t2 = bifurcation_scan(params(1.0, 0.101), np.linspace(100.0, 200.0, 5)).threshold
    assert t1 is not None and t2 is not None
    assert abs(t1 - t2) / t1 < 0.05
    assert t2 < t1  # larger zero-point spread needs less drive


def test_no_transition_reported_as_none():
    scan = bifurcation_scan(params(1.0), np.linspace(1.0, 10.0, 4))
    assert scan.threshold is None
    with pytest.raises(ValueError):
        bifurcation_scan(params(1.0), np.array([3.0, 2.0, 1.0]))


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


def test_trajectory_stays_at_stable_fixed_point():
    p = params(30.0)
    fp = [q for q in find_fixed_points(p) if q.stable][0]
    t, amp, phase = integrate_trajectory(fp.state, p, 20.0)
    assert abs(amp[-1] - fp.state.amplitude) < 1e-8
    assert abs(phase[-1] - fp.state.phase) < 1e-8


def test_undriven_amplitude_decay():
    p = params(0.0)
    t, amp, _ = integrate_trajectory(ScState(amplitude=2.0, phase=0.3), p, 6.0)
    assert np.allclose(amp, 2.0 * np.exp(-t / 2.0), atol=1e-8)


def test_generic_start_converges_to_stable_point():
    p = params(30.0)
    fp = [q for q in find_fixed_points(p) if q.stable][0]
    _, amp, phase = integrate_trajectory(ScState(amplitude=0.5, phase=0.8), p, 80.0)
    assert abs(amp[-1] - fp.state.amplitude) < 1e-6
    assert abs(phase[-1] - fp.state.phase) < 1e-6


def test_stability_flags_agree_with_perturbed_trajectories():
    p = params(200.0)
    for fp in find_fixed_points(p):
        if fp.state.amplitude == 0.0:
            continue
        start = ScState(amplitude=fp.state.amplitude * (1.0 + 1e-3),
                        phase=fp.state.phase + 1e-3)
        _, amp, phase = integrate_trajectory(start, p, 60.0)
        err = math.hypot(amp[-1] - fp.state.amplitude, phase[-1] - fp.state.phase)
        if fp.stable:
            assert err < 1e-6
        else:
            assert err > 1e-3


def test_trajectory_rejects_bad_horizon():
    with pytest.raises(ValueError):
        integrate_trajectory(ScState(amplitude=1.0, phase=0.0), params(1.0), 0.0)
