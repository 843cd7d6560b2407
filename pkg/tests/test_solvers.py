"""Steady-state solves against the detailed-balance oracle, propagation, regression."""

import math

import numpy as np
import pytest

from jjmaser.fock import (
    DensityMatrix,
    FockSpace,
    annihilation,
    coherent_state,
    fock_state,
    number_operator,
)
from jjmaser.models import (
    JosephsonParams,
    MicromaserParams,
    damping_dissipator,
    jj_liouvillian,
    lindblad_dissipator,
    liouvillian,
    micromaser_liouvillian,
)
from jjmaser.observables import fidelity_pure
from jjmaser.solvers import (
    CutoffConvergenceError,
    DegenerateSteadyStateError,
    converged_steady_state,
    evolve,
    micromaser_steady_analytic,
    regression_trace,
    steady_state,
)

SQRT2 = math.sqrt(2.0)


def damping_liouvillian(cutoff, gamma=1.0):
    return liouvillian(None, [damping_dissipator(gamma, FockSpace(cutoff))])


# ---------------------------------------------------------------------------
# steady_state
# ---------------------------------------------------------------------------


def test_pure_damping_steady_state_is_vacuum():
    res = steady_state(damping_liouvillian(6))
    want = np.zeros((7, 7), dtype=complex)
    want[0, 0] = 1.0
    assert np.allclose(res.state.matrix, want, atol=1e-13)
    assert res.residual < 1e-12
    assert res.cutoff_used == 6


def test_micromaser_nullspace_matches_detailed_balance():
    params = MicromaserParams(pump_ratio=10.0, rabi_angle=math.pi / SQRT2, cutoff=30)
    res = steady_state(micromaser_liouvillian(params))
    analytic = micromaser_steady_analytic(params)
    assert np.max(np.abs(res.state.matrix - analytic.matrix)) < 1e-10
    off = res.state.matrix - np.diag(np.diag(res.state.matrix))
    assert np.max(np.abs(off)) < 1e-10


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_micromaser_random_parameters_match_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    pump = float(rng.uniform(0.1, 50.0))
    phi = float(rng.uniform(0.1, 4.0))

    def build(cutoff):
        return micromaser_liouvillian(MicromaserParams(pump, phi, cutoff))

    res = converged_steady_state(build, 20, tail_tol=1e-10)
    analytic = micromaser_steady_analytic(
        MicromaserParams(pump, phi, res.cutoff_used)
    )
    assert np.max(np.abs(res.state.matrix - analytic.matrix)) < 1e-10
    assert res.residual < 1e-9


def test_jj_linear_limit_steady_state_is_coherent():
    params = JosephsonParams(ej_star_ratio=10.0, delta0=0.05, cutoff=20)
    res = steady_state(jj_liouvillian(params))
    # linear response: d<a>/dt = -(gamma/2)<a> + E* delta0/2 -> <a>_ss = E* delta0/gamma
    alpha = 10.0 * 0.05
    assert fidelity_pure(res.state, coherent_state(FockSpace(20), alpha)) > 0.999


def test_degenerate_nullspace_raises_small_dim():
    # pure dephasing preserves every Fock population: D-fold degenerate nullspace
    space = FockSpace(3)
    deph = lindblad_dissipator(number_operator(space), rate=1.0)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(liouvillian(None, [deph]))


def test_degenerate_nullspace_raises_arpack_path():
    space = FockSpace(24)  # vec dimension 625 forces the shift-invert branch
    deph = lindblad_dissipator(number_operator(space), rate=1.0)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(liouvillian(None, [deph]))


def test_steady_state_result_reports_tail():
    params = MicromaserParams(pump_ratio=10.0, rabi_angle=1.0, cutoff=40)
    res = steady_state(micromaser_liouvillian(params))
    pops = res.state.populations
    assert res.tail_population == pytest.approx(pops[-1] + pops[-2], abs=0.0)


# ---------------------------------------------------------------------------
# detailed-balance formula
# ---------------------------------------------------------------------------


def test_analytic_trapping_at_pi():
    rho = micromaser_steady_analytic(MicromaserParams(10.0, math.pi, 20))
    assert rho.populations[0] == pytest.approx(1.0, abs=1e-12)
    assert rho.populations[1:].max() < 1e-28


def test_analytic_two_level_ratio():
    rho = micromaser_steady_analytic(MicromaserParams(10.0, math.pi / SQRT2, 25))
    pops = rho.populations
    assert pops[1] / pops[0] == pytest.approx(6.331276710207078, rel=1e-12)
    mean = float(np.dot(np.arange(26), pops))
    assert mean == pytest.approx(0.8635981099161439, rel=1e-12)
    assert mean > 0.5  # population inversion at this pump


def test_analytic_weak_pump_is_vacuum():
    rho = micromaser_steady_analytic(MicromaserParams(1e-12, 1.3, 10))
    assert rho.populations[0] == pytest.approx(1.0, abs=1e-11)


def test_analytic_deep_trapping_underflow_returns_vacuum():
    # pump so weak every product underflows; normalization must survive
    rho = micromaser_steady_analytic(MicromaserParams(1e-300, 1.0, 30))
    assert rho.populations[0] == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------


def test_evolve_zero_time_is_identity():
    rho = fock_state(FockSpace(5), 2)
    out = evolve(damping_liouvillian(5), rho, 0.0)
    assert np.array_equal(out.matrix, rho.matrix)


def test_evolve_matches_decay_law():
    rho = fock_state(FockSpace(5), 1)
    superop = damping_liouvillian(5)
    for t in (0.3, 1.0, 2.5):
        out = evolve(superop, rho, t)
        assert out.populations[1] == pytest.approx(math.exp(-t), abs=1e-8)


def test_mean_occupation_decays_exponentially():
    superop = damping_liouvillian(12)
    rho = coherent_state(FockSpace(12), 1.2)
    ts = np.linspace(0.2, 3.0, 8)
    means = []
    for t in ts:
        out = evolve(superop, rho, float(t))
        means.append(float(np.dot(np.arange(13), out.populations)))
    slope = np.polyfit(ts, np.log(means), 1)[0]
    assert slope == pytest.approx(-1.0, abs=1e-6)


def test_evolve_fixed_point_of_steady_state():
    params = MicromaserParams(pump_ratio=8.0, rabi_angle=1.1, cutoff=35)
    superop = micromaser_liouvillian(params)
    res = steady_state(superop)
    out = evolve(superop, res.state, 7.3)
    assert np.max(np.abs(out.matrix - res.state.matrix)) < 1e-9


def test_evolve_converges_to_steady_state():
    params = JosephsonParams(ej_star_ratio=6.0, delta0=0.8, cutoff=18)
    superop = jj_liouvillian(params)
    res = steady_state(superop)
    out = evolve(superop, fock_state(FockSpace(18), 0), 40.0)
    assert np.max(np.abs(out.matrix - res.state.matrix)) < 1e-6


def test_evolve_rejects_negative_time():
    with pytest.raises(ValueError):
        evolve(damping_liouvillian(3), fock_state(FockSpace(3), 0), -1.0)


# ---------------------------------------------------------------------------
# regression traces
# ---------------------------------------------------------------------------


def test_regression_identity_left_is_trace():
    params = MicromaserParams(pump_ratio=5.0, rabi_angle=0.9, cutoff=25)
    superop = micromaser_liouvillian(params)
    rho = steady_state(superop).state
    times = np.linspace(0.0, 5.0, 64)
    trace = regression_trace(superop, rho, np.eye(26, dtype=complex), rho.matrix, times)
    assert np.allclose(trace.values, 1.0, atol=1e-10)


def test_regression_tau_zero_gives_normal_ordered_moment():
    params = JosephsonParams(ej_star_ratio=8.0, delta0=0.9, cutoff=15)
    superop = jj_liouvillian(params)
    rho = steady_state(superop).state
    a = annihilation(FockSpace(15)).matrix
    seed = a @ rho.matrix @ a.conj().T
    n_op = a.conj().T @ a
    trace = regression_trace(superop, rho, n_op, seed, np.array([0.0, 1.0]))
    ns = np.arange(16)
    want = float(np.dot(ns * (ns - 1), rho.populations))
    assert trace.values[0].real == pytest.approx(want, rel=1e-12)
    assert abs(trace.values[0].imag) < 1e-12


def test_regression_linear_model_field_decay():
    # undriven cavity prepared in a coherent state: <a^dag(tau) a(0)> decays at gamma/2
    superop = damping_liouvillian(30)
    rho = coherent_state(FockSpace(30), 0.8)
    a = annihilation(FockSpace(30)).matrix
    times = np.linspace(0.0, 6.0, 121)
    trace = regression_trace(superop, rho, a.conj().T, a @ rho.matrix, times)
    want = 0.64 * np.exp(-times / 2.0)
    assert np.allclose(trace.values.real, want, atol=1e-8)
    assert np.max(np.abs(trace.values.imag)) < 1e-10


def test_regression_nonuniform_grid_matches_uniform():
    params = JosephsonParams(ej_star_ratio=5.0, delta0=0.7, cutoff=10)
    superop = jj_liouvillian(params)
    rho = steady_state(superop).state
    a = annihilation(FockSpace(10)).matrix
    seed = a @ rho.matrix
    uniform = regression_trace(superop, rho, a.conj().T, seed, np.linspace(0.0, 4.0, 9))
    jagged = regression_trace(
        superop, rho, a.conj().T, seed, np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
    )
    for t, v in zip(jagged.times, jagged.values):
        k = np.where(np.isclose(uniform.times, t))[0]
        if k.size:
            assert v == pytest.approx(uniform.values[int(k[0])], rel=1e-9, abs=1e-11)


def test_regression_rejects_bad_grids():
    superop = damping_liouvillian(3)
    rho = fock_state(FockSpace(3), 0)
    eye = np.eye(4, dtype=complex)
    with pytest.raises(ValueError):
        regression_trace(superop, rho, eye, rho.matrix, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        regression_trace(superop, rho, eye, rho.matrix, np.array([-1.0, 1.0]))


# ---------------------------------------------------------------------------
# cutoff auto-convergence
# ---------------------------------------------------------------------------


def test_converged_steady_state_raises_cutoff():
    params_at = lambda c: micromaser_liouvillian(MicromaserParams(10.0, 1.0, c))
    res = converged_steady_state(params_at, 6, tail_tol=1e-8)
    assert res.cutoff_used > 6
    assert res.tail_population < 1e-8
    # doubling the converged cutoff barely moves the mean occupation
    bigger = steady_state(params_at(2 * res.cutoff_used))
    mean_small = float(np.dot(np.arange(res.cutoff_used + 1), res.state.populations))
    mean_big = float(np.dot(np.arange(2 * res.cutoff_used + 1), bigger.state.populations))
    assert mean_big == pytest.approx(mean_small, rel=1e-6)


def test_converged_steady_state_ceiling_error():
    params_at = lambda c: micromaser_liouvillian(MicromaserParams(40.0, 0.5, c))
    with pytest.raises(CutoffConvergenceError):
        converged_steady_state(params_at, 4, tail_tol=1e-10, max_cutoff=8)
