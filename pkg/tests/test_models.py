"""Model builders: gain/damping superoperators, junction Hamiltonians, two-cavity extension."""

import math

import numpy as np
import pytest

from jjmaser.fock import FockSpace, annihilation, fock_state, laguerre_assoc1
from jjmaser.models import (
    VON_KLITZING_OHMS,
    JosephsonParams,
    MicromaserParams,
    TwoCavityParams,
    damping_dissipator,
    delta0_from_impedance,
    ej_renormalize,
    jj_hamiltonian,
    jj_hamiltonian_oracle,
    jj_liouvillian,
    liouvillian,
    micromaser_gain,
    micromaser_liouvillian,
    partial_trace,
    two_cavity_hamiltonian,
    two_cavity_liouvillian,
    unvectorize,
    vectorize,
)
from jjmaser.solvers import steady_state

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# vectorization convention
# ---------------------------------------------------------------------------


def test_column_stacking_convention():
    m = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    assert np.array_equal(vectorize(m), np.array([1, 3, 2, 4], dtype=complex))
    assert np.array_equal(unvectorize(vectorize(m), 2), m)


def test_superoperator_apply_matches_algebra():
    rng = np.random.default_rng(3)
    space = FockSpace(4)
    a = annihilation(space).matrix
    dis = damping_dissipator(0.7, space)
    rho = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    want = 0.7 * (a @ rho @ a.conj().T - 0.5 * (a.conj().T @ a @ rho + rho @ a.conj().T @ a))
    assert np.allclose(dis.apply(rho), want, atol=1e-14)


# ---------------------------------------------------------------------------
# micromaser gain
# ---------------------------------------------------------------------------


def test_gain_vanishes_at_zero_rabi_angle():
    gain = micromaser_gain(MicromaserParams(pump_ratio=5.0, rabi_angle=0.0, cutoff=8))
    assert gain.matrix.nnz == 0 or np.max(np.abs(gain.matrix.toarray())) == 0.0


def test_gain_blocks_upward_rate_at_trapping_angle():
    params = MicromaserParams(pump_ratio=10.0, rabi_angle=math.pi / SQRT2, cutoff=6)
    gain = micromaser_gain(params)
    out = gain.apply(fock_state(FockSpace(6), 1))
    assert abs(out[2, 2]) < 1e-28  # sin(phi sqrt(2)) = 0 stops 1 -> 2
    assert out[0, 0] == pytest.approx(0.0, abs=1e-30)


def test_gain_maps_diagonals_to_diagonals_exactly():
    params = MicromaserParams(pump_ratio=3.0, rabi_angle=1.3, cutoff=7)
    gain = micromaser_gain(params)
    d = 8
    diag_idx = set(range(0, d * d, d + 1))
    m = gain.matrix.tocoo()
    for row, col in zip(m.row, m.col):
        if col in diag_idx:
            assert row in diag_idx


def test_gain_trace_preserving_including_top_level():
    params = MicromaserParams(pump_ratio=7.0, rabi_angle=2.1, cutoff=9)
    assert micromaser_gain(params).trace_defect() < 1e-12


# ---------------------------------------------------------------------------
# damping
# ---------------------------------------------------------------------------


def test_damping_dark_vacuum():
    space = FockSpace(4)
    out = damping_dissipator(1.0, space).apply(fock_state(space, 0))
    assert np.max(np.abs(out)) == 0.0


def test_damping_single_photon_decay():
    space = FockSpace(4)
    gamma = 1.7
    out = damping_dissipator(gamma, space).apply(fock_state(space, 1))
    want = np.zeros((5, 5), dtype=complex)
    want[0, 0] = gamma
    want[1, 1] = -gamma
    assert np.allclose(out, want, atol=1e-14)


def test_damping_requires_positive_rate():
    with pytest.raises(ValueError):
        damping_dissipator(0.0, FockSpace(3))


# ---------------------------------------------------------------------------
# junction Hamiltonian and its series oracle
# ---------------------------------------------------------------------------


def test_jj_first_element():
    p = JosephsonParams(ej_star_ratio=20.0, delta0=0.7, cutoff=5)
    h = jj_hamiltonian(p).matrix
    assert h[0, 1] == pytest.approx(-1j * 0.7 * 20.0 / 2.0, rel=1e-15)


def test_jj_trapping_element_vanishes_at_sqrt2():
    h = jj_hamiltonian(JosephsonParams(ej_star_ratio=50.0, delta0=SQRT2, cutoff=5)).matrix
    assert abs(h[1, 2]) < 1e-13  # L^1_1(2) = 0


def test_jj_linear_limit():
    delta0 = 1e-3
    p = JosephsonParams(ej_star_ratio=10.0, delta0=delta0, cutoff=8)
    h = jj_hamiltonian(p).matrix
    a = annihilation(FockSpace(8)).matrix
    linear = 1j * (10.0 * delta0 / 2.0) * (a.conj().T - a)
    scale = np.abs(linear) + np.where(np.abs(linear) == 0, 1.0, 0.0)
    assert np.max(np.abs(h - linear) / scale) < 1e-5


def test_jj_hermitian():
    for d0 in (0.3, 1.0, SQRT2):
        h = jj_hamiltonian(JosephsonParams(ej_star_ratio=20.0, delta0=d0, cutoff=12))
        assert h.hermiticity_defect() < 1e-14 * max(1.0, float(np.max(np.abs(h.matrix))))


@pytest.mark.parametrize("delta0", [0.3, 1.0, SQRT2])
def test_jj_matches_normal_ordered_series_oracle(delta0):
    p = JosephsonParams(ej_star_ratio=20.0, delta0=delta0, cutoff=12)
    h = jj_hamiltonian(p).matrix
    oracle = jj_hamiltonian_oracle(p).matrix
    assert np.max(np.abs(h - oracle)) < 1e-9


def test_jj_oracle_reproduces_trapping_zero():
    p = JosephsonParams(ej_star_ratio=20.0, delta0=SQRT2, cutoff=6)
    oracle = jj_hamiltonian_oracle(p).matrix
    assert abs(oracle[1, 2]) < 1e-12


def test_jj_oracle_leading_order_is_linear_drive():
    delta0 = 1e-4
    p = JosephsonParams(ej_star_ratio=10.0, delta0=delta0, cutoff=3)
    oracle = jj_hamiltonian_oracle(p, series_order=2).matrix
    a = annihilation(FockSpace(3)).matrix
    linear = 1j * (10.0 * delta0 / 2.0) * (a.conj().T - a)
    assert np.allclose(oracle, linear, rtol=1e-7, atol=1e-16)


def test_jj_oracle_raises_on_nonconvergence():
    p = JosephsonParams(ej_star_ratio=20.0, delta0=1.5, cutoff=10)
    with pytest.raises(ArithmeticError, match="series"):
        jj_hamiltonian_oracle(p, series_order=2)


def test_jj_detuning_enters_diagonal():
    p = JosephsonParams(ej_star_ratio=5.0, delta0=0.5, cutoff=4, detuning_ratio=0.3)
    h = jj_hamiltonian(p).matrix
    assert np.allclose(np.diag(h), 0.3 * np.arange(5), atol=1e-15)


# ---------------------------------------------------------------------------
# parameter conversions
# ---------------------------------------------------------------------------


def test_ej_renormalize():
    assert ej_renormalize(1.0, 0.0) == 1.0
    assert ej_renormalize(1.0, SQRT2) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert ej_renormalize(20.0, 1.0) == pytest.approx(20.0 * math.exp(-0.5), rel=1e-15)


def test_delta0_from_impedance():
    assert delta0_from_impedance(VON_KLITZING_OHMS / (4.0 * math.pi)) == pytest.approx(1.0)
    assert delta0_from_impedance(VON_KLITZING_OHMS / (2.0 * math.pi)) == pytest.approx(SQRT2)
    assert delta0_from_impedance(50.0) == pytest.approx(0.15602, abs=5e-6)
    with pytest.raises(ValueError):
        delta0_from_impedance(-1.0)


# ---------------------------------------------------------------------------
# Liouvillian assembly
# ---------------------------------------------------------------------------


def test_liouvillian_reduces_to_damping_without_hamiltonian():
    space = FockSpace(5)
    dis = damping_dissipator(1.0, space)
    full = liouvillian(None, [dis])
    assert np.max(np.abs((full.matrix - dis.matrix).toarray())) == 0.0


@pytest.mark.parametrize(
    "build",
    [
        lambda: micromaser_liouvillian(MicromaserParams(10.0, 2.0, 15)),
        lambda: micromaser_liouvillian(MicromaserParams(0.3, math.pi, 10)),
        lambda: jj_liouvillian(JosephsonParams(20.0, 1.0, 12)),
        lambda: jj_liouvillian(JosephsonParams(5.0, SQRT2, 8, detuning_ratio=0.2)),
        lambda: two_cavity_liouvillian(
            TwoCavityParams(10.0, SQRT2, SQRT2, 100.0, 3, 3)
        ),
    ],
)
def test_all_liouvillians_annihilate_the_trace(build):
    assert build().trace_defect() < 1e-10


def test_liouvillian_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        liouvillian(
            jj_hamiltonian(JosephsonParams(1.0, 0.5, 4)),
            [damping_dissipator(1.0, FockSpace(3))],
        )


# ---------------------------------------------------------------------------
# two-cavity model
# ---------------------------------------------------------------------------


def _series_pair_factor(delta0, dim, order=40):
    """Normal-ordered series for one mode's pair factor (independent route)."""
    a = annihilation(FockSpace(dim - 1)).matrix
    ad = a.conj().T
    term = delta0 * a
    total = np.zeros_like(a)
    for k in range(order):
        total = total + term
        term = (-delta0 * delta0 / ((k + 1.0) * (k + 2.0))) * (ad @ term @ a)
    return total


def test_two_cavity_hamiltonian_matches_two_mode_series_oracle():
    p = TwoCavityParams(
        ej_star_ratio=8.0, delta_a=0.9, delta_b=1.3, gamma_ratio_aux=50.0, cutoff_a=5,
        cutoff_b=4,
    )
    h = two_cavity_hamiltonian(p).matrix
    ua = _series_pair_factor(0.9, 6)
    ub = _series_pair_factor(1.3, 5)
    pair = np.kron(ua, ub)
    oracle = -(8.0 / 2.0) * (pair + pair.conj().T)
    assert np.max(np.abs(h - oracle)) < 1e-9


def test_two_cavity_couples_only_double_excitations():
    p = TwoCavityParams(5.0, 1.0, 1.0, 10.0, 3, 3)
    h = two_cavity_hamiltonian(p).matrix
    db = 4
    for i in range(16):
        for j in range(16):
            if h[i, j] != 0:
                na, nb = divmod(i, db)
                ma, mb = divmod(j, db)
                assert (ma - na, mb - nb) in {(1, 1), (-1, -1)}


def test_two_cavity_element_value():
    p = TwoCavityParams(6.0, 0.8, 1.1, 10.0, 3, 3)
    h = two_cavity_hamiltonian(p).matrix
    na, nb = 1, 2
    got = h[na * 4 + nb, (na + 1) * 4 + (nb + 1)]
    want = (
        -(6.0 / 2.0)
        * 0.8
        * 1.1
        * laguerre_assoc1(na, 0.8**2)
        * laguerre_assoc1(nb, 1.1**2)
        / math.sqrt((na + 1) * (nb + 1))
    )
    assert got == pytest.approx(want, rel=1e-14)


def test_two_cavity_vacuum_block_reduces_to_single_mode():
    delta_b = 1e-3
    p = TwoCavityParams(
        ej_star_ratio=5.0 / delta_b, delta_a=0.9, delta_b=delta_b, gamma_ratio_aux=10.0,
        cutoff_a=5, cutoff_b=2,
    )
    h = two_cavity_hamiltonian(p).matrix
    db = 3
    single = jj_hamiltonian(JosephsonParams(ej_star_ratio=5.0, delta0=0.9, cutoff=5)).matrix
    for na in range(5):
        got = h[na * db + 0, (na + 1) * db + 1]
        want = abs(single[na, na + 1])  # phases differ by convention; magnitudes match
        assert abs(got) == pytest.approx(want, rel=1e-5)


def test_two_cavity_undriven_steady_state_is_joint_vacuum():
    p = TwoCavityParams(0.0, 1.0, 1.0, 10.0, 2, 2)
    res = steady_state(two_cavity_liouvillian(p))
    want = np.zeros((9, 9), dtype=complex)
    want[0, 0] = 1.0
    assert np.allclose(res.state.matrix, want, atol=1e-12)


def test_two_cavity_trapping_truncates_mode_a():
    p = TwoCavityParams(30.0, SQRT2, SQRT2, 100.0, 3, 3)
    res = steady_state(two_cavity_liouvillian(p))
    reduced = partial_trace(res.state.matrix, (4, 4), keep=0)
    pops = np.real(np.diag(reduced))
    assert pops[2:].sum() < 1e-10
    assert pops[1] > 0.9  # strongly damped partner freezes out the pair coherence


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(5)
    for keep in (0, 1):
        ra = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rb = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        ra /= np.trace(ra)
        rb /= np.trace(rb)
        full = np.kron(ra, rb)
        got = partial_trace(full, (3, 4), keep=keep)
        want = ra if keep == 0 else rb
        assert np.allclose(got, want, atol=1e-13)


def test_two_cavity_dimension_limit():
    with pytest.raises(ValueError, match="product dimension"):
        TwoCavityParams(1.0, 1.0, 1.0, 10.0, 20, 20)


def test_param_validation():
    with pytest.raises(ValueError):
        MicromaserParams(pump_ratio=0.0, rabi_angle=1.0, cutoff=5)
    with pytest.raises(ValueError):
        JosephsonParams(ej_star_ratio=-1.0, delta0=1.0, cutoff=5)
    with pytest.raises(ValueError):
        JosephsonParams(ej_star_ratio=1.0, delta0=0.0, cutoff=5)
