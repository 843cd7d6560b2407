"""Mean-field dynamics of the junction-driven cavity: <a> = A e^{i phi}.

The equations of motion (units of gamma)

    dphi/dt = -(E* delta0 / A) sin(phi) J_1'(2 delta0 A)
    dA/dt   = -(gamma/2) A + (E*/(2A)) cos(phi) J_1(2 delta0 A)

admit two fixed-point families: phase-locked (sin phi = 0) and
amplitude-locked (J_1'(2 delta0 A) = 0).  The 1/A factors are evaluated by
their power series below A = 1e-6 so the vacuum limit never divides by zero;
exactly at A = 0 the phase is meaningless and its rate is reported as 0.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .fock import bessel_j1, bessel_j1_prime

PHASE_LOCKED = "phase-locked"
AMPLITUDE_LOCKED = "amplitude-locked"

_SERIES_AMPLITUDE = 1e-6
_X_SPAN = 12.0  # default 2*delta0*A_max; covers the first three extrema of J_1


def _wrap_phase(phi):
    w = math.remainder(phi, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class ScState:
    amplitude: float
    phase: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        object.__setattr__(self, "phase", _wrap_phase(self.phase))


@dataclass(frozen=True)
class FixedPoint:
    state: ScState
    kind: str
    stable: bool
    jacobian_eigenvalues: tuple


def _j1_over_a(amplitude, delta0):
    """J_1(2 delta0 A)/A, series-continued through A = 0."""
    if amplitude < _SERIES_AMPLITUDE:
        u = delta0 * amplitude
        return delta0 * (1.0 - u * u / 2.0 + u**4 / 12.0)
    return bessel_j1(2.0 * delta0 * amplitude) / amplitude


def _j1prime_over_a(amplitude, delta0):
    """J_1'(2 delta0 A)/A for A > 0; series-evaluated at small A (still ~ 1/(2A))."""
    if amplitude < _SERIES_AMPLITUDE:
        if amplitude == 0.0:
            return math.inf
        u = delta0 * amplitude
        return 1.0 / (2.0 * amplitude) - 0.75 * delta0 * u + (5.0 / 24.0) * delta0 * u**3
    return bessel_j1_prime(2.0 * delta0 * amplitude) / amplitude


def eom_rhs(state, params, gamma=1.0):
    """(dphi/dt, dA/dt) at a semiclassical state, in absolute rate units."""
    amp = state.amplitude
    phi = state.phase
    ej = params.ej_star_ratio * gamma
    d0 = params.delta0
    sin_phi = math.sin(phi)
    if amp == 0.0:
        dphi = 0.0 if (sin_phi == 0.0 or ej == 0.0) else math.inf
    else:
        dphi = -ej * d0 * sin_phi * _j1prime_over_a(amp, d0)
    damp = -0.5 * gamma * amp + 0.5 * ej * math.cos(phi) * _j1_over_a(amp, d0)
    return dphi, damp


def _jacobian(amp, phi, params, gamma=1.0):
    ej = params.ej_star_ratio * gamma
    d0 = params.delta0
    if amp == 0.0:
        # only valid at the undriven vacuum; radial decay in both directions
        return np.array([[-0.5 * gamma, 0.0], [0.0, -0.5 * gamma]])
    x = 2.0 * d0 * amp
    j1 = bessel_j1(x)
    j1p = bessel_j1_prime(x)
    j1pp = special.jvp(1, x, 2)
    s, c = math.sin(phi), math.cos(phi)
    dphi_dphi = -ej * d0 * c * j1p / amp
    dphi_damp = -ej * d0 * s * (2.0 * d0 * j1pp / amp - j1p / amp**2)
    damp_dphi = -0.5 * ej * s * j1 / amp
    damp_damp = -0.5 * gamma + 0.5 * ej * c * (2.0 * d0 * j1p / amp - j1 / amp**2)
    return np.array([[dphi_dphi, dphi_damp], [damp_dphi, damp_damp]])


def _classify(amp, phi, kind, params, gamma):
    eig = np.linalg.eigvals(_jacobian(amp, phi, params, gamma))
    stable = bool(np.max(eig.real) < 0.0)
    return FixedPoint(
        state=ScState(amplitude=amp, phase=phi),
        kind=kind,
        stable=stable,
        jacobian_eigenvalues=(complex(eig[0]), complex(eig[1])),
    )


def _bracketed_roots(fun, lo, hi, samples):
    xs = np.linspace(lo, hi, samples)
    vals = np.array([fun(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(xs[i])
        elif a * b < 0.0:
            roots.append(optimize.brentq(fun, xs[i], xs[i + 1], xtol=1e-14, rtol=8.9e-16))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    return roots


def find_fixed_points(params, gamma=1.0, a_max=None, samples=1600):
    """All fixed points with A <= a_max, classified by the 2x2 Jacobian.

    Phase-locked branches solve the radial balance at sin(phi) = 0 by
    bracketed root-finding; amplitude-locked branches sit at the extrema of
    J_1 with the phase read off the radial balance where |cos phi| <= 1.
    The default amplitude window spans the first three Bessel extrema,
    a_max = 12/(2 delta0).
    """
    ej = params.ej_star_ratio * gamma
    d0 = params.delta0
    if a_max is None:
        a_max = _X_SPAN / (2.0 * d0)
    points = []
    if ej == 0.0:
        points.append(_classify(0.0, 0.0, PHASE_LOCKED, params, gamma))
        return points

    for phi in (0.0, math.pi):
        cos_phi = math.cos(phi)

        def radial(amp, _c=cos_phi):
            return -0.5 * gamma * amp + 0.5 * ej * _c * _j1_over_a(amp, d0)

        for amp in _bracketed_roots(radial, 0.0, a_max, samples):
            if amp > 0.0:
                points.append(_classify(amp, phi, PHASE_LOCKED, params, gamma))

    extrema = _bracketed_roots(lambda x: bessel_j1_prime(x), 1e-9, 2.0 * d0 * a_max, samples)
    for x_star in extrema:
        amp = x_star / (2.0 * d0)
        denom = ej * bessel_j1(x_star)
        if denom == 0.0:
            continue
        cos_req = gamma * amp * amp / denom
        if abs(cos_req) > 1.0:
            continue
        phi = math.acos(cos_req)
        for sign in (1.0, -1.0):
            candidate = sign * phi
            if any(
                abs(p.state.amplitude - amp) < 1e-9 * max(1.0, amp)
                and abs(_wrap_phase(candidate) - p.state.phase) < 1e-9
                for p in points
            ):
                continue
            points.append(_classify(amp, candidate, AMPLITUDE_LOCKED, params, gamma))
            if phi == 0.0 or phi == math.pi:
                break

    points.sort(key=lambda p: (p.state.amplitude, p.state.phase))
    return points


@dataclass(frozen=True)
class BifurcationScan:
    drives: np.ndarray
    rows: list  # (ej_star_ratio, FixedPoint) in grid order
    threshold: float | None  # drive where a stable amplitude-locked point first exists


def _has_stable_amplitude_locked(params, ej, gamma, a_max):
    from dataclasses import replace

    pts = find_fixed_points(replace(params, ej_star_ratio=ej), gamma=gamma, a_max=a_max)
    return any(p.stable and p.kind == AMPLITUDE_LOCKED for p in pts)


def bifurcation_scan(params, ej_values, gamma=1.0, a_max=None, rel_tol=1e-6):
    """Fixed-point branches over a drive grid, plus the locking transition.

    Scans the monotone grid `ej_values`, then bisects the first interval on
    which a stable amplitude-locked point appears down to `rel_tol` relative
    width.  Absence of a transition in range is reported (threshold None),
    not an error.
    """
    from dataclasses import replace

    ej_values = np.asarray(ej_values, dtype=float)
    if ej_values.ndim != 1 or ej_values.size < 2 or np.any(np.diff(ej_values) <= 0):
        raise ValueError("ej_values must be a strictly increasing grid")
    rows = []
    flags = []
    for ej in ej_values:
        pts = find_fixed_points(replace(params, ej_star_ratio=ej), gamma=gamma, a_max=a_max)
        rows.extend((float(ej), p) for p in pts)
        flags.append(any(p.stable and p.kind == AMPLITUDE_LOCKED for p in pts))
    threshold = None
    for i in range(len(flags) - 1):
        if not flags[i] and flags[i + 1]:
            lo, hi = float(ej_values[i]), float(ej_values[i + 1])
            while (hi - lo) > rel_tol * hi:
                mid = 0.5 * (lo + hi)
                if _has_stable_amplitude_locked(params, mid, gamma, a_max):
                    hi = mid
                else:
                    lo = mid
            threshold = 0.5 * (lo + hi)
            break
    return BifurcationScan(drives=ej_values, rows=rows, threshold=threshold)


def integrate_trajectory(
    state0, params, t_final, gamma=1.0, n_samples=400, rtol=1e-10, atol=1e-12
):
    """Adaptive integration of the mean-field flow from `state0`.

    Returns (t, amplitude, phase) arrays with the phase wrapped to (-pi, pi].
    """
    if not t_final > 0:
        raise ValueError(f"t_final must be > 0, got {t_final}")

    def rhs(_t, y):
        phi, amp = y
        amp = max(amp, 0.0)
        dphi, damp = eom_rhs(ScState(amplitude=amp, phase=phi), params, gamma=gamma)
        if not math.isfinite(dphi):
            dphi = 0.0
        return (dphi, damp)

    sol = integrate.solve_ivp(
        rhs,
        (0.0, t_final),
        (state0.phase, state0.amplitude),
        method="DOP853",
        t_eval=np.linspace(0.0, t_final, n_samples),
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"trajectory integration failed: {sol.message}")
    phases = np.array([_wrap_phase(v) for v in sol.y[0]])
    amps = np.clip(sol.y[1], 0.0, None)
    return sol.t, amps, phases
