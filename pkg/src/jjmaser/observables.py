"""Measured quantities: moments, fidelities, Wigner functions, photon
correlations and emission spectra.

Conventions (fixed so independent implementations can be compared):

- Quadratures x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2); the Wigner
  function is normalized to integral W dx dp = 1, vacuum peak 1/pi.
- Spectra are one-sided transforms S(w) = Re int_0^inf dtau e^{i w tau}
  <a^dag(tau) a(0)>, reported against (w - w0)/gamma in the rotating frame;
  the coherent part |<a>|^2 is split off and transformed analytically with a
  small Lorentzian linewidth `eta` (recorded in the result metadata).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import interpolate, special

from .fock import DensityMatrix, FockSpace, Operator, annihilation
from .models import jj_liouvillian
from .solvers import regression_trace, steady_state

DEFAULT_ETA = 0.01  # coherent-line half width, units of gamma
DECAY_TOL = 1e-4


class UndefinedObservableError(ValueError):
    """Observable is undefined for this state (e.g. Fano factor of the vacuum)."""


class GridTooSmallError(ValueError):
    """Requested phase-space grid does not enclose the state's support."""


class WindowTooShortError(RuntimeError):
    """Correlation has not decayed within the time window; lengthen it."""


class QuadratureConvergenceError(RuntimeError):
    """Noise average changed too much when the node count was doubled."""


def mean_n(rho):
    """<n> from the Fock-basis diagonal."""
    return float(np.dot(np.arange(rho.dim), rho.populations))


def fano(rho):
    """Number-variance-to-mean ratio; < 1 signals number squeezing."""
    n = np.arange(rho.dim)
    pops = rho.populations
    mean = float(np.dot(n, pops))
    if mean <= 0.0:
        raise UndefinedObservableError("Fano factor undefined for zero mean occupation")
    second = float(np.dot(n * n, pops))
    return (second - mean * mean) / mean


def g2_zero(rho):
    """Second-order coherence g2(0) = <n(n-1)> / <n>^2."""
    n = np.arange(rho.dim)
    pops = rho.populations
    mean = float(np.dot(n, pops))
    if mean <= 0.0:
        raise UndefinedObservableError("g2(0) undefined for zero mean occupation")
    return float(np.dot(n * (n - 1), pops)) / mean**2


def fidelity_fock(rho, n):
    """Overlap <n|rho|n> with a pure number state."""
    if not 0 <= int(n) < rho.dim:
        raise ValueError(f"Fock index {n} outside 0..{rho.dim - 1}")
    return float(np.real(rho.matrix[int(n), int(n)]))


def fidelity_pure(rho, target):
    """Overlap tr(rho sigma) with a pure target state sigma."""
    t = target.matrix if hasattr(target, "matrix") else np.asarray(target, dtype=complex)
    purity = float(np.real(np.trace(t @ t)))
    if abs(purity - 1.0) > 1e-8:
        raise ValueError(f"target state is not pure (tr sigma^2 = {purity})")
    return float(np.real(np.trace(rho.matrix @ t)))


@dataclass(frozen=True)
class WignerGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # shape (len(x_axis), len(p_axis))

    def integral(self):
        dx = float(self.x_axis[1] - self.x_axis[0])
        dp = float(self.p_axis[1] - self.p_axis[0])
        return float(self.values.sum() * dx * dp)


def _quadrature_stats(rho):
    d = rho.dim
    a = annihilation(FockSpace(d - 1)).matrix
    x = (a + a.conj().T) / math.sqrt(2.0)
    p = 1j * (a.conj().T - a) / math.sqrt(2.0)
    mx = float(np.real(np.trace(x @ rho.matrix)))
    mp_ = float(np.real(np.trace(p @ rho.matrix)))
    vx = float(np.real(np.trace(x @ x @ rho.matrix))) - mx * mx
    vp = float(np.real(np.trace(p @ p @ rho.matrix))) - mp_ * mp_
    return mx, math.sqrt(max(vx, 0.0)), mp_, math.sqrt(max(vp, 0.0))


def wigner(rho, x_axis, p_axis, span_sigmas=4.0):
    """Wigner function by pointwise displaced-parity evaluation.

    W(x, p) = (1/pi) tr[rho D(2 alpha) P] with alpha = (x + i p)/sqrt(2) and
    P the photon-number parity; the displacement matrix elements are evaluated
    in closed form (associated Laguerre polynomials), so there is no FFT or
    interpolation step.  The grid must enclose the state's quadrature means
    by `span_sigmas` standard deviations on each side.
    """
    x_axis = np.asarray(x_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    if x_axis.size < 2 or p_axis.size < 2:
        raise ValueError("need at least two samples per axis")
    mx, sx, mp_, sp_ = _quadrature_stats(rho)
    for name, axis, mean, sig in (("x", x_axis, mx, sx), ("p", p_axis, mp_, sp_)):
        if axis.min() > mean - span_sigmas * sig or axis.max() < mean + span_sigmas * sig:
            raise GridTooSmallError(
                f"{name}-axis [{axis.min():.3g}, {axis.max():.3g}] does not cover "
                f"{mean:.3g} +/- {span_sigmas:.3g} x {sig:.3g}"
            )

    alpha = (x_axis[:, None] + 1j * p_axis[None, :]) / math.sqrt(2.0)
    beta = 2.0 * alpha
    babs2 = np.abs(beta) ** 2
    envelope = np.exp(-0.5 * babs2)
    d = rho.dim
    lgam = special.gammaln(np.arange(1.0, d + 1.0))  # lgam[n] = log n!
    acc = np.zeros(alpha.shape, dtype=float)
    for n in range(d):
        rnn = float(np.real(rho.matrix[n, n]))
        if rnn != 0.0:
            acc += ((-1.0) ** n) * rnn * special.eval_genlaguerre(n, 0, babs2)
        for m in range(n + 1, d):
            rnm = rho.matrix[n, m]
            if abs(rnm) < 1e-14:
                continue
            pref = math.exp(0.5 * (lgam[n] - lgam[m]))
            term = rnm * beta ** (m - n)
            acc += (
                2.0
                * ((-1.0) ** n)
                * pref
                * special.eval_genlaguerre(n, m - n, babs2)
                * np.real(term)
            )
    vals = envelope * acc / math.pi
    return WignerGrid(x_axis=x_axis, p_axis=p_axis, values=vals)


def g2_tau(superop, rho_ss, times):
    """Normalized intensity correlation g2(tau) via the regression rule.

    g2(tau) = tr[n exp(L tau)(a rho a^dag)] / <n>^2.
    """
    d = superop.dim
    a = annihilation(FockSpace(d - 1)).matrix
    nbar = mean_n(rho_ss)
    if nbar <= 0.0:
        raise UndefinedObservableError("g2(tau) undefined for zero mean occupation")
    seed = a @ rho_ss.matrix @ a.conj().T
    num = a.conj().T @ a
    trace = regression_trace(superop, rho_ss, num, seed, times)
    vals = np.real(trace.values) / nbar**2
    return replace(trace, values=vals, meta={**trace.meta, "normalization": nbar**2})


@dataclass(frozen=True)
class SpectrumResult:
    frequencies: np.ndarray
    psd: np.ndarray
    normalization: float  # peak value; psd is divided by it when normalize=True
    meta: dict = field(default_factory=dict)


def _field_correlation(superop, rho_ss, window, n_times):
    """<a^dag(tau) a(0)> on a uniform grid, plus the factorized tail |<a>|^2."""
    d = superop.dim
    a = annihilation(FockSpace(d - 1)).matrix
    times = np.linspace(0.0, window, n_times)
    trace = regression_trace(superop, rho_ss, a.conj().T, a @ rho_ss.matrix, times)
    amp = complex(np.trace(a @ rho_ss.matrix))
    coherent = float(abs(amp) ** 2)
    return times, trace.values, coherent


def _split_slow_mode(times, fluct):
    """Fit a single slow exponential w e^{lam tau} to the correlation tail.

    Strongly driven junction cavities switch slowly between their two locked
    phases, leaving one relaxation mode much slower than the rest.  The fit
    uses the last 30% of the window where that mode dominates; the caller
    checks the residual, so a bad fit surfaces as a window error rather than
    a silently wrong spectrum.  Returns (w, lam, fast_remainder).
    """
    n = times.size
    i0 = int(0.7 * n)
    tail = fluct[i0:]
    mags = np.abs(tail)
    if mags.min() <= 0.0:
        return 0.0j, 0.0j, fluct
    logs = np.log(mags) + 1j * np.unwrap(np.angle(tail))
    slope, intercept = np.polyfit(times[i0:], logs, 1)
    if slope.real >= 0.0:
        return 0.0j, 0.0j, fluct
    weight = np.exp(intercept)
    fast = fluct - weight * np.exp(slope * times)
    return weight, slope, fast


def _narrow_line(freqs, weight, lam, eta):
    """Re[w / ((eta - lam) - i freq)]: the analytic transform of w e^{(lam - eta) tau}."""
    return np.real(weight / ((eta - lam) - 1j * freqs))


def _fluctuation_transform(times, fluct, freqs, eta):
    """Re int_0^T dtau e^{(i w - eta) tau} c_fluct(tau), trapezoid rule."""
    dt = times[1] - times[0]
    weights = np.full(times.size, dt)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    out = np.empty(freqs.size, dtype=float)
    block = 256
    damped = fluct * np.exp(-eta * times) * weights
    for i in range(0, freqs.size, block):
        w = freqs[i : i + block]
        kernel = np.exp(1j * np.outer(w, times))
        out[i : i + block] = np.real(kernel @ damped)
    return out


def _correlation_parts(superop, rho_ss, window, n_times):
    """Correlation split into (times, coherent weight, slow mode, fast part).

    The factorized tail |<a>|^2 is exact; a residual slow relaxation mode is
    fitted off the tail only when the plain correlation has not decayed below
    DECAY_TOL of c(0) within the window.  If even the remainder after the fit
    is undecayed, the window is genuinely too short and we raise.
    """
    times, corr, coherent = _field_correlation(superop, rho_ss, window, n_times)
    c0 = abs(corr[0])
    fluct = corr - coherent
    slow_w, slow_lam = 0.0j, 0.0j
    fast = fluct
    if c0 > 0.0 and abs(fluct[-1]) > DECAY_TOL * c0:
        slow_w, slow_lam, fast = _split_slow_mode(times, fluct)
        i0 = int(0.7 * times.size)
        if np.max(np.abs(fast[i0:])) > DECAY_TOL * c0:
            raise WindowTooShortError(
                f"correlation still at {abs(fluct[-1]) / c0:.2e} of c(0) at "
                f"tau = {window:g}/gamma and no single slow mode explains the tail; "
                "use a longer window"
            )
    return times, corr, coherent, slow_w, slow_lam, fast


def psd(
    superop,
    rho_ss,
    freqs,
    window=60.0,
    n_times=4096,
    eta=DEFAULT_ETA,
    normalize=False,
):
    """Emission power spectral density at fixed parameters.

    The field correlation is split into the factorized part |<a>|^2 (exactly
    constant for a stationary state), an optional slow relaxation mode fitted
    off the tail, and the fast remainder.  The remainder is transformed
    numerically with an exponential window e^{-eta tau}; the constant and the
    slow mode contribute their matching Lorentzians analytically, so the
    windowing never has to fight an undecayed tail.  Raises
    WindowTooShortError if the remainder is still above 1e-4 of c(0) at the
    end of the window.
    """
    freqs = np.asarray(freqs, dtype=float)
    times, corr, coherent, slow_w, slow_lam, fast = _correlation_parts(
        superop, rho_ss, window, n_times
    )
    vals = _fluctuation_transform(times, fast, freqs, eta)
    vals = vals + _narrow_line(freqs, coherent, 0.0j, eta)
    if slow_w != 0.0:
        vals = vals + _narrow_line(freqs, slow_w, slow_lam, eta)
    peak = float(vals.max()) if vals.size else 0.0
    meta = {
        "window": window,
        "n_times": n_times,
        "eta": eta,
        "coherent_weight": coherent,
        "slow_mode_weight": complex(slow_w),
        "slow_mode_rate": complex(slow_lam),
        "mean_n": float(np.real(corr[0])),
    }
    if normalize and peak > 0.0:
        vals = vals / peak
    return SpectrumResult(frequencies=freqs, psd=vals, normalization=peak, meta=meta)


def _gauss_hermite_detunings(noise_width, n_nodes):
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    return math.sqrt(2.0) * noise_width * nodes, weights / math.sqrt(math.pi)


def _spline_or_constant(detunings, values):
    order = np.argsort(detunings)
    detunings = detunings[order]
    values = values[order]
    if detunings.size > 3:
        re = interpolate.CubicSpline(detunings, values.real)
        im = interpolate.CubicSpline(detunings, values.imag)
        return lambda x: re(x) + 1j * im(x)
    return lambda x: np.full(np.shape(x), values[0])


def _averaged_psd_once(
    params, noise_width, freqs, n_nodes, window, n_times, eta, gamma, solver_kwargs
):
    """One Gauss-Hermite pass: broad features by quadrature, narrow lines in
    closed form.

    The per-detuning coherent line and slow switching line are far narrower
    than any usable node spacing; summing them at the nodes would leave a comb
    of spurious maxima.  Their weights and rates vary smoothly with detuning,
    so they are interpolated between the nodes and integrated against the
    Gaussian on a fine grid instead, which is exact up to the interpolation.
    """
    detunings, weights = _gauss_hermite_detunings(noise_width, n_nodes)
    total = np.zeros(freqs.size, dtype=float)
    coherent_at = np.empty(n_nodes, dtype=complex)
    slow_w_at = np.empty(n_nodes, dtype=complex)
    slow_lam_at = np.empty(n_nodes, dtype=complex)
    for i, (delta, w) in enumerate(zip(detunings, weights)):
        p = replace(params, detuning_ratio=params.detuning_ratio + delta)
        superop = jj_liouvillian(p, gamma=gamma)
        rho = steady_state(superop, **solver_kwargs).state
        try:
            times, _corr, coherent, slow_w, slow_lam, fast = _correlation_parts(
                superop, rho, window, n_times
            )
        except WindowTooShortError as exc:
            raise WindowTooShortError(f"at detuning {delta:+.4f}: {exc}") from exc
        coherent_at[i] = coherent
        slow_w_at[i] = slow_w
        slow_lam_at[i] = slow_lam
        # common lab axis: each sample's rotating-frame spectrum sits at freqs - delta
        total += w * _fluctuation_transform(times, fast, freqs - delta, eta)

    coherent_fn = _spline_or_constant(detunings, coherent_at)
    slow_w_fn = _spline_or_constant(detunings, slow_w_at)
    slow_lam_fn = _spline_or_constant(detunings, slow_lam_at)
    fine = np.linspace(detunings.min(), detunings.max(), 1601)
    pdf = np.exp(-0.5 * (fine / noise_width) ** 2)
    pdf /= pdf.sum()
    coh_f = coherent_fn(fine)
    sw_f = slow_w_fn(fine)
    sl_f = slow_lam_fn(fine)
    block = 128
    for i in range(0, freqs.size, block):
        shifted = freqs[i : i + block, None] - fine[None, :]
        lines = np.real(coh_f[None, :] / (eta - 1j * shifted))
        lines += np.real(sw_f[None, :] / ((eta - sl_f[None, :]) - 1j * shifted))
        total[i : i + block] += lines @ pdf
    return total


def noise_averaged_psd(
    params,
    noise_width,
    freqs,
    n_nodes=21,
    window=60.0,
    n_times=4096,
    eta=DEFAULT_ETA,
    gamma=1.0,
    normalize=False,
    check_convergence=False,
    solver_kwargs=None,
):
    """PSD averaged over quasi-static Gaussian detuning noise.

    The junction's supply-voltage jitter is slow on all cavity timescales, so
    each noise value contributes the spectrum of a statically detuned model,
    shifted to its own emission frequency on the common (w - w0)/gamma axis.
    The fluctuation spectra are averaged by Gauss-Hermite quadrature over
    detunings delta ~ Gaussian(0, noise_width^2) (deterministic); the coherent
    delta lines are averaged in closed form (Voigt profile).  With
    `check_convergence` the node count is doubled and a normalized change
    above 1e-4 raises QuadratureConvergenceError.
    """
    if not noise_width > 0:
        raise ValueError(f"noise_width must be > 0, got {noise_width}")
    freqs = np.asarray(freqs, dtype=float)
    solver_kwargs = dict(solver_kwargs or {})
    vals = _averaged_psd_once(
        params, noise_width, freqs, n_nodes, window, n_times, eta, gamma, solver_kwargs
    )
    if check_convergence:
        refined = _averaged_psd_once(
            params, noise_width, freqs, 2 * n_nodes, window, n_times, eta, gamma, solver_kwargs
        )
        scale = max(vals.max(), refined.max())
        change = float(np.max(np.abs(refined - vals))) / scale if scale > 0 else 0.0
        if change > 1e-4:
            raise QuadratureConvergenceError(
                f"doubling quadrature nodes changed the spectrum by {change:.2e} (> 1e-4); "
                "raise n_nodes"
            )
        vals = refined
    peak = float(vals.max()) if vals.size else 0.0
    meta = {
        "noise_width": noise_width,
        "n_nodes": n_nodes,
        "window": window,
        "n_times": n_times,
        "eta": eta,
        "narrow_line_treatment": "interpolated closed-form Gaussian average",
    }
    if normalize and peak > 0.0:
        vals = vals / peak
    return SpectrumResult(frequencies=freqs, psd=vals, normalization=peak, meta=meta)
