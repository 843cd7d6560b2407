"""Steady states, the micromaser detailed-balance solution, and propagation.

The steady state is found from the trace-constrained linear system: the row
of L carrying d rho_00/dt is replaced by the trace functional (that row is
linearly dependent on the others for any trace-preserving L), and the sparse
system is solved by LU with a fixed elimination ordering so repeated runs are
bit-for-bit reproducible.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sla

from .fock import DensityMatrix
from .models import Superoperator, unvectorize, vectorize

DEFAULT_GAP_TOL = 1e-8
DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_TAIL_TOL = 1e-8


class SteadyStateError(RuntimeError):
    """Steady-state solve failed (residual above tolerance or singular system)."""


class DegenerateSteadyStateError(SteadyStateError):
    """The Liouvillian nullspace is (numerically) more than one-dimensional."""


class CutoffConvergenceError(RuntimeError):
    """Raising the Fock cutoff did not push the top-level population below tolerance."""


@dataclass(frozen=True)
class SteadyStateResult:
    state: DensityMatrix
    residual: float
    cutoff_used: int
    tail_population: float


@dataclass(frozen=True)
class CorrelationTrace:
    """Two-time function c(tau) on a time grid, with bookkeeping metadata."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


def _smallest_eigenvalues(superop, shift=1e-3):
    """The two eigenvalues of L nearest zero.

    Dense solve for small systems; shift-inverted Arnoldi (deterministic
    start vector) otherwise.  The shift sits just off the spectrum on the
    positive real axis, so the factorization is nonsingular.
    """
    m = superop.matrix
    n = m.shape[0]
    if n <= 400:
        vals = np.linalg.eigvals(m.toarray())
    else:
        v0 = np.zeros(n, dtype=complex)
        v0[:: superop.dim + 1] = 1.0
        vals = sla.eigs(
            m.tocsc(), k=2, sigma=shift, which="LM", v0=v0, return_eigenvectors=False
        )
    order = np.argsort(np.abs(vals))
    return vals[order[0]], vals[order[1]]


def steady_state(
    superop,
    check_uniqueness=True,
    gap_tol=DEFAULT_GAP_TOL,
    residual_tol=DEFAULT_RESIDUAL_TOL,
):
    """Unique steady state of a trace-preserving Liouvillian.

    Solves L vec(rho) = 0 with the normalization tr(rho) = 1 swapped in for
    the rho_00 row, Hermitizes the result, and reports the max-norm residual
    of the original equations.  With `check_uniqueness` the two eigenvalues
    of L nearest zero are computed and a second one below `gap_tol` raises
    DegenerateSteadyStateError (at exact trapping parameters the physical
    convention is the block reachable from the vacuum; cross-check with
    `evolve` from the vacuum when in doubt).
    """
    d = superop.dim
    n = d * d
    m = superop.matrix.tolil(copy=True)
    m[0, :] = 0.0
    m[0, :: d + 1] = 1.0
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = sla.splu(m.tocsc())
        vec = lu.solve(rhs)
    except RuntimeError as exc:  # singular factorization
        raise DegenerateSteadyStateError(
            f"trace-constrained system is singular ({exc}); the nullspace is degenerate"
        ) from exc
    if not np.all(np.isfinite(vec)):
        raise SteadyStateError("steady-state solve produced non-finite entries")

    rho = unvectorize(vec, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.max(np.abs(superop.matrix @ vectorize(rho))))
    if residual > residual_tol:
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} exceeds tolerance {residual_tol:.1e}"
        )
    if check_uniqueness:
        lam0, lam1 = _smallest_eigenvalues(superop)
        if abs(lam1) <= gap_tol:
            raise DegenerateSteadyStateError(
                f"nullspace is degenerate: two eigenvalues within {gap_tol:.1e} of zero "
                f"({lam0:.3e}, {lam1:.3e})"
            )
    pops = np.real(np.diag(rho))
    tail = float(pops[-1] + pops[-2])
    state = DensityMatrix(rho)
    return SteadyStateResult(
        state=state, residual=residual, cutoff_used=d - 1, tail_population=tail
    )


def converged_steady_state(
    build,
    seed_cutoff,
    tail_tol=DEFAULT_TAIL_TOL,
    max_cutoff=240,
    check_uniqueness=True,
    gap_tol=DEFAULT_GAP_TOL,
    residual_tol=DEFAULT_RESIDUAL_TOL,
):
    """Steady state with the cutoff auto-raised until the top two Fock levels
    hold less than `tail_tol` population.

    `build` maps a cutoff to the model Superoperator at that truncation.
    """
    cutoff = int(seed_cutoff)
    while True:
        result = steady_state(
            build(cutoff),
            check_uniqueness=check_uniqueness,
            gap_tol=gap_tol,
            residual_tol=residual_tol,
        )
        if result.tail_population < tail_tol:
            return result
        if cutoff >= max_cutoff:
            raise CutoffConvergenceError(
                f"tail population {result.tail_population:.3e} still above {tail_tol:.1e} "
                f"at the cutoff ceiling {max_cutoff}"
            )
        cutoff = min(max_cutoff, max(cutoff + 8, int(cutoff * 1.5)))


def micromaser_steady_analytic(params):
    """Exact micromaser steady state from detailed balance.

    The populations obey p_n = n0 * prod_{m=1..n} (N/gamma) sin^2(phi sqrt(m)) / m;
    the product is accumulated in log space so deep trapping cannot underflow
    the normalization.  Off-diagonals vanish identically.
    """
    d = params.cutoff + 1
    m = np.arange(1, d, dtype=float)
    s2 = np.sin(params.rabi_angle * np.sqrt(m)) ** 2
    with np.errstate(divide="ignore"):
        log_ratio = np.log(params.pump_ratio) + np.log(s2) - np.log(m)
    log_w = np.concatenate(([0.0], np.cumsum(log_ratio)))
    log_w -= log_w.max()
    w = np.exp(log_w)
    pops = w / w.sum()
    return DensityMatrix(np.diag(pops.astype(complex)))


def evolve(superop, rho0, t):
    """rho(t) = exp(L t)[rho0] via sparse scaling-and-squaring (Krylov) action."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if t == 0:
        return rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    r = rho0.matrix if hasattr(rho0, "matrix") else np.asarray(rho0, dtype=complex)
    vec = sla.expm_multiply(superop.matrix.tocsc() * t, vectorize(r))
    rho = unvectorize(vec, superop.dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise SteadyStateError(f"propagation lost trace: tr rho = {tr!r}")
    return DensityMatrix(rho / tr)


def _left_functional(left, dim):
    """Row vector l with l @ vec(M) = tr(left @ M)."""
    l = left.matrix if hasattr(left, "matrix") else np.asarray(left, dtype=complex)
    if l.shape != (dim, dim):
        raise ValueError(f"left operator shape {l.shape} does not match dim {dim}")
    return vectorize(l.T)


def regression_trace(superop, rho_ss, left, seed, times, max_chunk_bytes=2**26):
    """Two-time correlation c(tau_k) = tr(left exp(L tau_k)[seed]).

    The quantum regression rule: propagate the (generally non-Hermitian) seed
    matrix, e.g. a rho_ss or a rho_ss a^dag, under the same Liouvillian as
    single-time expectations, then close with `left`.  Uniform grids are
    propagated in chunks with the linspace mode of expm_multiply; non-uniform
    grids fall back to step-by-step propagation.  `rho_ss` is carried along
    only as bookkeeping (it should be stationary for L).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-d array")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be nonnegative and strictly increasing")
    d = superop.dim
    lmat = superop.matrix.tocsc()
    lfun = _left_functional(left, d)
    s = seed.matrix if hasattr(seed, "matrix") else np.asarray(seed, dtype=complex)
    v = vectorize(s)
    values = np.empty(times.size, dtype=complex)

    diffs = np.diff(times)
    uniform = times.size >= 3 and np.allclose(diffs, diffs[0], rtol=1e-12, atol=0.0)
    if uniform:
        dt = float(diffs[0])
        if times[0] > 0:
            v = sla.expm_multiply(lmat * times[0], v)
        values[0] = lfun @ v
        chunk = max(2, int(max_chunk_bytes / (16 * d * d)))
        k = 1
        while k < times.size:
            steps = min(chunk, times.size - k)
            block = sla.expm_multiply(
                lmat, v, start=0.0, stop=steps * dt, num=steps + 1, endpoint=True
            )
            values[k : k + steps] = block[1:] @ lfun
            v = block[-1]
            k += steps
    else:
        prev = 0.0
        for i, t in enumerate(times):
            if t > prev:
                v = sla.expm_multiply(lmat * (t - prev), v)
                prev = t
            values[i] = lfun @ v
    return CorrelationTrace(times=times, values=values, meta={"dim": d})
