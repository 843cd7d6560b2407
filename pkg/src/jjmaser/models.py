"""Liouvillian builders for the micromaser and the Josephson-junction cavity.

Conventions fixed here and relied on everywhere else:

- Rates are quoted in units of the cavity damping rate (gamma = 1 by default),
  Hamiltonians in units of hbar*gamma.
- Density matrices are vectorized by column stacking (Fortran order), so
  vec(A rho B) = kron(B.T, A) vec(rho).
- Superoperators are stored sparse (CSR); they stay trace preserving on the
  truncated space, including the top Fock level.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .fock import FockSpace, Operator, annihilation, laguerre_assoc1

VON_KLITZING_OHMS = 25812.807  # h/e^2

__all__ = [
    "VON_KLITZING_OHMS",
    "MicromaserParams",
    "JosephsonParams",
    "TwoCavityParams",
    "Superoperator",
    "vectorize",
    "unvectorize",
    "micromaser_gain",
    "damping_dissipator",
    "lindblad_dissipator",
    "jj_hamiltonian",
    "jj_hamiltonian_oracle",
    "ej_renormalize",
    "delta0_from_impedance",
    "liouvillian",
    "micromaser_liouvillian",
    "jj_liouvillian",
    "two_cavity_hamiltonian",
    "two_cavity_liouvillian",
    "partial_trace",
    "with_cutoff",
]


@dataclass(frozen=True)
class MicromaserParams:
    """Micromaser model: atom flow N/gamma, Rabi angle (coupling x transit time), Fock cutoff."""

    pump_ratio: float
    rabi_angle: float
    cutoff: int

    def __post_init__(self):
        if not self.pump_ratio > 0:
            raise ValueError(f"pump_ratio must be > 0, got {self.pump_ratio}")
        if not math.isfinite(self.rabi_angle) or self.rabi_angle < 0:
            raise ValueError(f"rabi_angle must be finite and >= 0, got {self.rabi_angle}")
        if int(self.cutoff) < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")


@dataclass(frozen=True)
class JosephsonParams:
    """Josephson-junction cavity: drive E*_J/(hbar gamma), zero-point spread
    delta0, optional static detuning (in units of gamma), Fock cutoff."""

    ej_star_ratio: float
    delta0: float
    cutoff: int
    detuning_ratio: float = 0.0

    def __post_init__(self):
        if self.ej_star_ratio < 0:
            raise ValueError(f"ej_star_ratio must be >= 0, got {self.ej_star_ratio}")
        if not self.delta0 > 0:
            raise ValueError(f"delta0 must be > 0, got {self.delta0}")
        if not math.isfinite(self.detuning_ratio):
            raise ValueError("detuning_ratio must be finite")
        if int(self.cutoff) < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")


MAX_PRODUCT_DIM = 256  # guards the two-mode superoperator (dim^4 memory)


@dataclass(frozen=True)
class TwoCavityParams:
    """Driven cavity plus strongly damped auxiliary cavity, pumped pairwise."""

    ej_star_ratio: float
    delta_a: float
    delta_b: float
    gamma_ratio_aux: float
    cutoff_a: int
    cutoff_b: int

    def __post_init__(self):
        if self.ej_star_ratio < 0:
            raise ValueError(f"ej_star_ratio must be >= 0, got {self.ej_star_ratio}")
        for name in ("delta_a", "delta_b", "gamma_ratio_aux"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if int(self.cutoff_a) < 1 or int(self.cutoff_b) < 1:
            raise ValueError("cutoffs must be >= 1")
        dim = (self.cutoff_a + 1) * (self.cutoff_b + 1)
        if dim > MAX_PRODUCT_DIM:
            raise ValueError(
                f"product dimension {dim} exceeds limit {MAX_PRODUCT_DIM}; lower the cutoffs"
            )

    @property
    def dim(self):
        return (self.cutoff_a + 1) * (self.cutoff_b + 1)


def with_cutoff(params, cutoff):
    """Copy of a parameter set with a different Fock cutoff."""
    return replace(params, cutoff=int(cutoff))


def vectorize(matrix):
    """Column-stacked vec(rho)."""
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvectorize(vec, dim):
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


def _trace_functional(dim):
    """Row vector t with t @ vec(rho) = tr(rho)."""
    t = np.zeros(dim * dim, dtype=complex)
    t[:: dim + 1] = 1.0
    return t


class Superoperator:
    """Sparse D^2 x D^2 matrix acting on column-stacked density matrices."""

    __slots__ = ("dim", "matrix")

    def __init__(self, dim, matrix):
        dim = int(dim)
        m = sparse.csr_matrix(matrix, dtype=complex)
        if m.shape != (dim * dim, dim * dim):
            raise ValueError(f"superoperator shape {m.shape} does not match dim {dim}")
        self.dim = dim
        self.matrix = m

    def apply(self, rho):
        """L[rho] for a DensityMatrix or raw matrix; returns a raw matrix."""
        r = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho, dtype=complex)
        return unvectorize(self.matrix @ vectorize(r), self.dim)

    def trace_defect(self):
        """max |tr(L[E_ij])| over all basis matrices; 0 for trace-preserving maps."""
        t = _trace_functional(self.dim)
        return float(np.max(np.abs(self.matrix.T @ t)))

    def __add__(self, other):
        if isinstance(other, Superoperator):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return Superoperator(self.dim, self.matrix + other.matrix)
        return NotImplemented

    def __mul__(self, scalar):
        return Superoperator(self.dim, self.matrix * scalar)

    __rmul__ = __mul__

    def toarray(self):
        return self.matrix.toarray()

    def __repr__(self):
        return f"Superoperator(dim={self.dim}, nnz={self.matrix.nnz})"


def _sandwich(left, right):
    """Sparse superoperator for rho -> left @ rho @ right."""
    return sparse.kron(sparse.csr_matrix(right).T, sparse.csr_matrix(left), format="csr")


def _spre(op):
    d = op.shape[0]
    return sparse.kron(sparse.identity(d, format="csr"), sparse.csr_matrix(op), format="csr")


def _spost(op):
    d = op.shape[0]
    return sparse.kron(sparse.csr_matrix(op).T, sparse.identity(d, format="csr"), format="csr")


def lindblad_dissipator(collapse, rate=1.0):
    """rate * (c rho c^dag - {c^dag c, rho}/2) as a Superoperator."""
    c = np.asarray(collapse.matrix if isinstance(collapse, Operator) else collapse, dtype=complex)
    d = c.shape[0]
    cdc = c.conj().T @ c
    m = _sandwich(c, c.conj().T) - 0.5 * (_spre(cdc) + _spost(cdc))
    return Superoperator(d, rate * m)


def damping_dissipator(gamma, space):
    """Zero-temperature photon loss (gamma/2)(2 a rho a^dag - a^dag a rho - rho a^dag a)."""
    if not gamma > 0:
        raise ValueError(f"damping rate must be > 0, got {gamma}")
    return lindblad_dissipator(annihilation(space), rate=gamma)


def micromaser_gain(params, gamma=1.0):
    """Incoherent gain from the dilute beam of excited two-level atoms.

    Implements N [C rho C + A rho A^dag - rho] with C = cos(phi sqrt(a a^dag))
    and A = a^dag sin(phi sqrt(a a^dag)) / sqrt(a a^dag); functions of a a^dag
    act as n+1 on |n>.  The no-flip amplitude on the top truncated level is
    set to 1 (the flip channel has nowhere to go), which keeps the map exactly
    trace preserving; converged results are unaffected because the sweep layer
    keeps the top-level population below 1e-8.
    """
    space = FockSpace(params.cutoff)
    d = space.dim
    n = np.arange(d, dtype=float)
    phi = params.rabi_angle
    cos_amp = np.cos(phi * np.sqrt(n + 1.0))
    cos_amp[-1] = 1.0
    flip_amp = np.sin(phi * np.sqrt(n + 1.0)) / np.sqrt(n + 1.0)
    a_dag = annihilation(space).dag().matrix
    c_mat = np.diag(cos_amp.astype(complex))
    a_mat = a_dag @ np.diag(flip_amp.astype(complex))
    rate = params.pump_ratio * gamma
    m = _sandwich(c_mat, c_mat) + _sandwich(a_mat, a_mat.conj().T)
    m = rate * (m - sparse.identity(d * d, format="csr"))
    return Superoperator(d, m)


def ej_renormalize(e_j, delta0):
    """Josephson energy dressed by the cavity zero-point motion: E_J e^{-delta0^2/2}."""
    return e_j * math.exp(-0.5 * delta0 * delta0)


def delta0_from_impedance(z_lc_ohms):
    """Zero-point spread from the resonator impedance, delta0 = sqrt(4 pi Z / R_K)."""
    if not z_lc_ohms > 0:
        raise ValueError(f"impedance must be > 0 ohms, got {z_lc_ohms}")
    return math.sqrt(4.0 * math.pi * z_lc_ohms / VON_KLITZING_OHMS)


def _jj_offdiag(ej_star_ratio, delta0, dim):
    """First-superdiagonal elements <n|H|n+1> in units of hbar*gamma."""
    n = np.arange(dim - 1, dtype=float)
    lag = np.array([laguerre_assoc1(int(k), delta0 * delta0) for k in range(dim - 1)])
    return -1j * delta0 * ej_star_ratio / (2.0 * np.sqrt(n + 1.0)) * lag


def jj_hamiltonian(params):
    """Rotating-frame cavity Hamiltonian of the Josephson-junction device.

    Tridiagonal: <n|H|n+1> = -i delta0 E*/(2 sqrt(n+1)) L^1_n(delta0^2), the
    lower element its conjugate, plus detuning_ratio * n on the diagonal.
    """
    d = params.cutoff + 1
    h = np.zeros((d, d), dtype=complex)
    off = _jj_offdiag(params.ej_star_ratio, params.delta0, d)
    idx = np.arange(d - 1)
    h[idx, idx + 1] = off
    h[idx + 1, idx] = off.conj()
    if params.detuning_ratio != 0.0:
        h[np.arange(d), np.arange(d)] = params.detuning_ratio * np.arange(d)
    return Operator(h)


def jj_hamiltonian_oracle(params, series_order=60, tol=1e-10):
    """Independent construction of the junction Hamiltonian by series expansion.

    Expands i (E*/2) :(a^dag - a) J_1(2 delta0 sqrt(a^dag a)) / sqrt(a^dag a):
    in powers of delta0 with explicitly normal-ordered monomials
    a^dag^k a^{k+1} (and conjugates).  Normal ordering keeps every
    intermediate state at or below max(row, col), so truncation does not
    corrupt the retained matrix elements.  Raises if the series has not
    settled below `tol` after `series_order` terms.
    """
    space = FockSpace(params.cutoff)
    a = annihilation(space).matrix
    ad = a.conj().T
    d = space.dim
    delta0 = params.delta0
    lower = np.zeros((d, d), dtype=complex)
    term = delta0 * a  # k = 0 term of sum_k c_k ad^k a^{k+1}
    last = np.inf
    for k in range(series_order + 1):
        lower += term
        last = float(np.max(np.abs(term)))
        if last < tol * 1e-4:
            break
        term = (-delta0 * delta0 / ((k + 1.0) * (k + 2.0))) * (ad @ term @ a)
    if last > tol:
        raise ArithmeticError(
            f"normal-ordered series not converged after {series_order} terms "
            f"(last change {last:.3e} > {tol:.1e}); raise series_order"
        )
    h = 1j * (params.ej_star_ratio / 2.0) * (lower.conj().T - lower)
    if params.detuning_ratio != 0.0:
        h = h + np.diag(params.detuning_ratio * np.arange(d, dtype=complex))
    return Operator(h)


def liouvillian(hamiltonian, dissipators):
    """L[rho] = -i [H, rho] + sum of dissipators (hbar = 1, H in units of hbar*gamma)."""
    if hamiltonian is None and not dissipators:
        raise ValueError("need a Hamiltonian or at least one dissipator")
    dims = {s.dim for s in dissipators}
    if hamiltonian is not None:
        dims.add(hamiltonian.dim)
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch among Liouvillian pieces: {sorted(dims)}")
    d = dims.pop()
    m = sparse.csr_matrix((d * d, d * d), dtype=complex)
    if hamiltonian is not None:
        h = hamiltonian.matrix
        m = m + (-1j) * (_spre(h) - _spost(h))
    for dis in dissipators:
        m = m + dis.matrix
    return Superoperator(d, m)


def micromaser_liouvillian(params, gamma=1.0):
    """Gain plus cavity damping for the micromaser."""
    space = FockSpace(params.cutoff)
    return micromaser_gain(params, gamma) + damping_dissipator(gamma, space)


def jj_liouvillian(params, gamma=1.0):
    """Coherent junction drive plus cavity damping.

    The Hamiltonian is dimensionless (units of hbar*gamma), so for gamma != 1
    it is rescaled to keep all rates in absolute units.
    """
    space = FockSpace(params.cutoff)
    h = jj_hamiltonian(params)
    if gamma != 1.0:
        h = gamma * h
    return liouvillian(h, [damping_dissipator(gamma, space)])


def _pair_factor(delta, dim):
    """Per-mode factor u[n, n+1] = delta L^1_n(delta^2)/sqrt(n+1) of the pair drive."""
    u = np.zeros((dim, dim), dtype=complex)
    n = np.arange(dim - 1, dtype=float)
    lag = np.array([laguerre_assoc1(int(k), delta * delta) for k in range(dim - 1)])
    u[np.arange(dim - 1), np.arange(dim - 1) + 1] = delta * lag / np.sqrt(n + 1.0)
    return u


def two_cavity_hamiltonian(params):
    """Pair-creation drive on the product space (mode a slow index).

    <n_a, n_b| H |n_a+1, n_b+1> =
        -(E*/2) delta_a delta_b L^1_{n_a}(delta_a^2) L^1_{n_b}(delta_b^2)
        / sqrt((n_a+1)(n_b+1)),
    every other off-diagonal block zero.  Each factor matches the single-mode
    drive, so a zero of either Laguerre polynomial truncates the pair ladder.
    """
    ua = _pair_factor(params.delta_a, params.cutoff_a + 1)
    ub = _pair_factor(params.delta_b, params.cutoff_b + 1)
    pair = np.kron(ua, ub)
    h = -(params.ej_star_ratio / 2.0) * (pair + pair.conj().T)
    return Operator(h)


def two_cavity_liouvillian(params, gamma=1.0):
    """Pair drive plus independent damping: gamma on mode a, gamma_aux on mode b."""
    da = params.cutoff_a + 1
    db = params.cutoff_b + 1
    a_single = annihilation(FockSpace(params.cutoff_a)).matrix
    b_single = annihilation(FockSpace(params.cutoff_b)).matrix
    a_full = np.kron(a_single, np.eye(db, dtype=complex))
    b_full = np.kron(np.eye(da, dtype=complex), b_single)
    h = two_cavity_hamiltonian(params)
    if gamma != 1.0:
        h = gamma * h
    return liouvillian(
        h,
        [
            lindblad_dissipator(a_full, rate=gamma),
            lindblad_dissipator(b_full, rate=params.gamma_ratio_aux * gamma),
        ],
    )


def partial_trace(rho, dims, keep):
    """Reduced matrix of a bipartite state; dims = (dim_a, dim_b), keep = 0 or 1."""
    da, db = dims
    r = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho, dtype=complex)
    if r.shape != (da * db, da * db):
        raise ValueError(f"state shape {r.shape} does not match dims {dims}")
    r4 = r.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r4)
    if keep == 1:
        return np.einsum("ijil->jl", r4)
    raise ValueError("keep must be 0 (mode a) or 1 (mode b)")
