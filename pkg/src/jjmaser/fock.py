"""Truncated Fock-space algebra: operators, states and special functions.

Everything in the package lives on a finite Fock basis |0>, ..., |cutoff>.
Operators and density matrices are dense complex matrices; all values are
immutable after construction and safe to share between workers.
"""

import math

import numpy as np
from scipy import special

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


class FockSpace:
    """Fock basis of a single cavity mode truncated at photon number `cutoff`.

    The Hilbert-space dimension is D = cutoff + 1. Operators built from the
    same FockSpace share that dimension.
    """

    __slots__ = ("cutoff",)

    def __init__(self, cutoff):
        cutoff = int(cutoff)
        if cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {cutoff}")
        object.__setattr__(self, "cutoff", cutoff)

    def __setattr__(self, name, value):
        raise AttributeError("FockSpace is immutable")

    @property
    def dim(self):
        return self.cutoff + 1

    def __eq__(self, other):
        return isinstance(other, FockSpace) and other.cutoff == self.cutoff

    def __hash__(self):
        return hash(("FockSpace", self.cutoff))

    def __repr__(self):
        return f"FockSpace(cutoff={self.cutoff})"


def _freeze(matrix):
    m = np.ascontiguousarray(matrix, dtype=complex)
    m.setflags(write=False)
    return m


class Operator:
    """Dense complex matrix on a truncated Fock space (or a tensor product)."""

    __slots__ = ("matrix", "dim")

    def __init__(self, matrix):
        m = _freeze(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def dag(self):
        return Operator(self.matrix.conj().T)

    def hermiticity_defect(self):
        """max |M - M^dag| element; 0 for Hermitian operators."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol=HERMITICITY_TOL):
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return self.hermiticity_defect() <= tol * scale

    def expect(self, rho):
        """tr(M rho) for a DensityMatrix or raw matrix `rho`."""
        r = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho)
        return complex(np.trace(self.matrix @ r))

    def __matmul__(self, other):
        o = other.matrix if isinstance(other, Operator) else other
        return Operator(self.matrix @ o)

    def __add__(self, other):
        o = other.matrix if isinstance(other, Operator) else other
        return Operator(self.matrix + o)

    def __sub__(self, other):
        o = other.matrix if isinstance(other, Operator) else other
        return Operator(self.matrix - o)

    def __mul__(self, scalar):
        return Operator(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.matrix)

    def __repr__(self):
        return f"Operator(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state on a truncated space.

    Construction validates all three invariants (hermiticity relative to the
    matrix scale, trace within 1e-12 of one, eigenvalues above -1e-10) and
    raises ValueError if any fails.
    """

    __slots__ = ("matrix", "dim")

    def __init__(self, matrix, validate=True):
        m = _freeze(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if validate:
            scale = max(1.0, float(np.max(np.abs(m))))
            herm = float(np.max(np.abs(m - m.conj().T)))
            if herm > HERMITICITY_TOL * scale:
                raise ValueError(f"not Hermitian: defect {herm:.3e}")
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace {tr} differs from 1 by more than {TRACE_TOL}")
            lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
            if lo < EIGENVALUE_FLOOR:
                raise ValueError(f"negative eigenvalue {lo:.3e} below floor {EIGENVALUE_FLOOR}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def populations(self):
        """Diagonal in the Fock basis, as a real vector."""
        return np.real(np.diag(self.matrix))

    def expect(self, op):
        o = op.matrix if isinstance(op, Operator) else np.asarray(op)
        return complex(np.trace(o @ self.matrix))

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def annihilation(space):
    """Ladder operator a with <n-1|a|n> = sqrt(n)."""
    d = space.dim
    m = np.zeros((d, d), dtype=complex)
    ns = np.arange(1, d)
    m[ns - 1, ns] = np.sqrt(ns)
    return Operator(m)


def creation(space):
    """Ladder operator a^dag, the adjoint of annihilation()."""
    return annihilation(space).dag()


def number_operator(space):
    return Operator(np.diag(np.arange(space.dim, dtype=float)).astype(complex))


def number_function(space, f):
    """Diagonal operator with entry f(n) at |n><n|.

    Both models need operator functions of the number operator; they are
    diagonal in the Fock basis so a plain scalar function suffices.  Each
    f(n) must be finite on 0..cutoff.
    """
    vals = np.empty(space.dim, dtype=complex)
    for n in range(space.dim):
        v = complex(f(n))
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"number function is not finite at n={n}: {v}")
        vals[n] = v
    return Operator(np.diag(vals))


def laguerre_assoc1(n, x):
    """Associated Laguerre polynomial L^1_n(x).

    Evaluated by the three-term recurrence
        (k+1) L^1_{k+1} = (2k + 2 - x) L^1_k - (k+1) L^1_{k-1},
    which stays stable where the explicit factorial formula overflows.
    Accepts scalar or array x.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"polynomial degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2.0 * k + 2.0 - x) * cur - (k + 1.0) * prev) / (k + 1.0)
    return cur if cur.ndim else float(cur)


def bessel_j1(x):
    """Bessel function of the first kind J_1(x)."""
    return special.j1(x)


def bessel_j1_prime(x):
    """Derivative J_1'(x) = (J_0(x) - J_2(x)) / 2."""
    return special.jvp(1, x, 1)


def fock_state(space, n):
    """Pure number state |n><n|."""
    n = int(n)
    if not 0 <= n <= space.cutoff:
        raise ValueError(f"Fock index {n} outside 0..{space.cutoff}")
    m = np.zeros((space.dim, space.dim), dtype=complex)
    m[n, n] = 1.0
    return DensityMatrix(m)


def coherent_amplitudes(space, alpha):
    """Truncated, renormalized coherent-state amplitudes c_n = alpha^n/sqrt(n!) e^{-|a|^2/2}."""
    alpha = complex(alpha)
    if abs(alpha) ** 2 > space.cutoff / 4.0:
        raise ValueError(
            f"|alpha|^2 = {abs(alpha)**2:.3g} exceeds cutoff/4 = {space.cutoff / 4.0:.3g}; "
            "raise the cutoff"
        )
    ns = np.arange(space.dim)
    if alpha == 0:
        c = np.zeros(space.dim, dtype=complex)
        c[0] = 1.0
        return c
    log_mag = ns * math.log(abs(alpha)) - 0.5 * special.gammaln(ns + 1.0) - 0.5 * abs(alpha) ** 2
    c = np.exp(log_mag) * np.exp(1j * ns * np.angle(alpha))
    return c / np.linalg.norm(c)


def coherent_state(space, alpha):
    """Pure coherent state |alpha><alpha|, renormalized after truncation."""
    c = coherent_amplitudes(space, alpha)
    return DensityMatrix(np.outer(c, c.conj()))
