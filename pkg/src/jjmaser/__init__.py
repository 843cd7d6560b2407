"""Open-system simulator for two pumped-cavity models: the micromaser and the
voltage-biased Josephson-junction cavity.

Core layers:

- ``fock``: truncated Fock-space operators, states, special functions
- ``models``: Liouvillian builders for both systems (and the two-cavity variant)
- ``solvers``: steady states, detailed-balance oracle, time propagation,
  two-time correlation traces
- ``observables``: moments, Fano factor, fidelities, Wigner functions,
  g2 correlations and emission spectra
- ``semiclassical``: mean-field fixed points, stability and bifurcation scans
- ``sweeps``/``cli``: reproducible parameter-sweep runner with CSV/JSON output
"""

__version__ = "0.1.0"

from .fock import (
    DensityMatrix,
    FockSpace,
    Operator,
    annihilation,
    bessel_j1,
    bessel_j1_prime,
    coherent_state,
    creation,
    fock_state,
    laguerre_assoc1,
    number_function,
    number_operator,
)
from .models import (
    JosephsonParams,
    MicromaserParams,
    Superoperator,
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
)
from .solvers import (
    CorrelationTrace,
    DegenerateSteadyStateError,
    SteadyStateResult,
    converged_steady_state,
    evolve,
    micromaser_steady_analytic,
    regression_trace,
    steady_state,
)
from .observables import (
    SpectrumResult,
    UndefinedObservableError,
    WignerGrid,
    WindowTooShortError,
    fano,
    fidelity_fock,
    fidelity_pure,
    g2_tau,
    g2_zero,
    mean_n,
    noise_averaged_psd,
    psd,
    wigner,
)
from .semiclassical import (
    FixedPoint,
    ScState,
    bifurcation_scan,
    eom_rhs,
    find_fixed_points,
    integrate_trajectory,
)
