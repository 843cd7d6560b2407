"""How close can each pumping scheme get to the one-photon Fock state?

Both systems are tuned to their two-level trapping point (Rabi angle
pi/sqrt(2), zero-point spread sqrt(2)).  The incoherent micromaser pump can
invert the two-level population all the way to |1>, while the coherent
junction drive saturates at fidelity 1/2 like any resonantly driven two-level
system.  Adding a strongly damped partner cavity (pair pumping with leakage
100 gamma) breaks that bound by destroying the coherence that limits it.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jjmaser import (
    JosephsonParams,
    MicromaserParams,
    TwoCavityParams,
    converged_steady_state,
    fidelity_fock,
    jj_liouvillian,
    micromaser_liouvillian,
    partial_trace,
    steady_state,
    two_cavity_liouvillian,
)

PHI = math.pi / math.sqrt(2.0)
DELTA0 = math.sqrt(2.0)

drives = np.logspace(0, 2, 25)
mm, jj, two = [], [], []
for e in drives:
    res = converged_steady_state(
        lambda c: micromaser_liouvillian(MicromaserParams(float(e), PHI, c)), 8,
        check_uniqueness=False,
    )
    mm.append(fidelity_fock(res.state, 1))
    res = converged_steady_state(
        lambda c: jj_liouvillian(JosephsonParams(float(e), DELTA0, c)), 8,
        check_uniqueness=False,
    )
    jj.append(fidelity_fock(res.state, 1))
    res = steady_state(
        two_cavity_liouvillian(
            TwoCavityParams(float(e), DELTA0, DELTA0, 100.0, 3, 3)
        ),
        check_uniqueness=False,
    )
    reduced = partial_trace(res.state.matrix, (4, 4), keep=0)
    two.append(float(np.real(reduced[1, 1])))

fig, ax = plt.subplots(figsize=(5.5, 4))
ax.semilogx(drives, mm, "r-", label="micromaser")
ax.semilogx(drives, jj, "b-", label="junction, single cavity")
ax.semilogx(drives, two, "b--", label="junction, two cavities")
ax.axhline(0.5, color="gray", lw=0.8)
ax.set_xlabel("pump strength (flow or drive, units of damping)")
ax.set_ylabel(r"fidelity $\langle 1|\rho_{st}|1\rangle$")
ax.set_ylim(0, 1.02)
ax.legend()
fig.tight_layout()
fig.savefig("fidelity_limits.png", dpi=150)
print("wrote fidelity_limits.png")
