"""Steady-state occupation vs nonlinearity for both cavity models.

Sweeping the micromaser Rabi angle and the junction cavity's zero-point
spread produces the same signature: sharp dips in <n>_st wherever an upward
rate (micromaser) or a pair-drive matrix element (junction) vanishes, pinning
the steady state below a maximal Fock level.  The junction never dips toward
vacuum: the 0 -> 1 element has no zero.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jjmaser import (
    JosephsonParams,
    MicromaserParams,
    converged_steady_state,
    jj_liouvillian,
    mean_n,
    micromaser_liouvillian,
)
from jjmaser.sweeps import predicted_jj_traps, predicted_micromaser_traps

PUMP = 10.0  # micromaser flow N/gamma
DRIVE = 20.0  # junction E*_J/(hbar gamma)

# --- micromaser: sweep the Rabi angle -------------------------------------
phis = np.arange(0.4, 3.6, 0.01)
mm_means = []
for phi in phis:
    res = converged_steady_state(
        lambda c: micromaser_liouvillian(MicromaserParams(PUMP, float(phi), c)),
        20,
        check_uniqueness=False,
    )
    mm_means.append(mean_n(res.state))

# --- junction cavity: sweep the zero-point spread -------------------------
deltas = np.arange(0.1, 2.2, 0.01)
jj_means = []
for d in deltas:
    res = converged_steady_state(
        lambda c: jj_liouvillian(JosephsonParams(DRIVE, float(d), c)),
        24,
        check_uniqueness=False,
    )
    jj_means.append(mean_n(res.state))

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))

ax1.plot(phis, mm_means, "k-", lw=1)
for trap in predicted_micromaser_traps(phis[0], phis[-1], max_level=3):
    if trap["branch"] == 1:
        ax1.axvline(trap["rabi_angle"], color=f"C{trap['n_max']}", ls="--", alpha=0.7,
                    label=f"N_max = {trap['n_max']}")
ax1.set_xlabel("Rabi angle")
ax1.set_ylabel(r"$\langle n \rangle_{st}$")
ax1.set_title(f"micromaser, pump = {PUMP:g}")
ax1.legend(fontsize=8)

ax2.plot(deltas, jj_means, "k-", lw=1)
seen = set()
for trap in predicted_jj_traps(deltas[0], deltas[-1], max_level=3):
    label = f"N_max = {trap['n_max']}" if trap["n_max"] not in seen else None
    seen.add(trap["n_max"])
    ax2.axvline(trap["delta0"], color=f"C{trap['n_max']}", ls="--", alpha=0.7, label=label)
ax2.set_xlabel(r"$\Delta_0$")
ax2.set_ylabel(r"$\langle n \rangle_{st}$")
ax2.set_title(f"junction cavity, drive = {DRIVE:g}")
ax2.legend(fontsize=8)

fig.tight_layout()
fig.savefig("trapping_sweeps.png", dpi=150)
print("wrote trapping_sweeps.png")
