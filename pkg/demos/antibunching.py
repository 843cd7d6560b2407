"""Second-order coherence g2(tau) across the nonlinearity range.

In the harmonic limit (small zero-point spread) the junction cavity emits
coherent-state light with g2 = 1 at all delays.  Increasing the spread makes
the photons increasingly anti-bunched, with Rabi-type oscillations at strong
drive; at sqrt(2) the cavity is a two-level system and g2(0) vanishes.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jjmaser import JosephsonParams, converged_steady_state, g2_tau, jj_liouvillian

DRIVE = 20.0
taus = np.linspace(0.0, 8.0, 801)

fig, ax = plt.subplots(figsize=(6, 4))
for delta0, color in [(0.1, "C0"), (1.0, "C1"), (math.sqrt(2.0), "C3")]:
    res = converged_steady_state(
        lambda c: jj_liouvillian(JosephsonParams(DRIVE, delta0, c)), 16,
        check_uniqueness=False,
    )
    superop = jj_liouvillian(
        JosephsonParams(DRIVE, delta0, res.cutoff_used)
    )
    trace = g2_tau(superop, res.state, taus)
    ax.plot(taus, trace.values, color=color, label=rf"$\Delta_0 = {delta0:.3g}$")

ax.axhline(1.0, color="gray", lw=0.7)
ax.set_xlabel(r"delay $\tau$ (units of $1/\gamma$)")
ax.set_ylabel(r"$g^{(2)}(\tau)$")
ax.set_title(f"junction cavity, drive = {DRIVE:g}")
ax.legend()
fig.tight_layout()
fig.savefig("antibunching.png", dpi=150)
print("wrote antibunching.png")
