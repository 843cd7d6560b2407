"""Wigner functions of the trapped steady states.

Three panels at the two-level trapping point: the strongly pumped micromaser
(negative at the origin, genuinely Fock-like), the single-cavity junction
(stuck at fidelity 1/2, no negativity anywhere), and the two-cavity junction
scheme (negativity restored by the dissipative partner).
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jjmaser import (
    DensityMatrix,
    JosephsonParams,
    MicromaserParams,
    TwoCavityParams,
    converged_steady_state,
    jj_liouvillian,
    micromaser_liouvillian,
    partial_trace,
    steady_state,
    two_cavity_liouvillian,
    wigner,
)

PHI = math.pi / math.sqrt(2.0)
DELTA0 = math.sqrt(2.0)
DRIVE = 50.0

mm = converged_steady_state(
    lambda c: micromaser_liouvillian(MicromaserParams(DRIVE, PHI, c)), 8,
    check_uniqueness=False,
).state
jj = converged_steady_state(
    lambda c: jj_liouvillian(JosephsonParams(DRIVE, DELTA0, c)), 8,
    check_uniqueness=False,
).state
two = steady_state(
    two_cavity_liouvillian(TwoCavityParams(DRIVE, DELTA0, DELTA0, 100.0, 3, 3)),
    check_uniqueness=False,
).state
two_a = DensityMatrix(partial_trace(two.matrix, (4, 4), keep=0))

axis = np.linspace(-5.5, 5.5, 161)
states = [
    (mm, f"micromaser, pump {DRIVE:g}"),
    (jj, f"single junction cavity, drive {DRIVE:g}"),
    (two_a, f"two-cavity junction, drive {DRIVE:g}"),
]

fig, axes = plt.subplots(1, 3, figsize=(13, 4))
for ax, (rho, title) in zip(axes, states):
    grid = wigner(rho, axis, axis)
    span = float(np.max(np.abs(grid.values)))
    im = ax.pcolormesh(
        axis, axis, grid.values.T, cmap="RdBu_r", vmin=-span, vmax=span,
        shading="auto",
    )
    ax.set_title(f"{title}\nmin W = {grid.values.min():+.3f}", fontsize=9)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    fig.colorbar(im, ax=ax, shrink=0.8)

fig.tight_layout()
fig.savefig("wigner_gallery.png", dpi=150)
print("wrote wigner_gallery.png")
