"""Emission spectrum of the junction cavity under slow voltage noise.

At weak drive the emission is a single line at the drive frequency whose
observed width is set entirely by the quasi-static supply-voltage jitter.
Driving hard at strong zero-point spread splits off Rabi-type sidebands: a
Mollow-like triplet that survives the noise averaging.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jjmaser import JosephsonParams, noise_averaged_psd

NOISE_STD = 1.0  # detuning-noise standard deviation, units of gamma

freqs = np.linspace(-30.0, 30.0, 1601)
cases = [
    (JosephsonParams(ej_star_ratio=2.0, delta0=1.0, cutoff=12), "weak drive (2)"),
    (JosephsonParams(ej_star_ratio=20.0, delta0=1.0, cutoff=30), "strong drive (20)"),
]

fig, ax = plt.subplots(figsize=(6, 4))
for params, label in cases:
    spec = noise_averaged_psd(
        params, NOISE_STD, freqs, n_nodes=21, window=60.0, n_times=4096,
        normalize=True,
    )
    ax.semilogy(spec.frequencies, np.clip(spec.psd, 1e-6, None), label=label)

ax.set_xlabel(r"$(\omega - \omega_0)/\gamma$")
ax.set_ylabel("PSD (normalized to main peak)")
ax.set_ylim(1e-5, 2)
ax.axhline(0.05, color="gray", lw=0.7, ls=":")
ax.legend()
ax.set_title(rf"$\Delta_0 = 1$, noise std $= {NOISE_STD:g}\gamma$")
fig.tight_layout()
fig.savefig("emission_spectrum.png", dpi=150)
print("wrote emission_spectrum.png")
