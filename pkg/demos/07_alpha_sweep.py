"""Time-averaged entropy and energy against drive amplitude.

Set FULL=1 in the environment for the 20-point grid (a few minutes).
"""
import os

import numpy as np

from kvquant.experiments import SWEEP_ALPHAS, preset, sweep_alpha

base = preset("paper-resonant")
alphas = SWEEP_ALPHAS if os.environ.get("FULL") else np.logspace(-15, -13, 4)
q = base.params.hbar * base.params.natural_frequency
print(f"{'alpha [N]':>10} {'S_K':>7} {'S_H':>7} {'E_K':>7} {'E_H':>7}")
for r in sweep_alpha(base, alphas).sorted().rows:
    print(f"{r.alpha:10.3e} {r.entropy_bar_k:7.3f} {r.entropy_bar_h:7.3f} "
          f"{r.energy_bar_k / q:7.3f} {r.energy_bar_h / q:7.3f}" + (f"  {r.error}" if r.error else ""))
