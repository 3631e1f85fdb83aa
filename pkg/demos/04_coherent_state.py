"""A weakly driven oscillator stays a displaced ground state.

The Hamiltonian populations must follow the Poisson law with the closed-form
displacement eta(t); the truncation is harmless while the top level is empty.
"""
import math

import numpy as np

from kvquant.dynamics import SchemeKind, ground_state, integrate
from kvquant.model import natural_params, scale_to_dimensionless
from kvquant.oracle import coherent_populations, displacement

for label, params in {"w = w0 / 2": natural_params(0.05, 0.5, 0.3), "w = w0": natural_params(0.004)}.items():
    s = scale_to_dimensionless(params)
    run = integrate(ground_state(12), s, SchemeKind.HAMILTONIAN, 2 * math.pi * 50, 1e-3, 10)
    exact = coherent_populations(s, run.tau, 12)
    print(f"{label}: max |eta| = {np.max(np.abs(displacement(s, run.tau))):.3f}, "
          f"max population error {np.max(np.abs(run.probabilities - exact)):.1e}, "
          f"norm drift {run.norm_drift:.1e}")
