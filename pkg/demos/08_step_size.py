"""Choosing the RK4 step: norm loss is the diagnostic, never corrected away."""
import math

from kvquant.dynamics import NormDriftError, SchemeKind, coupling_bound, ground_state, integrate, suggest_dt
from kvquant.model import proton_params, scale_to_dimensionless

s = scale_to_dimensionless(proton_params())
tau_end = 2 * math.pi
for keep in (True, False):
    bound = coupling_bound(s, SchemeKind.K_RESONANT, tau_end, 12, keep)
    dt = suggest_dt(s, SchemeKind.K_RESONANT, tau_end, 12, keep, 1e-8)
    print(f"scalar phase kept={keep}: coupling bound {bound:.3g}, step {dt:.2e}, steps {tau_end / dt:.2e}")

try:
    integrate(ground_state(12), s, SchemeKind.K_RESONANT, tau_end, 1e-3, 10)
except NormDriftError as err:
    print("default step:", err)

dt = suggest_dt(s, SchemeKind.HAMILTONIAN, 1.0, 12)
run = integrate(ground_state(12), s, SchemeKind.HAMILTONIAN, 1.0, dt, 1000)
print(f"H scheme, suggested step {dt:.2e}: worst norm drift {run.norm_drift:.1e}")
