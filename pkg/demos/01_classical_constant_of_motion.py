"""Classical forced oscillator: the constant of motion K and its split K = K0 + W."""
import numpy as np

from kvquant.classical import (
    ClassicalState, constant_of_motion, integrate_newton, integration_constants, oscillator_energy, perturbation_W,
    trajectory,
)
from kvquant.model import proton_params

p = proton_params()
w0 = p.natural_frequency
ell = p.oscillator_length
print(f"proton trap: w0 = {w0:.4e} rad/s, oscillator length = {ell:.4e} m")

# start one oscillator length out, at rest, and follow the exact resonant solution
c = integration_constants(p, ClassicalState(ell, 0.0, 0.0))
t = np.linspace(0, 20 * 2 * np.pi, 2001) / w0
path = trajectory(p, c.C1, c.C2, t)
print(f"x grows secularly: |x| at t=0 {abs(path.x[0]):.3e} m, after 20 periods {np.max(np.abs(path.x[-100:])):.3e} m")

K = constant_of_motion(p, path)
E = oscillator_energy(p, path.x, path.v)
print(f"K along the path: spread {np.ptp(K) / K[0]:.1e} (relative)")
print(f"oscillator energy K0 along the path: grows by a factor {E[-1] / E[0]:.3g}")
# K0 and W each grow while their sum stays put, so measure the split against K0
print(f"max |K - (K0 + W)| / K0 = {np.max(np.abs(K - E - perturbation_W(p, path)) / E):.1e}")

# the same check against a direct RK4 solution of Newton's equation
off = p.with_(drive_frequency=0.5 * w0)
newton = integrate_newton(off, ell, 0.0, 100 * 2 * np.pi / w0, 1e-3 / w0, stride=1000)
Kn = constant_of_motion(off, newton)
print(f"off-resonant, 100 periods of RK4: K drift {np.max(np.abs(Kn - Kn[0])) / Kn[0]:.1e}")
