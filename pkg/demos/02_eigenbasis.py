"""Oscillator eigenbasis: energies, eigenfunctions, orthonormality on a grid."""
import numpy as np

from kvquant.model import Truncation, basis, eigenfunction, proton_params

p = proton_params()
for b in basis(4, p):
    print(f"n={b.level}: E = {b.energy:.6e} J = {b.energy / p.energy_quantum:.1f} hbar w0")

x = np.linspace(-10, 10, 20001) * p.oscillator_length
phi = np.array([eigenfunction(n, x, p) for n in range(6)])
overlap = np.trapezoid(phi[:, None] * phi[None, :], x, axis=-1)
print(f"max |<m|n> - delta_mn| over n, m <= 5: {np.max(np.abs(overlap - np.eye(6))):.1e}")

t = Truncation(11)
print(f"entropy ceiling with {t.n_states} states: ln {t.n_states} = {t.max_entropy:.3f}")
