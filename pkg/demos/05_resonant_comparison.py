"""Proton at resonance: K quantization against H quantization over one period.

Both schemes run on the same automatically chosen grid.  The drive is strong
(lambda ~ 340 hbar w0), so the twelve retained levels fill within a fraction
of a period.
"""
from kvquant.experiments import compare_schemes, preset

k, h = preset("paper-resonant", "K"), preset("paper-resonant", "H")
dt, stride, n = k.grid()
print(f"grid: dt = {dt:.3e} / w0, {n} steps, sample every {stride}")
c = compare_schemes(k, h)
q = k.params.hbar * k.params.natural_frequency
print(f"max |P0_K - P0_H| = {c.max_p0_difference:.3f}")
print(f"oscillations of P0: K {c.oscillations_k}, H {c.oscillations_h}")
print(f"mean entropy: K {c.entropy_bar_k:.3f}, H {c.entropy_bar_h:.3f} nats")
print(f"mean energy: K {c.energy_bar_k / q:.3f}, H {c.energy_bar_h / q:.3f} hbar w0")
for name, s in (("K", c.k_series), ("H", c.h_series)):
    i = s.tau.size // 8
    print(f"{name}: P0, P1 at tau = {s.tau[i]:.3f}: {s.probabilities[i, 0]:.3f}, {s.probabilities[i, 1]:.3f}")
