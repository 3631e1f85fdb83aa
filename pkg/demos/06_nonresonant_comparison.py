"""Proton driven at w = w0 / 2: do the two schemes agree?"""
from kvquant.experiments import compare_schemes, preset
from kvquant.model import scale_to_dimensionless

k, h = preset("paper-nonresonant", "K"), preset("paper-nonresonant", "H")
s = scale_to_dimensionless(k.params)
print(f"couplings / w0: a1 {s.a1:.3g}, b1 {s.b1:.3g}, c {s.c:.3g}, d {s.d:.3g}, lambda {s.lam:.3g}")
c = compare_schemes(k, h)
print(f"min P0: K {c.min_p0_k:.2e}, H {c.min_p0_h:.2e}; max |P0_K - P0_H| = {c.max_p0_difference:.3f}")
print(f"mean entropy: K {c.entropy_bar_k:.3f}, H {c.entropy_bar_h:.3f} nats")

# a much weaker drive keeps both near the ground state, where they coincide
weak_k = k.with_(params=k.params.with_(drive_amplitude=1e-17))
c = compare_schemes(weak_k, weak_k.with_(scheme="H"))
print(f"alpha = 1e-17 N: min P0 K {c.min_p0_k:.6f}, H {c.min_p0_h:.6f}, max |dP0| {c.max_p0_difference:.1e}")
