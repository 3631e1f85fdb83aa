"""Hand-coded coefficient equations against the ladder-operator matrix.

Each scheme's right-hand side is rebuilt from x = l2 (a + a+), v = i w0 l2 (a+ - a)
and the interaction-picture phases, then compared on random states.
"""
import numpy as np

from kvquant.dynamics import SchemeKind, rhs_for
from kvquant.model import proton_params, scale_to_dimensionless
from kvquant.validation import hermiticity, oracle_equivalence

p = proton_params()
print(f"drive strength lambda / (hbar w0) = {scale_to_dimensionless(p).drive_strength:.3f}")
for r in oracle_equivalence(p) + hermiticity(p):
    print(r.line())

# flip the sign of one row of the Hamiltonian system and watch the check fail
good = rhs_for(SchemeKind.HAMILTONIAN, p)


def planted(tau, D, scaled):
    out = good(tau, D)
    out[5] *= -1
    return out


for r in oracle_equivalence(p, overrides={SchemeKind.HAMILTONIAN: planted}):
    print(r.line())
