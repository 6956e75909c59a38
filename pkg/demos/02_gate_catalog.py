"""
Phase gates, Hadamard and a composed Y
======================================

Off-axis passages (b > 0) tune the two phases of the symmetric-passage
form independently of p, which gives Z and T. A different (v, b) balances
p and the phases for a Hadamard. Two passages in a row give Y.
"""

import math

from diabatic import DEFAULT_MODEL, GATES, compose, gate_error, synthesize, target_unitary
from diabatic.gatemodel import phase_distance

phases = {
    "z": (math.pi / 4, 5 * math.pi / 4),
    "t": (15 * math.pi / 16, -math.pi / 16),
    "hadamard": (3 * math.pi / 8, -7 * math.pi / 8),
}

results = {}
for name in ("not", "z", "t", "hadamard"):
    recipe = GATES[name]
    res = synthesize(DEFAULT_MODEL, target_unitary(recipe.target), recipe.search)
    results[name] = res
    line = f"{name:9s} -> {recipe.target:6s} at (v, b) = ({res.v_opt:.5f}, {res.b_opt:.5f})"
    line += f"  d_max = {res.gate_error.d_max:.2e}  p = {res.zn.p:.3f}"
    if name in phases:
        line += f"  phase error = {phase_distance(res.zn, *phases[name]):.4f}"
    print(line)

# first listed acts first: iZ then iX
y = compose([results["z"].unitary, results["not"].unitary])
print("iX.iZ vs Y, phase-invariant infidelity:", f"{gate_error(y, target_unitary('Y').matrix).phase_invariant_infidelity:.2e}")
