"""
CNOT and Toffoli by coupling one pair of basis states
=====================================================

Only |10>,|11> (or |110>,|111>) take part in the passage; every other basis
state is left alone. The coupled block is the NOT-gate dynamics, so the
result equals the ideal gate up to the i on that block.
"""

import numpy as np

from diabatic import embedded_gate, gate_error
from diabatic.synthesis import controlled_x

for name, n in (("cnot", 2), ("toffoli", 3)):
    g = embedded_gate(name, 0.254564, 0.0)
    comp = g.complement_indices()
    print(f"{name}: complement exactly identity:", np.array_equal(g.full_unitary[np.ix_(comp, comp)], np.eye(len(comp))))
    print(f"  block =\n{np.round(g.block, 4)}")
    print(f"  d_max vs ideal controlled-X: {gate_error(g.full_unitary, controlled_x(n)).d_max:.3f}")

# the literal equal-diagonal pair Hamiltonian crosses instead of avoiding
lit = embedded_gate("cnot", 0.254564, 0.0, literal=True)
print("literal pair Hamiltonian block:\n", np.round(lit.block, 4))
