"""
A NOT gate from one fast passage
================================

Drive the two-level model along a head-on path (b = 0) and watch how the
exit population depends on the speed. Near v = 0.2547 the passage flips
|0> into |1> almost perfectly.
"""

import numpy as np

from diabatic import DEFAULT_MODEL, adiabaticity, eta, full_evolution_operator, gate_error, make_trajectory
from diabatic import half_passage_p, target_unitary

# transition probability and the first-order estimate eta over a speed sweep
v = np.linspace(0.01, 0.5, 250)
prob = np.array([abs(full_evolution_operator(DEFAULT_MODEL, make_trajectory(x, 0.0))[1, 0]) ** 2 for x in v])
est = np.array([eta(DEFAULT_MODEL, make_trajectory(x, 0.0)) for x in v])
print(f"best speed on the grid: v = {v[prob.argmax()]:.4f}, P = {prob.max():.6f}")
print(f"eta peaks at v = {v[est.argmax()]:.4f}")

# slow passages oscillate (two interfering paths) before settling to zero
slow = (v > 0.02) & (v < 0.1)
y = prob[slow]
print("local maxima below v = 0.1:", int(np.sum((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]))))

# at the working point the gate is close to iX, with p close to one half
traj = make_trajectory(0.2547, 0.0)
u = full_evolution_operator(DEFAULT_MODEL, traj)
print("U =\n", np.round(u, 4))
print("half-passage p =", round(half_passage_p(DEFAULT_MODEL, traj), 4))
print("d_max vs iX =", f"{gate_error(u, target_unitary('iX').matrix).d_max:.2e}")

# the Massey parameter separates the adiabatic and diabatic regimes
for speed in (0.005, 0.2547):
    rep = adiabaticity(DEFAULT_MODEL, make_trajectory(speed, 0.0))
    print(f"v = {speed}: xi = {rep.massey_xi:.3g} ({rep.regime})")
