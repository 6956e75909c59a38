"""
How gate error grows with a mis-set speed
=========================================

A gate sitting at an optimum has no first-order sensitivity, so the error
probability bound grows like eps**2 when the speed is off by eps.
"""

from diabatic import DEFAULT_MODEL, GATES, error_scaling, synthesize, target_unitary

for name in ("not", "z", "t", "hadamard"):
    recipe = GATES[name]
    target = target_unitary(recipe.target).matrix
    res = synthesize(DEFAULT_MODEL, target_unitary(recipe.target), recipe.search)
    fit = error_scaling(DEFAULT_MODEL, res.v_opt, res.b_opt, target, axis="v")
    c = fit.coefficients
    print(f"{name:9s} d_max ~ {fit.prefactor:9.3g} * eps^{fit.exponent:.3f}  (R^2 = {fit.r_squared:.5f})")
    print(f"{'':9s} c_p = {c.c_p:.3g}, c_0 = {c.c_0:.3g}, c_1 = {c.c_1:.3g}")
