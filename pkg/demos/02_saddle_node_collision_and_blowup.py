"""
Saddle-node collision and finite-time blow-up
=============================================

The ``moving-sn`` model dx/dt = -(x - rt)(x - rt - mu) carries a stable
and an unstable equilibrium along a linear ramp.  In the frame moving
with the ramp the attractor sits at +rho and the repeller at -rho, with
rho = sqrt(mu^2/4 - r): raising the rate pulls them together until they
collide at r* = mu^2/4.  Past the collision every solution blows up in
finite time, and the integrator brackets the singularity.
"""
import math

import numpy as np

import tiplab as tl

mu = 0.5
rstar = mu * mu / 4.0
print(f"mu = {mu}, critical rate r* = mu^2/4 = {rstar}")

# Below the critical rate both invariant curves exist.  The attractor is
# the pullback limit from the future of the distant past; the repeller is
# the same construction run on the time-reversed system.
model = tl.make_model("moving-sn", mu=mu, r=1.0 / 32.0)
attractor = tl.estimate_pullback(model, window=(0.0, 4.0))
repeller = tl.estimate_pullback(model, window=(0.0, 4.0), sense="repelling")
rho = math.sqrt(rstar - 1.0 / 32.0)
print(f"r = 1/32: attractor at rt + mu/2 + rho, repeller at rt + mu/2 - rho "
      f"(rho = {rho:.6f})")
print("  attractor(0) =", attractor.eval(0.0)[0], "expected", mu / 2 + rho)
print("  repeller(0)  =", repeller.eval(0.0)[0], "expected", mu / 2 - rho)

# At r = r* + 1/32 the frozen equilibria are gone and the solution through
# x(0) = mu/2 is a shifted tangent: it blows up at exactly pi/(2 sqrt(1/32)).
fast = model.with_rate(rstar + 1.0 / 32.0)
traj = tl.integrate(fast.field, [mu / 2.0], 0.0, 20.0)
t_sing = math.pi / (2.0 * math.sqrt(1.0 / 32.0))
lo, hi = traj.escape_bracket
print(f"r = r* + 1/32: status {traj.status}")
print(f"  blow-up bracketed in [{lo:.8f}, {hi:.8f}] "
      f"(exact {t_sing:.8f}, width {hi - lo:.1e})")

# Bisection on the tipping predicate recovers the critical rate without
# using the closed form.
report = tl.find_critical_rate(tl.make_model("moving-sn", mu=mu),
                               r_range=(0.1 * rstar, 3.0 * rstar),
                               resolution=1e-4)
b = report.brackets[0]
print(f"recovered bracket [{b.lower:.6f}, {b.upper:.6f}] "
      f"({b.classification}), contains r*: {b.lower <= rstar <= b.upper}")

# Solutions started between the repeller and the attractor stay sandwiched
# between them and converge to the attractor.
rng = np.random.default_rng(0)
x0 = rng.uniform(mu / 2 - rho + 0.01, mu / 2 + rho - 0.01)
tr = tl.integrate(model.field, [x0], 0.0, 40.0)
gap = abs(tr.final_state[0] - tl.oracle_curve(model, "attractor+", 40.0)[0])
print(f"sandwiched solution from x0 = {x0:.4f}: final gap to attractor {gap:.1e}")
