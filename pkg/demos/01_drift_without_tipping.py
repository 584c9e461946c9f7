"""
A system that drifts forever but never tips
===========================================

The ``drift`` model dx/dt = -(x - e^{rt}) chases an exponentially moving
equilibrium.  Its pullback attractor exists for every rate r, keeps
attracting nearby solutions forward in time, and yet never settles onto
the quasi-static equilibrium (QSE) branch: the gap to the QSE grows
without bound.  "Failing to track" and "tipping" are different things,
and this script shows both diagnostics disagreeing on purpose.
"""
import numpy as np

import tiplab as tl

# Build the model at a moderate rate and estimate its pullback attractor
# by starting integrations further and further in the past.
model = tl.make_model("drift", r=0.5)
estimate = tl.estimate_pullback(model, window=(0.0, 16.0))
print(f"pullback estimate: {estimate.status}, "
      f"{len(estimate.start_times)} start times, "
      f"last gap {estimate.convergence_gaps[-1]:.2e}")

# The closed form is gamma(t) = e^{rt}/(1+r); the estimate should sit on it.
grid = np.linspace(0.0, 4.0, 9)
oracle = np.vstack([tl.oracle_curve(model, "attractor+", t) for t in grid])
print("max deviation from e^{rt}/(1+r):",
      float(np.max(np.abs(estimate.eval(grid) - oracle))))

# Forward attraction: solutions displaced off the curve fall back onto it.
forward = tl.forward_attraction_test(
    model, candidate=estimate, offsets=[0.01, -0.01], horizon=12.0, eps=0.01
)
print("forward attraction:", forward.verdict)

# End-point tracking: the distance to the QSE branch e^{rt} grows like
# r/(1+r) * e^{rt} -- the attractor drifts away from the QSE forever.
tracking = tl.endpoint_tracking_test(
    model, curve=estimate,
    branch=lambda t: tl.oracle_curve(model, "qse_stable+", t),
    horizon=12.0, eps=0.01,
)
d = tracking.evidence["distances"]
print(f"QSE tracking: {tracking.verdict} "
      f"(distance grows {d[0]:.3f} -> {d[-1]:.3f})")

# A rate scan confirms there is no critical rate anywhere in (0, 10]:
report = tl.find_critical_rate(model, r_range=(1e-3, 10.0),
                               resolution=1e-4, window=(0.0, 1.0))
print(f"critical-rate scan over (0, 10]: {len(report.brackets)} brackets "
      f"from {report.probes} probes")
