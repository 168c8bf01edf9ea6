"""On a linear-Gaussian model the particle bound is the Kalman information recursion.

Every integrand is constant in the state, so particle noise cancels and the
approximate bound matches the Riccati-style recursion to rounding error.
"""
import numpy as np

from smcpcrlb import harness
from smcpcrlb.numkit import invert_spd

report = harness.run(harness.preset("linear-sanity"), write=False)
model = harness.linear_sanity_model()

# Closed-form information recursion for comparison.
a, c, q, r = model.A, model.C, model.Q, model.R
j = invert_spd(model.prior.covariance)
exact = []
for _ in range(report.config.horizon_steps):
    j = invert_spd(q + a @ invert_spd(j) @ a.T) + c.T @ invert_spd(r) @ c
    exact.append(invert_spd(j))
exact = np.array(exact)

err = np.max(np.abs(report.approx.inverse - exact)) / np.max(np.abs(exact))
print(f"steps: {len(report.approx)}, max relative deviation from Kalman: {err:.2e}")
print("steady-state sqrt bound (position, velocity):", np.sqrt(np.diag(exact[-1])))
