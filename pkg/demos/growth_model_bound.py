"""Particle-smoother bound on the scalar growth model with Gaussian noise.

Prints the sqrt-bound trajectory next to the true-state reference and the
Lambda_J quality figure for a handful of seeds, which shows how widely a
single ensemble's quality figure spreads.
"""
import numpy as np

from smcpcrlb import harness

cfg = harness.preset("example2-gaussian", m_sequences=100)
report = harness.run(cfg, write=False)

approx = report.approx.sqrt_diagonal()[:, 0]
theory = report.theory.sqrt_diagonal()[:, 0]
print(" t   approx    reference")
for t in range(0, len(approx), 5):
    print(f"{t + 1:2d}  {approx[t]:.5f}  {theory[t]:.5f}")
print(f"seed {cfg.seed}: Lambda_J = {report.quality.lam[0, 0]:.3g}, "
      f"{report.seconds_per_sequence * 1e3:.1f} ms per sequence")

values = [harness.run(cfg.replace(seed=s), write=False).quality.lam[0, 0] for s in range(2, 6)]
print("seeds 2-5:", ", ".join(f"{v:.2g}" for v in values))
print(f"geometric mean incl. seed {cfg.seed}: "
      f"{np.exp(np.mean(np.log([report.quality.lam[0, 0], *values]))):.3g}")
