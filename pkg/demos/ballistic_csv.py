"""Ballistic reentry, case 1, written to CSV the same way the CLI does.

Runs a reduced ensemble (about ten seconds), writes bound.csv, lambda.csv
and config.yaml to ./ballistic-demo, then prints position bounds.
"""
import sys

from smcpcrlb import harness

out = sys.argv[1] if len(sys.argv) > 1 else "ballistic-demo"
cfg = harness.preset("ballistic-case1", n_particles=200, m_sequences=20, out_dir=out)
report = harness.run(cfg)

sq = report.approx.sqrt_diagonal()
ref = report.theory.sqrt_diagonal()
for t in (0, 14, 29, 44, 59):
    print(f"t={2 * (t + 1):3d} s  X {sq[t, 0]:7.1f} m (ref {ref[t, 0]:7.1f})   "
          f"H {sq[t, 2]:7.1f} m (ref {ref[t, 2]:7.1f})")
print("Lambda_J diagonal (SI):", report.quality.diagonal)
print("outputs in", out)
