"""Regenerates data/demo_indices.csv: four synthetic price indices with
correlated Student-t GARCH(1,1) log-returns."""
import numpy as np

rng = np.random.default_rng(20260101)
n, d = 1860, 4
C = np.array([[1, .6, .65, .55], [.6, 1, .6, .5], [.65, .6, 1, .55], [.55, .5, .55, 1]])
L = np.linalg.cholesky(C)
omega, a, b = 2e-6, 0.08, 0.9
h = np.full(d, omega / (1 - a - b))
p = np.array([1600.0, 1700.0, 1800.0, 2400.0])
rows = [p.copy()]
for t in range(1, n):
    e = L @ (rng.standard_t(6, d) / np.sqrt(6 / 4))
    r = np.sqrt(h) * e + 3e-4
    h = omega + a * r**2 + b * h
    p = p * np.exp(r)
    rows.append(p.copy())
with open("data/demo_indices.csv", "w") as f:
    f.write("IDX1,IDX2,IDX3,IDX4\n")
    for r in rows:
        f.write(",".join(f"{x:.2f}" for x in r) + "\n")
