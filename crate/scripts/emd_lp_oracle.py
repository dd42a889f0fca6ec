"""Freeze reference optimal-transport costs with a generic LP solver.

Writes crates/core/tests/data/emd_lp_oracle.json. Each problem has positive
supply/demand weights summing to 1 and a nonnegative cost matrix; the stored
cost is the optimum found by scipy's HiGHS linear-programming backend.
"""
import json
import pathlib

import numpy as np
from scipy.optimize import linprog

rng = np.random.default_rng(20240611)
problems = []


def solve(a, b, c):
    m, n = c.shape
    a_eq = []
    for i in range(m):
        row = np.zeros(m * n)
        row[i * n:(i + 1) * n] = 1
        a_eq.append(row)
    for j in range(n):
        row = np.zeros(m * n)
        row[j::n] = 1
        a_eq.append(row)
    res = linprog(c.ravel(), A_eq=np.array(a_eq), b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0
    return float(res.fun)


def weights(k):
    w = rng.uniform(0.05, 1.0, size=k)
    w = w / w.sum()
    # Absorb rounding into the last entry so the sum is 1 to the last ulp.
    w[-1] = 1.0 - w[:-1].sum()
    return w


for idx in range(100):
    if idx < 10:
        m = n = 6
    else:
        m = int(rng.integers(1, 11))
        n = int(rng.integers(1, 11))
    a = weights(m)
    b = weights(n)
    if idx % 2 == 0:
        c = rng.uniform(0.0, 1.0, size=(m, n))
    else:
        dim = 3
        pa = rng.normal(size=(m, dim))
        pb = rng.normal(size=(n, dim))
        c = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1))
    problems.append({
        "supply": a.tolist(),
        "demand": b.tolist(),
        "cost": c.tolist(),
        "expected": solve(a, b, c),
    })

out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/data/emd_lp_oracle.json"
out.write_text(json.dumps(problems, indent=1))
print(f"wrote {len(problems)} problems to {out}")
