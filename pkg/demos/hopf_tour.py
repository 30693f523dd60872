"""A walk through the diagonal Hopf surface, one tensor at a time.

Run with ``python3 demos/hopf_tour.py``.
"""

import numpy as np

from hermgeom import (chern_ricci, curvature_relation_residual, equation_S_residual, hopf, identity_suite,
                      lc_ricci1, q_tensor, torsion, whe_check)
from hermgeom.identities import adjoint_torsion_norm_sq, norm11

np.set_printoptions(precision=4, suppress=True)

entry = hopf(c=4.0)
p = np.array([1.0, 0.0])
jet = entry.jet(p)

print("metric h at (1, 0):\n", jet.h.real)

# torsion only sees the conformal factor, so it does not depend on c
ts = torsion(jet)
print("torsion trace T_i:", ts.trace)
print("|dbar* omega|^2:", adjoint_torsion_norm_sq(jet))

theta1, theta2, s = chern_ricci(jet)
print("Theta1:\n", theta1.coeff.real)
print("Theta2:\n", theta2.coeff.real, " (= omega / 4)")
print("Chern scalar curvature:", s)
print("Levi-Civita Ricci r1:\n", lc_ricci1(jet).coeff.real)
print("Q:\n", q_tensor(jet).coeff.real)

# Theta1 + Theta2 - 2 r1 - Q - Lambda ddbar omega vanishes for every Hermitian metric
print("curvature relation residual:", np.abs(curvature_relation_residual(jet).coeff).max())
print("equation (S) residual:", np.abs(equation_S_residual(jet).coeff).max())

# away from the anchor point
pts = entry.sample(200, seed=1)
w = whe_check(entry.field, pts)
print(f"Einstein function u on 200 points: min {w.u.min():.15f}, max {w.u.max():.15f}")
print(f"lambda = u - |dbar* omega|^2: {w.lambda_estimate:.2e}")

jets = entry.jet(pts)
print("max |Theta2 - omega/4|:", norm11(chern_ricci(jets)[1] - 0.25 * jets.h, jets).max())

print("\nidentity suite (properties: %s)" % ", ".join(sorted(entry.properties)))
for r in identity_suite(jets, entry.properties):
    print(f"  {r.identity:<26} {r.max_residual:10.2e}  {r.verdict}")
