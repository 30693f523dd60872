"""Global quantities: c1^2, the L2 identity and the Chern-Weil comparison.

The Hopf surface shows the degenerate case where every integrand vanishes or
is constant.  A non-Kahler metric on the flat torus shows the Chern-Weil
cancellation with integrands that are far from zero.
"""

import math

from hermgeom import chern_weil_check, hopf, intersection_number_c1, l2_identity_check, periodic_torus
from hermgeom.errors import HypothesisError

h = hopf(4.0)

c1 = intersection_number_c1(h.field, h.domain, samples=100_000)
print(f"Hopf: int Theta1^2 = {c1.value:.2e} +- {c1.stderr:.1e}, "
      f"max |det Theta1| over the sample = {c1.extra['max_abs_det']:.1e}")

l2 = l2_identity_check(h.field, h.domain, samples=100_000)
for name, est in l2.details["estimates"].items():
    print(f"  {name:<24} {est['value']:.6f}")
print(f"  expected vol/16 = {128 * math.pi ** 2 * math.log(2) / 16:.6f}; verdict {l2.verdict}")

# the same comparison with plain uniform sampling has real Monte Carlo noise
l2u = l2_identity_check(h.field, h.domain, samples=100_000, sampler="uniform")
first = l2u.details["estimates"]["dbar_dbarstar_sq"]
print(f"  uniform sampler: {first['value']:.3f} +- {first['stderr']:.3f}")

cw = chern_weil_check(h.field, h.domain, weights=(0.5, 0.5), samples=100_000)
print(f"Hopf Chern-Weil: |int W^2 - int Theta1^2| = {cw.max_residual:.1e}, verdict {cw.verdict}")

t = periodic_torus(2, seed=0)
cw = chern_weil_check(t.field, t.domain, samples=16 ** 4, scheme="grid")
terms = cw.details["w_sq_terms"]
print("\nperiodic torus (non-Kahler, c1^2 = 0):")
print(f"  int Theta1^2          = {cw.details['theta1_sq']['value']: .3e}")
print(f"  int W^2, (1,1) term   = {terms['l0']['value']: .6f}")
print(f"  int W^2, (2,0) term   = {terms['l1']['value']: .6f}")
print(f"  int W^2               = {cw.details['w_sq']['value']: .3e}")

try:
    l2_identity_check(t.field, t.domain, samples=1000)
except HypothesisError as exc:
    print(f"\nL2 identity refused on the torus metric: {exc}")
