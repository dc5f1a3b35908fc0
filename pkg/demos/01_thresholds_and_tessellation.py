#!/usr/bin/env python3
"""Walk through the geometric layer: threshold radii, the odd tessellation,
cell ordering, adjacent successors, and transit balls with their P1-P3
properties.

Run:  python demos/01_thresholds_and_tessellation.py
"""

import numpy as np

from rggembed import geometry as G

print("=== Threshold quantities ===")
for n in (10**4, 10**5, 10**6):
    for delta in (3, 5):
        r_c = G.critical_radius(n, 2, delta)
        eps = G.epsilon_param(n, 2, delta)
        print(f"n={n:>8} d=2 delta={delta}:  r_c={r_c:.5f}   eps={eps:7.2f}"
              f"   (ball construction feasible only below {G.EPSILON_FEASIBILITY_LIMIT})")

print()
print("The exact eps formula is far above the feasibility limit at any size a")
print("workstation can sample, which is why simulation mode caps it (default")
print("0.5) or takes an explicit override up to just below 5.")
print()

print("=== Choosing the tessellation resolution ===")
n, d, delta, eps_eff = 30000, 1, 3, 4.9
s = G.choose_odd_s(n, d, delta, eps_eff)
r_c = G.critical_radius(n, d, delta)
print(f"n={n}, d={d}, delta={delta}, eps_eff={eps_eff} -> s = {s} "
      f"(sqrt(d)/s = {np.sqrt(d)/s:.5f}, window "
      f"[{(1/3)*(1+eps_eff/2)*r_c:.5f}, {0.5*(1+2*eps_eff/3)*r_c:.5f}])")

tess = G.build_tessellation(d, s)
print(f"cells: {tess.n_cells}, central cell id {tess.central_cell}, eta = {tess.eta}")
print("ordering (farthest from the centre first):", list(tess.order))
print("successor of the outermost cell:", int(tess.successor[tess.order[0]]))
print()

print("=== Transit balls for one target ===")
target = int(tess.order[0])
balls = G.BallSystem(tess, eps_eff)
tb = balls.for_target(target)
print(f"target cell {target} -> successor {tb.nu_cell}; ball radius {tb.radius:.5f}")
print("ball centres:", np.round(tb.centres.ravel(), 4))
print("containing cells:", list(tb.cells))
r = 6 * r_c
chk = G.verify_transit_balls(tess, tb, r)
print(f"P1 (cells later than target): {chk.p1}")
print(f"P2 (first ball central, last in successor): {chk.p2}")
print(f"P3 (consecutive reach at r={r:.4f}): {chk.p3}  (worst gap {chk.max_gap:.4f})")
print(f"worst gap over every direction: {balls.max_consecutive_gap():.4f}")
print()
print("A 2-d example where the ideal ball position is pinched by a cell")
print("corner, so the centre slides along the segment (P1-P3 still hold):")
t2 = G.build_tessellation(2, 7)
b2 = G.BallSystem(t2, 1.0)
tb2 = b2.for_target(int(np.ravel_multi_index((5, 6), (7, 7))))
chk2 = G.verify_transit_balls(t2, tb2, r=1.0)
print(f"in_enclosing flags: {list(tb2.in_enclosing)}  P1={chk2.p1} P2={chk2.p2}")
