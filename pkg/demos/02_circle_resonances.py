"""
Circle: closed billiard versus open dielectric disk
===================================================

At e = 0 both problems are solvable in closed form, which anchors the
boundary-element solver. The self-energy is the shift of Re kR between the
closed billiard (filled with index n) and the leaky resonance.
"""
import numpy as np

from ellipcav.geometry import make_ellipse
from ellipcav.wavesolver import (CavityConfig, ModeLabel, circle_billiard_k, circle_cavity_k,
                                 quality_factor, resonance_search)

n = 3.3
cfg = CavityConfig(n=n, boundary_elements=256)
g = make_ellipse(0.0)

print(" m  l   closed kR    open kR                      |BEM-exact|   Q        S_e")
for m, l in [(3, 1), (7, 1), (5, 3), (5, 5)]:
    lab = ModeLabel(m, l)
    kc = circle_billiard_k(m, l, n)
    ko = circle_cavity_k(m, l, n)
    # search from slightly perturbed seeds, as the tracker would
    rc = resonance_search(g, cfg, "dirichlet", kc + 0.01, lab.parity, label=lab)
    ro = resonance_search(g, cfg, "dielectricTM", ko + (0.01 - 0.01j), lab.parity, label=lab)
    err = max(abs(rc.kR - kc), abs(ro.kR - ko))
    print(f"{m:2d} {l:2d}  {rc.kR.real:10.6f}  {ro.kR.real:10.6f}{ro.kR.imag:+.6f}i  {err:10.1e}"
          f"  {quality_factor(ro):8.1f}  {rc.kR.real - ro.kR.real:+.5f}")

# whispering-gallery modes (l = 1, large m) leak far less than bouncing ones
print("Q ratio WGM(7,1) / (5,5):",
      quality_factor(circle_cavity_k(7, 1, n)) / quality_factor(circle_cavity_k(5, 5, n)))
