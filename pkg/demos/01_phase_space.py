"""
Rays in an elliptic cavity
==========================

Surfaces of section for three eccentricities, with the separatrix (chords
through a focus) and the critical line of total internal reflection for
n = 3.3. The separatrix apex equals e, so it touches the critical line
exactly at e = 1/n.
"""
import os

import numpy as np

from ellipcav import plotting
from ellipcav.geometry import make_ellipse
from ellipcav.raydyn import BirkhoffCoord, critical_line, focal_invariant, psos_sample, separatrix_curve

out = os.environ.get("ELLIPCAV_DEMO_OUT", "demo_out")
os.makedirs(out, exist_ok=True)
n = 3.3
p_c = critical_line(n)

for e in (0.2, 1 / n, 0.45):
    g = make_ellipse(e)
    # seeds along the minor-axis vertex cover both whispering-gallery and bouncing motion
    seeds = [BirkhoffCoord(0.25, p) for p in np.linspace(-0.95, 0.95, 31)]
    res = psos_sample(g, seeds, 300)
    sep = separatrix_curve(g)
    apex = sep.p.max()
    print(f"e={e:.4f}  separatrix apex {apex:.6f}  p_c {p_c:.6f}  apex - p_c {apex - p_c:+.2e}")
    plotting.psos_svg(res.points, os.path.join(out, f"psos_e{e:.3f}.svg"), sep, p_c, title=f"e = {e:.3f}")

# the focal invariant is constant along every orbit; its sign tells the orbit family
g = make_ellipse(0.4)
for p in (0.9, 0.1):
    lam = focal_invariant(g, (0.25, p))
    print(f"e=0.4 seed p={p}: focal invariant {lam:+.4f} ->", "whispering gallery" if lam > 0 else "bouncing")
