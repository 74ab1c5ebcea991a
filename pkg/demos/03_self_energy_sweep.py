"""
Self-energy under deformation
=============================

Track one whispering-gallery mode and two bouncing modes from the circle to
e = 0.6, closed and open, and follow the self-energy S_e = Re kR_closed -
Re kR_open. The Husimi map of each open mode at e = 0.6 tells which
phase-space region it lives in. Takes a few minutes on one core.
"""
import os

import numpy as np

from ellipcav import plotting
from ellipcav.analysis import classify_mode, mean_abs_slope, self_energy, swing
from ellipcav.husimi import husimi_incident
from ellipcav.raydyn import critical_line, separatrix_curve
from ellipcav.tracker import track_modes
from ellipcav.wavesolver import CavityConfig, ModeLabel

out = os.environ.get("ELLIPCAV_DEMO_OUT", "demo_out")
os.makedirs(out, exist_ok=True)
n = 3.3
cfg = CavityConfig(n=n, boundary_elements=128)
e_grid = np.round(np.linspace(0.0, 0.6, 61), 12)
labels = [ModeLabel(7, 1), ModeLabel(5, 5), ModeLabel(5, 3)]

trajs = track_modes(e_grid, labels, ("closed", "open"), cfg, workers=os.cpu_count() or 1)
curves = []
for lab in labels:
    se = self_energy(trajs[(lab, "closed")], trajs[(lab, "open")])
    res = trajs[(lab, "open")].resonances[-1]
    h = husimi_incident(res)
    cl = classify_mode(h, res.geometry)
    print(f"{lab.m},{lab.l}: S_e(0)={se.values[0]:.4f}  swing={swing(se):+.4f}  "
          f"slope ratio={mean_abs_slope(se, 0.3, 0.5) / mean_abs_slope(se, 0, 0.25):5.1f}  "
          f"class at 0.6: {cl.kind}  masses " + " ".join(f"{k}={v:.2f}" for k, v in cl.masses.items()))
    curves.append((se.e_grid, se.values, f"{lab.m},{lab.l}"))
    plotting.husimi_svg(h, os.path.join(out, f"husimi_{lab.m}_{lab.l}.svg"),
                        separatrix=separatrix_curve(res.geometry), p_c=critical_line(n),
                        title=f"({lab.m},{lab.l}) e=0.6 {cl.kind}")

plotting.lines_svg(curves, os.path.join(out, "self_energy.svg"), ylabel="S_e")
