"""
Decay channels of two bouncing modes
====================================

Restrict the Husimi maps of two open modes to the leaky strip |p| < 1/n and
measure how much they overlap with the Bhattacharyya distance. Where the
two self-energy curves meet, the leaky parts of the modes look most alike.
Takes a few minutes on one core.
"""
import os

import numpy as np

from ellipcav import plotting
from ellipcav.analysis import compare_pair
from ellipcav.tracker import track_modes
from ellipcav.wavesolver import CavityConfig, ModeLabel

out = os.environ.get("ELLIPCAV_DEMO_OUT", "demo_out")
os.makedirs(out, exist_ok=True)
n = 3.3
cfg = CavityConfig(n=n, boundary_elements=128)
e_grid = np.round(np.linspace(0.0, 0.6, 31), 12)
a, b = ModeLabel(5, 5), ModeLabel(5, 3)

trajs = track_modes(e_grid, [a, b], ("closed", "open"), cfg, workers=os.cpu_count() or 1)
pc = compare_pair(a, b, trajs, 1 / n, n_s=128, n_p=128)

print("   e     dS_e     D_B      Q_j      Q_k")
for row in zip(pc.e_grid, pc.delta_se, pc.d_b, pc.q_j, pc.q_k):
    print("{:5.2f} {:8.5f} {:8.4f} {:8.1f} {:8.1f}".format(*row))
print("dS_e zero crossings:", np.round(pc.e_zero, 3), " smallest |dS_e| at", pc.e_dsmin,
      " D_B minimum at", pc.e_dbmin)
pc.write_json(os.path.join(out, "pair_5_5__5_3.json"))
plotting.pair_overview_svg([pc], os.path.join(out, "pair_5_5__5_3.svg"))
