"""Continuation of labelled modes along an eccentricity grid."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CollisionError, DegenerateInputError, DomainError, EllipcavError
from .geometry import make_ellipse
from .wavesolver import (CavityConfig, ModeLabel, Resonance, parity_name, resonance_search,
                         solve_circle_mode)

log = logging.getLogger(__name__)

DELTA_CROSS = 1e-3
MAX_DE = 0.02
MIN_OVERLAP = 0.7


@dataclass
class ModeTrajectory:
    label: ModeLabel
    kind: str
    e_grid: np.ndarray
    kR: np.ndarray
    resonances: list = field(repr=False, default_factory=list)
    residuals: Optional[np.ndarray] = None
    truncated: Optional[str] = None
    n: float = 3.3

    @property
    def complete(self) -> bool:
        return self.truncated is None

    def at(self, e: float) -> Resonance:
        i = int(np.argmin(np.abs(self.e_grid - e)))
        if abs(self.e_grid[i] - e) > 1e-9:
            raise DomainError(f"e={e} is not on the trajectory grid")
        return self.resonances[i]


@dataclass
class CrossingReport:
    labels: tuple
    e_min_gap: float
    min_gap: float
    classification: str


def level_spacing(kR: complex, n: float) -> float:
    """Mean Weyl spacing of one symmetry class, in units of ``kR``."""
    return 8.0 / (n * n * max(abs(np.real(kR)), 1e-3))


def _boundary_signature(res: Resonance, s_common: np.ndarray) -> np.ndarray:
    data = res.boundary_values if res.kind == "open" else res.boundary_normal_derivative
    s = res.s
    order = np.argsort(s)
    s, data = s[order], data[order]
    s_ext = np.concatenate([s[-1:] - 1.0, s, s[:1] + 1.0])
    d_ext = np.concatenate([data[-1:], data, data[:1]])
    vec = np.interp(s_common, s_ext, d_ext.real) + 1j * np.interp(s_common, s_ext, d_ext.imag)
    return vec / np.linalg.norm(vec)


def mode_overlap(r1: Resonance, r2: Resonance, n_samples: int = 512) -> float:
    """``|<a, b>|`` of the normalised boundary functions resampled in ``s``."""
    s = (np.arange(n_samples) + 0.5) / n_samples
    return float(abs(np.vdot(_boundary_signature(r1, s), _boundary_signature(r2, s))))


def _check_grid(e_grid):
    e_grid = np.asarray(e_grid, dtype=float)
    if e_grid.ndim != 1 or len(e_grid) < 1:
        raise DomainError("eccentricity grid must be a non-empty 1D array")
    if abs(e_grid[0]) > 1e-15:
        raise DomainError("eccentricity grid must start at e = 0")
    if len(e_grid) > 1:
        de = np.diff(e_grid)
        if np.any(de <= 0):
            raise DomainError("eccentricity grid must be strictly ascending")
        if np.any(de > MAX_DE + 1e-12):
            raise DomainError(f"eccentricity steps must not exceed {MAX_DE}")
    if e_grid[-1] >= 1.0:
        raise DomainError("eccentricity must stay below 1")
    return e_grid


def track_mode(e_grid, label: ModeLabel, kind: str, cfg: CavityConfig, R: float = 1.0,
               convention: str = "area", max_depth: int = 8) -> ModeTrajectory:
    """Follow one mode from the circle through the eccentricity grid.

    Each point is seeded by linear extrapolation of the two previous ones. A
    step is accepted when the root stays within half the local level spacing
    of the seed and the boundary function overlaps the previous one by at
    least ``MIN_OVERLAP``; otherwise the step is bisected (up to
    ``max_depth`` times) before the trajectory is truncated.
    """
    if kind not in ("closed", "open"):
        raise DomainError("kind must be 'closed' or 'open'")
    e_grid = _check_grid(e_grid)
    bc = "dirichlet" if kind == "closed" else "dielectricTM"
    first = solve_circle_mode(label, kind, cfg, R)
    hist_e, hist_k = [0.0], [first.kR]
    last = first
    out_res = [first]
    truncated = None

    def solve_at(e, seed, prev):
        g = make_ellipse(e, R, convention)
        guard = 0.5 * level_spacing(seed, cfg.n)
        res = resonance_search(g, cfg, bc, seed, label.parity, label=label, max_shift=guard)
        if abs(res.kR - seed) > guard:
            raise EllipcavError(f"root moved {abs(res.kR - seed):.3g} from its seed, guard {guard:.3g}")
        ov = mode_overlap(res, prev)
        if ov < MIN_OVERLAP:
            raise EllipcavError(f"boundary overlap {ov:.2f} below {MIN_OVERLAP}")
        return res

    def advance(e_target, depth):
        nonlocal last
        e0 = hist_e[-1]
        if len(hist_k) >= 2:
            slope = (hist_k[-1] - hist_k[-2]) / (hist_e[-1] - hist_e[-2])
            seed = hist_k[-1] + slope * (e_target - e0)
        else:
            seed = hist_k[-1]
        if kind == "closed":
            seed = complex(seed.real, 0.0)
        try:
            res = solve_at(e_target, seed, last)
        except EllipcavError as exc:
            if depth >= max_depth:
                raise
            log.debug("%s %s: bisecting step to e=%.5f (%s)", label, kind, e_target, exc)
            advance(0.5 * (e0 + e_target), depth + 1)
            advance(e_target, depth + 1)
            return
        hist_e.append(e_target)
        hist_k.append(res.kR)
        last = res

    for e in e_grid[1:]:
        try:
            advance(float(e), 0)
        except EllipcavError as exc:
            truncated = f"seed capture failed at e={e:.4f}: {exc}"
            log.warning("%s %s truncated: %s", label, kind, truncated)
            break
        out_res.append(last)

    m = len(out_res)
    return ModeTrajectory(
        label=label, kind=kind, e_grid=e_grid[:m].copy(),
        kR=np.array([r.kR for r in out_res]), resonances=out_res,
        residuals=np.array([r.residual for r in out_res]), truncated=truncated, n=cfg.n,
    )


def _track_job(args):
    return track_mode(*args)


def track_modes(e_grid, labels, kinds, cfg: CavityConfig, workers: int = 1, R: float = 1.0,
                convention: str = "area", check: bool = True) -> dict:
    """Track every ``(label, kind)`` pair; results keyed by that pair.

    Jobs are independent, so the output does not depend on ``workers``.
    With ``check`` the finished set is screened by :func:`check_collisions`.
    """
    jobs = [(lab, kind) for lab in labels for kind in kinds]
    args = [(e_grid, lab, kind, cfg, R, convention) for lab, kind in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajs = list(pool.map(_track_job, args))
    else:
        trajs = [_track_job(a) for a in args]
    out = dict(zip(jobs, trajs))
    if check:
        check_collisions(out.values())
    return out


def check_collisions(trajectories, tol: float = 1e-8):
    """Raise when two same-class trajectories share a root on consecutive points."""
    trajs = list(trajectories)
    for i, a in enumerate(trajs):
        for b in trajs[i + 1:]:
            if a.kind != b.kind or a.label.parity != b.label.parity:
                continue
            m = min(len(a.kR), len(b.kR))
            same = np.abs(a.kR[:m] - b.kR[:m]) < tol
            if np.any(same[1:] & same[:-1]):
                raise CollisionError(f"{a.label} and {b.label} ({a.kind}) converged onto one root")


def detect_crossings(t1: ModeTrajectory, t2: ModeTrajectory, delta_cross: float = DELTA_CROSS,
                     window: float = 0.1, prominence: float = 2.0) -> list:
    """Classify the close encounters of ``Re kR`` between two trajectories.

    A sign change of the signed gap, or a gap below ``delta_cross``, is a
    crossing (gap interpolated linearly). A local minimum of ``|gap|`` that
    stays above ``delta_cross``, where the relative slope changes sign and
    the gap grows at least ``prominence``-fold within ``window`` on both
    sides, is an avoided crossing.
    """
    if t1.kind != t2.kind or t1.label.parity != t2.label.parity:
        raise DomainError("crossings are only defined within one kind and symmetry class")
    m = min(len(t1.e_grid), len(t2.e_grid))
    e = t1.e_grid[:m]
    if not np.allclose(e, t2.e_grid[:m]):
        raise DomainError("trajectories live on different eccentricity grids")
    if t1.label == t2.label and np.allclose(t1.kR[:m], t2.kR[:m]):
        raise DegenerateInputError("identical trajectories")
    gap = np.real(t1.kR[:m]) - np.real(t2.kR[:m])
    labels = (t1.label, t2.label)
    events = []
    sign_change = np.zeros(m, dtype=bool)
    for i in range(m - 1):
        if gap[i] != 0.0 and gap[i] * gap[i + 1] < 0:
            w = gap[i] / (gap[i] - gap[i + 1])
            events.append(CrossingReport(labels, float(e[i] + w * (e[i + 1] - e[i])), 0.0, "crossing"))
            sign_change[i] = sign_change[i + 1] = True
    absg = np.abs(gap)
    inf = np.inf
    for i in range(m):
        left = absg[i - 1] if i > 0 else inf
        right = absg[i + 1] if i < m - 1 else inf
        if not (absg[i] <= left and absg[i] < right) or sign_change[i]:
            continue
        if absg[i] < delta_cross:
            events.append(CrossingReport(labels, float(e[i]), float(absg[i]), "crossing"))
            continue
        if i == 0 or i == m - 1 or gap[i - 1] * gap[i + 1] <= 0:
            continue
        lo = absg[(e >= e[i] - window) & (e < e[i])]
        hi = absg[(e > e[i]) & (e <= e[i] + window)]
        if lo.max() >= prominence * absg[i] and hi.max() >= prominence * absg[i]:
            events.append(CrossingReport(labels, float(e[i]), float(absg[i]), "avoided_crossing"))
    events.sort(key=lambda ev: ev.e_min_gap)
    return events


TRAJECTORY_COLUMNS = ["e", "re_kR", "im_kR", "label_m", "label_l", "kind", "parity"]


def write_trajectory_csv(traj: ModeTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for e, k in zip(traj.e_grid, traj.kR):
            w.writerow([f"{e:.6f}", f"{k.real:.12g}", f"{k.imag:.12g}", traj.label.m, traj.label.l,
                        traj.kind, parity_name(traj.label.parity)])
