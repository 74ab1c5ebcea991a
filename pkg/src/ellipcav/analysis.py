"""Self-energy curves, decay-channel similarity and mode classification."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, DomainError, EmptyChannelError
from .geometry import EllipseGeometry
from .husimi import HusimiMap, husimi_incident, restrict_below_critical
from .raydyn import focal_invariant
from .wavesolver import ModeLabel, quality_factor

log = logging.getLogger(__name__)

EPS_KAPPA = 1e-300
TAU = 0.25
E_MAX = 0.6


@dataclass
class SelfEnergySeries:
    """``S_e(e) = Re kR_closed - Re kR_open`` for one mode."""

    label: ModeLabel
    e_grid: np.ndarray
    values: np.ndarray

    def at(self, e: float) -> float:
        return float(np.interp(e, self.e_grid, self.values))


@dataclass
class DeltaSelfEnergy:
    e_grid: np.ndarray
    signed: np.ndarray
    values: np.ndarray
    e_zero: np.ndarray
    degenerate: bool = False


@dataclass
class Classification:
    kind: str
    masses: dict


@dataclass
class PairComparison:
    labels: tuple
    e_grid: np.ndarray
    delta_se: np.ndarray
    d_b: np.ndarray
    e_zero: np.ndarray
    e_dbmin: Optional[float]
    q_j: np.ndarray
    q_k: np.ndarray
    e_dsmin: Optional[float] = None
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    degenerate: bool = False

    def to_dict(self) -> dict:
        def arr(x):
            return [None if not np.isfinite(v) else float(v) for v in np.asarray(x, dtype=float)]

        return {
            "labels": [[lab.m, lab.l, lab.sym] for lab in self.labels],
            "e_grid": arr(self.e_grid),
            "delta_se": arr(self.delta_se),
            "d_b": arr(self.d_b),
            "e_zero": arr(self.e_zero),
            "e_dbmin": self.e_dbmin,
            "q_j": arr(self.q_j),
            "q_k": arr(self.q_k),
            "e_dsmin": self.e_dsmin,
            "flagged": [bool(f) for f in self.flagged],
            "sign_convention": "S_e = Re kR_closed - Re kR_open",
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)


def self_energy(closed, open_) -> SelfEnergySeries:
    if closed.kind != "closed" or open_.kind != "open":
        raise DomainError("self_energy expects a closed and an open trajectory, in that order")
    if closed.label != open_.label:
        raise DomainError(f"label mismatch: {closed.label} vs {open_.label}")
    if len(closed.e_grid) != len(open_.e_grid) or not np.allclose(closed.e_grid, open_.e_grid, atol=1e-12):
        raise DomainError("closed and open trajectories live on different grids")
    return SelfEnergySeries(closed.label, np.asarray(closed.e_grid, dtype=float).copy(),
                            np.real(closed.kR) - np.real(open_.kR))


def zero_crossings(e, y) -> np.ndarray:
    """Sign changes of ``y`` located by linear interpolation (exact zeros included once)."""
    e, y = np.asarray(e, float), np.asarray(y, float)
    out = []
    for i in range(len(y) - 1):
        if y[i] == 0.0:
            out.append(e[i])
        elif y[i] * y[i + 1] < 0:
            out.append(e[i] + y[i] / (y[i] - y[i + 1]) * (e[i + 1] - e[i]))
    if len(y) and y[-1] == 0.0:
        out.append(e[-1])
    return np.array(out)


def delta_self_energy(a: SelfEnergySeries, b: SelfEnergySeries) -> DeltaSelfEnergy:
    if len(a.e_grid) != len(b.e_grid) or not np.allclose(a.e_grid, b.e_grid, atol=1e-12):
        raise DomainError("self-energy series on different grids")
    d = a.values - b.values
    if np.all(d == 0.0):
        return DeltaSelfEnergy(a.e_grid, d, np.abs(d), a.e_grid.copy(), degenerate=True)
    return DeltaSelfEnergy(a.e_grid, d, np.abs(d), zero_crossings(a.e_grid, d))


def bhattacharyya_masses(pm, qm) -> float:
    """``-ln max(sum sqrt(p_i q_i), EPS_KAPPA)`` for two arrays of cell masses."""
    pm, qm = np.asarray(pm, float), np.asarray(qm, float)
    if pm.shape != qm.shape:
        raise DomainError("mass arrays must have the same shape")
    if np.any(pm < 0) or np.any(qm < 0):
        raise DomainError("cell masses must be nonnegative")
    kappa = float(np.sum(np.sqrt(pm * qm)))
    return max(-np.log(max(kappa, EPS_KAPPA)), 0.0)


def bhattacharyya(p: HusimiMap, q: HusimiMap) -> float:
    """Bhattacharyya distance of two normalised maps on a common grid."""
    if not (p.normalized and q.normalized):
        raise DomainError("both maps must be normalised")
    if p.shape != q.shape or not (np.array_equal(p.s, q.s) and np.array_equal(p.p, q.p)):
        raise DomainError("maps live on different grids")
    if p.restriction != q.restriction:
        raise DomainError("maps carry different restrictions")
    if p is q or np.array_equal(p.weights, q.weights):
        return 0.0
    return bhattacharyya_masses(p.cell_masses(), q.cell_masses())


def region_masks(g: EllipseGeometry, s, p, tau: float = TAU):
    """Boolean WG / SB / UB masks on the ``(s, p)`` cell centres."""
    if g.c == 0.0:
        raise DomainError("classification is undefined for the circle")
    S, P = np.meshgrid(s, p, indexing="ij")
    lam = focal_invariant(g, (S, P)) / g.c**2
    wg = lam > 0
    sb = lam <= -tau
    return {"WG": wg, "SB": sb, "UB": ~wg & ~sb}


def classify_mode(h: HusimiMap, g: EllipseGeometry, tau: float = TAU) -> Classification:
    """Region (WG, SB or UB) carrying the largest Husimi mass.

    The focal invariant normalised by its island-centre value ``-c^2``
    splits phase space: positive values are whispering-gallery motion,
    values at or below ``-tau`` the stable bouncing island, the rest the
    neighbourhood of the separatrix (unstable bouncing).
    """
    if not h.normalized:
        raise DomainError("classification expects a normalised map")
    if h.restriction is not None:
        raise DomainError("classification expects an unrestricted map")
    masks = region_masks(g, h.s, h.p, tau)
    cm = h.cell_masses()
    masses = {k: float(cm[m].sum()) for k, m in masks.items()}
    best = max(("WG", "SB", "UB"), key=lambda k: masses[k])
    return Classification(best, masses)


def swing(series: SelfEnergySeries, e0: float = 0.0, e1: float = E_MAX) -> float:
    """``S_e(e1) - S_e(e0)``."""
    return series.at(e1) - series.at(e0)


def mean_abs_slope(series: SelfEnergySeries, e0: float, e1: float) -> float:
    """Average of ``|dS_e/de|`` over ``[e0, e1]`` from grid differences."""
    e, v = series.e_grid, series.values
    sel = (e >= e0 - 1e-12) & (e <= e1 + 1e-12)
    e, v = e[sel], v[sel]
    if len(e) < 2:
        raise DomainError("interval holds fewer than two grid points")
    return float(np.sum(np.abs(np.diff(v))) / (e[-1] - e[0]))


def decay_channel(res, p_c: float, n_s: int = 256, n_p: int = 256) -> HusimiMap:
    """Husimi map of an open resonance restricted to the leaky strip."""
    return restrict_below_critical(husimi_incident(res, n_s=n_s, n_p=n_p), p_c)


def compare_pair(label_j: ModeLabel, label_k: ModeLabel, trajectories: dict, p_c: float,
                 e_max: float = E_MAX, n_s: int = 256, n_p: int = 256) -> PairComparison:
    """ΔS_e, decay-channel distance and quality factors for one pair of modes.

    ``trajectories`` maps ``(label, kind)`` to tracked trajectories on a
    common grid. Only grid points with ``e <= e_max`` are used. Points where
    either decay channel is empty are flagged and skipped by the minimum
    search.
    """
    try:
        cj, oj = trajectories[(label_j, "closed")], trajectories[(label_j, "open")]
        ck, ok = trajectories[(label_k, "closed")], trajectories[(label_k, "open")]
    except KeyError as exc:
        raise DomainError(f"missing trajectory {exc}") from None
    sj, sk = self_energy(cj, oj), self_energy(ck, ok)
    ds = delta_self_energy(sj, sk)
    sel = ds.e_grid <= e_max + 1e-12
    e = ds.e_grid[sel]
    same = label_j == label_k
    d_b = np.zeros(len(e))
    flagged = np.zeros(len(e), dtype=bool)
    q_j = np.array([quality_factor(k) for k in oj.kR[sel]])
    q_k = np.array([quality_factor(k) for k in ok.kR[sel]])
    for i in range(len(e)):
        if same:
            continue
        try:
            hj = decay_channel(oj.resonances[i], p_c, n_s, n_p)
            hk = decay_channel(ok.resonances[i], p_c, n_s, n_p)
        except EmptyChannelError as exc:
            log.warning("e=%.3f flagged: %s", e[i], exc)
            flagged[i] = True
            d_b[i] = np.nan
            continue
        d_b[i] = bhattacharyya(hj, hk)
    ok_pts = ~flagged
    e_dbmin = float(e[ok_pts][np.argmin(d_b[ok_pts])]) if ok_pts.any() and not same else None
    e_zero = ds.e_zero[ds.e_zero <= e_max + 1e-12]
    e_dsmin = float(e[np.argmin(ds.values[sel])]) if not same else None
    return PairComparison(labels=(label_j, label_k), e_grid=e, delta_se=ds.values[sel], d_b=d_b,
                          e_zero=e_zero, e_dbmin=e_dbmin, q_j=q_j, q_k=q_k, e_dsmin=e_dsmin,
                          flagged=flagged, degenerate=same or ds.degenerate)
