"""Boundary Husimi distributions on the Birkhoff phase space."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError, EmptyChannelError, InconsistencyError
from .geometry import EllipseGeometry

EPS_F = 1e-3
N_IMAGES = 3
MIN_NP = 64


@dataclass(frozen=True)
class HusimiMap:
    """Cell-centred weights on ``s in [0, 1)`` times ``p in [-1, 1]``.

    ``weights[i, k]`` is a density at ``(s[i], p[k])``; with uniform cells
    of area ``ds * dp`` a normalised map satisfies
    ``weights.sum() * cell_area == 1``.
    """

    s: np.ndarray
    p: np.ndarray
    weights: np.ndarray
    normalized: bool = False
    restriction: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.s), len(self.p)):
            raise DomainError("weights must have shape (len(s), len(p))")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("Husimi weights must be finite and nonnegative")

    @property
    def shape(self):
        return self.weights.shape

    @property
    def cell_area(self) -> float:
        return (1.0 / len(self.s)) * (2.0 / len(self.p))

    @property
    def mass(self) -> float:
        return float(self.weights.sum() * self.cell_area)

    def cell_masses(self) -> np.ndarray:
        return self.weights * self.cell_area


def default_grid(n_s: int = 256, n_p: int = 256):
    """Cell centres: ``s_i = i / n_s`` and ``p`` at midpoints of ``n_p`` cells."""
    s = np.arange(n_s) / n_s
    p = -1.0 + (np.arange(n_p) + 0.5) * (2.0 / n_p)
    return s, p


def normalize(h: HusimiMap) -> HusimiMap:
    mass = h.weights.sum() * h.cell_area
    if mass <= 0:
        raise DomainError("cannot normalise an all-zero Husimi map")
    return replace(h, weights=h.weights / mass, normalized=True)


def _packet_overlap(values, ds, s_nodes, s_c, p_c, kappa, L, sigma):
    """``sum_j conj(xi_{s,p}(s_j)) f_j ds_j`` for all grid centres.

    The packet is periodised by the ``N_IMAGES`` windings nearest to each
    centre (``|s_j + w - s| < N_IMAGES / 2``). For a fixed winding offset
    ``w`` the sum factorises into a masked Gaussian matrix in ``(s, s_j)``
    and a plane-wave matrix in ``(s_j, p)``.
    """
    f = values * ds
    out = np.zeros((len(s_c), len(p_c)), dtype=complex)
    half = N_IMAGES / 2
    wmax = int(np.ceil(half)) + 1
    for w in range(-wmax, wmax + 1):
        x = s_nodes[None, :] + w - s_c[:, None]
        keep = np.abs(x) < half
        if not keep.any():
            continue
        d = L * x
        G = np.where(keep, np.exp(-d * d / (2 * sigma * sigma)), 0.0) * f[None, :]
        E = np.exp(-1j * kappa * L * np.outer(s_nodes + w, p_c))
        out += G @ E
    return out * np.exp(1j * kappa * L * np.outer(s_c, p_c))


def husimi_incident(res, g: Optional[EllipseGeometry] = None, n: Optional[float] = None,
                    n_s: int = 256, n_p: int = 256) -> HusimiMap:
    """Incident Husimi distribution of a resonance on the interior side.

    With ``h0`` and ``h1`` the packet overlaps of ``psi`` and of
    ``d_nu psi / (n k)`` (outward normal), the map is
    ``|F h0 - (i / F) h1|^2`` with ``F = sqrt(max(cos chi, EPS_F))``,
    normalised to unit mass. The packet is centred at ``(s, p)`` with width
    ``sigma = sqrt(2 L / (n k))`` in arclength. For closed modes ``psi``
    vanishes on the boundary and only the derivative term remains.
    """
    if n_p < MIN_NP:
        raise ConfigError(f"Husimi grid needs at least {MIN_NP} momentum cells, got {n_p}")
    if n_s < 4:
        raise ConfigError("Husimi grid needs at least 4 arclength cells")
    g = res.geometry if g is None else g
    n = res.n if n is None else n
    kappa = n * float(np.real(res.kR)) / g.R
    L = g.perimeter
    sigma = np.sqrt(2 * L / kappa)
    s_nodes = g.s_of_t(res.t)
    ds = g.speed(res.t) * (2 * np.pi / len(res.t))
    s_c, p_c = default_grid(n_s, n_p)
    F = np.sqrt(np.maximum(np.sqrt(1 - p_c * p_c), EPS_F))[None, :]
    dpsi = np.asarray(res.boundary_normal_derivative) / (n * res.kR / g.R)
    h1 = _packet_overlap(dpsi, ds, s_nodes, s_c, p_c, kappa, L, sigma)
    psi = np.asarray(res.boundary_values)
    if res.kind == "closed":
        if np.max(np.abs(psi), initial=0.0) > 1e-8 * max(np.max(np.abs(dpsi)), 1e-300):
            raise InconsistencyError("closed-billiard data carry a nonzero boundary field")
        amp = -1j * h1 / F
    else:
        h0 = _packet_overlap(psi, ds, s_nodes, s_c, p_c, kappa, L, sigma)
        amp = F * h0 - 1j * h1 / F
    return normalize(HusimiMap(s_c, p_c, np.abs(amp) ** 2))


def restrict_below_critical(h: HusimiMap, p_c: float) -> HusimiMap:
    """Keep only the leaky strip ``|p| < p_c`` and renormalise it to unit mass."""
    if not h.normalized:
        raise DomainError("restriction expects a normalised map")
    if not 0 < p_c <= 1:
        raise DomainError("critical momentum must lie in (0, 1]")
    if h.restriction is not None:
        if abs(h.restriction - p_c) < 1e-15:
            return h
        if p_c > h.restriction:
            raise DomainError("cannot widen an existing restriction")
    keep = (np.abs(h.p) < p_c)[None, :]
    w = np.where(keep, h.weights, 0.0)
    mass = w.sum() * h.cell_area
    if mass <= 0:
        raise EmptyChannelError(f"no Husimi weight below |p| = {p_c}")
    return HusimiMap(h.s, h.p, w / mass, normalized=True, restriction=float(p_c))


def husimi_peak(h: HusimiMap):
    """Cell centre of maximal weight; ties go to smallest ``s``, then smallest ``p``."""
    w = h.weights
    top = w.max()
    if top <= 0:
        raise DomainError("all-zero Husimi map has no peak")
    si, pi = np.nonzero(w == top)
    cand = sorted(zip(h.s[si], h.p[pi]))
    return float(cand[0][0]), float(cand[0][1])


def coarsen(h: HusimiMap) -> HusimiMap:
    """Halve both resolutions conservatively.

    Arclength centres sit on ``i / n_s``, so each fine cell between two
    coarse centres is shared half-half (periodic 1/4, 1/2, 1/4 stencil);
    momentum cells are merged pairwise.
    """
    ns, npp = h.shape
    if ns % 2 or npp % 2:
        raise DomainError("grid sizes must be even to coarsen")
    w = h.weights
    w = 0.25 * np.roll(w, 1, axis=0) + 0.5 * w + 0.25 * np.roll(w, -1, axis=0)
    w = w[::2]
    w = 0.5 * (w[:, 0::2] + w[:, 1::2])
    p = 0.5 * (h.p[0::2] + h.p[1::2])
    return HusimiMap(h.s[::2], p, w, normalized=h.normalized, restriction=h.restriction)


def write_husimi_csv(h: HusimiMap, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["s", "p", "weight"])
        for i, s in enumerate(h.s):
            for k, p in enumerate(h.p):
                wr.writerow([f"{s:.8f}", f"{p:.8f}", f"{h.weights[i, k]:.10e}"])
