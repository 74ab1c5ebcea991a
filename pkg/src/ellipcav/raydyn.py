"""Billiard map of the ellipse in Birkhoff coordinates ``(s, p = sin chi)``.

``s`` is the normalised arclength (0 at the positive major-axis endpoint,
increasing counterclockwise) and ``p`` the tangential component of the unit
direction of the outgoing chord, positive when the ray moves towards
increasing ``s``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, NumericalError
from .geometry import EllipseGeometry

log = logging.getLogger(__name__)

GRAZING_GUARD = 1e-9
MIN_CHORD = 1e-10


class BirkhoffCoord(NamedTuple):
    s: float
    p: float


@dataclass
class RayTrajectory:
    """Start point followed by one point per bounce, as an ``(N+1, 2)`` array."""

    points: np.ndarray
    geometry: EllipseGeometry

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i) -> BirkhoffCoord:
        s, p = self.points[i]
        return BirkhoffCoord(float(s), float(p))


@dataclass
class SeparatrixCurve:
    """Separatrix samples; ``p`` has one column per focal branch and sign."""

    s: np.ndarray
    p: np.ndarray


@dataclass
class PSOSResult:
    points: np.ndarray
    seed_index: np.ndarray
    failures: list = field(default_factory=list)


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(p) > 1.0 - GRAZING_GUARD):
        raise DomainError("grazing or invalid momentum: |p| must be < 1")
    return p


def _direction(g: EllipseGeometry, t, p):
    """Unit direction leaving the boundary point ``t`` with momentum ``p``."""
    p = np.asarray(p, dtype=float)
    cos_chi = np.sqrt(1.0 - p * p)
    return cos_chi[..., None] * g.inward_normal(t) + p[..., None] * g.unit_tangent(t)


def _next_hit(g: EllipseGeometry, t, d):
    """Second intersection of the ray ``x(t) + lam*d`` with the ellipse."""
    x = g.position(t)
    ia2, ib2 = 1.0 / g.a**2, 1.0 / g.b**2
    A = d[..., 0] ** 2 * ia2 + d[..., 1] ** 2 * ib2
    B = 2.0 * (x[..., 0] * d[..., 0] * ia2 + x[..., 1] * d[..., 1] * ib2)
    C = x[..., 0] ** 2 * ia2 + x[..., 1] ** 2 * ib2 - 1.0
    disc = np.sqrt(np.maximum(B * B - 4.0 * A * C, 0.0))
    lam = (-B + disc) / (2.0 * A)
    if np.any(~np.isfinite(lam)) or np.any(lam < MIN_CHORD):
        raise NumericalError("degenerate chord in ray-ellipse intersection")
    q = x + lam[..., None] * d
    return np.arctan2(q[..., 1] / g.b, q[..., 0] / g.a)


def _step(g: EllipseGeometry, t, d):
    t_new = _next_hit(g, t, d)
    nu = g.outward_normal(t_new)
    dn = np.sum(d * nu, axis=-1)
    d_new = d - 2.0 * dn[..., None] * nu
    d_new /= np.linalg.norm(d_new, axis=-1)[..., None]
    return np.mod(t_new, 2 * np.pi), d_new


def bounce_map(g: EllipseGeometry, x: BirkhoffCoord) -> BirkhoffCoord:
    """Next collision after specular reflection."""
    s, p = x
    _check_p(p)
    t = g.t_of_s(s)
    t_new, d_new = _step(g, t, _direction(g, t, p))
    p_new = float(np.dot(d_new, g.unit_tangent(t_new)))
    return BirkhoffCoord(float(g.s_of_t(t_new)), p_new)


def _trace_arrays(g: EllipseGeometry, s0, p0, n_bounce: int):
    s0 = np.atleast_1d(np.asarray(s0, dtype=float))
    p0 = _check_p(np.atleast_1d(p0))
    t = g.t_of_s(s0)
    d = _direction(g, t, p0)
    ts = np.empty((n_bounce + 1,) + t.shape)
    ps = np.empty_like(ts)
    ts[0], ps[0] = t, p0
    for i in range(1, n_bounce + 1):
        try:
            t, d = _step(g, t, d)
        except NumericalError as exc:
            raise NumericalError(f"bounce {i}: {exc}") from exc
        ts[i] = t
        ps[i] = np.sum(d * g.unit_tangent(t), axis=-1)
    return g.s_of_t(ts), ps


def trace(g: EllipseGeometry, x0: BirkhoffCoord, n_bounce: int) -> RayTrajectory:
    """Follow ``n_bounce`` reflections; the first point is ``x0`` itself."""
    if n_bounce < 0:
        raise DomainError("bounce count must be non-negative")
    s, p = _trace_arrays(g, x0[0], x0[1], n_bounce)
    return RayTrajectory(np.column_stack([s[:, 0], p[:, 0]]), g)


def focal_invariant(g: EllipseGeometry, x: BirkhoffCoord):
    """Product of the angular momenta of the chord about the two foci.

    Positive for whispering-gallery orbits (ellipse caustic), negative for
    bouncing orbits (hyperbola caustic), zero on the separatrix. Accepts
    array-valued ``s`` and ``p``.
    """
    s, p = np.asarray(x[0], dtype=float), np.asarray(x[1], dtype=float)
    t = g.t_of_s(s)
    pos = g.position(t)
    d = _direction(g, t, np.clip(p, -1.0, 1.0))
    out = 1.0
    for f in g.foci:
        r = pos - f
        out = out * (r[..., 0] * d[..., 1] - r[..., 1] * d[..., 0])
    return out


def separatrix_p(g: EllipseGeometry, s):
    """Momenta of the chords from boundary point ``s`` through each focus.

    Returns an array of shape ``s.shape + (4,)``: the two focal branches and
    their sign-reflected partners, sorted ascending.
    """
    if g.c == 0.0:
        raise DomainError("the circle has no separatrix")
    s = np.asarray(s, dtype=float)
    t = g.t_of_s(s)
    pos = g.position(t)
    tan = g.unit_tangent(t)
    branches = []
    for f in g.foci:
        v = f - pos
        branches.append(np.sum(v * tan, axis=-1) / np.linalg.norm(v, axis=-1))
    branches = np.stack(branches, axis=-1)
    return np.sort(np.concatenate([branches, -branches], axis=-1), axis=-1)


def separatrix_curve(g: EllipseGeometry, n_samples: int = 400) -> SeparatrixCurve:
    s = (np.arange(n_samples) + 0.5) / n_samples
    return SeparatrixCurve(s=s, p=separatrix_p(g, s))


def critical_line(n: float) -> float:
    """Total-internal-reflection threshold ``p_c = 1/n``."""
    if not n > 1.0:
        raise DomainError(f"refractive index must exceed 1, got {n!r}")
    return 1.0 / n


def psos_sample(g: EllipseGeometry, seeds: Sequence[BirkhoffCoord], n_bounce: int) -> PSOSResult:
    """Union of the traced orbits of all seeds (seed points included)."""
    if len(seeds) == 0:
        raise DomainError("no seeds given")
    pts, idx, failures = [], [], []
    for k, seed in enumerate(seeds):
        try:
            traj = trace(g, seed, n_bounce)
        except (DomainError, NumericalError) as exc:
            log.warning("seed %d %s skipped: %s", k, tuple(seed), exc)
            failures.append((k, tuple(seed), str(exc)))
            continue
        pts.append(traj.points)
        idx.append(np.full(len(traj.points), k))
    if pts:
        points, seed_index = np.vstack(pts), np.concatenate(idx)
    else:
        points, seed_index = np.empty((0, 2)), np.empty(0, dtype=int)
    return PSOSResult(points, seed_index, failures)
