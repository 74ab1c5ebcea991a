"""Elliptic boundary family at fixed area.

The ellipse of eccentricity ``e`` is scaled so that ``a * b = R**2``: every
member of the family has the area of the circle of radius ``R``, which keeps
``kR`` values comparable along a deformation sweep.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = ["EllipseGeometry", "BoundaryPoint", "make_ellipse", "boundary_point"]


@dataclass(frozen=True)
class EllipseGeometry:
    """Immutable ellipse ``(a cos t, b sin t)``.

    Attributes
    ----------
    e : float
        Eccentricity ``c / a``.
    R : float
        Reference (circle-equivalent) radius.
    a, b : float
        Semi-major and semi-minor axes.
    c : float
        Focal half-distance, foci at ``(+-c, 0)``.
    perimeter : float
        Total arc length.
    """

    e: float
    R: float
    a: float
    b: float
    c: float
    perimeter: float

    @property
    def foci(self) -> np.ndarray:
        return np.array([[self.c, 0.0], [-self.c, 0.0]])

    @property
    def area(self) -> float:
        return np.pi * self.a * self.b

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def tangent(self, t):
        """Derivative ``dx/dt`` (not normalised)."""
        t = np.asarray(t, dtype=float)
        return np.stack([-self.a * np.sin(t), self.b * np.cos(t)], axis=-1)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([-self.a * np.cos(t), -self.b * np.sin(t)], axis=-1)

    def speed(self, t):
        t = np.asarray(t, dtype=float)
        return np.hypot(self.a * np.sin(t), self.b * np.cos(t))

    def unit_tangent(self, t):
        """Counterclockwise unit tangent (direction of increasing ``s``)."""
        return self.tangent(t) / self.speed(t)[..., None]

    def outward_normal(self, t):
        t = np.asarray(t, dtype=float)
        n = np.stack([self.b * np.cos(t), self.a * np.sin(t)], axis=-1)
        return n / self.speed(t)[..., None]

    def inward_normal(self, t):
        return -self.outward_normal(t)

    def curvature(self, t):
        return self.a * self.b / self.speed(t) ** 3

    def arclength(self, t):
        """Arc length from the positive major-axis endpoint to parameter ``t``.

        ``t`` is not wrapped, so the result is continuous and monotone in ``t``.
        """
        t = np.asarray(t, dtype=float)
        m = self.e**2
        return self.a * (special.ellipe(m) - special.ellipeinc(np.pi / 2 - t, m))

    def s_of_t(self, t):
        """Normalised arclength in ``[0, 1)`` for angular parameter ``t``."""
        t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
        s = self.arclength(t) / self.perimeter
        return np.where(s >= 1.0, s - 1.0, s)

    def t_of_s(self, s, tol: float = 1e-14):
        """Invert :meth:`s_of_t` by Newton iteration (vectorised)."""
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        target = s * self.perimeter
        t = 2 * np.pi * s
        for _ in range(50):
            step = (self.arclength(t) - target) / self.speed(t)
            t = t - step
            if np.all(np.abs(step) < tol):
                break
        return np.mod(t, 2 * np.pi)


class BoundaryPoint(NamedTuple):
    position: np.ndarray
    inward_normal: np.ndarray
    s: float
    curvature: float


def make_ellipse(e: float, R: float = 1.0, convention: str = "area") -> EllipseGeometry:
    """Build the ellipse of eccentricity ``e``.

    ``convention="area"`` (default) keeps ``a*b = R**2``; ``"major"`` keeps
    ``a = R`` instead and is only meant for robustness checks.
    """
    if not (0.0 <= e < 1.0) or not np.isfinite(e):
        raise DomainError(f"eccentricity must lie in [0, 1), got {e!r}")
    if not R > 0:
        raise DomainError(f"R must be positive, got {R!r}")
    q = 1.0 - e * e
    if convention == "area":
        a, b = R / q**0.25, R * q**0.25
    elif convention == "major":
        a, b = R, R * np.sqrt(q)
    else:
        raise DomainError(f"unknown scale convention {convention!r}")
    c = a * e
    perimeter = 4.0 * a * special.ellipe(e * e)
    return EllipseGeometry(e=float(e), R=float(R), a=a, b=b, c=c, perimeter=perimeter)


def boundary_point(g: EllipseGeometry, t: float) -> BoundaryPoint:
    t = float(np.mod(t, 2 * np.pi))
    return BoundaryPoint(
        position=g.position(t),
        inward_normal=g.inward_normal(t),
        s=float(g.s_of_t(t)),
        curvature=float(g.curvature(t)),
    )
