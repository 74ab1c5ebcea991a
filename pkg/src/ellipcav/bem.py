"""Boundary-integral operators of the 2D Helmholtz equation on an ellipse.

The free-space kernel is ``G(r) = -(i/4) H0(kappa r)``. Nodes sit at the
midpoints ``t_j = (j + 1/2) 2 pi / N`` of ``N`` equal parameter elements, so
that the node set is mapped onto itself by both axis reflections and no node
lies on a symmetry axis.

Two quadratures are provided:

``spectral``
    The logarithmic part of each kernel is split off and integrated exactly
    against the trigonometric interpolant of the density (log-split Nystrom
    rule); the remainder, including the curvature limit of the double-layer
    kernel on the diagonal, uses the trapezoidal rule. Converges faster than
    any power of ``1/N`` for analytic boundaries.
``panel``
    Piecewise-constant elements collocated at midpoints. The logarithm is
    integrated analytically over every element (product integration) and the
    self element additionally carries the curvature term. Second order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .geometry import EllipseGeometry

EULER_GAMMA = np.euler_gamma
SCHEMES = ("spectral", "panel")


@dataclass(frozen=True)
class BoundaryMesh:
    geometry: EllipseGeometry
    N: int
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    ddx: np.ndarray
    speed: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray

    @property
    def h(self) -> float:
        return 2 * np.pi / self.N

    @property
    def ds(self) -> np.ndarray:
        """Arclength weight of every node."""
        return self.speed * self.h

    @property
    def s(self) -> np.ndarray:
        return self.geometry.s_of_t(self.t)

    def images(self) -> np.ndarray:
        """Index of the reflected copies of every quarter node.

        Rows: identity, ``y -> -y``, ``x -> -x``, both reflections.
        """
        N, q = self.N, np.arange(self.N // 4)
        return np.stack([q, N - 1 - q, N // 2 - 1 - q, N // 2 + q])


def make_mesh(g: EllipseGeometry, N: int) -> BoundaryMesh:
    if N % 4:
        raise ValueError("element count must be divisible by 4")
    t = (np.arange(N) + 0.5) * (2 * np.pi / N)
    return BoundaryMesh(
        geometry=g, N=N, t=t, x=g.position(t), dx=g.tangent(t),
        ddx=g.second_derivative(t), speed=g.speed(t),
        normal=g.outward_normal(t), curvature=g.curvature(t),
    )


def parity_signs(parity) -> np.ndarray:
    """Characters of the four symmetry operations for ``parity = (px, py)``."""
    px, py = parity
    return np.array([1, py, px, px * py], dtype=float)


def fold(K: np.ndarray, mesh: BoundaryMesh, parity) -> np.ndarray:
    """Reduce the columns of a quarter-row operator to the quarter nodes."""
    img = mesh.images()
    chi = parity_signs(parity)
    return sum(c * K[:, idx] for c, idx in zip(chi, img))


def unfold(values: np.ndarray, mesh: BoundaryMesh, parity) -> np.ndarray:
    """Extend quarter-node values to the full boundary using the parity."""
    out = np.empty(mesh.N, dtype=values.dtype)
    for c, idx in zip(parity_signs(parity), mesh.images()):
        out[idx] = c * values
    return out


def flux_preconditioner(mesh: BoundaryMesh, parity, m0: float) -> np.ndarray:
    """Fourier multiplier ``1 + |m|/m0`` in the boundary parameter, applied to unfolded data.

    Returns the ``N x N/4`` real matrix mapping quarter-node values of the
    given parity to full-boundary values. The multiplier commutes with both
    axis reflections, so the result has the same parity.
    """
    N = mesh.N
    U = np.zeros((N, N // 4))
    q = np.arange(N // 4)
    for c, idx in zip(parity_signs(parity), mesh.images()):
        U[idx, q] = c
    m = np.abs(np.fft.fftfreq(N, 1.0 / N))
    return np.fft.ifft((1.0 + m / m0)[:, None] * np.fft.fft(U, axis=0), axis=0).real


@lru_cache(maxsize=16)
def _log_weights_row(N: int) -> np.ndarray:
    # Exact quadrature weights for log(4 sin^2((t - tau)/2)) at offset t_i - t_j = 2 pi k / N.
    n = N // 2
    d = np.arange(N) * (2 * np.pi / N)
    m = np.arange(1, n)
    row = -(2 * np.pi / n) * (np.cos(np.outer(d, m)) / m).sum(axis=1)
    row -= (np.pi / n**2) * np.cos(n * d)
    return row


def _pair_geometry(mesh: BoundaryMesh, rows):
    xi = mesh.x[rows]
    diff = xi[:, None, :] - mesh.x[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    self_mask = rows[:, None] == np.arange(mesh.N)[None, :]
    r = np.where(self_mask, 1.0, r)
    # normal(tau) . (x(t) - x(tau)) / r
    proj = np.einsum("ijk,jk->ij", diff, mesh.normal) / r
    return r, proj, self_mask


def layer_operators(mesh: BoundaryMesh, kappa: complex, rows=None, scheme: str = "spectral"):
    """Single- and double-layer matrices ``(S, D)`` for the given target rows.

    ``(S v)_i ~ int G(x_i, y) v(y) ds_y`` and
    ``(D u)_i ~ PV int dG(x_i, y)/dnu_y u(y) ds_y`` with ``nu`` the outward
    normal; columns run over all ``N`` nodes.
    """
    if rows is None:
        rows = np.arange(mesh.N)
    rows = np.asarray(rows)
    if scheme == "spectral":
        return _spectral(mesh, complex(kappa), rows)
    if scheme == "panel":
        return _panel(mesh, complex(kappa), rows)
    raise ValueError(f"unknown quadrature scheme {scheme!r}")


def adjoint_double_layer(mesh: BoundaryMesh, kappa: complex, rows=None, scheme: str = "spectral"):
    """Matrix of ``PV int dG(x_i, y)/dnu_x v(y) ds_y`` (normal taken at the target)."""
    if rows is None:
        rows = np.arange(mesh.N)
    rows = np.asarray(rows)
    kappa = complex(kappa)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    N, h = mesh.N, mesh.h
    r, _, self_mask = _pair_geometry(mesh, rows)
    diff = mesh.x[rows][:, None, :] - mesh.x[None, :, :]
    projx = np.einsum("ijk,ik->ij", diff, mesh.normal[rows]) / r  # nu(t) . (x(t) - x(tau)) / r
    kr = kappa * r
    sp = mesh.speed[None, :]
    dGx = 0.25j * kappa * special.hankel1(1, kr) * projx
    ii, jj = np.nonzero(self_mask)
    diag = mesh.curvature[jj] * mesh.speed[jj] / (4 * np.pi)
    if scheme == "panel":
        K = dGx * sp * h
        K[ii, jj] = diag * h
        return K
    diff_idx = (rows[:, None] - np.arange(N)[None, :]) % N
    Rw = _log_weights_row(N)[diff_idx]
    dt = mesh.t[rows][:, None] - mesh.t[None, :]
    lg = np.log(np.where(self_mask, 1.0, 4 * np.sin(dt / 2) ** 2))
    C = -(kappa / (4 * np.pi)) * special.jv(1, kr) * projx * sp
    C[ii, jj] = 0.0
    E = dGx * sp - C * lg
    E[ii, jj] = diag
    return Rw * C + h * E


def _kernels(mesh, kappa, rows):
    r, proj, self_mask = _pair_geometry(mesh, rows)
    kr = kappa * r
    h0 = special.hankel1(0, kr)
    h1 = special.hankel1(1, kr)
    G = -0.25j * h0
    dG = 0.25j * kappa * h1 * (-proj)  # dG/dnu_y = (i kappa/4) H1 (y - x).nu / r
    return r, proj, self_mask, kr, G, dG


def _spectral(mesh, kappa, rows):
    N, h = mesh.N, mesh.h
    r, proj, self_mask, kr, G, dG = _kernels(mesh, kappa, rows)
    sp = mesh.speed[None, :]
    diff_idx = (rows[:, None] - np.arange(N)[None, :]) % N
    Rw = _log_weights_row(N)[diff_idx]
    dt = mesh.t[rows][:, None] - mesh.t[None, :]
    lg = np.log(np.where(self_mask, 1.0, 4 * np.sin(dt / 2) ** 2))

    # single layer: G*|x'| = A log(4 sin^2) + B
    A = np.where(self_mask, 1.0, special.jv(0, kr)) * sp / (4 * np.pi)
    B = G * sp - A * lg
    ii, jj = np.nonzero(self_mask)
    spd = mesh.speed[jj]
    B[ii, jj] = spd * (-0.25j + (np.log(kappa * spd / 2) + EULER_GAMMA) / (2 * np.pi))
    S = Rw * A + h * B

    # double layer: dG*|x'| = C log(4 sin^2) + E
    C = (kappa / (4 * np.pi)) * special.jv(1, kr) * proj * sp
    C[ii, jj] = 0.0
    E = dG * sp - C * lg
    E[ii, jj] = mesh.curvature[jj] * spd / (4 * np.pi)
    D = Rw * C + h * E
    return S, D


def _panel(mesh, kappa, rows):
    N, h = mesh.N, mesh.h
    r, proj, self_mask, kr, G, dG = _kernels(mesh, kappa, rows)
    sp = mesh.speed[None, :]
    d = (mesh.t[rows][:, None] - mesh.t[None, :] + np.pi) % (2 * np.pi) - np.pi
    d = np.where(self_mask, 1.0, d)

    def prim(u):
        return u * np.log(np.abs(u)) - u

    # exact log integral over the element minus its midpoint value
    corr = prim(d + h / 2) - prim(d - h / 2) - h * np.log(np.abs(d))
    A = special.jv(0, kr) * sp / (2 * np.pi)
    S = G * sp * h + A * corr
    ii, jj = np.nonzero(self_mask)
    spd = mesh.speed[jj]
    S[ii, jj] = spd * h / (2 * np.pi) * (np.log(h / 2) - 1) + spd * h * (
        -0.25j + (np.log(kappa * spd / 2) + EULER_GAMMA) / (2 * np.pi)
    )
    D = dG * sp * h
    D[ii, jj] = mesh.curvature[jj] * spd * h / (4 * np.pi)
    return S, D
