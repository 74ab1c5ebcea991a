"""Closed-billiard eigenvalues and open dielectric-cavity resonances.

Both problems are posed for the same interior medium of refractive index
``n``: the closed billiard is the Dirichlet problem for the interior
wavenumber ``n k``, the open cavity couples the interior (``n k``) to the
exterior (``k``) through TM matching (field and normal derivative
continuous). All wavenumbers are quoted as the dimensionless vacuum ``kR``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import bem
from .errors import (ConfigError, DomainError, NotAResonanceError, NumericalError,
                     ParityMismatchError)
from .geometry import EllipseGeometry, make_ellipse
from .specfun import (bessel_j, bessel_j_prime, bessel_prime_zero, bessel_zero, hankel1,
                      hankel1_prime)

log = logging.getLogger(__name__)

BOUNDARY_CONDITIONS = ("dirichlet", "dielectricTM")
ALL_PARITIES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def parity_name(parity) -> str:
    """``(px, py)`` as two letters, e.g. ``"oe"`` = odd in x, even in y."""
    return "".join("e" if p > 0 else "o" for p in parity)


def parse_parity(name: str):
    if len(name) != 2 or set(name) - {"e", "o"}:
        raise DomainError(f"bad parity name {name!r}")
    return tuple(1 if ch == "e" else -1 for ch in name)


@dataclass(frozen=True)
class ModeLabel:
    """Circle quantum numbers carried along a deformation.

    ``parity = (px, py)`` gives the sign under ``x -> -x`` and ``y -> -y``.
    ``cos(m theta)`` modes have ``(-1**m, +1)``, ``sin(m theta)`` modes
    ``(-(-1)**m, -1)``.
    """

    m: int
    l: int
    parity: tuple = None

    def __post_init__(self):
        if self.m < 0 or self.l < 1:
            raise DomainError(f"invalid mode label m={self.m}, l={self.l}")
        if self.parity is None:
            object.__setattr__(self, "parity", ((-1) ** self.m, 1))
        px, py = self.parity
        expected = (-1) ** self.m if py > 0 else -((-1) ** self.m)
        if px != expected or (self.m == 0 and py < 0):
            raise DomainError(f"parity {self.parity} impossible for m={self.m}")

    @classmethod
    def of(cls, m: int, l: int, sym: str = "cos") -> "ModeLabel":
        if sym == "cos":
            return cls(m, l, ((-1) ** m, 1))
        if sym == "sin":
            return cls(m, l, (-((-1) ** m), -1))
        raise DomainError(f"sym must be 'cos' or 'sin', got {sym!r}")

    @property
    def sym(self) -> str:
        return "cos" if self.parity[1] > 0 else "sin"

    def __str__(self):
        return f"(m={self.m}, l={self.l}, {parity_name(self.parity)})"


@dataclass(frozen=True)
class CavityConfig:
    """Solver settings.

    ``n`` may equal 1 only for the bare Dirichlet billiard; the dielectric
    problem requires ``n > 1``. ``root_tol`` bounds the relative smallest
    singular value ``sigma_min / sigma_max`` accepted as a root.
    """

    n: float = 3.3
    polarization: str = "TM"
    boundary_elements: int = 256
    root_tol: float = 1e-8
    scheme: str = "spectral"
    points_per_wavelength: float = 8.0

    def __post_init__(self):
        if self.n < 1.0:
            raise ConfigError("refractive index must be >= 1")
        if self.polarization != "TM":
            raise ConfigError("only TM polarization is implemented")
        if self.boundary_elements < 16 or self.boundary_elements % 4:
            raise ConfigError("boundary_elements must be >= 16 and divisible by 4")
        if self.scheme not in bem.SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    def min_elements(self, g: EllipseGeometry, kR) -> float:
        """Element count needed for ``points_per_wavelength`` inside the cavity."""
        return self.points_per_wavelength * self.n * abs(np.real(kR)) * g.perimeter / (2 * np.pi * g.R)

    def elements_for(self, g: EllipseGeometry, kR) -> int:
        """Smallest admissible element count that is at least the configured one."""
        need = int(np.ceil(self.min_elements(g, kR) / 4.0)) * 4
        return max(self.boundary_elements, need)


@dataclass
class Resonance:
    """One converged solution with its boundary data on the full boundary.

    ``boundary_normal_derivative`` is the outward normal derivative. The
    boundary data are sampled at the nodes ``t`` of the mesh used for the
    solve.
    """

    kR: complex
    label: Optional[ModeLabel]
    e: float
    kind: str
    parity: tuple
    boundary_values: np.ndarray
    boundary_normal_derivative: np.ndarray
    residual: float
    geometry: EllipseGeometry
    n: float
    t: np.ndarray
    iterations: int = 0

    @property
    def ds(self) -> np.ndarray:
        return self.geometry.speed(self.t) * (2 * np.pi / len(self.t))

    @property
    def s(self) -> np.ndarray:
        return self.geometry.s_of_t(self.t)


# --------------------------------------------------------------------------
# analytic circle solutions


def circle_billiard_k(m: int, l: int, n: float = 1.0) -> float:
    """Dirichlet eigenvalue ``kR = j_{m,l} / n`` of the disk filled with index ``n``."""
    return bessel_zero(m, l) / n


def cavity_matching(k, m: int, n: float):
    """TM matching function of the dielectric disk, and its derivative."""
    k = complex(k)
    nk = n * k
    Jm, Jp, Jpp = bessel_j(m, nk), bessel_j_prime(m, nk), bessel_j_prime(m, nk, 2)
    Hm, Hp, Hpp = hankel1(m, k), hankel1_prime(m, k), hankel1_prime(m, k, 2)
    f = n * Jp * Hm - Jm * Hp
    df = n * n * Jpp * Hm - Jm * Hpp
    scale = abs(n * Jp * Hm) + abs(Jm * Hp)
    return complex(f), complex(df), float(scale)


def radial_index(m: int, nkR: float) -> int:
    """Number of radial intensity maxima of ``J_m(n k r)`` for ``r < R``."""
    x = float(np.real(nkR))
    count = 1 if m == 0 else 0
    for l in range(1, 21):
        if bessel_prime_zero(m, l) < x:
            count += 1
        else:
            break
    return max(count, 1)


def _newton_matching(m, n, k0, maxiter=100, tol=1e-14, max_step=0.05):
    """Damped Newton on the matching condition; returns ``(k, relative residual)``."""
    k = complex(k0)
    trace = []
    for _ in range(maxiter):
        f, df, scale = cavity_matching(k, m, n)
        trace.append(k)
        step = f / df
        if abs(step) > max_step:
            step *= max_step / abs(step)
        k -= step
        if abs(step) < tol * abs(k):
            f, _, scale = cavity_matching(k, m, n)
            return k, abs(f) / scale
    raise NumericalError(
        f"TM matching Newton did not converge for m={m}, n={n}; last iterates {trace[-4:]}")


def circle_cavity_k(m: int, l: int, n: float) -> complex:
    """Complex TM resonance ``kR`` of the dielectric disk with radial order ``l``.

    Newton iteration starts from ``j_{m,l}/n``. TM resonances sit below that
    value (for large ``n`` the matching condition tends to
    ``J_{m-1}(n kR) = 0``), so when the first root has the wrong radial order
    a scan of real seeds below ``j_{m,l}/n`` is used and the root of order
    ``l`` is kept.
    """
    if not n > 1.0:
        raise DomainError("refractive index must exceed 1")
    j = bessel_zero(m, l)

    def ok(k):
        return k.imag < 0 and radial_index(m, n * k) == l

    try:
        k, res = _newton_matching(m, n, j / n - 0.01j)
    except NumericalError:
        k, res = complex(np.nan), np.inf
    if not ok(k):
        found = []
        for x in np.arange(0.05, j + 1.0, 0.1):
            try:
                kk, rr = _newton_matching(m, n, x / n - 0.01j)
            except NumericalError:
                continue
            if ok(kk):
                found.append((abs(kk - j / n), kk, rr))
        if not found:
            raise NumericalError(f"could not isolate circle resonance (m={m}, l={l}) at n={n}")
        _, k, res = min(found, key=lambda item: item[0])
    if res > 1e-10:
        raise NumericalError(f"matching residual {res:.2e} too large for (m={m}, l={l})")
    return k


# --------------------------------------------------------------------------
# boundary-element system


def _check_bc(bc, cfg):
    if bc not in BOUNDARY_CONDITIONS:
        raise DomainError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}")
    if bc == "dielectricTM" and not cfg.n > 1.0:
        raise ConfigError("dielectric cavity needs n > 1")


def _system(mesh: bem.BoundaryMesh, kR: complex, cfg: CavityConfig, bc: str, parity, precond=None):
    """Boundary matrix; ``precond`` (full-to-reduced map) right-multiplies the flux unknowns."""
    rows = mesh.images()[0] if parity is not None else np.arange(mesh.N)

    def reduce(K):
        return bem.fold(K, mesh, parity) if parity is not None else K

    def reduce_flux(K):
        return K @ precond if precond is not None else reduce(K)

    k = complex(kR) / mesh.geometry.R
    if bc == "dirichlet":
        # second-kind equation for d_nu psi; singular exactly at interior Dirichlet eigenvalues
        Dp = bem.adjoint_double_layer(mesh, cfg.n * k, rows, cfg.scheme)
        return reduce(Dp) + 0.5 * np.eye(len(rows))
    S_in, D_in = bem.layer_operators(mesh, cfg.n * k, rows, cfg.scheme)
    S_out, D_out = bem.layer_operators(mesh, k, rows, cfg.scheme)
    eye = np.eye(len(rows))
    scale = cfg.n * k  # unknowns (psi, d_nu psi / (n k)) are of the same size
    return np.block([
        [0.5 * eye - reduce(D_in), scale * reduce_flux(S_in)],
        [0.5 * eye + reduce(D_out), -scale * reduce_flux(S_out)],
    ])


def assemble_bem(g: EllipseGeometry, kR, cfg: CavityConfig, bc: str = "dielectricTM",
                 parity=None, N: Optional[int] = None) -> np.ndarray:
    """Dense boundary-integral matrix whose singular points are the modes.

    With ``parity=(px, py)`` only the quarter boundary enters and the
    symmetry images are folded into the columns. Dielectric unknowns are
    ``psi`` followed by ``d_nu psi / (n k)``; Dirichlet unknowns are
    ``d_nu psi``.
    """
    _check_bc(bc, cfg)
    N = cfg.boundary_elements if N is None else N
    if N < cfg.min_elements(g, kR):
        raise ConfigError(
            f"{N} elements under-resolve kR={kR} (need >= {cfg.min_elements(g, kR):.0f})")
    mesh = bem.make_mesh(g, N)
    return _system(mesh, kR, cfg, bc, parity)


def smallest_singular(M: np.ndarray):
    U, sv, Vh = np.linalg.svd(M)
    return sv[-1] / sv[0], U[:, -1], Vh[-1].conj()


def _muller(f: Callable, x0: complex, dx: complex, tol: float, maxiter: int):
    xs = [x0 - dx, x0 + dx, x0]
    ys = [f(x) for x in xs]
    for it in range(maxiter):
        x0_, x1, x2 = xs[-3:]
        y0, y1, y2 = ys[-3:]
        h1, h2 = x1 - x0_, x2 - x1
        d1, d2 = (y1 - y0) / h1, (y2 - y1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(b * b - 4 * a * y2 + 0j)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        step = -2 * y2 / den if den != 0 else dx
        xn = x2 + step
        xs.append(xn)
        ys.append(f(xn))
        if not np.isfinite(xn):
            break
        if abs(step) < tol * max(abs(xn), 1.0):
            return xn, it + 1, True
    return xs[-1], maxiter, False


def resonance_search(g: EllipseGeometry, cfg: CavityConfig, bc: str, k_seed, parity,
                     label: Optional[ModeLabel] = None, max_shift: Optional[float] = None,
                     N: Optional[int] = None) -> Resonance:
    """Locate the mode of symmetry class ``parity`` nearest to ``k_seed``.

    The singular vectors of the seed matrix define the analytic scalar
    ``f(k) = 1 / (v^H M(k)^-1 u)``, whose zeros are the points where
    ``sigma_min`` vanishes; Muller's method (successive quadratic
    interpolation) drives ``f`` to zero. Closed-billiard roots are projected
    onto the real axis. The final residual is ``sigma_min / sigma_max``.
    """
    _check_bc(bc, cfg)
    parity = tuple(parity)
    N = cfg.elements_for(g, k_seed) if N is None else N
    if N < cfg.min_elements(g, k_seed):
        raise ConfigError(f"{N} elements under-resolve kR={k_seed}")
    mesh = bem.make_mesh(g, N)
    # The single-layer block is of the first kind: its singular values fall off like
    # n k / |m| in the boundary Fourier index and would swamp the resonance at low
    # k. A fixed Fourier multiplier on the flux unknowns flattens that tail.
    m0 = max(1.0, cfg.n * abs(complex(k_seed)) / g.R)

    def precond_for(par):
        return bem.flux_preconditioner(mesh, par, m0) if bc == "dielectricTM" else None

    P = precond_for(parity)

    def M(k):
        return _system(mesh, k, cfg, bc, parity, P)

    k = complex(k_seed)
    total_it = 0
    for attempt in range(3):
        _, u, v = smallest_singular(M(k))
        uh = u.conj()

        def f(kk):
            y = np.linalg.solve(M(kk), v)
            return 1.0 / (uh @ y)

        dx = 1e-4 * max(1.0, abs(k)) * (1 + 1j)
        k_new, it, ok = _muller(f, k, dx, 1e-13, 40)
        total_it += it
        if not np.isfinite(k_new):
            raise NumericalError(f"root search diverged from seed {k_seed}")
        k = k_new
        if ok:
            break
    if max_shift is not None and abs(k - complex(k_seed)) > max_shift:
        raise NumericalError(
            f"root {k:.6f} left the capture radius {max_shift:.3g} of seed {k_seed}")
    if abs(k) < 1e-8 * max(1.0, abs(complex(k_seed))):
        raise NumericalError(f"root search collapsed onto the trivial point k = 0 from seed {k_seed}")
    kind = "closed" if bc == "dirichlet" else "open"
    if kind == "closed":
        k = complex(k.real, 0.0)
    residual, _, vec = smallest_singular(M(k))
    if residual > cfg.root_tol:
        for other in ALL_PARITIES:
            if other != parity and smallest_singular(_system(mesh, k, cfg, bc, other, precond_for(other)))[0] <= cfg.root_tol:
                raise ParityMismatchError(
                    f"kR={k:.8f} is a {parity_name(other)} mode, not {parity_name(parity)}")
        raise NotAResonanceError(
            f"sigma_min/sigma_max = {residual:.2e} > root_tol at kR={k:.8f}")
    if kind == "open" and not k.imag < 0:
        raise NumericalError(f"open-cavity root kR={k} is not decaying")

    nq = N // 4
    if kind == "closed":
        dpsi = bem.unfold(vec, mesh, parity)
        psi = np.zeros_like(dpsi)
        norm = dpsi[np.argmax(np.abs(dpsi))]
    else:
        psi = bem.unfold(vec[:nq], mesh, parity)
        dpsi = (P @ vec[nq:]) * (cfg.n * k / g.R)
        norm = psi[np.argmax(np.abs(psi))]
    return Resonance(
        kR=k, label=label, e=g.e, kind=kind, parity=parity,
        boundary_values=psi / norm, boundary_normal_derivative=dpsi / norm,
        residual=float(residual), geometry=g, n=cfg.n, t=mesh.t, iterations=total_it,
    )


def quality_factor(r) -> float:
    """``Q = E / (2 gamma)`` with ``E = Re kR`` and ``gamma = -2 Im kR``.

    Accepts a :class:`Resonance` or a bare complex ``kR``.
    """
    if isinstance(r, Resonance):
        if r.kind != "open":
            raise DomainError("closed modes have infinite Q")
        kR = r.kR
    else:
        kR = complex(r)
        if kR.imag >= 0:
            raise DomainError("quality factor needs Im kR < 0")
    gamma = -2.0 * kR.imag
    return kR.real / (2.0 * gamma)


# --------------------------------------------------------------------------
# field reconstruction


@dataclass
class FieldMap:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    inside: np.ndarray
    accurate: np.ndarray = field(repr=False)


def _potential(res: Resonance, pts: np.ndarray, kappa: complex, sign: float):
    g = res.geometry
    y = g.position(res.t)
    nu = g.outward_normal(res.t)
    ds = res.ds
    out = np.empty(len(pts), dtype=complex)
    for lo in range(0, len(pts), 2048):
        p = pts[lo:lo + 2048]
        diff = p[:, None, :] - y[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        G = -0.25j * special.hankel1(0, kappa * r)
        proj = -np.einsum("ijk,jk->ij", diff, nu) / r  # (y - x).nu / r
        dG = 0.25j * kappa * special.hankel1(1, kappa * r) * proj
        out[lo:lo + 2048] = sign * ((dG * res.boundary_values - G * res.boundary_normal_derivative) @ ds)
    return out


def field_map(res: Resonance, x, y) -> FieldMap:
    """Evaluate the boundary-integral representation on the grid ``x`` by ``y``.

    Interior points use the interior wavenumber ``n k``; exterior points use
    the outgoing kernel with ``k`` (closed modes vanish outside). Points closer
    to the boundary than one element length trigger a warning and are marked
    in ``accurate``.
    """
    g = res.geometry
    X, Y = np.meshgrid(np.asarray(x, float), np.asarray(y, float))
    pts = np.column_stack([X.ravel(), Y.ravel()])
    rho = (pts[:, 0] / g.a) ** 2 + (pts[:, 1] / g.b) ** 2
    inside = rho < 1.0
    h_max = float(np.max(res.ds))
    bnd = g.position(res.t)
    dist = np.min(np.hypot(pts[:, None, 0] - bnd[None, :, 0], pts[:, None, 1] - bnd[None, :, 1]), axis=1)
    accurate = dist > h_max
    if not np.all(accurate):
        warnings.warn(f"{np.count_nonzero(~accurate)} points lie within one element of the boundary; "
                      "accuracy downgraded there", RuntimeWarning, stacklevel=2)
    k = complex(res.kR) / g.R
    vals = np.zeros(len(pts), dtype=complex)
    if np.any(inside):
        vals[inside] = _potential(res, pts[inside], res.n * k, 1.0)
    if res.kind == "open" and np.any(~inside):
        vals[~inside] = _potential(res, pts[~inside], k, -1.0)
    shape = X.shape
    return FieldMap(X, Y, vals.reshape(shape), inside.reshape(shape), accurate.reshape(shape))


def solve_circle_mode(label: ModeLabel, kind: str, cfg: CavityConfig, R: float = 1.0) -> Resonance:
    """BEM solve at ``e = 0`` seeded by the analytic circle value."""
    g = make_ellipse(0.0, R)
    if kind == "closed":
        seed, bc = circle_billiard_k(label.m, label.l, cfg.n), "dirichlet"
    else:
        seed, bc = circle_cavity_k(label.m, label.l, cfg.n), "dielectricTM"
    return resonance_search(g, cfg, bc, seed, label.parity, label=label)
