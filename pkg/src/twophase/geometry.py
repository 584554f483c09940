"""Surface catalog: signed distance, projection, curvatures, symmetric functions.

Each surface is the boundary of a reference domain Omega and carries

  * a nearest-point projection z(x) with distance delta(x), valid in a
    tubular neighborhood of half-width delta0 where the nearest point is
    unique,
  * principal curvatures kappa_j at surface points, taken with respect to
    the normal pointing INTO Omega (so a sphere bounding a ball has
    kappa_j = +1/R), and
  * the elementary symmetric functions H_i of the kappa_j.

The declared delta0 always satisfies max_j |kappa_j| < 1/(2 delta0) on the
test patch.  With these conventions the distance function obeys

    |grad delta| = 1,
    Lap delta = -sum_j kappa_j / (1 - kappa_j delta)   inside Omega,
    Lap delta = +sum_j kappa_j / (1 + kappa_j delta)   outside,

with kappa_j evaluated at z(x), and the product expansion

    prod_j (1 - kappa_j delta) = 1 + sum_i (-1)^i H_i delta^i.

Which side is Omega, per variant: Hyperplane {x1 > 0}; Sphere and Cylinder
the interior; Catenoid the axis-containing region; Helicoid the region
{x2 cos x3 - x1 sin x3 > 0}; Graph the region above the graph.  Surfaces are
immutable and projection is a pure function, so batch queries parallelize
freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (AmbiguousProjection, InvalidArgument, OnSurface,
                     OutsideTubularNeighborhood, UnsupportedGeometry)

_ON_SURFACE_TOL = 1e-13


@dataclass(frozen=True)
class Projection:
    """Nearest-point data: z on the surface, distance, outward normal, side.

    side is -1 inside Omega, +1 outside, 0 on the surface.  The query point
    is reconstructed as x = z + delta * (side-dependent direction); in terms
    of the distance gradient, z = x - delta * grad(delta)(x).
    """

    z: np.ndarray
    delta: float
    nu: np.ndarray          # outward unit normal to Omega at z
    side: int

    @property
    def grad_delta(self) -> np.ndarray:
        """Unit gradient of the distance at the query point (away from surface)."""
        return -self.nu if self.side < 0 else self.nu


class Surface:
    """Common interface; concrete variants implement the batch kernels.

    Two radii are declared per variant.  `delta0` is the barrier collar
    half-width and always satisfies max|kappa_j| < 1/(2 delta0); it is what
    the asymptotic machinery uses.  `projection_radius` bounds the region
    where the nearest surface point is guaranteed unique, which for the
    closed-form radial variants is much larger than the collar (a ball
    interior has a unique nearest boundary point everywhere but the
    center).  `project` raises once `projection_radius` is exceeded.
    """

    N: int
    delta0: float
    is_radial: bool = False

    @property
    def projection_radius(self) -> float:
        return 1.5 * self.delta0

    # -- batch kernels ----------------------------------------------------
    def project_batch(self, X: np.ndarray):
        """Return (Z, delta, side) for an (m, N) array of query points.

        No tube check is applied; callers that need the guarantee use
        `project`.
        """
        raise NotImplementedError

    def kappas(self, z: np.ndarray) -> np.ndarray:
        """Principal curvatures at a surface point, inward convention."""
        raise NotImplementedError

    def outward_normal(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- scalar convenience ------------------------------------------------
    def project(self, x) -> Projection:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.N,):
            raise InvalidArgument(f"expected a point in R^{self.N}, got shape {x.shape}")
        Z, delta, side = self.project_batch(x[None, :])
        d = float(delta[0])
        if d >= self.projection_radius:
            raise OutsideTubularNeighborhood(
                f"delta(x) = {d:.6g} >= projection radius = "
                f"{self.projection_radius:.6g}")
        z = Z[0]
        s = int(side[0]) if d > _ON_SURFACE_TOL else 0
        return Projection(z=z, delta=d, nu=self.outward_normal(z), side=s)

    def h_funcs(self, z) -> np.ndarray:
        """Elementary symmetric functions H_1..H_{N-1} at a surface point."""
        return elementary_symmetric(self.kappas(np.asarray(z, dtype=float)))


# ---------------------------------------------------------------------------
# flat and radial variants (closed-form projections)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hyperplane(Surface):
    """The hyperplane {x1 = 0} bounding Omega = {x1 > 0}."""

    N: int = 3
    delta0: float = 1.0
    is_radial: bool = True

    @property
    def projection_radius(self) -> float:
        return math.inf

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        Z = X.copy()
        Z[:, 0] = 0.0
        delta = np.abs(X[:, 0])
        side = np.where(X[:, 0] > 0.0, -1, np.where(X[:, 0] < 0.0, 1, 0))
        return Z, delta, side

    def kappas(self, z):
        return np.zeros(self.N - 1)

    def outward_normal(self, z):
        nu = np.zeros(self.N)
        nu[0] = -1.0
        return nu


@dataclass(frozen=True)
class Sphere(Surface):
    """Sphere of radius R bounding the open ball Omega = {|x| < R}."""

    R: float = 1.0
    N: int = 3
    is_radial: bool = True

    def __post_init__(self):
        if not (self.R > 0.0 and self.N >= 2):
            raise InvalidArgument("Sphere needs R > 0 and N >= 2")

    @property
    def delta0(self) -> float:  # max|kappa| = 1/R < 1/(2 delta0)
        return 0.45 * self.R

    @property
    def projection_radius(self) -> float:
        return math.inf  # unique everywhere but the exact center

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        r = np.linalg.norm(X, axis=1)
        if np.any(r < 1e-12 * self.R):
            raise AmbiguousProjection("the center is equidistant from the whole sphere")
        Z = X * (self.R / r)[:, None]
        delta = np.abs(self.R - r)
        side = np.where(r < self.R, -1, np.where(r > self.R, 1, 0))
        return Z, delta, side

    def kappas(self, z):
        return np.full(self.N - 1, 1.0 / self.R)

    def outward_normal(self, z):
        z = np.asarray(z, dtype=float)
        return z / np.linalg.norm(z)


@dataclass(frozen=True)
class Cylinder(Surface):
    """Cylinder {x1^2 + x2^2 = R^2} bounding its interior, axis along x3.."""

    R: float = 1.0
    N: int = 3
    is_radial: bool = True

    def __post_init__(self):
        if not (self.R > 0.0 and self.N >= 3):
            raise InvalidArgument("Cylinder needs R > 0 and N >= 3")

    @property
    def delta0(self) -> float:
        return 0.45 * self.R

    @property
    def projection_radius(self) -> float:
        return math.inf  # unique everywhere but the axis

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        rho = np.hypot(X[:, 0], X[:, 1])
        if np.any(rho < 1e-12 * self.R):
            raise AmbiguousProjection("axis points are equidistant from the whole cylinder")
        Z = X.copy()
        scale = self.R / rho
        Z[:, 0] = X[:, 0] * scale
        Z[:, 1] = X[:, 1] * scale
        delta = np.abs(self.R - rho)
        side = np.where(rho < self.R, -1, np.where(rho > self.R, 1, 0))
        return Z, delta, side

    def kappas(self, z):
        kap = np.zeros(self.N - 1)
        kap[0] = 1.0 / self.R
        return kap

    def outward_normal(self, z):
        z = np.asarray(z, dtype=float)
        nu = np.zeros(self.N)
        rho = math.hypot(z[0], z[1])
        nu[0] = z[0] / rho
        nu[1] = z[1] / rho
        return nu


# ---------------------------------------------------------------------------
# minimal variants (parametric Newton projections)
# ---------------------------------------------------------------------------

def _newton_1d(fprime, fsecond, s0, n_iter=60, clip=0.25):
    """Damped vector Newton for stationary points of a 1d objective."""
    s = np.asarray(s0, dtype=float).copy()
    for _ in range(n_iter):
        g = fprime(s)
        h = fsecond(s)
        h = np.where(h > 1e-9, h, 1e-9)  # objective is convex near the minimum
        step = np.clip(-g / h, -clip, clip)
        s = s + step
        if np.max(np.abs(step)) < 1e-15:
            break
    return s


@dataclass(frozen=True)
class Helicoid(Surface):
    """The pitch-1 helicoid (rho cos s, rho sin s, s), a minimal surface.

    Omega = {x2 cos x3 - x1 sin x3 > 0}.  Principal curvatures at parameter
    rho are +-1/(1 + rho^2); the second symmetric function is -1/(1+rho^2)^2
    and the mean curvature vanishes identically.
    """

    N: int = 3
    delta0: float = 0.40

    # surface trace in the slice x3 = 0 is the x1-axis; the point at
    # parameter q is (q, 0, 0) and every surface point is a screw image of it
    def point_at(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(q.shape + (3,))
        out[..., 0] = q
        return out

    def inward_normal_at(self, q):
        q = np.asarray(q, dtype=float)
        den = np.sqrt(1.0 + q * q)
        out = np.zeros(q.shape + (3,))
        out[..., 1] = 1.0 / den
        out[..., 2] = -q / den
        return out

    def kappas_at(self, q):
        a = 1.0 / (1.0 + np.asarray(q, dtype=float) ** 2)
        return np.stack([a, -a], axis=-1)

    def ray_param(self, Z):
        Z = np.asarray(Z, dtype=float)
        return Z[..., 0] * np.cos(Z[..., 2]) + Z[..., 1] * np.sin(Z[..., 2])

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]

        def rho_of(s):
            return x1 * np.cos(s) + x2 * np.sin(s)

        def bb(s):
            return -x1 * np.sin(s) + x2 * np.cos(s)

        def dist2(s):
            return x1 * x1 + x2 * x2 - rho_of(s) ** 2 + (x3 - s) ** 2

        # the minimizer satisfies |s - x3| <= delta(x)
        window = self.projection_radius + 0.05
        offsets = np.linspace(-window, window, 25)
        S = x3[:, None] + offsets[None, :]
        rr = x1[:, None] * np.cos(S) + x2[:, None] * np.sin(S)
        vals = (x1 * x1 + x2 * x2)[:, None] - rr ** 2 + (x3[:, None] - S) ** 2
        s = S[np.arange(len(X)), np.argmin(vals, axis=1)]

        def grad(s):
            return -2.0 * rho_of(s) * bb(s) - 2.0 * (x3 - s)

        def hess(s):
            return 2.0 * (rho_of(s) ** 2 - bb(s) ** 2) + 2.0

        s = _newton_1d(grad, hess, s)
        rho = rho_of(s)
        Z = np.stack([rho * np.cos(s), rho * np.sin(s), s], axis=1)
        delta = np.sqrt(np.maximum(dist2(s), 0.0))
        f = x2 * np.cos(x3) - x1 * np.sin(x3)
        side = np.where(f > 0.0, -1, np.where(f < 0.0, 1, 0))
        return Z, delta, side

    def kappas(self, z):
        rho = float(self.ray_param(np.asarray(z, dtype=float)))
        a = 1.0 / (1.0 + rho * rho)
        return np.array([a, -a])

    def outward_normal(self, z):
        z = np.asarray(z, dtype=float)
        s = z[2]
        rho = self.ray_param(z)
        n_in = np.array([-math.sin(s), math.cos(s), -rho]) / math.sqrt(1.0 + rho * rho)
        return -n_in


@dataclass(frozen=True)
class Catenoid(Surface):
    """Catenoid of waist radius c, the surface of revolution r = c cosh(z/c).

    Omega is the axis-containing region {r < c cosh(x3/c)}.  With respect to
    the inward (toward-axis) normal the principal curvatures at profile
    height v are -+ sech^2(v/c)/c (meridian negative, parallel positive);
    the surface is minimal and H_2 = -sech^4(v/c)/c^2, equal to -1/c^2 at
    the waist.
    """

    c: float = 1.0
    N: int = 3

    def __post_init__(self):
        if not (self.c > 0.0):
            raise InvalidArgument("Catenoid needs c > 0")

    @property
    def delta0(self) -> float:  # max|kappa| = 1/c at the waist
        return 0.40 * self.c

    def _g(self, v):
        return self.c * np.cosh(np.asarray(v, dtype=float) / self.c)

    def _gp(self, v):
        return np.sinh(np.asarray(v, dtype=float) / self.c)

    def _gpp(self, v):
        return np.cosh(np.asarray(v, dtype=float) / self.c) / self.c

    def point_at(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(q.shape + (3,))
        out[..., 0] = self._g(q)
        out[..., 2] = q
        return out

    def inward_normal_at(self, q):
        q = np.asarray(q, dtype=float)
        gp = self._gp(q)
        den = np.sqrt(1.0 + gp * gp)
        out = np.zeros(q.shape + (3,))
        out[..., 0] = -1.0 / den
        out[..., 2] = gp / den
        return out

    def kappas_at(self, q):
        q = np.asarray(q, dtype=float)
        g, gp, gpp = self._g(q), self._gp(q), self._gpp(q)
        w2 = 1.0 + gp * gp
        k_mer = -gpp / w2 ** 1.5
        k_par = 1.0 / (g * np.sqrt(w2))
        return np.stack([k_mer, k_par], axis=-1)

    def ray_param(self, Z):
        return np.asarray(Z, dtype=float)[..., 2]

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        r = np.hypot(X[:, 0], X[:, 1])
        zeta = X[:, 2]

        def dist2(v):
            return (r - self._g(v)) ** 2 + (zeta - v) ** 2

        window = self.projection_radius + 0.05 * self.c
        offsets = np.linspace(-window, window, 25)
        V = zeta[:, None] + offsets[None, :]
        vals = (r[:, None] - self._g(V)) ** 2 + (zeta[:, None] - V) ** 2
        v = V[np.arange(len(X)), np.argmin(vals, axis=1)]

        def grad(v):
            return -2.0 * self._gp(v) * (r - self._g(v)) - 2.0 * (zeta - v)

        def hess(v):
            return 2.0 * self._gp(v) ** 2 - 2.0 * self._gpp(v) * (r - self._g(v)) + 2.0

        v = _newton_1d(grad, hess, v)
        g = self._g(v)
        theta = np.arctan2(X[:, 1], X[:, 0])
        Z = np.stack([g * np.cos(theta), g * np.sin(theta), v], axis=1)
        delta = np.sqrt(np.maximum(dist2(v), 0.0))
        side = np.where(r < self._g(zeta), -1, np.where(r > self._g(zeta), 1, 0))
        return Z, delta, side

    def kappas(self, z):
        return np.asarray(self.kappas_at(float(np.asarray(z)[2])), dtype=float)

    def outward_normal(self, z):
        z = np.asarray(z, dtype=float)
        v = z[2]
        gp = float(self._gp(v))
        den = math.sqrt(1.0 + gp * gp)
        theta = math.atan2(z[1], z[0])
        # inward is (-1, gp)/den in the (radial, vertical) plane
        return np.array([math.cos(theta) / den, math.sin(theta) / den, -gp / den])


# ---------------------------------------------------------------------------
# graph variant
# ---------------------------------------------------------------------------

class Graph(Surface):
    """Surface x_N = phi(y), y in R^{N-1}, bounding Omega = {x_N > phi(y)}.

    phi must be C^6 with bounded derivatives on the declared box; gradient
    and Hessian callables may be supplied, otherwise central differences
    with step 1e-5 are used.  Projection runs damped Newton seeded by a
    coarse grid search on the box and raises AmbiguousProjection when two
    distinct minimizers tie.
    """

    def __init__(self, phi: Callable, box, N: int = 3,
                 grad: Optional[Callable] = None, hess: Optional[Callable] = None,
                 seed_resolution: int = 41):
        self.N = int(N)
        self.phi = phi
        self._grad = grad
        self._hess = hess
        self.box = [(float(lo), float(hi)) for lo, hi in box]
        if len(self.box) != self.N - 1:
            raise InvalidArgument("box must have N-1 coordinate ranges")
        self.seed_resolution = int(seed_resolution)
        self.delta0 = self._admissible_delta0()

    def _phi(self, y):
        return float(self.phi(np.asarray(y, dtype=float)))

    def grad_phi(self, y):
        y = np.asarray(y, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(y), dtype=float)
        h = 1e-5
        g = np.empty(len(y))
        for i in range(len(y)):
            e = np.zeros(len(y))
            e[i] = h
            g[i] = (self._phi(y + e) - self._phi(y - e)) / (2 * h)
        return g

    def hess_phi(self, y):
        y = np.asarray(y, dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(y), dtype=float)
        h = 1e-4
        n = len(y)
        H = np.empty((n, n))
        f0 = self._phi(y)
        for i in range(n):
            ei = np.zeros(n); ei[i] = h
            H[i, i] = (self._phi(y + ei) - 2 * f0 + self._phi(y - ei)) / h**2
            for j in range(i + 1, n):
                ej = np.zeros(n); ej[j] = h
                H[i, j] = H[j, i] = (
                    self._phi(y + ei + ej) - self._phi(y + ei - ej)
                    - self._phi(y - ei + ej) + self._phi(y - ei - ej)) / (4 * h**2)
        return H

    def _admissible_delta0(self) -> float:
        grids = [np.linspace(lo, hi, 15) for lo, hi in self.box]
        mesh = np.meshgrid(*grids, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        kmax = max(float(np.max(np.abs(self.kappas(self._lift(y))))) for y in pts)
        return 0.45 / kmax if kmax > 0 else math.inf

    def _lift(self, y):
        return np.concatenate([y, [self._phi(y)]])

    def _seed_grid(self):
        grids = [np.linspace(lo, hi, self.seed_resolution) for lo, hi in self.box]
        mesh = np.meshgrid(*grids, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def _polish(self, x, y0):
        xp, xn = x[:-1], x[-1]
        y = np.asarray(y0, dtype=float).copy()
        for _ in range(80):
            g = self.grad_phi(y)
            r = self._phi(y) - xn
            grad = (y - xp) + r * g
            H = np.eye(len(y)) + np.outer(g, g) + r * self.hess_phi(y)
            try:
                step = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                step = -grad
            nrm = np.linalg.norm(step)
            if nrm > 0.25:
                step *= 0.25 / nrm
            y = y + step
            if nrm < 1e-14:
                break
        return y

    def project_batch(self, X):
        X = np.asarray(X, dtype=float)
        seeds = self._seed_grid()
        Z = np.empty_like(X)
        delta = np.empty(len(X))
        side = np.empty(len(X), dtype=int)
        for i, x in enumerate(X):
            d2 = np.sum((seeds - x[:-1]) ** 2, axis=1) + \
                np.array([(self._phi(y) - x[-1]) ** 2 for y in seeds])
            order = np.argsort(d2)
            best_y, best_d = None, math.inf
            candidates = []
            for idx in order[:6]:
                y = self._polish(x, seeds[idx])
                z = self._lift(y)
                d = float(np.linalg.norm(x - z))
                candidates.append((d, y, z))
                if d < best_d:
                    best_d, best_y = d, y
            scale = 1.0 + best_d
            for d, y, _ in candidates:
                if abs(d - best_d) < 1e-8 * scale and np.linalg.norm(y - best_y) > 1e-4:
                    raise AmbiguousProjection(
                        f"two minimizers at distance {best_d:.6g} for point {x}")
            z = self._lift(best_y)
            Z[i] = z
            delta[i] = best_d
            gap = x[-1] - self._phi(x[:-1])
            side[i] = -1 if gap > 0 else (1 if gap < 0 else 0)
        return Z, delta, side

    def kappas(self, z):
        z = np.asarray(z, dtype=float)
        y = z[:-1]
        g = self.grad_phi(y)
        H = self.hess_phi(y)
        w = math.sqrt(1.0 + float(g @ g))
        metric = np.eye(len(y)) + np.outer(g, g)
        # generalized symmetric eigenproblem for the shape operator
        from scipy.linalg import eigh
        vals = eigh(H / w, metric, eigvals_only=True)
        return np.sort(vals)[::-1]

    def outward_normal(self, z):
        z = np.asarray(z, dtype=float)
        g = self.grad_phi(z[:-1])
        w = math.sqrt(1.0 + float(g @ g))
        return np.concatenate([g, [-1.0]]) / w


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def project(surface: Surface, x) -> Projection:
    """Nearest-point projection with the tubular-neighborhood guarantee."""
    return surface.project(x)


def laplacian_of_distance(surface: Surface, x) -> float:
    """Laplacian of the distance function at a tube point off the surface.

    Inside Omega this is -sum kappa_j / (1 - kappa_j delta); outside the
    sign of both the sum and the delta term flips.  On the surface only the
    side limits exist, so a query at delta = 0 raises OnSurface.
    """
    pr = surface.project(x)
    if pr.side == 0:
        raise OnSurface("Lap(delta) on the surface is defined only as a side limit")
    kap = surface.kappas(pr.z)
    if pr.side < 0:
        return float(-np.sum(kap / (1.0 - kap * pr.delta)))
    return float(np.sum(kap / (1.0 + kap * pr.delta)))


def elementary_symmetric(kappas) -> np.ndarray:
    """Elementary symmetric polynomials H_1..H_n of the given curvatures.

    Computed by the stable Vieta recurrence (building the coefficients of
    prod_j (x + kappa_j) one root at a time).
    """
    kappas = np.asarray(kappas, dtype=float)
    e = np.zeros(len(kappas) + 1)
    e[0] = 1.0
    for j, kap in enumerate(kappas):
        upper = j + 1
        e[1:upper + 1] = e[1:upper + 1] + kap * e[0:upper]
    return e[1:]


def curvature_product_expansion(surface: Surface, x) -> tuple[float, float]:
    """Evaluate both sides of prod(1 - kappa_j delta) = 1 + sum (-1)^i H_i delta^i."""
    pr = surface.project(x)
    kap = surface.kappas(pr.z)
    lhs = float(np.prod(1.0 - kap * pr.delta))
    H = elementary_symmetric(kap)
    i = np.arange(1, len(H) + 1)
    rhs = 1.0 + float(np.sum((-1.0) ** i * H * pr.delta ** i))
    return lhs, rhs


def tangential_gradient_check(surface: Surface, x, i: int, h: float = 1e-4) -> float:
    """|grad(delta) . grad(H_i o z)| by central differences; zero in exact arithmetic.

    The composite field H_i(z(x)) is constant along normal rays, so its
    gradient is tangential and orthogonal to grad(delta).  The returned
    residual is O(h^2) for smooth variants.
    """
    x = np.asarray(x, dtype=float)
    pr = surface.project(x)
    e = pr.grad_delta

    def field(p):
        Z, _, _ = surface.project_batch(p[None, :])
        return surface.h_funcs(Z[0])[i - 1]

    grad = np.empty(surface.N)
    for axis in range(surface.N):
        step = np.zeros(surface.N)
        step[axis] = h
        grad[axis] = (field(x + step) - field(x - step)) / (2.0 * h)
    return abs(float(e @ grad))
