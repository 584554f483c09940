"""Barrier coefficients and sub/supersolutions for the transformed problem.

The Laplace-Stieltjes transform w(x, lambda) of the two-phase Cauchy
solution satisfies sigma Lap(w) = lambda w on each side of the interface
with w = k on the interface itself.  For large lambda, w is approximated in
the collar by

    f_n(x) = b exp(-sqrt(lambda/sigma) delta(x))
             [ A_0 + sum_{j=1}^{n-1} (sqrt(sigma/lambda))^j A_j
               + (sqrt(sigma/lambda))^n A_{n,+-} ],

where b is the interface value carried by the decaying function on that
side (k inside, 1-k outside for 1-w), A_0 = prod_j (1 - kappa_j delta)^(-1/2),
and the higher coefficients solve the weighted line-integral recursion

    A_j(x)      = int_0^delta [Lap A_{j-1}(x(tau)) / 2] W(tau, delta) dtau,
    A_{n,+-}(x) = int_0^delta [Lap A_{n-1}(x(tau)) / 2 +- 1] W(tau, delta) dtau,

along the normal ray x(tau) through x, with weight
W(tau, delta) = exp(-1/2 int_tau^delta Lap(delta)).  Because Lap(delta) is an
explicit rational function of the footpoint curvatures, the weight collapses
in closed form to A_0(delta)/A_0(tau); no nested quadrature is needed.

The coefficients obey, with d/dtau the derivative along the ray,

    dA_0/dtau      = -1/2 Lap(delta) A_0,
    dA_j/dtau      = -1/2 Lap(delta) A_j + 1/2 Lap A_{j-1},
    dA_{n,+-}/dtau = -1/2 Lap(delta) A_{n,+-} + 1/2 Lap A_{n-1} +- 1,

and the barriers satisfy the exact residual identity

    sigma Lap f_{n,+-} - lambda f_{n,+-}
        = b sigma q^{n-1} e^{-mu delta} (-+ 2 + q Lap A_{n,+-}),

with mu = sqrt(lambda/sigma) and q = 1/mu; for lambda beyond a calibrated
threshold the right side has a strict sign, which is what makes
w_{n,+-} = f_{n,+-} +- psi e^{-eta_n sqrt(lambda)} genuine super/subsolutions.

Implementation notes.  On radial surfaces every coefficient is a function
of the distance alone and is tabulated as a 1d quintic spline.  The
helicoid and catenoid carry a one-parameter symmetry (screw motion,
rotation), so their coefficient fields reduce to two variables: the
footpoint parameter q and the signed distance tau; they are tabulated on a
(q, tau) grid and interpolated with quintic bivariate splines.  Laplacians
off radial symmetry are formed by central differences over the ray bundle
through the Cartesian stencil of a point (each stencil point is projected
onto its own normal ray).  Ray integrals use composite 64-node
Gauss-Legendre segments.  Tables are immutable once built and rays are
independent, so everything parallelizes across rays and lambda values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline, RectBivariateSpline

from .errors import (DegenerateTube, InvalidArgument, ThresholdNotFound,
                     UnsupportedGeometry)
from .geometry import Surface, elementary_symmetric
from .medium import TwoPhaseMedium

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)

#: default transverse finite-difference step, as a fraction of delta0
FD_STEP_FRACTION = 1e-3


def _cumulative_gauss_legendre(values: np.ndarray, taus: np.ndarray,
                               zero_index: int) -> np.ndarray:
    """Cumulative integral of a sampled integrand from taus[zero_index].

    The integrand samples are interpolated by a quintic spline and each
    grid segment is integrated with a 64-node Gauss-Legendre rule (exact
    for the spline), then accumulated.
    """
    spline = InterpolatedUnivariateSpline(taus, values, k=5)
    mid = 0.5 * (taus[1:] + taus[:-1])
    half = 0.5 * np.diff(taus)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    segs = spline(pts.ravel()).reshape(pts.shape) @ _GL_WEIGHTS * half
    out = np.empty_like(taus)
    out[zero_index] = 0.0
    out[zero_index + 1:] = np.cumsum(segs[zero_index:])
    out[:zero_index] = -np.cumsum(segs[:zero_index][::-1])[::-1]
    return out


class CoefficientEngine:
    """Coefficient fields A_j, A_{n,+-} on one side of a surface's collar.

    side = -1 builds the fields on the Omega side (conductivity sigma_s),
    side = +1 on the complement (sigma_m).  The engine is geometry only:
    nothing here depends on the conductivities or on lambda.  Fields are
    evaluated at arbitrary collar points through the surface projection,
    using the signed distance so that evaluation is smooth across the
    surface (finite-difference stencils may dip to the other side).
    """

    def __init__(self, surface: Surface, side: int, *,
                 table_order: Optional[int] = None,
                 delta0: Optional[float] = None, n_tau: int = 121,
                 n_q: int = 221, q_range: Optional[tuple] = None):
        if side not in (-1, +1):
            raise InvalidArgument("side must be -1 (inside) or +1 (outside)")
        self.surface = surface
        self.side = side
        if table_order is None:
            table_order = 4 if surface.is_radial else 2
        self.table_order = int(table_order)
        d0 = float(delta0) if delta0 is not None else surface.delta0
        if not math.isfinite(d0):
            d0 = 1.0
        self.delta0 = d0
        self.fd_step = FD_STEP_FRACTION * d0
        # table construction uses a larger stencil: the integrand is splined
        # and integrated, so roundoff noise (eps/h^2) matters more than the
        # O(h^2) truncation it trades against
        self._build_step = 8.0 * self.fd_step

        # padded tau grid, uniform, containing 0 exactly; each table order is
        # built on a grid trimmed by two cells per level so that no stencil
        # ever reaches the previous level's end cells (edge stencils and
        # end-of-spline interpolation would pollute the next table)
        h = d0 / (n_tau - 1)
        pad = 4 + 2 * self.table_order
        self._pad = pad
        self._zero_index = pad
        self.taus = h * np.arange(-pad, n_tau + pad)

        if surface.is_radial:
            kap = surface.kappas(self._any_surface_point())
            self._kap_const = -kap if side == +1 else kap
            self._build_radial_tables()
        else:
            if not hasattr(surface, "point_at"):
                raise UnsupportedGeometry(
                    "barrier coefficients need a ray parametrization; only "
                    "the catalog surfaces provide one")
            if q_range is None:
                scale = getattr(surface, "c", 1.0)
                q_range = (-0.8 * scale, 0.8 * scale)
            hq = (q_range[1] - q_range[0]) / (n_q - 1)
            padq = pad * max(hq, 2 * self._build_step)
            self.q_grid = np.linspace(q_range[0] - padq, q_range[1] + padq,
                                      n_q + 2 * pad)
            self._build_table_fields()

    # ------------------------------------------------------------------
    # curvature helpers (side-adjusted: the collar on this side sees kappa
    # with the sign that makes the product factors 1 - kappa tau)
    # ------------------------------------------------------------------
    def _any_surface_point(self):
        z = np.zeros(self.surface.N)
        if hasattr(self.surface, "R"):
            z[0] = self.surface.R
        return z

    def _kappas_q(self, q):
        kap = np.asarray(self.surface.kappas_at(np.asarray(q, dtype=float)))
        return -kap if self.side == +1 else kap

    def boundary_mean_term(self, q=None) -> float:
        """Lap(signed distance) at the surface: -sum of side-adjusted kappas."""
        kap = self._kap_const if self.surface.is_radial else self._kappas_q(q)
        return float(-np.sum(kap))

    # ------------------------------------------------------------------
    # signed collar coordinates
    # ------------------------------------------------------------------
    def signed_coords(self, X: np.ndarray):
        """(q, tau) for a batch of points; tau > 0 on this engine's side."""
        Z, delta, side_pt = self.surface.project_batch(X)
        tau = np.where(side_pt == self.side, delta, -delta)
        tau = np.where(side_pt == 0, 0.0, tau)
        if self.surface.is_radial:
            q = np.zeros(len(X))
        else:
            q = self.surface.ray_param(Z)
        return q, tau, Z, delta

    def lap_signed_distance(self, X: np.ndarray) -> np.ndarray:
        """Laplacian of the signed distance (positive side = engine side)."""
        q, tau, _, _ = self.signed_coords(np.atleast_2d(np.asarray(X, dtype=float)))
        kap = (np.broadcast_to(self._kap_const, (len(tau), len(self._kap_const)))
               if self.surface.is_radial else self._kappas_q(q))
        return -np.sum(kap / (1.0 - kap * tau[:, None]), axis=1)

    # ------------------------------------------------------------------
    # ray construction (non-radial surfaces root their rays at point_at(q))
    # ------------------------------------------------------------------
    def ray_points(self, q: float, taus) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        if self.surface.is_radial:
            z = self._any_surface_point()
            nu_in = -self.surface.outward_normal(z)
        else:
            z = self.surface.point_at(np.asarray(q, dtype=float))
            nu_in = self.surface.inward_normal_at(np.asarray(q, dtype=float))
        march = nu_in if self.side == -1 else -nu_in
        return z[None, :] + taus[:, None] * march[None, :]

    # ------------------------------------------------------------------
    # table construction
    # ------------------------------------------------------------------
    def _line_quantities(self, kap, taus):
        factors = 1.0 - kap[None, :] * taus[:, None]
        if np.any(factors <= 0.0):
            raise DegenerateTube("collar reaches a focal point of the surface")
        w = np.sqrt(np.prod(factors, axis=1))
        return w, 1.0 / w  # W and A_0 along the line

    def _build_radial_tables(self):
        taus = self.taus
        kap = self._kap_const
        w, a0 = self._line_quantities(kap, taus)
        dd = -np.sum(kap[None, :] / (1.0 - kap[None, :] * taus[:, None]), axis=1)
        ddp = -np.sum(kap[None, :] ** 2 / (1.0 - kap[None, :] * taus[:, None]) ** 2, axis=1)
        self._radial_dd = InterpolatedUnivariateSpline(taus, dd, k=5)
        profiles = []
        # analytic Laplacian of A_0 seeds the recursion
        a0p = -0.5 * dd * a0
        a0pp = -0.5 * (ddp * a0 + dd * a0p)
        lap_prev = a0pp + dd * a0p
        for _ in range(self.table_order):
            integ = 0.5 * lap_prev * w
            cum = _cumulative_gauss_legendre(integ, taus, self._zero_index)
            prof = a0 * cum
            spl = InterpolatedUnivariateSpline(taus, prof, k=5)
            profiles.append(spl)
            lap_prev = spl.derivative(2)(taus) + dd * spl.derivative(1)(taus)
        self._radial_profiles = profiles
        cum_w = _cumulative_gauss_legendre(w, taus, self._zero_index)
        self._radial_j = InterpolatedUnivariateSpline(taus, a0 * cum_w, k=5)

    def _trimmed_grids(self, level: int):
        """Grids for building table `level` (trim two cells per level)."""
        trim = 2 * (level - 1)
        sl = slice(trim, len(self.taus) - trim if trim else None)
        slq = slice(trim, len(self.q_grid) - trim if trim else None)
        return self.q_grid[slq], self.taus[sl], self._zero_index - trim

    def _build_table_fields(self):
        self._splines: list[RectBivariateSpline] = []
        for order in range(1, self.table_order + 1):
            qs, taus, zi = self._trimmed_grids(order)
            nq, nt = len(qs), len(taus)
            kap_q = np.asarray(self._kappas_q(qs), dtype=float)
            factors = 1.0 - kap_q[:, None, :] * taus[None, :, None]
            if np.any(factors <= 0.0):
                raise DegenerateTube("collar reaches a focal point of the surface")
            w_tab = np.sqrt(np.prod(factors, axis=2))
            a0_tab = 1.0 / w_tab
            Z = self.surface.point_at(qs)
            nu_in = self.surface.inward_normal_at(qs)
            march = nu_in if self.side == -1 else -nu_in
            pts = Z[:, None, :] + taus[None, :, None] * march[:, None, :]
            lap_prev = self.laplacian(order - 1, pts.reshape(-1, 3),
                                      h=self._build_step).reshape(nq, nt)
            tab = np.empty((nq, nt))
            for i in range(nq):
                integ = 0.5 * lap_prev[i] * w_tab[i]
                cum = _cumulative_gauss_legendre(integ, taus, zi)
                tab[i] = a0_tab[i] * cum
            self._splines.append(RectBivariateSpline(qs, taus, tab, kx=5, ky=5))

        qs, taus, zi = self._trimmed_grids(1)
        kap_q = np.asarray(self._kappas_q(qs), dtype=float)
        prod = np.prod(1.0 - kap_q[:, None, :] * taus[None, :, None], axis=2)
        w_tab = np.sqrt(prod)
        j_tab = np.empty_like(w_tab)
        for i in range(len(qs)):
            cum = _cumulative_gauss_legendre(w_tab[i], taus, zi)
            j_tab[i] = cum / w_tab[i]
        self._j_spline = RectBivariateSpline(qs, taus, j_tab, kx=5, ky=5)

    # ------------------------------------------------------------------
    # field evaluation
    # ------------------------------------------------------------------
    def a0(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        q, tau, _, _ = self.signed_coords(X)
        kap = (np.broadcast_to(self._kap_const, (len(tau), len(self._kap_const)))
               if self.surface.is_radial else self._kappas_q(q))
        factors = 1.0 - kap * tau[:, None]
        if np.any(factors <= 0.0):
            raise DegenerateTube("1 - kappa*delta vanished: point past a focal point")
        return np.prod(factors, axis=1) ** -0.5

    def _clamped(self, q, tau, level: int = 1):
        # spline queries never extrapolate; legitimate queries stay several
        # cells inside the trimmed grids, so clamping is a pure safeguard
        if self.surface.is_radial:
            return q, np.clip(tau, self.taus[0], self.taus[-1])
        qs, taus, _ = self._trimmed_grids(level)
        return np.clip(q, qs[0], qs[-1]), np.clip(tau, taus[0], taus[-1])

    def field(self, j: int, X) -> np.ndarray:
        """A_j evaluated at arbitrary collar points (j <= table order)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if j == 0:
            return self.a0(X)
        if j > self.table_order:
            raise InvalidArgument(f"A_{j} is not tabulated (table order "
                                  f"{self.table_order})")
        q, tau, _, _ = self.signed_coords(X)
        q, tau = self._clamped(q, tau, j)
        if self.surface.is_radial:
            return np.asarray(self._radial_profiles[j - 1](tau), dtype=float)
        return self._splines[j - 1].ev(q, tau)

    def j_integral(self, X) -> np.ndarray:
        """The forcing integral J = int_0^delta W, so that A_{n,+-} = A_n +- J."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        q, tau, _, _ = self.signed_coords(X)
        q, tau = self._clamped(q, tau)
        if self.surface.is_radial:
            return np.asarray(self._radial_j(tau), dtype=float)
        return self._j_spline.ev(q, tau)

    def field_pm(self, n: int, sign: int, X) -> np.ndarray:
        return self.field(n, X) + sign * self.j_integral(X)

    # ------------------------------------------------------------------
    # derivatives
    # ------------------------------------------------------------------
    def laplacian(self, j: int, X, h: Optional[float] = None) -> np.ndarray:
        """Lap A_j by the ray-bundle stencil (radial: exact 1d reduction)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.surface.is_radial:
            q, tau, _, _ = self.signed_coords(X)
            if j == 0:
                kap = self._kap_const
                fac = 1.0 - kap[None, :] * tau[:, None]
                dd = -np.sum(kap[None, :] / fac, axis=1)
                ddp = -np.sum(kap[None, :] ** 2 / fac ** 2, axis=1)
                a0 = np.prod(fac, axis=1) ** -0.5
                a0p = -0.5 * dd * a0
                a0pp = -0.5 * (ddp * a0 + dd * a0p)
                return a0pp + dd * a0p
            _, tau = self._clamped(q, tau)
            spl = self._radial_profiles[j - 1]
            dd = self._radial_dd(tau)
            return spl.derivative(2)(tau) + dd * spl.derivative(1)(tau)
        return self._laplacian_fd(lambda P: self.field(j, P), X, h)

    def laplacian_pm(self, n: int, sign: int, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.surface.is_radial:
            q, tau, _, _ = self.signed_coords(X)
            _, tau = self._clamped(q, tau)
            spl, jsp = self._radial_profiles[n - 1], self._radial_j
            dd = self._radial_dd(tau)
            lap_n = spl.derivative(2)(tau) + dd * spl.derivative(1)(tau)
            lap_j = jsp.derivative(2)(tau) + dd * jsp.derivative(1)(tau)
            return lap_n + sign * lap_j
        return self._laplacian_fd(lambda P: self.field_pm(n, sign, P), X)

    def _laplacian_fd(self, fieldfunc, X, h: Optional[float] = None) -> np.ndarray:
        h = self.fd_step if h is None else h
        m, N = X.shape
        pts = np.empty((m, 2 * N + 1, N))
        pts[:, 0] = X
        for i in range(N):
            e = np.zeros(N)
            e[i] = h
            pts[:, 1 + 2 * i] = X + e
            pts[:, 2 + 2 * i] = X - e
        vals = fieldfunc(pts.reshape(-1, N)).reshape(m, 2 * N + 1)
        return (vals[:, 1:].sum(axis=1) - 2 * N * vals[:, 0]) / h ** 2

    def tau_derivative(self, fieldfunc, X, h: Optional[float] = None) -> np.ndarray:
        """grad(delta) . grad(field) by central differences along the ray."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        h = self.fd_step if h is None else h
        Z, delta, side_pt = self.surface.project_batch(X)
        if np.any(delta < 2 * h):
            raise InvalidArgument("tau derivative needs delta > 2h; use the "
                                  "boundary formulas at the surface itself")
        e = (X - Z) / delta[:, None]
        return (fieldfunc(X + h * e) - fieldfunc(X - h * e)) / (2.0 * h)


@lru_cache(maxsize=None)
def coefficient_engine(surface: Surface, side: int,
                       table_order: Optional[int] = None,
                       delta0: Optional[float] = None, n_tau: int = 121,
                       n_q: int = 221, q_range: Optional[tuple] = None
                       ) -> CoefficientEngine:
    """Cached engine factory; tables are expensive and immutable, share them."""
    return CoefficientEngine(surface, side, table_order=table_order,
                             delta0=delta0, n_tau=n_tau, n_q=n_q,
                             q_range=q_range)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def compute_a0(surface: Surface, x) -> float:
    """A_0(x) = prod_j[1 - kappa_j delta]^(-1/2), cross-checked.

    The product is evaluated directly and through the symmetric-function
    expansion 1 + sum (-1)^i H_i delta^i; disagreement beyond machine level
    signals a curvature bug.  Curvature signs are adjusted to the side of x.
    """
    pr = surface.project(x)
    kap = surface.kappas(pr.z)
    if pr.side == +1:
        kap = -kap
    fac = 1.0 - kap * pr.delta
    if np.any(fac <= 0.0):
        raise DegenerateTube("1 - kappa*delta vanished: point past a focal point")
    prod = float(np.prod(fac))
    H = elementary_symmetric(kap)
    i = np.arange(1, len(H) + 1)
    expansion = 1.0 + float(np.sum((-1.0) ** i * H * pr.delta ** i))
    if abs(prod - expansion) > 1e-12 * max(1.0, abs(prod)):
        raise DegenerateTube(
            f"product {prod!r} and expansion {expansion!r} disagree")
    return prod ** -0.5


@dataclass(frozen=True)
class WkbCoefficientTable:
    """Coefficients sampled along one normal ray.

    At tau = 0 the values are exactly (1, 0, ..., 0): A_0 = 1 and all
    higher coefficients vanish on the surface.
    """

    order: int
    side: int
    z: np.ndarray
    taus: np.ndarray
    A: tuple              # arrays A_0 .. A_{n-1} on the ray grid
    An_plus: np.ndarray
    An_minus: np.ndarray

    def at_surface(self) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.taus)))
        vals = [a[idx] for a in self.A] + [self.An_plus[idx], self.An_minus[idx]]
        return np.asarray(vals)


def compute_coefficients(surface: Surface, q, n: int, side: int = -1,
                         taus=None, engine: Optional[CoefficientEngine] = None
                         ) -> WkbCoefficientTable:
    """Fill the ray table (A_0 .. A_{n-1}, A_{n,+-}) through footpoint q.

    q is the surface parameter of the footpoint (ignored for radial
    surfaces).  n may exceed the engine's table order by one: the top
    coefficient is then integrated along this single ray from the
    finite-difference Laplacian of the deepest tabulated field.
    """
    if n < 1:
        raise InvalidArgument("order n must be >= 1")
    eng = engine if engine is not None else coefficient_engine(surface, side)
    if n > eng.table_order + 1:
        raise InvalidArgument(f"order {n} needs table order >= {n - 1}")
    if taus is None:
        taus = np.linspace(0.0, eng.delta0, 65)
    taus = np.asarray(taus, dtype=float)
    pts = eng.ray_points(q, taus)
    A = [np.where(taus == 0.0, 1.0, eng.a0(pts))]
    for j in range(1, n):
        A.append(np.where(taus == 0.0, 0.0, _coeff_on_ray(eng, j, q, taus, pts)))
    top = _coeff_on_ray(eng, n, q, taus, pts)
    jint = np.where(taus == 0.0, 0.0, eng.j_integral(pts))
    top = np.where(taus == 0.0, 0.0, top)
    z = eng.ray_points(q, np.zeros(1))[0]
    return WkbCoefficientTable(order=n, side=side, z=z, taus=taus, A=tuple(A),
                               An_plus=top + jint, An_minus=top - jint)


def _ray_profile_spline(eng: CoefficientEngine, j: int, q
                        ) -> InterpolatedUnivariateSpline:
    """One-off integration of order j along a single ray (j past the tables)."""
    if eng.surface.is_radial:
        grid, zi = eng.taus, eng._zero_index
    else:
        _, grid, zi = eng._trimmed_grids(j)
    ray_grid = eng.ray_points(q, grid)
    # same stencil step as fresh evaluations, so truncation bias cancels in
    # the ray-derivative identities
    lap = eng.laplacian(j - 1, ray_grid, h=eng.fd_step)
    kap = (eng._kap_const if eng.surface.is_radial else
           np.asarray(eng._kappas_q(q), dtype=float))
    w, a0 = eng._line_quantities(kap, grid)
    cum = _cumulative_gauss_legendre(0.5 * lap * w, grid, zi)
    return InterpolatedUnivariateSpline(grid, a0 * cum, k=5)


def _coeff_on_ray(eng: CoefficientEngine, j: int, q, taus, pts) -> np.ndarray:
    if j <= eng.table_order:
        return eng.field(j, pts)
    return np.asarray(_ray_profile_spline(eng, j, q)(taus), dtype=float)


def gradient_identity_residual(surface: Surface, j: int, x, side: int = -1,
                               h: float = 1e-3, sign: int = 0,
                               n: Optional[int] = None,
                               engine: Optional[CoefficientEngine] = None) -> float:
    """Residual of the ray-derivative identity for A_j (or A_{n,+-}).

    Checks d A_j/dtau + 1/2 Lap(delta) A_j - 1/2 Lap A_{j-1} (-+ 1 for the
    forced top coefficient) at a collar point x.  The left side is a fresh
    central difference along the ray; everything on the right comes from
    the table machinery, so the residual measures the end-to-end
    consistency of the recursion.  Contract: O(h^2) plus quadrature noise.
    """
    eng = engine if engine is not None else coefficient_engine(surface, side)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    nn = j if sign == 0 else (j if n is None else n)

    if nn <= eng.table_order:
        base = (lambda P: eng.field(nn, P)) if sign == 0 else \
               (lambda P: eng.field_pm(nn, sign, P))
    else:
        # one order past the tables: the identity only probes points on the
        # ray through x, so a single-ray profile suffices
        qx, _, _, _ = eng.signed_coords(X)
        ray_spline = _ray_profile_spline(eng, nn, float(qx[0]))

        def base(P):
            _, taup, _, _ = eng.signed_coords(np.atleast_2d(P))
            vals = np.asarray(ray_spline(taup), dtype=float)
            if sign != 0:
                vals = vals + sign * eng.j_integral(P)
            return vals

    fieldfunc = base
    lap_prev = eng.laplacian(nn - 1, X)[0] if nn >= 1 else 0.0
    forcing = float(sign)
    lhs = eng.tau_derivative(fieldfunc, X, h=h)[0]
    dd = eng.lap_signed_distance(X)[0]
    rhs = -0.5 * dd * fieldfunc(X)[0] + 0.5 * lap_prev + forcing
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# harmonic correctors on model collars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlabCorrector:
    """psi = 2 delta / delta0: harmonic, 0 on the surface, 2 on the far wall."""

    delta0: float

    def psi(self, tau):
        return 2.0 * np.asarray(tau, dtype=float) / self.delta0

    @property
    def surface_slope(self) -> float:
        return 2.0 / self.delta0


@dataclass(frozen=True)
class RadialCorrector:
    """Harmonic corrector on a radial annulus collar.

    The collar is [R - delta0, R] (side -1) or [R, R + delta0] (side +1) in
    the effective radial dimension d (d = N for a sphere collar, d = 2 for
    a cylinder collar).  psi is the radial harmonic function with psi = 0 at
    r = R and psi = 2 on the far wall; log profile for d = 2, power profile
    r^(2-d) for d >= 3.
    """

    R: float
    d: int
    side: int
    delta0: float

    def _r(self, tau):
        return self.R + self.side * np.asarray(tau, dtype=float)

    def _profile(self, r):
        r_far = self.R + self.side * self.delta0
        if self.d == 2:
            return 2.0 * np.log(r / self.R) / np.log(r_far / self.R)
        p = 2.0 - self.d
        return 2.0 * (r ** p - self.R ** p) / (r_far ** p - self.R ** p)

    def psi(self, tau):
        return self._profile(self._r(tau))

    def psi_at_radius(self, r):
        return self._profile(np.asarray(r, dtype=float))

    @property
    def surface_slope(self) -> float:
        # d psi / d tau at tau = 0
        r_far = self.R + self.side * self.delta0
        if self.d == 2:
            return float(self.side * 2.0 / (self.R * np.log(r_far / self.R)))
        p = 2.0 - self.d
        return float(self.side * 2.0 * p * self.R ** (p - 1) / (r_far ** p - self.R ** p))


def harmonic_corrector(geometry: dict, tau):
    """Evaluate the model-collar corrector psi at distance tau from the surface.

    geometry: {"kind": "slab", "delta0": ...} or
              {"kind": "radial", "R": ..., "d": ..., "side": -1 | +1,
               "delta0": ...}.
    """
    kind = geometry.get("kind")
    if kind == "slab":
        return SlabCorrector(geometry["delta0"]).psi(tau)
    if kind == "radial":
        c = RadialCorrector(geometry["R"], geometry["d"], geometry["side"],
                            geometry["delta0"])
        return c.psi(tau)
    raise UnsupportedGeometry(f"no corrector for geometry {kind!r}")


# ---------------------------------------------------------------------------
# barriers
# ---------------------------------------------------------------------------

def _side_value(medium: TwoPhaseMedium, side: int) -> float:
    """Interface value of the decaying function on the given side."""
    return medium.k if side == -1 else 1.0 - medium.k


def _s_sum(eng: CoefficientEngine, X, q: float, n: int, sign: int):
    """S = A_0 + sum q^j A_j + q^n A_{n,+-} and its pieces at points X."""
    S = eng.a0(X).copy()
    for j in range(1, n):
        S += q ** j * eng.field(j, X)
    S += q ** n * eng.field_pm(n, sign, X)
    return S


def barrier_f(surface: Surface, medium: TwoPhaseMedium, x, lam: float, n: int,
              sign: int, side: int = -1,
              engine: Optional[CoefficientEngine] = None) -> float:
    """Barrier value f_{n,+-}(x, lambda) on the given side.

    On the Omega side this approximates w itself and equals k on the
    surface; on the outer side it approximates 1 - w and equals 1 - k
    there.  Higher coefficients enter with powers of sqrt(sigma/lambda),
    so f -> b e^{-sqrt(lambda/sigma) delta} A_0 as lambda -> infinity.
    """
    if not (lam > 0.0):
        raise InvalidArgument(f"lambda must be positive, got {lam!r}")
    eng = engine if engine is not None else coefficient_engine(surface, side)
    sigma = medium.side_conductivity(side)
    mu = math.sqrt(lam / sigma)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    _, tau, _, _ = eng.signed_coords(X)
    S = _s_sum(eng, X, 1.0 / mu, n, sign)
    b = _side_value(medium, side)
    return float(b * math.exp(-mu * tau[0]) * S[0])


def elliptic_residual(surface: Surface, medium: TwoPhaseMedium, x, lam: float,
                      n: int, sign: int, side: int = -1,
                      engine: Optional[CoefficientEngine] = None
                      ) -> tuple[float, float]:
    """(sigma Lap f - lambda f, predicted right side) at a collar point.

    The two must agree up to stencil and table error; for lambda past the
    calibrated threshold the common value is strictly negative for the +
    barrier and strictly positive for the - barrier.
    """
    if not (lam > 0.0):
        raise InvalidArgument(f"lambda must be positive, got {lam!r}")
    eng = engine if engine is not None else coefficient_engine(surface, side)
    sigma = medium.side_conductivity(side)
    mu = math.sqrt(lam / sigma)
    q = 1.0 / mu
    b = _side_value(medium, side)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    _, tau, _, _ = eng.signed_coords(X)
    dd = eng.lap_signed_distance(X)[0]

    S = _s_sum(eng, X, q, n, sign)[0]
    lap_S = eng.laplacian(0, X)[0]
    for j in range(1, n):
        lap_S += q ** j * eng.laplacian(j, X)[0]
    lap_pm = eng.laplacian_pm(n, sign, X)[0]
    lap_S += q ** n * lap_pm

    if tau[0] >= 2 * eng.fd_step:
        s_tau = eng.tau_derivative(lambda P: _s_sum(eng, P, q, n, sign), X)[0]
    else:
        # surface limit of dS/dtau from the ray-derivative identities
        s_tau = -0.5 * dd * S
        s_tau += sum(q ** j * 0.5 * eng.laplacian(j - 1, X)[0] for j in range(1, n))
        s_tau += q ** n * (0.5 * eng.laplacian(n - 1, X)[0] + sign)

    # the mu^2 S term cancels against lambda f exactly; assemble without it
    lhs = b * sigma * math.exp(-mu * tau[0]) * (-mu * dd * S - 2.0 * mu * s_tau + lap_S)
    rhs = b * sigma * q ** (n - 1) * math.exp(-mu * tau[0]) * (-2.0 * sign + q * lap_pm)
    return lhs, rhs


@dataclass(frozen=True)
class BarrierThresholds:
    """Calibrated decay rate eta_n and admissible lambda threshold."""

    eta: float
    lam_min: float


def calibrate_thresholds(surface: Surface, medium: TwoPhaseMedium, n: int,
                         side: int = -1, corrector=None,
                         outer_w=None,
                         engine: Optional[CoefficientEngine] = None,
                         lam_cap: float = 1e10) -> BarrierThresholds:
    """Find eta_n and the smallest lambda making the barriers strict.

    eta_n is half the exponential rate of f at the far collar wall,
    eta_n = delta0 / (2 sqrt(sigma_side)).  lambda_n is located by bisection
    as the smallest rate for which (a) the residual sign pattern holds on a
    sample of collar points for both signs and (b) the far-wall bound
    max(|f_+|, |f_-|, outer_w) <= e^{-eta_n sqrt(lambda)} holds.  outer_w,
    if given, is a callable lambda -> |w| at the far collar wall.
    """
    eng = engine if engine is not None else coefficient_engine(surface, side)
    sigma = medium.side_conductivity(side)
    eta = 0.5 * eng.delta0 / math.sqrt(sigma)

    if eng.surface.is_radial:
        q_samples = [0.0]
    else:
        lo, hi = eng.q_grid[4], eng.q_grid[-5]
        q_samples = list(np.linspace(0.7 * lo, 0.7 * hi, 5))
    tau_samples = np.linspace(0.0, eng.delta0, 17)
    sample_pts = [eng.ray_points(q, tau_samples) for q in q_samples]
    wall_pts = [eng.ray_points(q, np.array([eng.delta0])) for q in q_samples]

    def admissible(lam: float) -> bool:
        # the residual equals (positive prefactor) * (-2 sign + q Lap A_{n,+-});
        # testing the bracket avoids spurious failures when the exponential
        # prefactor underflows at very large lambda
        bound = math.exp(-eta * math.sqrt(lam))
        if outer_w is not None and outer_w(lam) > bound:
            return False
        q_rate = math.sqrt(sigma / lam)
        for pts, wall in zip(sample_pts, wall_pts):
            for sign in (+1, -1):
                bracket = -2.0 * sign + q_rate * eng.laplacian_pm(n, sign, pts)
                if np.any(sign * bracket >= 0.0):
                    return False
                if abs(barrier_f(surface, medium, wall[0], lam, n, sign,
                                 side, engine=eng)) > bound:
                    return False
        return True

    lo, hi = 1.0, lam_cap
    if not admissible(hi):
        raise ThresholdNotFound(
            f"no admissible lambda below {lam_cap:g}; coefficient tables "
            "are inconsistent")
    if admissible(lo):
        return BarrierThresholds(eta=eta, lam_min=lo)
    for _ in range(48):
        mid = math.sqrt(lo * hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    return BarrierThresholds(eta=eta, lam_min=hi)


def barrier_w(surface: Surface, medium: TwoPhaseMedium, x, lam: float, n: int,
              sign: int, side: int = -1, corrector=None,
              thresholds: Optional[BarrierThresholds] = None,
              engine: Optional[CoefficientEngine] = None) -> float:
    """Corrected barrier w_{n,+-} = f_{n,+-} +- psi e^{-eta_n sqrt(lambda)}.

    Equals the interface constant on the surface for both signs; for
    lambda >= lambda_n the pair encloses the exact solution pointwise.
    """
    eng = engine if engine is not None else coefficient_engine(surface, side)
    if thresholds is None:
        thresholds = calibrate_thresholds(surface, medium, n, side, engine=eng)
    if lam < thresholds.lam_min:
        raise InvalidArgument(
            f"lambda = {lam:g} is below the calibrated threshold "
            f"{thresholds.lam_min:g}")
    if corrector is None:
        corrector = SlabCorrector(eng.delta0)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    _, tau, _, _ = eng.signed_coords(X)
    f = barrier_f(surface, medium, x, lam, n, sign, side, engine=eng)
    return f + sign * float(corrector.psi(tau[0])) * math.exp(
        -thresholds.eta * math.sqrt(lam))


# ---------------------------------------------------------------------------
# near-boundary law and boundary data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NearBoundaryFit:
    """Measured vs predicted small-distance behavior of Lap A_s."""

    s: int
    p: int
    measured_coefficient: float
    predicted_coefficient: float
    fitted_exponent: float
    expected_exponent: int
    deltas: np.ndarray
    values: np.ndarray


def near_boundary_law(surface: Surface, q, s: int, p: int, side: int = -1,
                      window: tuple = (1e-3, 1e-1), n_pts: int = 13,
                      engine: Optional[CoefficientEngine] = None
                      ) -> NearBoundaryFit:
    """Fit Lap A_s ~ c delta^(p-2-s) near the surface and compare with theory.

    On a surface whose first p-1 symmetric curvature functions vanish,
    Lap A_s = -2^-(s+1) (-1)^p (s+2)! C(p, s+2) H_p delta^(p-2-s) + O(delta^(p-1-s))
    for s = 0 .. p-2.  The exponent is fitted on a log-log window and the
    coefficient by extrapolating Lap A_s / delta^(p-2-s) to delta -> 0.
    """
    if not (0 <= s <= p - 2):
        raise InvalidArgument("need 0 <= s <= p-2")
    eng = engine if engine is not None else coefficient_engine(surface, side)
    deltas = np.geomspace(window[0] * eng.delta0, window[1] * eng.delta0, n_pts)
    pts = eng.ray_points(q, deltas)
    vals = eng.laplacian(s, pts)

    logv = np.log(np.abs(vals))
    exponent = float(np.polyfit(np.log(deltas), logv, 1)[0])

    scaled = vals / deltas ** (p - 2 - s)
    coef = float(np.polynomial.polynomial.polyfit(deltas, scaled, 2)[0])

    kap = (eng._kap_const if surface.is_radial
           else np.asarray(eng._kappas_q(q), dtype=float))
    Hp = float(elementary_symmetric(kap)[p - 1])
    predicted = (-(2.0 ** -(s + 1)) * (-1.0) ** p * math.factorial(s + 2)
                 * math.comb(p, s + 2) * Hp)
    return NearBoundaryFit(s=s, p=p, measured_coefficient=coef,
                           predicted_coefficient=predicted,
                           fitted_exponent=exponent, expected_exponent=p - 2 - s,
                           deltas=deltas, values=vals)


def boundary_laplacians(surface: Surface, q, j_max: int, side: int = -1,
                        engine: Optional[CoefficientEngine] = None
                        ) -> np.ndarray:
    """Surface limits of Lap A_j for j = 0..j_max, by small-delta extrapolation."""
    eng = engine if engine is not None else coefficient_engine(surface, side)
    deltas = np.geomspace(1e-3 * eng.delta0, 8e-2 * eng.delta0, 9)
    pts = eng.ray_points(q, deltas)
    out = np.empty(j_max + 1)
    for j in range(j_max + 1):
        vals = eng.laplacian(j, pts)
        out[j] = float(np.polynomial.polynomial.polyfit(deltas, vals, 2)[0])
    return out


def boundary_normal_derivative(surface: Surface, medium: TwoPhaseMedium,
                               lam: float, n: int, sign: int, q=0.0,
                               side: int = -1, corrector=None,
                               eta: Optional[float] = None,
                               engine: Optional[CoefficientEngine] = None,
                               lap_boundary: Optional[np.ndarray] = None) -> float:
    """Conormal derivative of the corrected barrier at the surface.

    Returns D such that sigma_side * D equals sigma_s dw/dnu from inside
    (side -1) or sigma_m dw/dnu from outside (side +1).  Explicitly

        D = b [ mu + Lap(delta)/2 - 1/2 sum_{j=1}^n q^j Lap A_{j-1} - sign q^n ]
            - sign psi'(0) e^{-eta sqrt(lambda)},

    with b the side's interface value and q = sqrt(sigma/lambda); the +- pair
    brackets the exact conormal derivative.
    """
    eng = engine if engine is not None else coefficient_engine(surface, side)
    sigma = medium.side_conductivity(side)
    mu = math.sqrt(lam / sigma)
    qq = 1.0 / mu
    b = _side_value(medium, side)
    if lap_boundary is None:
        lap_boundary = boundary_laplacians(surface, q, n - 1, side, engine=eng)
    dd0 = eng.boundary_mean_term(q)
    val = mu + 0.5 * dd0
    val -= 0.5 * sum(qq ** j * lap_boundary[j - 1] for j in range(1, n + 1))
    val -= sign * qq ** n
    out = b * val
    if corrector is not None and eta is not None:
        out -= sign * corrector.surface_slope * math.exp(-eta * math.sqrt(lam))
    return out
