import math

import numpy as np
import pytest

from twophase import elliptic as ell
from twophase import geometry as geo
from twophase.errors import InvalidArgument, UnsupportedGeometry
from twophase.medium import TwoPhaseMedium

MED = TwoPhaseMedium(1.0, 4.0)
K = MED.k
SPHERE = ell.RadialGeometry("sphere", R=1.0, N=3)
CYLINDER = ell.RadialGeometry("cylinder", R=2.0, N=3)
PLANE = ell.RadialGeometry("plane")


# -- radial Dirichlet solutions ---------------------------------------------------

def test_plane_boundary_value():
    sol = ell.solve_radial_dirichlet(PLANE, 7.0, 1.0, K)
    assert sol(0.0) == pytest.approx(K, abs=1e-15)


def test_sphere_normal_derivative_closed_form():
    # k (mu coth(mu R) - 1/R) at mu = 20; coth(20) = 1 up to 1e-17
    sol = ell.solve_radial_dirichlet(SPHERE, 400.0, 1.0, K)
    assert sol.normal_derivative() == pytest.approx(19.0 * K, rel=1e-12)


def test_sphere_profile_matches_sinh_form():
    sol = ell.solve_radial_dirichlet(SPHERE, 25.0, 1.0, K)
    for r in (0.3, 0.6, 0.9):
        expect = K * math.sinh(5 * r) / (r * math.sinh(5.0))
        assert sol(r) == pytest.approx(expect, rel=1e-12)


def test_cylinder_normal_derivative_asymptotics():
    # I1/I0 uniform asymptotics: mu (1 - 1/(2 mu R)) = 99.75 at mu R = 200
    sol = ell.solve_radial_dirichlet(CYLINDER, 1e4, 1.0, K)
    assert abs(sol.normal_derivative() / K - 99.75) < 0.01


def test_radial_solution_no_overflow_at_huge_rates():
    sol = ell.solve_radial_dirichlet(SPHERE, 1e10, 1.0, K)
    assert np.isfinite(sol.normal_derivative())
    assert sol(0.99) == pytest.approx(K * math.exp(-1e5 * 0.01), rel=1e-2)


def test_ode_residual_spot_checks():
    # double-precision finite differences bottom out near 1e-8 relative;
    # the high-precision oracle below pushes to the stated 1e-10
    for geometry, rs in ((SPHERE, np.linspace(0.55, 0.99, 16)),
                        (CYLINDER, np.linspace(1.2, 1.98, 16))):
        sol = ell.solve_radial_dirichlet(geometry, 37.0, 1.3, K)
        assert np.max(np.abs(sol.ode_residual(rs))) < 1e-7


def test_ode_residual_high_precision_oracle():
    mpmath = pytest.importorskip("mpmath")
    mp = mpmath.mp
    mp.dps = 40
    for geometry, r_checks in ((SPHERE, np.linspace(0.55, 0.99, 16)),
                               (CYLINDER, np.linspace(1.2, 1.98, 16))):
        lam, sigma = 37.0, 1.3
        sol = ell.solve_radial_dirichlet(geometry, lam, sigma, K)
        mu = mpmath.sqrt(mpmath.mpf(lam) / sigma)
        nu = mpmath.mpf(geometry.d) / 2 - 1
        R = mpmath.mpf(geometry.R)

        def w(r):
            return (K * r ** -nu * mpmath.besseli(nu, mu * r)
                    / (R ** -nu * mpmath.besseli(nu, mu * R)))

        h = mpmath.mpf("1e-12")
        for r in r_checks:
            r = mpmath.mpf(float(r))
            wpp = (w(r + h) - 2 * w(r) + w(r - h)) / h ** 2
            wp = (w(r + h) - w(r - h)) / (2 * h)
            resid = wpp + (geometry.d - 1) / r * wp - lam / sigma * w(r)
            assert abs(float(resid / (lam / sigma))) < 1e-10
            # and the package solution matches the high-precision profile
            assert abs(float(w(r)) - sol(float(r))) < 1e-12


# -- transmission -----------------------------------------------------------------

def test_transmission_equal_phases_tends_to_half():
    med = TwoPhaseMedium(2.0, 2.0)
    tr = ell.solve_radial_transmission(SPHERE, 1e8, med)
    assert abs(tr.interface_value - 0.5) < 1e-3


def test_transmission_large_rate_tends_to_k():
    tr = ell.solve_radial_transmission(SPHERE, 1e8, MED)
    assert abs(tr.interface_value - K) < 1e-3


def test_transmission_flux_match_random():
    rng = np.random.default_rng(4)
    for _ in range(6):
        lam = 10.0 ** rng.uniform(0.5, 6.0)
        R = rng.uniform(0.5, 3.0)
        g = ell.RadialGeometry("sphere", R=R, N=3)
        tr = ell.solve_radial_transmission(g, lam, MED)
        scale = math.sqrt(lam) * max(MED.sigma_s, MED.sigma_m)
        assert abs(tr.flux_mismatch()) < 1e-10 * scale


def test_transmission_interface_value_tends_to_k_for_many_pairs():
    for pair in [(1.0, 4.0), (4.0, 1.0), (2.0, 3.0), (0.5, 5.0)]:
        med = TwoPhaseMedium(*pair)
        vals = [ell.solve_radial_transmission(SPHERE, lam, med).interface_value
                for lam in (1e4, 1e6, 1e8)]
        errs = [abs(v - med.k) for v in vals]
        assert errs[-1] < 1e-3
        assert errs[0] > errs[-1]  # monotone approach


def test_transmission_outside_value_continuous():
    tr = ell.solve_radial_transmission(SPHERE, 100.0, MED)
    assert tr.outside_value(1.0) == pytest.approx(tr.interface_value, rel=1e-12)
    assert tr.outside_value(50.0) == pytest.approx(1.0, abs=1e-10)


# -- curvature extraction -----------------------------------------------------------

def test_extract_plane_zero():
    fit = ell.extract_mean_curvature(PLANE, MED)
    assert abs(fit.sum_kappa_estimate) < 1e-8


def test_extract_sphere():
    fit = ell.extract_mean_curvature(SPHERE, MED)
    assert abs(fit.sum_kappa_estimate - 2.0) < 0.02


def test_extract_cylinder():
    fit = ell.extract_mean_curvature(CYLINDER, MED)
    assert abs(fit.sum_kappa_estimate - 0.5) < 0.005


def test_extract_matches_target_for_other_media():
    med = TwoPhaseMedium(3.0, 2.0)
    fit = ell.extract_mean_curvature(SPHERE, med)
    assert abs(fit.sum_kappa_estimate - 2.0) < 0.02


# -- higher-order fit ---------------------------------------------------------------

@pytest.mark.parametrize("surface", [geo.Catenoid(c=1.0), geo.Helicoid()])
def test_higher_order_fit_minimal_patches(surface):
    fits = ell.higher_order_fit(surface, MED, p=2)
    for side in (-1, +1):
        f = fits[side]
        assert abs(f.coefficient - f.predicted) < 0.10 * abs(f.predicted)
    assert fits["predicted_ratio"] == pytest.approx(0.25, abs=1e-15)
    assert abs(fits["ratio"] - 0.25) < 0.025


def test_higher_order_fit_catenoid_inside_value():
    # p = 2, sigma_s = 1, H2 = -1 at the waist: coefficient -k/2
    fits = ell.higher_order_fit(geo.Catenoid(c=1.0), MED, p=2, sides=(-1,))
    f = fits[-1]
    assert f.predicted == pytest.approx(-K / 2.0, rel=1e-12)
    assert f.coefficient == pytest.approx(-K / 2.0, rel=0.10)


# -- grid solver ----------------------------------------------------------------------

def test_grid_1d_plane_interface_value():
    lam = 100.0
    n = 512
    L = 2.0
    h = 2 * L / n
    centers = -L + (np.arange(n) + 0.5) * h
    sigma = np.where(centers < 0.0, MED.sigma_m, MED.sigma_s)
    field = ell.GridField(lo=(-L,), hi=(L,), h=h, sigma=sigma)
    source = lam * (centers < 0.0).astype(float)
    sol = ell.grid_modified_helmholtz(field, lam, source,
                                      {"xlo": 1.0, "xhi": 0.0})
    i = n // 2
    u_interface = 0.5 * (sol.values[i - 1] + sol.values[i])
    assert abs(u_interface - K) < 5.0 * h


def test_grid_zero_data_zero_solution():
    n = 24
    field = ell.GridField(lo=(0.0, 0.0), hi=(1.0, 1.0), h=1.0 / n,
                          sigma=np.ones((n, n)))
    sol = ell.grid_modified_helmholtz(field, 3.0, np.zeros(n * n),
                                      {k: 0.0 for k in ("xlo", "xhi", "ylo", "yhi")})
    assert np.max(np.abs(sol.values)) < 1e-14


def test_grid_operator_is_m_matrix():
    rng = np.random.default_rng(0)
    n = 16
    field = ell.GridField(lo=(0.0, 0.0), hi=(1.0, 1.0), h=1.0 / n,
                          sigma=rng.uniform(0.5, 4.0, (n, n)))
    A, _ = ell.assemble_operator(field, 2.0, {"xlo": 0.0})
    dense = A.toarray()
    off = dense - np.diag(np.diag(dense))
    assert np.all(off <= 0.0)
    assert np.all(np.diag(dense) > 0.0)
    # rows dominate strictly thanks to lambda > 0
    assert np.all(np.diag(dense) - np.abs(off).sum(axis=1) >= 2.0 - 1e-12)


def test_disk_convergence_order():
    rep = ell.disk_convergence_study(MED, lam=100.0, hs=(1 / 16, 1 / 32, 1 / 64))
    assert rep["observed_order"] >= 0.9
    assert rep["errors"][-1] < rep["errors"][0]


# -- maximum principle ------------------------------------------------------------------

def test_max_principle_uniform_sigma():
    rep = ell.discrete_max_principle_check(lam=1.0, trials=20, rng_seed=1,
                                           sigma_range=(1.0, 1.0))
    assert rep["min_value"] >= -1e-12


def test_max_principle_random_sigma():
    rep = ell.discrete_max_principle_check(lam=10.0, trials=30, rng_seed=2)
    assert rep["min_value"] >= -1e-10


def test_max_principle_rejects_lambda_zero():
    with pytest.raises(InvalidArgument):
        ell.discrete_max_principle_check(lam=0.0, trials=1, rng_seed=0)


def test_annulus_counterexample_reproduces_failure():
    rep = ell.annulus_counterexample()
    assert rep["boundary_value"] == 0.0           # admissible data on the true boundary
    assert rep["profile_residual"] < 1e-10        # discretely harmonic
    assert rep["min_interior"] < -0.4             # yet negative inside
    assert rep["profile_matches"] < 1e-10         # the solve recovers the profile


def test_annulus_counterexample_needs_three_dimensions():
    with pytest.raises(UnsupportedGeometry):
        ell.annulus_counterexample(N=2)


def test_radial_geometry_validation():
    with pytest.raises(UnsupportedGeometry):
        ell.RadialGeometry("torus")
    with pytest.raises(InvalidArgument):
        ell.RadialGeometry("sphere", R=-1.0)
