import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import geometry as geo
from twophase.errors import (AmbiguousProjection, OnSurface,
                             OutsideTubularNeighborhood)

SPHERE = geo.Sphere(R=1.0, N=3)
CYLINDER = geo.Cylinder(R=2.0, N=3)
HELICOID = geo.Helicoid()
CATENOID = geo.Catenoid(c=1.0)
PLANE = geo.Hyperplane(N=3)

ALL = {"plane": PLANE, "sphere": SPHERE, "cylinder": CYLINDER,
       "helicoid": HELICOID, "catenoid": CATENOID}


def _random_tube_point(surface, rng, frac=0.8):
    if isinstance(surface, geo.Hyperplane):
        x = rng.uniform(-2.0, 2.0, 3)
        x[0] = rng.uniform(-0.8, 0.8)
        return x
    if isinstance(surface, geo.Sphere):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        return u * (surface.R + rng.uniform(-frac, frac) * surface.delta0)
    if isinstance(surface, geo.Cylinder):
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        rho = surface.R + rng.uniform(-frac, frac) * surface.delta0
        return np.array([rho * u[0], rho * u[1], rng.uniform(-1.0, 1.0)])
    q = rng.uniform(-0.5, 0.5)
    tau = rng.uniform(-frac, frac) * surface.delta0
    z = surface.point_at(np.asarray(q))
    n = surface.inward_normal_at(np.asarray(q))
    return z + tau * n


# -- projection ---------------------------------------------------------------

def test_project_hyperplane_example():
    pr = PLANE.project(np.array([0.3, 5.0, -2.0]))
    assert np.allclose(pr.z, [0.0, 5.0, -2.0])
    assert pr.delta == pytest.approx(0.3)
    assert pr.side == -1  # x1 > 0 is the inside


def test_project_sphere_radial_oracle():
    pr = SPHERE.project(np.array([0.0, 0.0, 0.4]))
    assert np.allclose(pr.z, [0.0, 0.0, 1.0], atol=1e-14)
    assert pr.delta == pytest.approx(0.6, abs=1e-14)
    assert pr.side == -1


def test_project_helicoid_fixed_point():
    x = HELICOID.point_at(np.asarray(2.0))
    x = geo.Helicoid().project(np.array([2 * math.cos(1.3), 2 * math.sin(1.3), 1.3]))
    assert x.delta == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(x.z, [2 * math.cos(1.3), 2 * math.sin(1.3), 1.3], atol=1e-9)


@pytest.mark.parametrize("name", sorted(ALL))
def test_reconstruction_identity(name):
    surface = ALL[name]
    rng = np.random.default_rng(11)
    for _ in range(8):
        x = _random_tube_point(surface, rng)
        pr = surface.project(x)
        assert np.linalg.norm(pr.z + pr.delta * pr.grad_delta - x) < 1e-10
        assert abs(np.linalg.norm(pr.nu) - 1.0) < 1e-12


@pytest.mark.parametrize("name", sorted(ALL))
def test_projection_idempotent(name):
    surface = ALL[name]
    rng = np.random.default_rng(3)
    for _ in range(5):
        pr = surface.project(_random_tube_point(surface, rng))
        again = surface.project(pr.z)
        assert again.delta < 1e-9


def test_project_outside_tube_raises():
    with pytest.raises(OutsideTubularNeighborhood):
        HELICOID.project(np.array([0.0, 5.0, 0.0]))


def test_project_center_ambiguous():
    with pytest.raises(AmbiguousProjection):
        SPHERE.project(np.zeros(3))


# -- eikonal / distance laplacian ---------------------------------------------

@pytest.mark.parametrize("name", sorted(ALL))
def test_eikonal_unit_gradient(name):
    surface = ALL[name]
    rng = np.random.default_rng(13)
    h = 1e-4
    for _ in range(5):
        x = _random_tube_point(surface, rng)
        if surface.project(x).delta < 3 * h:
            continue
        grad = np.empty(3)
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            dp = surface.project_batch((x + e)[None, :])[1][0]
            dm = surface.project_batch((x - e)[None, :])[1][0]
            grad[axis] = (dp - dm) / (2 * h)
        assert abs(np.linalg.norm(grad) - 1.0) < 1e-6


def test_laplacian_of_distance_hyperplane_zero():
    assert geo.laplacian_of_distance(PLANE, np.array([0.4, 3.0, 1.0])) == 0.0


def test_laplacian_of_distance_sphere_example():
    x = np.array([0.0, 0.0, 0.75])  # delta = 0.25 inside
    got = geo.laplacian_of_distance(SPHERE, x)
    assert got == pytest.approx(-8.0 / 3.0, rel=1e-12)


def test_laplacian_of_distance_on_surface_raises():
    with pytest.raises(OnSurface):
        geo.laplacian_of_distance(SPHERE, np.array([1.0, 0.0, 0.0]))


@pytest.mark.parametrize("name", sorted(ALL))
def test_laplacian_of_distance_matches_finite_differences(name):
    surface = ALL[name]
    rng = np.random.default_rng(17)
    h = 1e-4
    checked = 0
    while checked < 20:
        x = _random_tube_point(surface, rng)
        if surface.project(x).delta < 5 * h:
            continue
        fd = 0.0
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            dp = surface.project_batch((x + e)[None, :])[1][0]
            d0 = surface.project_batch(x[None, :])[1][0]
            dm = surface.project_batch((x - e)[None, :])[1][0]
            fd += (dp - 2 * d0 + dm) / h ** 2
        assert abs(fd - geo.laplacian_of_distance(surface, x)) < 1e-5
        checked += 1


# -- symmetric functions -------------------------------------------------------

def test_elementary_symmetric_zero_curvatures():
    assert np.all(geo.elementary_symmetric(np.zeros(4)) == 0.0)


def test_elementary_symmetric_sphere_binomials():
    got = geo.elementary_symmetric(np.full(3, 0.5))  # N = 4, R = 2
    assert np.allclose(got, [1.5, 0.75, 0.125], atol=1e-15)


def test_elementary_symmetric_helicoid_pair():
    rho = 0.9
    a = 1.0 / (1.0 + rho * rho)
    got = geo.elementary_symmetric(np.array([a, -a]))
    assert got[0] == pytest.approx(0.0, abs=1e-16)
    assert got[1] == pytest.approx(-a * a, rel=1e-14)
    at_axis = geo.elementary_symmetric(np.array([1.0, -1.0]))
    assert at_axis[1] == -1.0


@given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=5))
@settings(max_examples=50)
def test_elementary_symmetric_matches_bruteforce(kappas):
    from itertools import combinations
    got = geo.elementary_symmetric(kappas)
    for i in range(1, len(kappas) + 1):
        brute = sum(math.prod(c) for c in combinations(kappas, i))
        assert got[i - 1] == pytest.approx(brute, rel=1e-10, abs=1e-10)


# -- product expansion ----------------------------------------------------------

def test_product_expansion_on_surface_is_one():
    lhs, rhs = geo.curvature_product_expansion(SPHERE, np.array([1.0, 0.0, 0.0]))
    assert lhs == 1.0 and rhs == 1.0


def test_product_expansion_sphere_value():
    lhs, rhs = geo.curvature_product_expansion(SPHERE, np.array([0.7, 0.0, 0.0]))
    assert lhs == pytest.approx(0.49, abs=1e-12)
    assert rhs == pytest.approx(lhs, abs=1e-14)


def test_product_expansion_catenoid_waist():
    # kappa = (-1, +1) at the waist of the unit catenoid: both sides
    # (1 - 0.2)(1 + 0.2) = 1 + H2 * 0.04 = 0.96
    x = np.array([0.8, 0.0, 0.0])
    lhs, rhs = geo.curvature_product_expansion(CATENOID, x)
    assert lhs == pytest.approx(0.96, abs=1e-12)
    assert rhs == pytest.approx(lhs, abs=1e-14)


@pytest.mark.parametrize("name", sorted(ALL))
def test_product_expansion_agrees_everywhere(name):
    surface = ALL[name]
    rng = np.random.default_rng(23)
    for _ in range(10):
        lhs, rhs = geo.curvature_product_expansion(
            surface, _random_tube_point(surface, rng))
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


# -- tangential gradients and minimality ----------------------------------------

def test_tangential_gradient_hyperplane_exact_zero():
    assert geo.tangential_gradient_check(PLANE, np.array([0.3, 1.0, 2.0]), 1) == 0.0


def test_tangential_gradient_sphere_constant_field():
    x = np.array([0.0, 0.8, 0.0])
    assert geo.tangential_gradient_check(SPHERE, x, 1) < 1e-6


def test_tangential_gradient_helicoid_random_rays():
    rng = np.random.default_rng(29)
    for _ in range(10):
        x = _random_tube_point(HELICOID, rng, frac=0.7)
        if HELICOID.project(x).delta < 1e-3:
            continue
        assert geo.tangential_gradient_check(HELICOID, x, 2, h=1e-4) < 1e-5


@pytest.mark.parametrize("surface", [HELICOID, CATENOID])
def test_minimal_surfaces_have_zero_mean_curvature(surface):
    rng = np.random.default_rng(31)
    for _ in range(10):
        q = rng.uniform(-0.7, 0.7)
        H = geo.elementary_symmetric(np.asarray(surface.kappas_at(np.asarray(q))))
        assert abs(H[0]) < 1e-12


@pytest.mark.parametrize("name", sorted(ALL))
def test_delta0_admissibility(name):
    surface = ALL[name]
    if isinstance(surface, geo.Hyperplane):
        return
    qs = np.linspace(-0.7, 0.7, 15)
    if surface.is_radial:
        kmax = float(np.max(np.abs(surface.kappas(
            surface.project_batch(np.array([[surface.R, 0.0, 0.0]]))[0][0]))))
    else:
        kmax = float(np.max(np.abs(surface.kappas_at(qs))))
    assert kmax < 1.0 / (2.0 * surface.delta0)


# -- graph variant ---------------------------------------------------------------

def _bowl():
    return geo.Graph(lambda y: 0.5 * float(y @ y), box=[(-1.2, 1.2), (-1.2, 1.2)],
                     N=3, grad=lambda y: y, hess=lambda y: np.eye(2))


def test_graph_projection_and_curvature():
    g = _bowl()
    pr = g.project(np.array([0.0, 0.0, 0.3]))
    assert np.allclose(pr.z, [0.0, 0.0, 0.0], atol=1e-9)
    assert pr.side == -1  # above the graph is inside
    kap = g.kappas(np.zeros(3))
    assert np.allclose(kap, [1.0, 1.0], atol=1e-9)


def test_graph_ambiguous_projection():
    # symmetric double well: the midpoint above sees two nearest points
    phi = lambda y: (y[0] ** 2 - 1.0) ** 2
    g = geo.Graph(phi, box=[(-1.6, 1.6)], N=2)
    with pytest.raises(AmbiguousProjection):
        g.project(np.array([0.0, 0.6]))
