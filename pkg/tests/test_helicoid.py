import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import helicoid as hl
from twophase.errors import InvalidArgument

N_FAST = 10 ** 5  # most tests run at reduced sample counts for speed


def test_in_omega_examples():
    assert hl.in_omega([0.0, 1.0, 0.0]) is True
    assert hl.in_omega([0.0, -1.0, 0.0]) is False
    assert hl.on_surface_value(hl.helicoid_point(2.0, 1.3)) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(-3.0, 3.0), st.floats(-6.0, 6.0))
@settings(max_examples=60)
def test_parametric_points_lie_on_surface(rho, s):
    assert abs(hl.on_surface_value(hl.helicoid_point(rho, s))) < 1e-12 * (1 + abs(rho))


@given(st.floats(-8.0, 8.0), st.floats(-8.0, 8.0))
@settings(max_examples=60)
def test_screw_group_law(a, b):
    x = np.array([0.7, -1.1, 2.0])
    once = hl.screw(hl.screw(x, a), b)
    direct = hl.screw(x, a + b)
    assert np.linalg.norm(once - direct) < 1e-13 * (1 + np.linalg.norm(x))


def test_flip_is_involution_and_screw_identity():
    x = np.array([1.0, 2.0, -3.0])
    assert np.allclose(hl.flip(hl.flip(x)), x)
    assert np.allclose(hl.screw(x, 0.0), x)


def test_symmetry_identities_zero_violations():
    rep = hl.symmetry_identities_check(10 ** 4, rng_seed=3)
    assert rep["screw_violations"] == 0
    assert rep["flip_violations"] == 0
    assert rep["surface_coincidence_max"] < 1e-12
    assert rep["group_law_max"] < 1e-14


def test_u_half_on_surface():
    for t in (0.1, 1.0, 10.0):
        est = hl.u_gaussian_mc(np.zeros(3), t, N_FAST, rng_seed=11)
        assert est.within(0.5)


def test_u_half_off_axis_surface_point():
    x = hl.helicoid_point(1.5, 0.7)
    est = hl.u_gaussian_mc(x, 0.5, N_FAST, rng_seed=13)
    assert est.within(0.5)


def test_u_deep_point_small():
    # far inside Omega at tiny time the Gaussian mass outside is negligible
    x = np.array([0.0, 3.0, 0.0])
    est = hl.u_gaussian_mc(x, 0.01, N_FAST, rng_seed=17)
    assert est.mean < 1e-4


def test_plane_halfspace_matches_erfc():
    est = hl.plane_halfspace_mc(1.0, 0.25, 4 * N_FAST, rng_seed=5)
    exact = hl.plane_halfspace_exact(1.0, 0.25)
    assert exact == pytest.approx(0.5 * math.erfc(1.0), rel=1e-12)
    assert est.within(exact)


def test_cap_and_ball_densities_half():
    for r in (0.5, 1.0, 2.0):
        cap = hl.sphere_cap_density(np.zeros(3), r, N_FAST, rng_seed=7)
        ball = hl.ball_density(np.zeros(3), r, N_FAST, rng_seed=8)
        assert cap.within(0.5)
        assert ball.within(0.5)


def test_small_radius_cap_tangent_plane_regime():
    x = np.array([1.0, 0.0, 0.0])
    assert abs(hl.on_surface_value(x)) == 0.0  # on-surface check first
    est = hl.sphere_cap_density(x, 0.01, N_FAST, rng_seed=9)
    assert est.within(0.5)


def test_ball_density_equals_weighted_cap_average():
    # coarea: the ball average is the r'^2-weighted average of cap densities
    r = 1.0
    shells = (np.arange(8) + 0.5) / 8.0 * r
    weights = shells ** 2
    caps = [hl.sphere_cap_density(np.zeros(3), float(s), N_FAST, rng_seed=20 + i)
            for i, s in enumerate(shells)]
    weighted = float(np.sum(weights * [c.mean for c in caps]) / np.sum(weights))
    ball = hl.ball_density(np.zeros(3), r, 4 * N_FAST, rng_seed=30)
    stderr = math.sqrt(sum((w / np.sum(weights) * c.stderr) ** 2
                           for w, c in zip(weights, caps)) + ball.stderr ** 2)
    assert abs(weighted - ball.mean) < 4.0 * stderr


def test_proof_replay_identities():
    x = np.array([0.7, 0.4, -0.3])
    t = 1.0
    u_x = hl.u_gaussian_mc(x, t, 4 * N_FAST, rng_seed=1)
    u_gx = hl.u_gaussian_mc(hl.flip(x), t, 4 * N_FAST, rng_seed=2)
    u_kx = hl.u_gaussian_mc(hl.screw(x, 2.1), t, 4 * N_FAST, rng_seed=3)
    sigma = math.hypot(u_x.stderr, u_gx.stderr)
    assert abs(u_x.mean + u_gx.mean - 1.0) < 4.0 * sigma
    sigma2 = math.hypot(u_x.stderr, u_kx.stderr)
    assert abs(u_kx.mean - u_x.mean) < 4.0 * sigma2
    # combining both identities at a surface point forces the half value
    z = hl.helicoid_point(-0.9, 0.4)
    u_z = hl.u_gaussian_mc(z, t, 4 * N_FAST, rng_seed=4)
    u_gz = hl.u_gaussian_mc(hl.screw(z, -2.0 * z[2]), t, 4 * N_FAST, rng_seed=5)
    assert abs(u_z.mean + u_gz.mean - 1.0) < 4.0 * math.hypot(u_z.stderr, u_gz.stderr)


def test_bitwise_reproducibility():
    a = hl.u_gaussian_mc(np.zeros(3), 1.0, N_FAST, rng_seed=42)
    b = hl.u_gaussian_mc(np.zeros(3), 1.0, N_FAST, rng_seed=42)
    assert a == b
    c = hl.ball_density(np.ones(3) * 0.1, 0.5, N_FAST, rng_seed=42)
    d = hl.ball_density(np.ones(3) * 0.1, 0.5, N_FAST, rng_seed=42)
    assert c == d


def test_distinct_seeds_give_distinct_streams():
    a = hl._philox(6).standard_normal(8)
    b = hl._philox(7).standard_normal(8)
    assert not np.allclose(a, b)  # independent Philox keys


def test_invalid_arguments():
    with pytest.raises(InvalidArgument):
        hl.u_gaussian_mc(np.zeros(3), 0.0, 10)
    with pytest.raises(InvalidArgument):
        hl.sphere_cap_density(np.zeros(3), -1.0, 10)
    with pytest.raises(InvalidArgument):
        hl.ball_density(np.zeros(3), 0.0, 10)
