import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from hkhydro.stability import (
    AmplificationQuery,
    DegenerateAmplificationError,
    Region,
    amplification_mu,
    amplification_roots,
    curve_region_check,
    gamma_curve,
    gamma_polygon,
    is_stable,
    stability_map,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(re=finite, im=finite)
def test_roots_match_numpy(re, im):
    mu = complex(re, im)
    if abs(mu) < 1e-6:
        return
    ours = sorted(amplification_roots(mu), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    ref = sorted(np.roots([mu, -4.0, 1.0]), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    for a, b in zip(ours, ref):
        assert abs(a - b) <= 1e-8 * max(1.0, abs(b))


@given(re=finite, im=finite)
def test_roots_satisfy_equation_and_vieta(re, im):
    mu = complex(re, im)
    if abs(mu) < 1e-100:
        return
    r1, r2 = amplification_roots(mu)
    assert abs(r1) >= abs(r2)
    for r in (r1, r2):
        assert abs(mu * r * r - 4 * r + 1) <= 1e-12 * (abs(mu * r * r) + abs(4 * r) + 1)
    assert abs(r1 * r2 * mu - 1) <= 1e-12


def test_mu_zero_is_degenerate():
    with pytest.raises(DegenerateAmplificationError) as info:
        amplification_roots(0j)
    assert info.value.root == 0.25


def test_examples():
    assert amplification_mu(1.0, 1.0, 0.0) == 3 + 0j
    assert amplification_roots(3 + 0j) == pytest.approx((1.0, 1 / 3))
    v = is_stable(AmplificationQuery(1.0, 1.0, math.pi / 2))
    assert v.stable and v.mu == 3 + 2j and v.max_root_modulus < 1
    with pytest.raises(ValueError):
        AmplificationQuery(1.0, 0.0, 0.0)


@pytest.mark.parametrize("ag", [0.01, 0.1, 1.0, 10.0, 100.0])
def test_unconditional_stability_sweep(ag):
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    assert stability_map([ag], theta).max() <= 1 + 1e-12
    for th in theta[::16]:
        assert is_stable(AmplificationQuery(ag, 1.0, th)).stable


def test_anchor_points():
    p0, ppi = gamma_curve(0.0), gamma_curve(math.pi)
    assert abs(p0.mu - 3) <= 1e-14 and abs(ppi.mu + 5) <= 1e-14


@given(phi=st.floats(0, 2 * math.pi))
def test_curve_gives_unit_root(phi):
    mu = gamma_curve(phi).mu
    if abs(mu) < 1e-9:
        return
    assert min(abs(abs(r) - 1) for r in amplification_roots(mu)) <= 1e-9


@given(phi=st.floats(0, math.pi))
def test_curve_symmetry(phi):
    a, b = gamma_curve(phi), gamma_curve(2 * math.pi - phi)
    assert a.r == pytest.approx(b.r, abs=1e-14)
    assert a.s == pytest.approx(-b.s, abs=1e-14)


def test_curve_is_convex():
    _, r, s = gamma_polygon(4096)
    dr, ds = np.roll(r, -1) - r, np.roll(s, -1) - s
    cross = dr * np.roll(ds, -1) - ds * np.roll(dr, -1)
    assert np.all(cross >= -1e-12)
    # analytic cross product r' s'' - s' r'' = 24 (1 - cos phi)
    phi = np.linspace(0, 2 * np.pi, 1001)
    rp, sp = -4 * np.sin(phi) + 2 * np.sin(2 * phi), 4 * np.cos(phi) - 2 * np.cos(2 * phi)
    rpp, spp = -4 * np.cos(phi) + 4 * np.cos(2 * phi), -4 * np.sin(phi) + 4 * np.sin(2 * phi)
    assert np.allclose(rp * spp - sp * rpp, 24 * (1 - np.cos(phi)), atol=1e-12)


def test_region_examples():
    assert curve_region_check(0j) is Region.INSIDE
    assert curve_region_check(10 + 0j) is Region.OUTSIDE
    assert curve_region_check(3 + 0j) is Region.ON
    assert curve_region_check(3 + 2j) is Region.OUTSIDE
    # polygon vertices are on the polygon by construction
    phi = 2 * math.pi * 100 / 4096
    assert curve_region_check(gamma_curve(phi).mu) is Region.ON
    with pytest.raises(ValueError):
        curve_region_check(1j, n_samples=16)


@given(re=st.floats(-8, 6), im=st.floats(-6, 6))
def test_region_matches_shapely(re, im):
    _, r, s = gamma_polygon(4096)
    poly = Polygon(np.column_stack([r, s]))
    pt = Point(re, im)
    region = curve_region_check(complex(re, im))
    if poly.exterior.distance(pt) < 1e-6:
        return
    assert (region is Region.INSIDE) == poly.contains(pt)


def test_region_consistent_with_root_modulus():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-8, 6, 10_000) + 1j * rng.uniform(-6, 6, 10_000)
    _, r, s = gamma_polygon(4096)
    poly = Polygon(np.column_stack([r, s]))
    mismatches = 0
    checked = 0
    for mu in pts:
        if abs(mu) < 1e-6 or poly.exterior.distance(Point(mu.real, mu.imag)) < 1e-3:
            continue
        checked += 1
        unstable = max(abs(z) for z in amplification_roots(mu)) > 1 + 1e-12
        inside = poly.contains(Point(mu.real, mu.imag))
        mismatches += unstable != inside
    assert checked > 9000 and mismatches == 0


@given(re=finite, im=finite)
def test_root_residual_invariant(re, im):
    # a one-ulp error in the root near 4/mu alone leaves a residual ~ 32 eps / |mu|
    mu = complex(re, im)
    if abs(mu) < 1e-4:
        return
    for r in amplification_roots(mu):
        assert abs(mu * r * r - 4 * r + 1) <= 1e-10 * (1 + abs(mu))


def test_two_stability_views_agree():
    rng = np.random.default_rng(17)
    a = rng.uniform(-100, 100, 10_000)
    g = rng.uniform(1e-3, 100, 10_000)
    th = rng.uniform(0, 2 * np.pi, 10_000)
    for k in range(10_000):
        q = AmplificationQuery(a[k], g[k], th[k])
        verdict = is_stable(q)
        region = curve_region_check(verdict.mu, 256)
        assert verdict.stable == (region is not Region.INSIDE)
        assert verdict.max_root_modulus <= 1 + 1e-9
