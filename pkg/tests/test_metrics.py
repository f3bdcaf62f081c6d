"""Cometric determinant identities, push-forwards, degeneracy, curvature."""

import numpy as np
import pytest

from tribody.errors import BinaryCollision, DegenerateMetric
from tribody.geometry import MassTriple, UNIT_MASSES, geo_from_rho, geo_jacobian
from tribody.metrics import (
    DegeneracyClass,
    brioschi_gaussian,
    classify_degeneracy,
    cometric_geo,
    cometric_r,
    cometric_rho,
    cometric_vol,
    cometric_vol_mass,
    det_cometric_geo,
    det_cometric_r,
    det_cometric_rho,
    det_cometric_rho_inertia,
    det_cometric_vol,
    det_cometric_vol_mass,
    gaussian_curvature_fd,
    geo_bracket,
    ricci_scalar_vol,
    ricci_scalar_vol_fd,
    ricci_scalar_vol_mass,
    vol_metric_covariant,
)

from conftest import random_masses, random_physical_rho


# --- distance-chart metric -------------------------------------------------

def test_cometric_r_unit_equilateral():
    g = cometric_r(np.array([1.0, 1.0, 1.0]), UNIT_MASSES)
    assert np.allclose(np.diag(g), 1.0)
    off = g[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 0.25)
    assert np.linalg.det(g) == pytest.approx(27 / 32, rel=1e-14)
    assert det_cometric_r(np.array([1.0, 1.0, 1.0]), UNIT_MASSES) == pytest.approx(27 / 32)


def test_cometric_r_345():
    r = np.array([3.0, 4.0, 5.0])
    det = np.linalg.det(cometric_r(r, UNIT_MASSES))
    # (9/2) * (50/3) * 36 / (9 * 16 * 25) = 3/4
    assert det == pytest.approx(3 / 4, rel=1e-13)
    assert det_cometric_r(r, UNIT_MASSES) == pytest.approx(det, rel=1e-13)


def test_cometric_r_binary_collision():
    with pytest.raises(BinaryCollision):
        cometric_r(np.array([0.0, 1.0, 1.0]), UNIT_MASSES)


def test_det_r_factorization_random(rng):
    rhos = random_physical_rho(rng, n=10_000, min_area_ratio=1e-4)
    rs = np.sqrt(rhos)
    for _ in range(1):
        m = random_masses(rng)
        dets = np.linalg.det(cometric_r(rs, m))
        facts = det_cometric_r(rs, m)
        assert np.max(np.abs(dets - facts) / np.abs(facts)) < 1e-12


# --- squared-distance metric ------------------------------------------------

def test_cometric_rho_unit_equilateral():
    g = cometric_rho(np.array([1.0, 1.0, 1.0]), UNIT_MASSES)
    assert np.allclose(g, np.array([[4, 1, 1], [1, 4, 1], [1, 1, 4]], dtype=float))
    assert np.linalg.det(g) == pytest.approx(54.0, rel=1e-14)
    assert det_cometric_rho(np.array([1.0, 1.0, 1.0]), UNIT_MASSES) == pytest.approx(54.0)


def test_cometric_rho_regular_at_binary_collision():
    g = cometric_rho(np.array([0.0, 4.0, 4.0]), UNIT_MASSES)
    assert np.all(np.isfinite(g))
    assert np.linalg.det(g) == pytest.approx(0.0, abs=1e-12)   # collinear: S = 0


def test_cometric_rho_masses_example():
    m = MassTriple(1.0, 2.0, 3.0)
    rho = np.array([1.0, 1.0, 1.0])
    assert np.linalg.det(cometric_rho(rho, m)) == pytest.approx(11.0, rel=1e-13)
    assert det_cometric_rho(rho, m) == pytest.approx(11.0, rel=1e-14)


def test_det_rho_factorizations_random(rng):
    rhos = random_physical_rho(rng, n=10_000, min_area_ratio=1e-4)
    m = random_masses(rng)
    dets = np.linalg.det(cometric_rho(rhos, m))
    assert np.max(np.abs(dets / det_cometric_rho(rhos, m) - 1.0)) < 1e-12
    assert np.max(np.abs(dets / det_cometric_rho_inertia(rhos, m) - 1.0)) < 1e-12
    assert np.all(dets > 0)               # positive definite on physical shapes


# --- shape-chart metric ------------------------------------------------------

def test_cometric_geo_equilateral_example():
    geo = np.array([1.5, 3 / 16, 1.0])
    g = cometric_geo(geo)
    expect = np.array([[4.5, 1.125, 9.0],
                       [1.125, 0.28125, 2.25],
                       [9.0, 2.25, 18.0]])
    assert np.allclose(g, expect, rtol=1e-15)
    assert det_cometric_geo(geo) == pytest.approx(0.0, abs=1e-12)
    # bracket at the equilateral point: 54 - 27 - 27 = 0
    assert geo_bracket(geo) == pytest.approx(0.0, abs=1e-13)


def test_cometric_geo_isosceles_bracket():
    geo = geo_from_rho(np.array([4.0, 4.0, 1.0]))
    assert tuple(geo) == (4.5, 15 / 16, 16.0)
    # 15552 - 8640 - 6912 = 0
    assert geo_bracket(geo) == pytest.approx(0.0, abs=1e-9)
    assert det_cometric_geo(geo) == pytest.approx(0.0, abs=1e-8)


def test_cometric_geo_collinear():
    geo = np.array([4.0, 0.0, 3.0])
    assert det_cometric_geo(geo) == 0.0


def test_det_geo_factorization_random(rng):
    rhos = random_physical_rho(rng, n=10_000, min_area_ratio=1e-4)
    geos = geo_from_rho(rhos)
    dets = np.linalg.det(cometric_geo(geos))
    facts = det_cometric_geo(geos)
    scale = np.abs(facts) + 1e-300
    assert np.max(np.abs(dets - facts) / scale) < 1e-10
    # determinant of definite sign on physical scalene shapes
    assert np.all(facts > -1e-12 * scale)


def test_geo_pushforward_of_rho(rng):
    rhos = random_physical_rho(rng, n=300, min_area_ratio=1e-3)
    for rho in rhos:
        jac = geo_jacobian(rho)
        pushed = jac @ cometric_rho(rho, UNIT_MASSES) @ jac.T
        direct = cometric_geo(geo_from_rho(rho))
        assert np.allclose(pushed, direct, rtol=1e-10, atol=1e-10)


# --- volume metric ------------------------------------------------------------

def test_cometric_vol_examples():
    assert det_cometric_vol(1.5, 3 / 16) == pytest.approx(0.0, abs=1e-15)
    g = cometric_vol(2.0, 0.25)
    assert np.allclose(g, [[6.0, 1.5], [1.5, 0.5]])
    assert np.linalg.det(g) == pytest.approx(3 / 4, rel=1e-14)
    assert det_cometric_vol(2.0, 0.25) == pytest.approx(3 / 4)


def test_cometric_vol_is_geo_block(rng):
    rho = random_physical_rho(rng)
    p, s, _ = geo_from_rho(rho)
    g3 = cometric_geo(geo_from_rho(rho))
    g2 = cometric_vol(p, s)
    assert np.array_equal(g3[:2, :2], g2)


def test_cometric_vol_mass_scaling():
    m = MassTriple(1.0, 2.0, 3.0)
    g = cometric_vol_mass(2.0, 0.25, m)
    assert np.allclose(g, cometric_vol(2.0, 0.25) / 3.0)   # M/(3 m1 m2 m3) = 1/3
    det = det_cometric_vol_mass(2.0, 0.25, m)
    assert det == pytest.approx(np.linalg.det(g), rel=1e-13)


def test_det_vol_factorizations_random(rng):
    pm = rng.uniform(0.5, 4.0, 10_000)
    sm = rng.uniform(0.01, 1.0, 10_000)
    m = random_masses(rng)
    dets = np.linalg.det(cometric_vol_mass(pm, sm, m))
    facts = det_cometric_vol_mass(pm, sm, m)
    assert np.max(np.abs(dets / facts - 1.0)) < 1e-12
    dets_u = np.linalg.det(cometric_vol(pm, sm))
    assert np.max(np.abs(dets_u / det_cometric_vol(pm, sm) - 1.0)) < 1e-12


# --- degeneracy classification -------------------------------------------------

@pytest.mark.parametrize("geo,expected", [
    ((0.0, 0.0, 0.0), DegeneracyClass.TRIPLE_COLLISION),
    ((4.0, 0.0, 0.0), DegeneracyClass.COLLINEAR),
    ((4.5, 15 / 16, 16.0), DegeneracyClass.ISOSCELES),
])
def test_classify_examples(geo, expected):
    assert classify_degeneracy(np.array(geo, float)) is expected


def test_classify_regular(rng):
    rho = np.array([1.0, 1.7, 2.2])
    assert classify_degeneracy(geo_from_rho(rho)) is DegeneracyClass.REGULAR


# --- curvature -----------------------------------------------------------------

def test_brioschi_on_sphere():
    # ds^2 = a^2 (dth^2 + sin^2 th dph^2): R = 2/a^2
    a, th = 2.0, 0.7

    def metric(x, y):
        return a * a, 0.0, a * a * np.sin(x) ** 2

    val = 2.0 * gaussian_curvature_fd(metric, th, 0.3, 1e-5)
    assert val == pytest.approx(2.0 / a ** 2, rel=1e-8)


def test_brioschi_scaling_law():
    # curvature of c*g is curvature of g divided by c
    a, th, c = 1.3, 0.9, 2.5

    def metric(x, y):
        return a * a, 0.0, a * a * np.sin(x) ** 2

    def scaled(x, y):
        e, f, g = metric(x, y)
        return c * e, c * f, c * g

    r1 = 2.0 * gaussian_curvature_fd(metric, th, 0.1, 1e-5)
    r2 = 2.0 * gaussian_curvature_fd(scaled, th, 0.1, 1e-5)
    assert r2 == pytest.approx(r1 / c, rel=1e-7)


def test_vol_metric_is_flat_but_claim_is_not():
    rep = ricci_scalar_vol(2.0, 0.25)
    assert abs(rep.value) < 1e-10
    assert rep.claimed == pytest.approx(-22 / 3, rel=1e-13)   # 3 S P (S-3) / D^2
    assert rep.difference == pytest.approx(abs(rep.claimed), rel=1e-9)


def test_vol_ricci_fd_order2_convergence():
    # |R_fd(h) - R_analytic| should drop ~4x when h halves
    p, s = 2.0, 0.25
    exact = ricci_scalar_vol(p, s).value
    h = 1e-2
    e1 = abs(ricci_scalar_vol_fd(p, s, h) - exact)
    e2 = abs(ricci_scalar_vol_fd(p, s, h / 2) - exact)
    assert e1 / e2 == pytest.approx(4.0, rel=0.25)


def test_vol_ricci_degenerate():
    with pytest.raises(DegenerateMetric):
        ricci_scalar_vol(2.0, 4.0 / 12.0)      # P^2 = 12 S


def test_vol_ricci_mass_version():
    m = MassTriple(1.0, 2.0, 3.0)
    rep = ricci_scalar_vol_mass(2.0, 0.25, m)
    assert abs(rep.value) < 1e-10
    w = 4.0 - 3.0
    claimed = 6.0 * 2.0 * (0.25 - 3.0) / (6.0 * 0.25 * w * w)
    assert rep.claimed == pytest.approx(claimed, rel=1e-13)


def test_vol_metric_covariant_inverts_cometric(rng):
    p, s = 2.3, 0.31
    e, f, g = vol_metric_covariant(p, s)
    cov = np.array([[e, f], [f, g]])
    assert np.allclose(cov @ cometric_vol(p, s), np.eye(2), atol=1e-12)
