"""Coordinate maps: frozen examples, round trips, invariance, identities."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tribody.errors import NoPhysicalPreimage
from tribody.geometry import (
    MassTriple,
    UNIT_MASSES,
    area_sq_cayley_menger,
    cubic_discriminant,
    geo_from_rho,
    modified_volume,
    moment_of_inertia,
    rho_from_geo,
    rho_from_r,
    rho_is_physical,
    volume_form_coords,
)
from tribody.metrics import geo_bracket

from conftest import random_physical_rho


def test_mass_triple_derived():
    m = MassTriple(1.0, 2.0, 3.0)
    assert m.total == 6.0
    assert m.product == 6.0
    assert np.allclose(m.mu, [2 / 6, 6 / 6, 3 / 6])
    assert np.allclose(m.pair, [2 / 3, 6 / 5, 3 / 4])


def test_mass_triple_rejects_nonpositive():
    with pytest.raises(ValueError):
        MassTriple(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        MassTriple(1.0, -2.0, 1.0)


@pytest.mark.parametrize("r,expected", [
    ((1, 1, 1), (1, 1, 1)),
    ((3, 4, 5), (9, 16, 25)),
    ((0, 2, 2), (0, 4, 4)),
])
def test_rho_from_r_examples(r, expected):
    assert np.array_equal(rho_from_r(r), np.array(expected, dtype=float))


@pytest.mark.parametrize("rho,expected", [
    ((1, 1, 1), (1.5, 3 / 16, 1.0)),
    ((9, 16, 25), (25.0, 36.0, 3600.0)),   # 3-4-5 triangle, area 6
    ((0, 4, 4), (4.0, 0.0, 0.0)),
])
def test_geo_from_rho_examples(rho, expected):
    assert np.allclose(geo_from_rho(np.array(rho, float)), expected, rtol=1e-15, atol=1e-15)


def test_geo_permutation_invariance(rng):
    rho = random_physical_rho(rng)
    base = geo_from_rho(rho)
    for perm in itertools.permutations(range(3)):
        assert np.array_equal(geo_from_rho(rho[list(perm)]), base)


@pytest.mark.parametrize("geo,expected_rho", [
    ((1.5, 3 / 16, 1.0), (1, 1, 1)),
    ((25.0, 36.0, 3600.0), (9, 16, 25)),
])
def test_rho_from_geo_examples(geo, expected_rho):
    rho, mult = rho_from_geo(np.array(geo, float))
    assert np.allclose(rho, expected_rho, rtol=1e-12)


def test_rho_from_geo_multiplicity():
    assert rho_from_geo(geo_from_rho(np.array([1.0, 1.0, 1.0])))[1] == 1
    assert rho_from_geo(geo_from_rho(np.array([1.0, 1.0, 2.0])))[1] == 3
    assert rho_from_geo(geo_from_rho(np.array([1.0, 1.5, 2.0])))[1] == 6


def test_rho_from_geo_rejects_inconsistent_T():
    # T = 2 is inconsistent with the equilateral constraint 27 T = 8 P^3
    with pytest.raises(NoPhysicalPreimage):
        rho_from_geo(np.array([1.5, 3 / 16, 2.0]))


def test_rho_from_geo_roundtrip_many(rng):
    rhos = random_physical_rho(rng, n=10_000, min_area_ratio=1e-4)
    for rho in rhos:
        back, _ = rho_from_geo(geo_from_rho(rho))
        assert np.allclose(back, np.sort(rho), rtol=1e-12, atol=1e-14)


def test_collinear_roundtrip_clamps_to_zero():
    rho = np.array([1.0, 4.0, 9.0])      # sides 1, 2, 3: flat triangle
    back, _ = rho_from_geo(geo_from_rho(rho))
    assert np.allclose(back, [1, 4, 9], rtol=1e-9)
    rho2 = np.array([0.0, 4.0, 4.0])     # binary collision, root exactly zero
    back2, _ = rho_from_geo(geo_from_rho(rho2))
    assert back2[0] == 0.0
    assert np.allclose(back2, [0, 4, 4], atol=1e-12)


@pytest.mark.parametrize("rho,expected", [
    ((9, 16, 25), 36.0),
    ((1, 1, 1), 3 / 16),
    ((1, 4, 9), 0.0),                    # flat: sides 1,2,3 sit on a line
])
def test_area_sq_examples(rho, expected):
    assert area_sq_cayley_menger(np.array(rho, float)) == pytest.approx(expected, abs=1e-14)


def test_area_sq_negative_flagged_nonphysical():
    rho = np.array([1.0, 1.0, 9.0])      # sides 1, 1, 3 cannot close
    s = area_sq_cayley_menger(rho)
    assert s == pytest.approx(-45 / 16)
    assert not rho_is_physical(rho)
    assert rho_is_physical(np.array([1.0, 1.0, 1.0]))


@pytest.mark.parametrize("rho,m,expected", [
    ((1, 1, 1), (1, 1, 1), 1.0),
    ((9, 16, 25), (1, 1, 1), 50 / 3),
    ((1, 1, 1), (1, 2, 3), 11 / 6),
])
def test_moment_of_inertia_examples(rho, m, expected):
    assert moment_of_inertia(np.array(rho, float), MassTriple(*m)) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("rho,m,expected", [
    ((1, 1, 1), (1, 1, 1), (1.5, 3 / 16)),
    ((9, 16, 25), (1, 2, 3), (63 / 4, 108.0)),
    ((0, 4, 4), (2, 2, 2), (2.0, 0.0)),
])
def test_modified_volume_examples(rho, m, expected):
    pm, sm = modified_volume(np.array(rho, float), MassTriple(*m))
    assert pm == pytest.approx(expected[0], rel=1e-15)
    assert sm == pytest.approx(expected[1], rel=1e-15, abs=1e-15)


def test_modified_volume_reduces_at_unit_masses(rng):
    rho = random_physical_rho(rng)
    pm, sm = modified_volume(rho, UNIT_MASSES)
    p, s, _ = geo_from_rho(rho)
    assert pm == p and sm == s


def test_volume_form_coords_unit_masses(rng):
    rho = random_physical_rho(rng)
    assert np.array_equal(volume_form_coords(rho, UNIT_MASSES),
                          modified_volume(rho, UNIT_MASSES))


def test_cubic_discriminant_equals_geo_bracket(rng):
    rhos = random_physical_rho(rng, n=10_000, min_area_ratio=1e-4)
    geo = geo_from_rho(rhos)
    d1 = cubic_discriminant(geo)
    d2 = geo_bracket(geo)
    scale = np.maximum(np.abs(d1), np.abs(d2)) + 1e-300
    assert np.max(np.abs(d1 - d2) / scale) < 1e-10


def test_discriminant_is_product_of_root_gaps(rng):
    rho = random_physical_rho(rng)
    a, b, c = rho
    expect = ((a - b) * (b - c) * (c - a)) ** 2
    assert cubic_discriminant(geo_from_rho(rho)) == pytest.approx(expect, rel=1e-9)


def test_isosceles_zeroes_bracket(rng):
    for _ in range(100):
        a, b = rng.uniform(0.3, 3.0, 2)
        rho = np.array([a, a, b])
        geo = geo_from_rho(rho)
        scale = geo[0] ** 6
        assert abs(geo_bracket(geo)) < 1e-10 * scale


def test_equilateral_locus():
    for a in (0.5, 1.0, 2.7):
        p, s, t = geo_from_rho(np.array([a, a, a]))
        assert 12 * s == pytest.approx(p * p, rel=1e-15)
        assert 27 * t == pytest.approx(8 * p ** 3, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_roundtrip_property(a, b, c):
    rho = np.array([a, b, c])
    if area_sq_cayley_menger(rho) <= 1e-6 * rho.sum() ** 2:
        return
    back, _ = rho_from_geo(geo_from_rho(rho))
    assert np.allclose(back, np.sort(rho), rtol=1e-9)
