"""Shared samplers for random physical configurations."""

import numpy as np
import pytest

from tribody.geometry import MassTriple, area_sq_cayley_menger


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_physical_rho(rng, n=1, min_area_ratio=0.02, scale=1.0):
    """Squared side triples of genuine triangles.

    Sampled from random planar point triples, rejecting slivers with
    S < min_area_ratio * P^2 so metric-inversion tests stay well away
    from the degenerate loci.  Returns (n, 3) or (3,) when n == 1.
    """
    out = np.empty((n, 3))
    got = 0
    while got < n:
        pts = rng.uniform(0.0, 1.0, (3, 2)) * scale
        rho = np.array([
            np.sum((pts[0] - pts[1]) ** 2),
            np.sum((pts[1] - pts[2]) ** 2),
            np.sum((pts[2] - pts[0]) ** 2),
        ])
        p = rho.sum() / 2.0
        if area_sq_cayley_menger(rho) > min_area_ratio * p * p:
            out[got] = rho
            got += 1
    return out[0] if n == 1 else out


def random_masses(rng):
    m = rng.uniform(0.5, 3.0, 3)
    return MassTriple(*m)
