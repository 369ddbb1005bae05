# Seeded random instance generation shared by the round-trip command and
# the test suite.  The generator is numpy's PCG64 so runs are reproducible
# from the seed alone; complex entries are drawn uniformly from the unit
# disk (radius sqrt(u), angle 2*pi*v).

from __future__ import annotations

import numpy as np

from .poly import (
    MatrixAnalyticPoly1,
    MatrixAnalyticPoly2,
    MatrixLaurentPoly1,
    MatrixLaurentPoly2,
    adjoint_product,
    adjoint_product_list2,
)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def disk_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=shape))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    return radius * np.exp(1j * angle)


def random_analytic1(rng: np.random.Generator, r: int, m: int) -> MatrixAnalyticPoly1:
    return MatrixAnalyticPoly1([disk_uniform(rng, (r, r)) for _ in range(m + 1)])


def random_analytic2(
    rng: np.random.Generator, r: int, m1: int, m2: int
) -> MatrixAnalyticPoly2:
    coeffs = {
        (j, k): disk_uniform(rng, (r, r))
        for j in range(m1 + 1)
        for k in range(m2 + 1)
    }
    return MatrixAnalyticPoly2(r, r, coeffs)


def ridged_instance(
    rng: np.random.Generator, r: int, m: int, ridge: float = 0.1
) -> tuple[MatrixLaurentPoly1, MatrixAnalyticPoly1]:
    """Q = P*P + ridge * scale * I for a random analytic P: strictly
    positive by construction, with the generating P returned alongside."""
    p = random_analytic1(rng, r, m)
    base = adjoint_product(p)
    shift = ridge * max(base.scale, 1e-300) * np.eye(r)
    coeffs = dict(base.coeffs)
    coeffs[0] = coeffs.get(0, np.zeros((r, r), dtype=complex)) + shift
    return MatrixLaurentPoly1(r, coeffs), p


def sos_instance2(
    rng: np.random.Generator, r: int, m1: int, m2: int, terms: int = 2
) -> MatrixLaurentPoly2:
    """Random two-variable sum of squares (nonnegative on the torus)."""
    fs = [random_analytic2(rng, r, m1, m2) for _ in range(terms)]
    return adjoint_product_list2(fs)
