import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from contractsynth.bernstein import (bernstein_matrix, bernstein_vector, build_bernstein, control_points,
                                     eval_bernstein)
from contractsynth.poly_basis import build_basis, eval_segment_poly


def test_bernstein_vector_examples():
    assert np.array_equal(bernstein_vector(4, 0.0), [1, 0, 0, 0, 0])
    assert np.array_equal(bernstein_vector(4, 1.0), [0, 0, 0, 0, 1])
    assert np.allclose(bernstein_vector(2, 0.5), [0.25, 0.5, 0.25], rtol=0, atol=0)
    with pytest.raises(ValueError):
        bernstein_vector(3, 1.5)


@given(st.integers(1, 20), st.floats(0, 1))
def test_bernstein_vector_matches_binomial_formula(N, s):
    ref = [math.comb(N, j) * s**j * (1 - s) ** (N - j) for j in range(N + 1)]
    b = bernstein_vector(N, s)
    assert np.all(b >= 0)
    assert np.allclose(b, ref, atol=1e-13)


def test_partition_of_unity(rng):
    for N in (1, 5, 12):
        B = bernstein_matrix(N, rng.uniform(0, 1, 1000))
        assert np.max(np.abs(B.sum(axis=1) - 1.0)) <= 1e-14


def test_build_bernstein_n1():
    data = build_bernstein(build_basis(1, 1.0))
    assert np.allclose(data.M_matrix, [[1, 1 / 3], [0, 2 / 3]], atol=1e-15)
    assert np.allclose(data.M_inverse, [[1, -0.5], [0, 1.5]], atol=1e-14)


@pytest.mark.parametrize("N", range(1, 9))
def test_conversion_matrix_invertible(N):
    data = build_bernstein(build_basis(N, 0.7))
    assert np.allclose(data.M_matrix @ data.M_inverse, np.eye(N + 1), atol=1e-9, rtol=0)
    assert np.allclose(data.M_matrix.sum(axis=0), 1.0, atol=1e-14)
    assert np.allclose(data.M_inverse[:, 0], np.eye(N + 1)[:, 0], atol=1e-12)


def test_control_point_examples():
    b = build_basis(1, 1.0)
    data = build_bernstein(b)
    assert np.allclose(control_points(data, [1.0], [[4.0]]), [[1.0, 5.5]])
    # linear t / tau sampled at the nodes
    assert np.allclose(control_points(data, [0.0], [[2.0 / 3.0]]), [[0.0, 1.0]], atol=1e-15)
    b5 = build_basis(5, 2.0)
    d5 = build_bernstein(b5)
    c = np.array([3.0, -1.0])
    P = control_points(d5, c, np.tile(c[:, None], (1, 5)))
    assert np.allclose(P, c[:, None], atol=1e-12)


def test_enclosure_of_random_polynomials(rng):
    for trial in range(1000):
        N = int(rng.integers(1, 9))
        tau = float(rng.uniform(0.1, 3.0))
        b = build_basis(N, tau)
        data = build_bernstein(b)
        p = np.polynomial.Polynomial(rng.standard_normal(N + 1), domain=[0, tau], window=[-1, 1])
        P = control_points(data, [p(0.0)], p(b.nodes[1:])[None, :])
        vals = p(np.linspace(0, tau, 200))
        slack = 1e-9 * max(1.0, np.abs(P).max())
        assert vals.min() >= P.min() - slack and vals.max() <= P.max() + slack, trial


@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_round_trip_and_endpoints(N, seed):
    rng = np.random.default_rng(seed)
    tau = rng.uniform(0.2, 2.0)
    b = build_basis(N, tau)
    data = build_bernstein(b)
    x0 = rng.standard_normal(2)
    C = rng.standard_normal((2, N))
    P = control_points(data, x0, C)
    assert np.allclose(P[:, 0], eval_segment_poly(b, x0, C, 0.0), atol=1e-10)
    assert np.allclose(P[:, -1], eval_segment_poly(b, x0, C, tau), atol=1e-10)
    for t in rng.uniform(0, tau, 100):
        assert np.allclose(eval_bernstein(P, tau, t), eval_segment_poly(b, x0, C, t), atol=1e-9)
