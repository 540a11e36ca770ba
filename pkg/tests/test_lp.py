import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from contractsynth import lp
from contractsynth.contracts import HPolytope


def vertex_enumeration(c, G, g):
    """Brute-force optimum of a bounded LP: best feasible intersection of d constraints."""
    d = G.shape[1]
    best = None
    for rows in itertools.combinations(range(G.shape[0]), d):
        A = G[list(rows)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, g[list(rows)])
        if np.all(G @ v <= g + 1e-9):
            val = c @ v
            if best is None or val < best:
                best = val
    return best


def random_bounded_lp(rng, d):
    k = int(rng.integers(1, 5)) if d == 2 else int(rng.integers(0, 3))  # at most 8 rows
    G = np.vstack([np.eye(d), -np.eye(d), rng.standard_normal((k, d))])
    g = np.concatenate([rng.uniform(0.5, 3, 2 * d), rng.uniform(-0.5, 2, k)])
    return rng.standard_normal(d), G, g


def test_spec_examples():
    r = lp.solve_lp(lp.LinearProgram(c=[-1.0], G=[[1.0]], g=[1.0]))
    assert r.status == lp.OPTIMAL and np.isclose(r.z_star[0], 1.0)
    G = np.vstack([np.eye(2), -np.eye(2)])
    r = lp.solve_lp(lp.LinearProgram(c=[1.0, 1.0], G=G, g=[1, 1, 0, 0]))
    assert r.status == lp.OPTIMAL and r.objective_value == pytest.approx(0.0)
    assert np.allclose(r.z_star, 0.0)
    r = lp.solve_lp(lp.LinearProgram(c=[0.0], G=[[1.0], [-1.0]], g=[0.0, -1.0]))
    assert r.status == lp.INFEASIBLE and r.infeasibility > 1e-9


def test_unbounded_detected():
    r = lp.solve_lp(lp.LinearProgram(c=[-1.0, 0.0], G=[[0.0, 1.0]], g=[1.0]))
    assert r.status == lp.UNBOUNDED


def test_equalities_and_labels():
    p = lp.LinearProgram(c=[1.0, 2.0], G=-np.eye(2), g=[0.0, 0.0], E=[[1.0, 1.0]], e=[3.0],
                         ineq_labels=["x>=0", "y>=0"], eq_labels=["sum"])
    r = lp.solve_lp(p)
    assert r.optimal and np.allclose(r.z_star, [3.0, 0.0]) and r.max_violation <= 1e-9
    bad = lp.LinearProgram(c=[0.0, 0.0], G=-np.eye(2), g=[0.0, 0.0], E=[[1.0, 1.0]], e=[-1.0],
                           ineq_labels=["x>=0", "y>=0"], eq_labels=["sum"])
    r = lp.solve_lp(bad)
    assert r.status == lp.INFEASIBLE and r.violated_rows


def test_redundant_equalities():
    E = np.array([[1.0, 1.0], [2.0, 2.0]])
    r = lp.solve_lp(lp.LinearProgram(c=[1.0, -1.0], G=np.vstack([np.eye(2), -np.eye(2)]),
                                     g=[5, 5, 5, 5], E=E, e=[1.0, 2.0]))
    assert r.optimal and r.objective_value == pytest.approx(-5.0 + -4.0)


@pytest.mark.parametrize("d", [2, 3])
def test_matches_vertex_enumeration(rng, d):
    solved = 0
    while solved < 50:
        c, G, g = random_bounded_lp(rng, d)
        ref = vertex_enumeration(c, G, g)
        r = lp.solve_lp(lp.LinearProgram(c=c, G=G, g=g))
        if ref is None:
            assert r.status == lp.INFEASIBLE
            continue
        assert r.status == lp.OPTIMAL
        assert abs(r.objective_value - ref) <= 1e-8
        assert r.max_violation <= 1e-9
        solved += 1


def test_agrees_with_highs(rng):
    pytest.importorskip("scipy")
    for _ in range(30):
        n = 6
        G = np.vstack([np.eye(n), -np.eye(n), rng.standard_normal((8, n))])
        g = np.concatenate([np.full(2 * n, 2.0), rng.uniform(0, 1, 8)])
        E = rng.standard_normal((2, n))
        e = E @ rng.uniform(-0.1, 0.1, n)
        p = lp.LinearProgram(c=rng.standard_normal(n), G=G, g=g, E=E, e=e)
        a, b = lp.solve_lp(p), lp.solve_lp(p, backend="highs")
        assert a.status == b.status
        if a.optimal:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-8)


def test_deterministic(rng):
    c, G, g = random_bounded_lp(rng, 3)
    p = lp.LinearProgram(c=c, G=G, g=g)
    a, b = lp.solve_lp(p), lp.solve_lp(p)
    assert a.z_star.tobytes() == b.z_star.tobytes() and a.iterations == b.iterations


def test_degenerate_program_terminates():
    # Many constraints through one vertex: Bland's rule must not cycle.
    angles = np.linspace(0, np.pi / 2, 9)
    G = np.column_stack([np.cos(angles), np.sin(angles)])
    G = np.vstack([G, -np.eye(2)])
    g = np.concatenate([np.zeros(9), [0.0, 0.0]])
    r = lp.solve_lp(lp.LinearProgram(c=[-1.0, -1.0], G=G, g=g))
    assert r.optimal and np.allclose(r.z_star, 0.0)


def test_unknown_backend():
    with pytest.raises(ValueError):
        lp.solve_lp(lp.LinearProgram(c=[1.0], G=[[1.0]], g=[1.0]), backend="nope")


def test_register_backend():
    calls = []

    def fake(p):
        calls.append(p)
        return lp._simplex(p)

    lp.register_backend("fake", fake)
    r = lp.solve_lp(lp.LinearProgram(c=[1.0], G=[[-1.0]], g=[2.0]), backend="fake")
    assert calls and r.optimal and r.z_star[0] == pytest.approx(-2.0)


def test_is_empty_examples(rng):
    assert not lp.is_empty(HPolytope.box([0, 0], [1, 1]))
    assert lp.is_empty(HPolytope([[1.0], [-1.0]], [-1.0, -1.0]))
    for _ in range(20):
        lo = rng.uniform(-5, 5, 3)
        hi = lo + rng.uniform(0.01, 2, 3)
        assert not lp.is_empty(HPolytope.box(lo, hi))


@given(st.integers(0, 2**31 - 1))
def test_random_polytope_with_interior_point_is_nonempty(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(3)
    H = rng.standard_normal((7, 3))
    h = H @ x + rng.uniform(0, 1, 7)
    assert not lp.is_empty(HPolytope(H, h))
