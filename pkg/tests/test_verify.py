from types import SimpleNamespace

import numpy as np
import pytest

from contractsynth.contracts import ContractPiece, HPolytope, PiecewiseContract, constant_contract
from contractsynth.interpolation import PiecewisePolynomial
from contractsynth.poly_basis import build_basis
from contractsynth.robot import INITIAL_STATE, robot_contract, robot_system
from contractsynth.synthesis import SynthesisProblem, synthesize
from contractsynth.systems import LtiSystem
from contractsynth.verify import certification_grid, certify, exact_simulate, monomial_coefficients


@pytest.fixture(scope="module")
def robot():
    problem = SynthesisProblem(robot_system(), robot_contract(), INITIAL_STATE, 5, 5)
    return problem, synthesize(problem)


def test_robot_implements(robot):
    problem, r = robot
    rep = certify(r, problem.contract, problem.sys_c, problem.x0)
    assert rep.implements
    assert rep.max_trajectory_mismatch <= 1e-6
    assert rep.max_input_violation <= 1e-7 and rep.max_state_violation <= 1e-7
    assert rep.grid_points_per_segment == 200
    assert rep.max_collocation_residual <= 1e-7


def test_tightened_guarantees_fail(robot):
    problem, r = robot
    pieces = tuple(ContractPiece(p.t_start, p.t_end, p.inputs,
                                 HPolytope(p.states.H, p.states.h - 0.3)) for p in problem.contract.pieces)
    tight = PiecewiseContract(problem.contract.T, pieces)
    rep = certify(r, tight, problem.sys_c, problem.x0)
    assert not rep.implements and rep.worst_kind == "state"


def bump_input(peak=1.5):
    """u(t) = 4 peak t (1 - t) on [0, 1], maximal at t = 1/2."""
    b = build_basis(2, 1.0)
    f = lambda t: 4 * peak * t * (1 - t)
    return PiecewisePolynomial(b, [[f(0.0)]], [f(b.nodes[1:])[None, :]])


def test_hand_built_input_violation_located():
    u = bump_input()
    contract = constant_contract(1.0, HPolytope.box([-1.0], [1.0]), HPolytope.box([-10.0], [10.0]))
    rep = certify(SimpleNamespace(u_c=u), contract, LtiSystem([[0.0]], [[1.0]]), [0.0], points_per_segment=201)
    assert not rep.implements
    assert rep.worst_kind == "input"
    assert rep.worst_time == pytest.approx(0.5)
    assert rep.max_input_violation == pytest.approx(0.5)


def test_grid_contains_breakpoints_and_nodes(robot):
    problem, r = robot
    grid = certification_grid(problem.contract, r.u_c, 37)
    for t in [0, 1, 2, 3, 4, 5]:
        assert np.any(grid == t)
    for k in range(5):
        for t in k + r.u_c.basis.nodes:
            assert np.any(np.isclose(grid, t, atol=0, rtol=0) | (np.abs(grid - t) < 1e-15))


def test_breakpoint_checked_against_both_neighbours():
    # The state is 1 at t = 1 exactly; piece 0 allows [0, 2], piece 1 only [-1, 0.5].
    # Only a check against the left piece would pass.
    sys_c = LtiSystem([[0.0]], [[1.0]])
    b = build_basis(2, 1.0)
    u = PiecewisePolynomial(b, [[1.0], [-1.0]], [np.ones((1, 2)), -np.ones((1, 2))])
    x = PiecewisePolynomial(b, [[0.0], [1.0]], [b.nodes[1:][None, :], (1.0 - b.nodes[1:])[None, :]])
    U = HPolytope.box([-2.0], [2.0])
    contract = PiecewiseContract(2.0, (ContractPiece(0.0, 1.0, U, HPolytope.box([0.0], [2.0])),
                                       ContractPiece(1.0, 2.0, U, HPolytope.box([-1.0], [1.0]))))
    rep = certify(SimpleNamespace(u_c=u, x_c=x), contract, sys_c, [0.0], points_per_segment=11)
    assert rep.implements
    contract2 = PiecewiseContract(2.0, (ContractPiece(0.0, 1.0, U, HPolytope.box([0.0], [2.0])),
                                        ContractPiece(1.0, 2.0, U, HPolytope.box([-1.0], [0.5]))))
    rep = certify(SimpleNamespace(u_c=u, x_c=x), contract2, sys_c, [0.0], points_per_segment=11)
    assert not rep.implements and rep.worst_time == pytest.approx(1.0)


def test_grid_refinement_stable(robot):
    problem, r = robot
    a = certify(r, problem.contract, problem.sys_c, problem.x0, points_per_segment=200)
    b = certify(r, problem.contract, problem.sys_c, problem.x0, points_per_segment=400)
    assert abs(a.max_input_violation - b.max_input_violation) <= 1e-8
    assert abs(a.max_state_violation - b.max_state_violation) <= 1e-8


def test_monomial_coefficients_round_trip():
    u = bump_input(1.0)
    C = monomial_coefficients(u, 0)
    assert np.allclose(C, [[0.0, 4.0, -4.0]], atol=1e-12)


def test_exact_simulate_matches_scipy_ode(robot):
    scipy_integrate = pytest.importorskip("scipy.integrate")
    problem, r = robot
    sys_c = problem.sys_c
    sol = scipy_integrate.solve_ivp(lambda t, x: sys_c.A @ x + sys_c.B @ r.u_c(t), (0, 5), problem.x0,
                                    rtol=1e-11, atol=1e-12, dense_output=True, max_step=0.05)
    t = np.linspace(0, 5, 41)
    assert np.allclose(exact_simulate(sys_c, problem.x0, r.u_c, t), sol.sol(t), atol=1e-8)


def test_exact_simulate_rejects_bad_grid(robot):
    problem, r = robot
    with pytest.raises(ValueError):
        exact_simulate(problem.sys_c, problem.x0, r.u_c, [1.0, 0.5])
    with pytest.raises(ValueError):
        exact_simulate(problem.sys_c, problem.x0, r.u_c, [0.0, 6.0])
