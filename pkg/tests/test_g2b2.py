import numpy as np
import pytest

from reference import check_trace, dense_samples, grid_optimum, grid_slack
from robustmax import load_fixture
from robustmax.exceptions import InputError
from robustmax.functions import AffinePiece, PiecewiseLinearConvex, RobustObjective, tangent_plane
from robustmax.g2b2 import G2Node, branch_g2, evaluate_node, node_lp, pick_refinement_target, solve_g2b2
from robustmax.geometry import Polytope
from robustmax.instances import generate_instance
from robustmax.oracles import SeparationResult, make_oracle


@pytest.fixture(scope="module")
def inst2():
    return load_fixture("instance2")


@pytest.fixture(scope="module")
def root(inst2):
    node = G2Node(0, inst2.feasible_set, tuple(inst2.initial_planes))
    assert evaluate_node(node, inst2.objective, make_oracle("exact"), 1e-4)
    return node


def test_root_bounds(root):
    assert [r.value for r in root.sep] == pytest.approx([905.0, 956.0], abs=0.01)
    assert root.accurate == frozenset()
    assert root.theta == pytest.approx(873.65, abs=0.01)
    assert root.upper == pytest.approx(873.65, abs=0.01)
    # maximizer sits on x1 = 0 with both caps tight
    assert root.point == pytest.approx([0.0, 8.628], abs=1e-3)


def test_root_lower_bound_is_objective_at_lp_point(inst2, root):
    assert root.lower == pytest.approx(inst2.objective(root.point))
    assert root.lower == pytest.approx(61.71, abs=0.01)


def test_refinement_target_is_largest_gap(root):
    assert pick_refinement_target(root) == 1


def test_refinement_ties_and_errors(inst2):
    node = G2Node(0, inst2.feasible_set, tuple(inst2.initial_planes))
    node.sep = [SeparationResult(np.zeros(2), 3.0, True), SeparationResult(np.zeros(2), 3.0, True)]
    assert pick_refinement_target(node) == 0
    node.accurate = frozenset({0, 1})
    with pytest.raises(InputError):
        pick_refinement_target(node)


def test_first_branch_cut_and_children(inst2, root):
    F = inst2.objective
    kind, children, cut = branch_g2(root, 1, F)
    assert kind == "split"
    assert cut.a == pytest.approx([-114.03, -48.87])
    assert cut.b == pytest.approx(780.81)
    (P1, planes1), (P2, planes2) = children
    assert planes1 == root.approx
    assert planes2[0] == root.approx[0] and planes2[1] == cut
    pts = np.random.default_rng(0).uniform(0, 10, (2000, 2))
    assert (P1.contains_many(pts) | P2.contains_many(pts)).all()
    old = root.approx[1]
    in1, in2 = P1.contains_many(pts, tol=0), P2.contains_many(pts, tol=0)
    assert np.all(old.values(pts[in1]) >= cut.values(pts[in1]) - 1e-9)
    assert np.all(old.values(pts[in2]) <= cut.values(pts[in2]) + 1e-9)


def test_cut_underestimates_candidate(inst2):
    f2 = inst2.candidates[1]
    cut = tangent_plane(f2, [0.0, 0.0])
    pts = np.random.default_rng(1).uniform(0, 10, (1000, 2))
    assert np.all(cut.values(pts) <= f2.values(pts) + 1e-9)


def test_converged_when_cut_repeats_plane(inst2):
    F = inst2.objective
    x = np.array([3.0, 4.0])
    planes = tuple(tangent_plane(g, x) for g in F)
    node = G2Node(0, inst2.feasible_set, planes)
    node.sep = [SeparationResult(x, 1.0, True), SeparationResult(x, 1.0, True)]
    kind, children, _ = branch_g2(node, 0, F)
    assert kind == "converged" and children == []


def test_outside_anchor_rules(inst2):
    F = inst2.objective
    X = Polytope([0, 0], [10, 10], [[-1.0, -1.0]], [-10.0])
    node = G2Node(0, X, tuple(inst2.initial_planes))
    assert evaluate_node(node, F, make_oracle("box"), 1e-4)
    k = pick_refinement_target(node)
    assert not X.contains(node.sep[k].point)
    kind, children, _ = branch_g2(node, k, F, outside="bisect")
    assert kind == "bisect" and all(planes == node.approx for _, planes in children)
    kind, _, _ = branch_g2(node, k, F, outside="cut")
    assert kind in ("split", "replace")
    with pytest.raises(InputError):
        branch_g2(node, k, F, outside="project")


def test_node_lp_accurate_rows_drop_gap():
    X = Polytope([0.0], [1.0])
    planes = (AffinePiece([1.0], 0.0), AffinePiece([-1.0], 1.0))
    x, theta = node_lp(X, planes, [5.0, 5.0], frozenset({0, 1}), 0.1)
    assert theta == pytest.approx(0.6)
    x, theta = node_lp(X, planes, [5.0, 5.0], frozenset(), 0.1)
    assert theta == pytest.approx(5.6)


@pytest.mark.parametrize("oracle", ["exact", "box"])
def test_solves_quadratic_fixture(inst2, oracle):
    res = solve_g2b2(inst2.objective, inst2.feasible_set, 1e-4, oracle,
                     initial_planes=inst2.initial_planes, trace=True)
    assert res.solved and res.certified
    assert res.gap <= 1e-4 + 1e-9 * abs(res.upper)
    grid_val, _, step = grid_optimum(inst2.objective, [0, 0], [10, 10])
    assert res.value >= grid_val - 1e-4
    assert res.value <= grid_val + grid_slack(inst2.objective, [0, 0], [10, 10], step)
    assert sum(res.tangent_planes) > 0
    assert 0 < res.separation_time <= res.wall_time


def test_trace_bounds_are_valid(inst2):
    res = solve_g2b2(inst2.objective, inst2.feasible_set, 1e-4, "exact",
                     initial_planes=inst2.initial_planes, trace=True)
    assert check_trace(inst2.objective, inst2.feasible_set, res.trace, np.random.default_rng(2)) == []
    f = inst2.candidates
    pts = np.random.default_rng(3).uniform(0, 10, (1000, 2))
    for k, cut in res.trace.cuts:
        assert np.all(cut.values(pts) <= f[k].values(pts) + 1e-7)


def test_heuristic_oracle_is_uncertified(inst2):
    res = solve_g2b2(inst2.objective, inst2.feasible_set, 1e-4, "lc1", initial_planes=inst2.initial_planes)
    assert res.status == "uncertified" and not res.certified
    assert res.gap is None and res.gap_pct is None
    assert not res.solved


def test_single_affine_candidate_one_bound():
    F = RobustObjective([PiecewiseLinearConvex([AffinePiece([1.0, 2.0], 3.0)])])
    res = solve_g2b2(F, [(0, 1), (0, 1)], 1e-4, "exact")
    assert res.iterations == 0
    assert res.value == pytest.approx(6.0)
    assert res.gap <= 1e-4


def test_default_anchor_is_box_center():
    inst = generate_instance(2, 2, 3)
    F, X = inst.objective, inst.feasible_set
    a = solve_g2b2(F, X, 1e-3, "exact")
    b = solve_g2b2(F, X, 1e-3, "exact", initial_planes=[tangent_plane(g, [0.0, 0.0]) for g in F])
    assert a.value == b.value


@pytest.mark.parametrize("seed", range(4))
def test_random_quadratics_against_grid(seed):
    inst = generate_instance(2, 2 + seed, 40 + seed)
    F, X = inst.objective, inst.feasible_set
    res = solve_g2b2(F, X, 1e-3, "exact")
    assert res.solved and res.gap <= 1e-3 + 1e-9 * abs(res.upper)
    grid_val, _, step = grid_optimum(F, X.lo, X.hi)
    assert res.value >= grid_val - 1e-3
    assert res.value <= grid_val + grid_slack(F, X.lo, X.hi, step)


def test_box_cut_rule_keeps_bounds_valid():
    inst = generate_instance(2, 3, 9)
    F, X = inst.objective, inst.feasible_set
    res = solve_g2b2(F, X, 1e-4, "box", outside="cut", max_iterations=60, trace=True)
    assert res.upper >= res.lower
    assert check_trace(F, X, res.trace, np.random.default_rng(4), samples=300) == []


def test_budget_statuses(inst2):
    F, X = inst2.objective, inst2.feasible_set
    res = solve_g2b2(F, X, 1e-4, "exact", initial_planes=inst2.initial_planes, max_iterations=2)
    assert res.status == "iteration_limit" and res.gap > 1e-4
    res = solve_g2b2(F, X, 1e-4, "exact", time_limit=0.0)
    assert res.status == "time_limit"


def test_input_validation(inst2):
    F, X = inst2.objective, inst2.feasible_set
    with pytest.raises(InputError):
        solve_g2b2(F, X, 0.0)
    with pytest.raises(InputError):
        solve_g2b2(F, [(0, 1)])
    with pytest.raises(InputError):
        solve_g2b2(F, X, initial_planes=inst2.initial_planes[:1])


def test_node_upper_bounds_dominate_samples(inst2):
    res = solve_g2b2(inst2.objective, inst2.feasible_set, 1e-4, "box",
                     initial_planes=inst2.initial_planes, trace=True)
    rng = np.random.default_rng(5)
    for rec in list(res.trace.nodes.values())[:40]:
        pts = dense_samples(rec.polytope, 1000, rng, max_draws=200_000)
        if len(pts):
            assert rec.upper >= inst2.objective.values(pts).max() - 1e-6
