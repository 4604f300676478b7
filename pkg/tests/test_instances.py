import numpy as np
import pytest

from robustmax import load_fixture
from robustmax.exceptions import CapabilityError, InputError, InstanceFormatError
from robustmax.functions import ConvexQuadratic, PiecewiseLinearConvex
from robustmax.instances import (dumps_instance, generate_instance, generate_maximin_instance, instance_rng,
                                 load_instance, loads_instance, norm_pieces, save_instance, table1_spec)


def instances_equal(a, b):
    if a.id != b.id or not np.array_equal(a.box, b.box) or a.metadata != b.metadata:
        return False
    for f, g in zip(a.candidates, b.candidates):
        if type(f) is not type(g):
            return False
        if isinstance(f, ConvexQuadratic):
            if not (np.array_equal(f.M, g.M) and np.array_equal(f.b, g.b) and f.c == g.c):
                return False
        elif not (np.array_equal(f.A, g.A) and np.array_equal(f.b, g.b)):
            return False
    return (a.initial_planes is None) == (b.initial_planes is None) and (
        a.initial_planes is None or list(a.initial_planes) == list(b.initial_planes))


def test_generated_ranges():
    inst = generate_instance(3, 8, 5)
    rng = instance_rng(5, 0)
    assert inst.id == "rnd-n3-K8-s5"
    assert np.array_equal(inst.box, np.tile([-10.0, 10.0], (3, 1)))
    for g in inst.candidates:
        Q = rng.uniform(-3, 3, (3, 3))
        b = rng.uniform(0, 20, 3)
        c = rng.uniform(0, 20)
        assert np.all(np.abs(Q) <= 3) and np.all((0 <= b) & (b <= 20)) and 0 <= c <= 20
        # the stored candidate is exactly what the documented draw order gives
        assert np.allclose(g.M, Q.T @ Q) and np.array_equal(g.b, b) and g.c == c
        assert np.linalg.eigvalsh(g.M).min() >= -1e-8


def test_generation_deterministic():
    assert instances_equal(generate_instance(2, 4, 9), generate_instance(2, 4, 9))
    assert not instances_equal(generate_instance(2, 4, 9), generate_instance(2, 4, 10))


def test_generation_validation():
    with pytest.raises(InputError):
        generate_instance(0, 3, 1)


def test_round_trip_generated(tmp_path):
    inst = generate_instance(3, 4, 2)
    path = tmp_path / "i.json"
    save_instance(inst, path)
    assert instances_equal(load_instance(path), inst)


def test_round_trip_fixtures():
    for name in ("instance1", "instance2"):
        inst = load_fixture(name)
        assert instances_equal(loads_instance(dumps_instance(inst)), inst)


def test_fixture_contents():
    i1 = load_fixture("instance1")
    assert i1.K == 2 and all(isinstance(g, PiecewiseLinearConvex) and g.num_pieces == 3 for g in i1.candidates)
    assert np.array_equal(i1.candidates[0].A[1], [-13.75, -13.75]) and i1.candidates[0].b[1] == 393.75
    assert np.array_equal(i1.candidates[1].A[2], [5.6, 0.8]) and i1.candidates[1].b[2] == 210
    i2 = load_fixture("instance2")
    f1, f2 = i2.candidates
    assert f1.value([1.0, 1.0]) == pytest.approx(4.87 + 2.93 + 1.25 - 12.67 - 5.43 + 15.5)
    assert f2.value([1.0, 1.0]) == pytest.approx(2 + 4.36 + 3.2 - 114.03 - 48.87 + 780.81)
    assert i2.initial_planes[0].a == pytest.approx([-12.67, -5.43]) and i2.initial_planes[0].b == 15.5
    assert i2.initial_planes[1].a == pytest.approx([8.36, 10.76]) and i2.initial_planes[1].b == -175.19
    with pytest.raises(InputError):
        load_fixture("instance9")


@pytest.mark.parametrize("text, fragment", [
    ("{", "line 1"),
    ('{"schema_version": 1}', "missing field 'id'"),
    ('{"schema_version": 2, "id": "a", "dim": 1, "box": [[0, 1]], "candidates": []}', "schema_version"),
    ('{"schema_version": 1, "id": "a", "dim": 2, "box": [[0, 1]], "candidates": []}', "box"),
    ('{"schema_version": 1, "id": "a", "dim": 1, "box": [[0, 1]], "candidates": [{"type": "cubic"}]}',
     "candidates[0].type"),
    ('{"schema_version": 1, "id": "a", "dim": 1, "box": [[0, 1]], "candidates": [{"type": "pl", "pieces": [[1]]}]}',
     "candidates[0].pieces[0]"),
    ('{"schema_version": 1, "id": "a", "dim": 1, "box": [[0, 1]],'
     ' "candidates": [{"type": "quadratic", "M": [-1], "b": [0], "c": 0}]}', "positive semidefinite"),
    ('{"schema_version": 1, "id": "a", "dim": 1, "box": [[0, 1]],'
     ' "candidates": [{"type": "quadratic", "M": [1], "c": 0}]}', "missing field 'b'"),
])
def test_parse_errors_carry_context(text, fragment):
    with pytest.raises(InstanceFormatError) as err:
        loads_instance(text)
    assert fragment in str(err.value)


def test_parse_error_line_number(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "schema_version": 1,\n "id": \n}\n')
    with pytest.raises(InstanceFormatError) as err:
        load_instance(path)
    assert "line 4" in str(err.value) and "bad.json" in str(err.value)


@pytest.mark.parametrize("p", [np.inf, 1])
def test_norm_encodings_match_direct_norm(p):
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 4):
        d = rng.uniform(-5, 5, n)
        g = norm_pieces(d, p)
        X = rng.uniform(-10, 10, (1000, n))
        direct = np.linalg.norm(X - d, ord=p, axis=1)
        assert np.allclose(g.values(X), direct, atol=1e-12)
        assert g.num_pieces == (2 * n if p == np.inf else 2 ** n)


def test_l1_cap_and_bad_norm():
    with pytest.raises(CapabilityError):
        norm_pieces(np.zeros(11), 1)
    with pytest.raises(InputError):
        norm_pieces(np.zeros(2), 2)


def test_maximin_instance_shape():
    inst = generate_maximin_instance([[0, 0], [1, 1], [0.5, 0.2]], 1, [[0, 1], [0, 1]])
    assert inst.K == 3 and inst.dim == 2 and inst.objective.all_piecewise_linear
    with pytest.raises(InputError):
        generate_maximin_instance([[0, 0, 0]], 1, [[0, 1], [0, 1]])


def test_table1_spec():
    spec = table1_spec()
    assert len(spec) == 29
    assert spec[0] == (1, 2, 5) and spec[9] == (10, 2, 50) and spec[10] == (11, 3, 5)
    assert spec[-1] == (29, 20, 200)
    assert {n for _, n, _ in spec} == {2, 3, 5, 10, 20}
    assert [r[0] for r in table1_spec(dims=[2, 3])] == list(range(1, 21))
