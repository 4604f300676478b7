"""Problem instances: random generation, maximin-distance designs, JSON I/O.

File format (JSON)::

    {"schema_version": 1, "id": "...", "dim": n,
     "box": [[lo, hi], ...],
     "candidates": [{"type": "quadratic", "M": [row-major n*n], "b": [...], "c": c}
                    | {"type": "pl", "pieces": [[a_1, ..., a_n, b], ...]}],
     "initial_planes": [[a_1, ..., a_n, b], ...],     # optional, one per candidate
     "metadata": {...}}                                # optional
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np

from .exceptions import CapabilityError, InputError, InstanceFormatError
from .functions import AffinePiece, ConvexQuadratic, PiecewiseLinearConvex, RobustObjective
from .geometry import Polytope

SCHEMA_VERSION = 1
DEFAULT_HALF_WIDTH = 10.0
Q_RANGE = (-3.0, 3.0)
LINEAR_RANGE = (0.0, 20.0)
L1_DIM_CAP = 10

# stream ids for SeedSequence.spawn_key
STREAM_CANDIDATES = 0


@dataclass
class Instance:
    id: str
    box: np.ndarray
    candidates: list
    initial_planes: Optional[List[AffinePiece]] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float).reshape(-1, 2)
        if np.any(self.box[:, 0] > self.box[:, 1]):
            raise InputError("box has lo > hi")
        if not self.candidates:
            raise InputError("instance needs at least one candidate")
        if any(g.dim != self.dim for g in self.candidates):
            raise InputError("candidate dimension does not match the box")
        if self.initial_planes is not None and len(self.initial_planes) != len(self.candidates):
            raise InputError("need one initial plane per candidate")

    @property
    def dim(self) -> int:
        return self.box.shape[0]

    @property
    def K(self) -> int:
        return len(self.candidates)

    @property
    def objective(self) -> RobustObjective:
        return RobustObjective(self.candidates)

    @property
    def feasible_set(self) -> Polytope:
        return Polytope(self.box[:, 0], self.box[:, 1])

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "dim": self.dim,
            "box": self.box.tolist(),
            "candidates": [_candidate_to_dict(g) for g in self.candidates],
        }
        if self.initial_planes is not None:
            out["initial_planes"] = [list(p.a) + [p.b] for p in self.initial_planes]
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def _candidate_to_dict(g) -> dict:
    if isinstance(g, ConvexQuadratic):
        return {"type": "quadratic", "M": g.M.ravel().tolist(), "b": g.b.tolist(), "c": g.c}
    if isinstance(g, PiecewiseLinearConvex):
        return {"type": "pl", "pieces": np.column_stack([g.A, g.b]).tolist()}
    raise InputError(f"cannot serialize candidate of type {type(g).__name__}")


def _numbers(value, where: str, length: Optional[int] = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float).ravel()
    except (TypeError, ValueError):
        raise InstanceFormatError(f"{where}: expected a list of numbers") from None
    if length is not None and arr.size != length:
        raise InstanceFormatError(f"{where}: expected {length} numbers, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InstanceFormatError(f"{where}: non-finite entry")
    return arr


def _candidate_from_dict(d, n: int, where: str):
    if not isinstance(d, dict) or "type" not in d:
        raise InstanceFormatError(f"{where}: expected an object with a 'type' field")
    try:
        if d["type"] == "quadratic":
            M = _numbers(d["M"], f"{where}.M", n * n).reshape(n, n)
            return ConvexQuadratic(M, _numbers(d["b"], f"{where}.b", n), _numbers(d["c"], f"{where}.c", 1)[0])
        if d["type"] == "pl":
            pieces = d["pieces"]
            if not isinstance(pieces, list) or not pieces:
                raise InstanceFormatError(f"{where}.pieces: expected a nonempty list")
            rows = [_numbers(p, f"{where}.pieces[{i}]", n + 1) for i, p in enumerate(pieces)]
            return PiecewiseLinearConvex.from_arrays([r[:n] for r in rows], [r[n] for r in rows])
    except KeyError as e:
        raise InstanceFormatError(f"{where}: missing field {e.args[0]!r}") from None
    except InputError as e:
        if isinstance(e, InstanceFormatError):
            raise
        raise InstanceFormatError(f"{where}: {e}") from None
    raise InstanceFormatError(f"{where}.type: unknown candidate type {d['type']!r}")


def instance_from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceFormatError("top level: expected an object")
    for key in ("schema_version", "id", "dim", "box", "candidates"):
        if key not in d:
            raise InstanceFormatError(f"top level: missing field {key!r}")
    if d["schema_version"] != SCHEMA_VERSION:
        raise InstanceFormatError(f"schema_version: unsupported value {d['schema_version']!r}")
    n = d["dim"]
    if not isinstance(n, int) or n < 1:
        raise InstanceFormatError("dim: expected a positive integer")
    box = _numbers(d["box"], "box", 2 * n).reshape(n, 2)
    if np.any(box[:, 0] > box[:, 1]):
        raise InstanceFormatError("box: lo > hi")
    if not isinstance(d["candidates"], list) or not d["candidates"]:
        raise InstanceFormatError("candidates: expected a nonempty list")
    cands = [_candidate_from_dict(c, n, f"candidates[{i}]") for i, c in enumerate(d["candidates"])]
    planes = None
    if d.get("initial_planes") is not None:
        raw = d["initial_planes"]
        if not isinstance(raw, list) or len(raw) != len(cands):
            raise InstanceFormatError("initial_planes: expected one plane per candidate")
        planes = []
        for i, p in enumerate(raw):
            row = _numbers(p, f"initial_planes[{i}]", n + 1)
            planes.append(AffinePiece(row[:n], row[n]))
    return Instance(str(d["id"]), box, cands, planes, dict(d.get("metadata") or {}))


def dumps_instance(inst: Instance) -> str:
    return json.dumps(inst.to_dict(), indent=1)


def loads_instance(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return instance_from_dict(d)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n")


def load_instance(path) -> Instance:
    try:
        return loads_instance(Path(path).read_text())
    except InstanceFormatError as e:
        raise InstanceFormatError(f"{path}: {e}") from None


def load_fixture(name: str) -> Instance:
    """Bundled instance by file stem (``"instance1"``, ``"instance2"``)."""
    ref = resources.files("robustmax") / "fixtures" / f"{name}.json"
    if not ref.is_file():
        raise InputError(f"no bundled fixture named {name!r}")
    return loads_instance(ref.read_text())


def instance_rng(seed: int, stream: int) -> np.random.Generator:
    """PCG64 stream ``stream`` of ``seed``; streams are independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def generate_instance(n: int, K: int, seed: int, half_width: float = DEFAULT_HALF_WIDTH) -> Instance:
    """K random quadratics ``x'Q'Qx + b'x + c`` on ``[-half_width, half_width]^n``.

    Entries of Q are uniform on [-3, 3]; entries of b and c on [0, 20].
    Draw order per candidate: Q (row-major), b, c.
    """
    if n < 1 or K < 1:
        raise InputError("need n >= 1 and K >= 1")
    rng = instance_rng(seed, STREAM_CANDIDATES)
    cands = []
    for _ in range(K):
        Q = rng.uniform(*Q_RANGE, size=(n, n))
        b = rng.uniform(*LINEAR_RANGE, size=n)
        c = rng.uniform(*LINEAR_RANGE)
        cands.append(ConvexQuadratic.from_factor(Q, b, c))
    box = np.tile([-half_width, half_width], (n, 1))
    return Instance(f"rnd-n{n}-K{K}-s{seed}", box, cands,
                    metadata={"family": "random-quadratic", "seed": seed, "n": n, "K": K})


def norm_pieces(d, p) -> PiecewiseLinearConvex:
    """``||x - d||_p`` as a max of affine pieces (``p`` in {1, inf})."""
    d = np.asarray(d, dtype=float)
    n = d.size
    if p in (np.inf, "inf"):
        A = np.vstack([np.eye(n), -np.eye(n)])
    elif p == 1:
        if n > L1_DIM_CAP:
            raise CapabilityError(f"1-norm encoding needs 2^n pieces; n={n} exceeds cap {L1_DIM_CAP}")
        A = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    else:
        raise InputError(f"only p = 1 or inf have piecewise-linear encodings, got {p!r}")
    return PiecewiseLinearConvex.from_arrays(A, -A @ d)


def generate_maximin_instance(points, p, box, id: Optional[str] = None) -> Instance:
    """Place a point in ``box`` as far as possible (p-norm) from every point of D."""
    D = np.atleast_2d(np.asarray(points, dtype=float))
    if D.size == 0:
        raise InputError("point set is empty")
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if D.shape[1] != box.shape[0]:
        raise InputError("points and box disagree on dimension")
    pname = "inf" if p in (np.inf, "inf") else str(p)
    return Instance(id or f"maximin-p{pname}-n{box.shape[0]}-m{len(D)}", box,
                    [norm_pieces(d, p) for d in D],
                    metadata={"family": "maximin", "p": pname})


def table1_spec(dims=None) -> list:
    """The 29 ``(id, n, K)`` rows of the reference benchmark; seed = id."""
    rows = [(n, K) for n in (2, 3) for K in range(5, 55, 5)]
    rows += [(n, K) for n in (5, 10, 20) for K in (50, 100, 200)]
    spec = [(i + 1, n, K) for i, (n, K) in enumerate(rows)]
    if dims is not None:
        spec = [r for r in spec if r[1] in set(dims)]
    return spec
