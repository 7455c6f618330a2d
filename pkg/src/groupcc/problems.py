"""Bounded continuous test problems with known separability structure.

Instances are assembled from a :class:`StructureSpec` (groups of variables,
one base function per group, optional shared variables, optional separable
tail) and an optional strictly increasing output transform that turns
additive separability into non-additive separability without changing the
underlying interaction structure.  A registry of small closed-form fixtures
used throughout the test-suite is exposed via :func:`get_fixture`.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._kernels import KERNELS
from .errors import (
    FeasibilityError,
    GroundTruthError,
    StructureError,
    ValidationError,
)
from .interaction import InteractionMatrix

#: Base function kinds and whether they introduce interactions between the
#: variables of a group under the order-based (ELL) separability definition.
SEPARABLE_KINDS = frozenset({"sphere", "elliptic", "rastrigin", "ackley"})
NONSEPARABLE_KINDS = frozenset({"schwefel_12", "rosenbrock"})
BASE_KINDS = SEPARABLE_KINDS | NONSEPARABLE_KINDS


def identity(y: float) -> float:
    return y


def square(y: float) -> float:
    return y * y


def sqrt(y: float) -> float:
    if y < 0.0:
        raise ValidationError(f"sqrt transform requires a non-negative value, got {y}")
    return math.sqrt(y)


TRANSFORMS: dict[str, Callable[[float], float]] = {
    "identity": identity,
    "square": square,
    "sqrt": sqrt,
}

#: Custom closed-form group evaluators addressable from a StructureSpec as
#: ``custom:<name>``.  Each maps the group's sub-vector to a float.
CUSTOM_FUNCTIONS: dict[str, Callable[[np.ndarray], float]] = {}


def register_custom(name: str, fn: Callable[[np.ndarray], float]) -> None:
    CUSTOM_FUNCTIONS[name] = fn


@dataclass(frozen=True)
class GroupSpec:
    """One subfunction: a variable index set, a base function and a weight."""

    indices: tuple[int, ...]
    function: str = "sphere"
    weight: float = 1.0


@dataclass(frozen=True)
class OverlapSpec:
    """Declares that two groups intentionally share the given indices."""

    group_a: int
    group_b: int
    shared: tuple[int, ...]


@dataclass(frozen=True)
class StructureSpec:
    """Declarative layout of subfunctions over ``n`` variables.

    The trailing ``separable_tail`` variables belong to no group and are
    evaluated through ``tail_function`` (which must be a separable kind),
    each variable independently contributing to the sum.
    """

    n: int
    groups: tuple[GroupSpec, ...]
    overlap: tuple[OverlapSpec, ...] = ()
    separable_tail: int = 0
    tail_function: str = "sphere"

    def validate(self) -> None:
        if self.n < 1:
            raise StructureError("dimension must be positive")
        if self.separable_tail < 0 or self.separable_tail > self.n:
            raise StructureError("separable_tail out of range")
        if self.tail_function not in SEPARABLE_KINDS:
            raise StructureError(
                f"tail_function must be a separable kind, got {self.tail_function!r}"
            )
        tail_start = self.n - self.separable_tail
        covered: set[int] = set(range(tail_start, self.n))
        grouped: set[int] = set()
        for g in self.groups:
            if g.weight <= 0.0:
                raise ValidationError(f"group weight must be positive, got {g.weight}")
            if not g.indices:
                raise StructureError("empty group")
            kind = g.function
            if kind.startswith("custom:"):
                if kind[len("custom:"):] not in CUSTOM_FUNCTIONS:
                    raise StructureError(f"unknown custom function {kind!r}")
            elif kind not in BASE_KINDS:
                raise StructureError(f"unknown base function {kind!r}")
            for i in g.indices:
                if not 0 <= i < self.n:
                    raise StructureError(f"index {i} out of range for n={self.n}")
                if i >= tail_start:
                    raise StructureError(f"index {i} collides with the separable tail")
            grouped.update(g.indices)
        covered |= grouped
        if covered != set(range(self.n)):
            missing = sorted(set(range(self.n)) - covered)
            raise StructureError(f"indices not covered by any group or tail: {missing}")
        self._validate_overlap()

    def _validate_overlap(self) -> None:
        declared: dict[tuple[int, int], set[int]] = {}
        for ov in self.overlap:
            a, b = sorted((ov.group_a, ov.group_b))
            if not (0 <= a < len(self.groups) and 0 <= b < len(self.groups)) or a == b:
                raise StructureError(f"overlap references invalid groups ({a}, {b})")
            declared[(a, b)] = set(ov.shared)
        for a in range(len(self.groups)):
            for b in range(a + 1, len(self.groups)):
                actual = set(self.groups[a].indices) & set(self.groups[b].indices)
                if actual != declared.get((a, b), set()):
                    raise StructureError(
                        f"groups {a} and {b} share {sorted(actual)} but the overlap "
                        f"declaration says {sorted(declared.get((a, b), set()))}"
                    )


class _EvalCounter:
    """Monotone FFE counter; tolerates concurrent increments."""

    __slots__ = ("_value", "_lock")

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def increment(self) -> None:
        with self._lock:
            self._value += 1

    @property
    def value(self) -> int:
        return self._value


@dataclass
class ProblemInstance:
    """A bounded black-box objective with an FFE counter.

    ``evaluator`` must be pure.  ``theta_star`` holds the ground-truth
    matrix of direct pairwise interactions when the instance was built
    from a known structure; indirect interactions (through shared
    variables) are its transitive closure, available via
    ``theta_star_closure``.
    """

    n: int
    lb: np.ndarray
    ub: np.ndarray
    evaluator: Callable[[np.ndarray], float]
    theta_star: Optional[InteractionMatrix] = None
    name: str = ""
    _counter: _EvalCounter = field(default_factory=_EvalCounter, repr=False)

    def __post_init__(self) -> None:
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        if self.lb.shape != (self.n,) or self.ub.shape != (self.n,):
            raise ValidationError("bounds must have shape (n,)")
        if not (self.lb < self.ub).all():
            raise ValidationError("lb[i] < ub[i] must hold for every variable")

    @property
    def evals(self) -> int:
        return self._counter.value

    def theta_star_closure(self) -> InteractionMatrix:
        if self.theta_star is None:
            raise GroundTruthError(f"instance {self.name!r} has no ground truth")
        return self.theta_star.transitive_closure()

    def __call__(self, x: np.ndarray) -> float:
        return evaluate(self, x)


def evaluate(instance: ProblemInstance, x: np.ndarray) -> float:
    """Evaluate ``instance`` at ``x``, charging exactly one FFE.

    Out-of-bounds components raise; no clamping happens at this layer.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.n,):
        raise ValidationError(f"expected a vector of length {instance.n}")
    if not np.isfinite(x).all():
        raise ValidationError("decision vector has non-finite components")
    if (x < instance.lb).any() or (x > instance.ub).any():
        raise FeasibilityError("decision vector outside the feasible box")
    y = float(instance.evaluator(x))
    instance._counter.increment()
    return y


def _group_evaluator(kind: str) -> Callable[[np.ndarray], float]:
    if kind.startswith("custom:"):
        return CUSTOM_FUNCTIONS[kind[len("custom:"):]]
    return KERNELS[kind]


def default_shift(lb: np.ndarray, ub: np.ndarray, seed: int) -> np.ndarray:
    """Bounds midpoint plus a seeded uniform offset within 25% of half-range."""
    rng = np.random.default_rng(seed)
    half = (ub - lb) / 2.0
    return (lb + ub) / 2.0 + rng.uniform(-0.25, 0.25, size=lb.shape) * half


def build_instance(
    spec: StructureSpec,
    transform: str = "identity",
    bounds: Union[tuple[float, float], tuple[np.ndarray, np.ndarray]] = (-5.0, 5.0),
    shift: Optional[np.ndarray] = None,
    seed: int = 0,
    name: str = "",
) -> ProblemInstance:
    """Assemble a ProblemInstance from a structure spec.

    The objective is ``transform(sum_g weight_g * base_g((x - shift)[g]))``.
    ``shift`` defaults to a seeded perturbation of the bounds midpoint so
    that optima do not sit at trivial points.
    """
    spec.validate()
    if transform not in TRANSFORMS:
        raise ValidationError(f"unknown transform {transform!r}")
    n = spec.n
    lo, hi = bounds
    lb = np.full(n, lo, dtype=float) if np.isscalar(lo) else np.asarray(lo, float)
    ub = np.full(n, hi, dtype=float) if np.isscalar(hi) else np.asarray(hi, float)
    if shift is None:
        shift = default_shift(lb, ub, seed)
    else:
        shift = np.asarray(shift, dtype=float)
        if (shift < lb).any() or (shift > ub).any():
            raise ValidationError("shift must lie inside the bounds")

    parts = [
        (np.asarray(g.indices, dtype=np.intp), _group_evaluator(g.function), g.weight)
        for g in spec.groups
    ]
    tail_start = n - spec.separable_tail
    tail_idx = np.arange(tail_start, n, dtype=np.intp)
    tail_fn = KERNELS[spec.tail_function]
    tf = TRANSFORMS[transform]

    def evaluator(x: np.ndarray) -> float:
        z = x - shift
        total = 0.0
        for idx, fn, w in parts:
            total += w * fn(np.ascontiguousarray(z[idx]))
        for i in tail_idx:
            total += tail_fn(z[i : i + 1])
        return tf(total)

    theta = InteractionMatrix.identity(n)
    for g in spec.groups:
        theta.link_clique(g.indices)

    return ProblemInstance(
        n=n,
        lb=lb,
        ub=ub,
        evaluator=evaluator,
        theta_star=theta,
        name=name or f"structured-{n}-{transform}",
    )


def ground_truth_matrix(instance: ProblemInstance) -> InteractionMatrix:
    """The matrix of direct ground-truth interactions, if known."""
    if instance.theta_star is None:
        raise GroundTruthError(
            f"instance {instance.name!r} was not built from a structure spec"
        )
    return instance.theta_star


# ---------------------------------------------------------------------------
# Closed-form fixtures and desk-scale builders
# ---------------------------------------------------------------------------


def _fbar_c1(x: np.ndarray) -> float:
    return (abs(x[0]) + abs(x[1])) ** 2


def _fbar_c2(x: np.ndarray) -> float:
    return (x[0] + x[1]) ** 2


def _fbar_c3(x: np.ndarray) -> float:
    return (x[0] + x[1]) ** 2 * x[2] + x[3]


def _fbar_c4(x: np.ndarray) -> float:
    return math.sqrt(x[0] ** 2 + x[1] ** 2) + math.sqrt(x[2] ** 2 + x[3] ** 2)


register_custom("fbar_c1", _fbar_c1)
register_custom("fbar_c2", _fbar_c2)
register_custom("fbar_c3", _fbar_c3)
register_custom("fbar_c4", _fbar_c4)


def _matrix_from_groups(n: int, groups: Sequence[Sequence[int]]) -> InteractionMatrix:
    theta = InteractionMatrix.identity(n)
    for g in groups:
        theta.link_clique(g)
    return theta


def _closed_form(name, n, lb, ub, fn, truth_groups):
    def factory(seed: int = 0, transform: str = "identity") -> ProblemInstance:
        tf = TRANSFORMS[transform]
        return ProblemInstance(
            n=n,
            lb=np.asarray(lb, float),
            ub=np.asarray(ub, float),
            evaluator=(fn if transform == "identity" else lambda x: tf(fn(x))),
            theta_star=_matrix_from_groups(n, truth_groups),
            name=name if transform == "identity" else f"{name}-{transform}",
        )

    return factory


def fully_separable(
    n: int, base: str = "sphere", transform: str = "identity", seed: int = 0
) -> ProblemInstance:
    """A problem with no interacting pair: one singleton group per variable."""
    spec = StructureSpec(n=n, groups=(), separable_tail=n, tail_function=base)
    return build_instance(
        spec, transform=transform, seed=seed, name=f"{base}-{n}-{transform}"
    )


def planted_blocks(
    n: int,
    block_size: int,
    base: str = "schwefel_12",
    transform: str = "identity",
    seed: int = 0,
    tail: int = 0,
) -> ProblemInstance:
    """Disjoint non-separable blocks of equal size plus an optional tail."""
    if (n - tail) % block_size != 0:
        raise StructureError("block_size must divide the non-tail dimension")
    groups = tuple(
        GroupSpec(indices=tuple(range(s, s + block_size)), function=base)
        for s in range(0, n - tail, block_size)
    )
    spec = StructureSpec(n=n, groups=groups, separable_tail=tail)
    return build_instance(
        spec,
        transform=transform,
        seed=seed,
        name=f"blocks-{n}x{block_size}-{base}-{transform}",
    )


def overlapping_chain(
    n: int,
    block_size: int,
    base: str = "schwefel_12",
    transform: str = "identity",
    seed: int = 0,
) -> ProblemInstance:
    """Blocks chained by one shared variable: block k's last index opens k+1."""
    if block_size < 2:
        raise StructureError("chained blocks need at least two variables each")
    step = block_size - 1
    if (n - 1) % step != 0:
        raise StructureError(f"n-1 must be a multiple of block_size-1, got n={n}")
    groups = []
    starts = range(0, n - 1, step)
    for s in starts:
        groups.append(GroupSpec(indices=tuple(range(s, s + block_size)), function=base))
    overlap = tuple(
        OverlapSpec(group_a=k, group_b=k + 1, shared=(groups[k].indices[-1],))
        for k in range(len(groups) - 1)
    )
    spec = StructureSpec(n=n, groups=tuple(groups), overlap=overlap)
    return build_instance(
        spec,
        transform=transform,
        seed=seed,
        name=f"chain-{n}x{block_size}-{base}-{transform}",
    )


_FIXTURES: dict[str, Callable[..., ProblemInstance]] = {
    "fbar_c1": _closed_form(
        "fbar_c1", 2, [-5, -5], [5, 5], _fbar_c1, [[0], [1]]
    ),
    "fbar_c2": _closed_form(
        "fbar_c2", 2, [-8, -2], [8, 2], _fbar_c2, [[0, 1]]
    ),
    "fbar_c3": _closed_form(
        "fbar_c3", 4, [-3] * 4, [3] * 4, _fbar_c3, [[0, 1, 2], [3]]
    ),
    "fbar_c4": _closed_form(
        "fbar_c4", 4, [-5] * 4, [5] * 4, _fbar_c4, [[0], [1], [2], [3]]
    ),
    "sphere-32": lambda seed=0, transform="identity": fully_separable(
        32, "sphere", transform, seed
    ),
    "ackley-32": lambda seed=0, transform="identity": fully_separable(
        32, "ackley", transform, seed
    ),
    "elliptic-32": lambda seed=0, transform="identity": fully_separable(
        32, "elliptic", transform, seed
    ),
    "rastrigin-40": lambda seed=0, transform="identity": fully_separable(
        40, "rastrigin", transform, seed
    ),
    "schwefel-32": lambda seed=0, transform="identity": planted_blocks(
        32, 32, "schwefel_12", transform, seed
    ),
    "blocks-32": lambda seed=0, transform="identity": planted_blocks(
        32, 8, "schwefel_12", transform, seed
    ),
    "blocks-64": lambda seed=0, transform="identity": planted_blocks(
        64, 8, "schwefel_12", transform, seed
    ),
    "blocks-32-tail8": lambda seed=0, transform="identity": planted_blocks(
        32, 8, "schwefel_12", transform, seed, tail=8
    ),
    "chain-31x4": lambda seed=0, transform="identity": overlapping_chain(
        31, 4, "schwefel_12", transform, seed
    ),
}


def fixture_names() -> list[str]:
    names = sorted(_FIXTURES)
    try:
        from . import routing

        names += sorted(routing.fixture_names())
    except ImportError:  # pragma: no cover
        pass
    return names


def get_fixture(name: str, seed: int = 0) -> ProblemInstance:
    """Resolve a named fixture; ``-sq`` / ``-sqrt`` suffixes select transforms."""
    transform = "identity"
    base = name
    for suffix, tf in (("-sq", "square"), ("-sqrt", "sqrt")):
        if name.endswith(suffix) and name[: -len(suffix)] in _FIXTURES:
            base, transform = name[: -len(suffix)], tf
            break
    if base in _FIXTURES:
        return _FIXTURES[base](seed=seed, transform=transform)
    from . import routing  # routing fixtures live in their own module

    if name in routing.fixture_names():
        return routing.get_fixture(name, seed=seed)
    raise ValidationError(f"unknown fixture {name!r}; known: {fixture_names()}")


def load_problem(source: Union[str, dict], seed: Optional[int] = None) -> ProblemInstance:
    """Build a problem from a JSON config file path or an equivalent dict.

    Schema (``kind: structured``): ``n``, ``bounds`` (scalar pair or per
    variable lists), ``transform``, ``seed``, ``groups`` (list of
    ``{indices, function, weight}``), optional ``separable_tail``,
    ``tail_function``, ``overlap`` (list of ``{group_a, group_b, shared}``)
    and ``shift``.  Schema (``kind: fixture``): ``name``, ``seed``.
    """
    if isinstance(source, str):
        with open(source) as fh:
            cfg = json.load(fh)
    else:
        cfg = dict(source)
    kind = cfg.get("kind", "fixture")
    if seed is not None:
        cfg["seed"] = seed
    if kind == "fixture":
        return get_fixture(cfg["name"], seed=int(cfg.get("seed", 0)))
    if kind != "structured":
        raise ValidationError(f"unknown problem kind {kind!r}")
    groups = tuple(
        GroupSpec(
            indices=tuple(int(i) for i in g["indices"]),
            function=g.get("function", "sphere"),
            weight=float(g.get("weight", 1.0)),
        )
        for g in cfg.get("groups", [])
    )
    overlap = tuple(
        OverlapSpec(int(o["group_a"]), int(o["group_b"]), tuple(o["shared"]))
        for o in cfg.get("overlap", [])
    )
    spec = StructureSpec(
        n=int(cfg["n"]),
        groups=groups,
        overlap=overlap,
        separable_tail=int(cfg.get("separable_tail", 0)),
        tail_function=cfg.get("tail_function", "sphere"),
    )
    bounds = cfg.get("bounds", [-5.0, 5.0])
    shift = cfg.get("shift")
    return build_instance(
        spec,
        transform=cfg.get("transform", "identity"),
        bounds=(bounds[0], bounds[1]),
        shift=None if shift is None else np.asarray(shift, float),
        seed=int(cfg.get("seed", 0)),
        name=cfg.get("name", ""),
    )
