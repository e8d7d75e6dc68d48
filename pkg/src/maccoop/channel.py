"""Finite discrete memoryless two-user multiple access channels.

Probabilities are stored as a dense tensor ``p[x1, x2, y]``.  Alphabet
labels are only used for I/O and label-based queries; everything else
indexes by position.  All information measures are in bits.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.special import xlogy

__all__ = [
    "NORM_TOL",
    "DEFAULT_MAX_LOG_SIZE",
    "SizeLimitError",
    "DiscreteMAC",
    "ProductInput",
    "contraction_mac",
    "binary_adder_mac",
    "extend",
    "check_extension_size",
    "entropy",
    "binary_entropy",
    "mutual_info",
    "product_joint",
]

NORM_TOL = 1e-9
DEFAULT_MAX_LOG_SIZE = 24.0


class SizeLimitError(ValueError):
    """Raised when an enumeration would exceed the configured size guard."""

    def __init__(self, dimension: str, log_size: float, limit: float):
        self.dimension = dimension
        self.log_size = log_size
        self.limit = limit
        super().__init__(
            f"{dimension}: log2 size {log_size:.3f} exceeds guard {limit:.3f}"
        )


def _check_distribution(p: np.ndarray, name: str, axis: int = -1) -> None:
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries")
    sums = p.sum(axis=axis)
    if np.any(np.abs(sums - 1.0) > NORM_TOL):
        raise ValueError(f"{name} is not normalized (sums {np.ravel(sums)[:4]} ...)")


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteMAC:
    """A MAC ``(X1 x X2, p(y|x1,x2), Y)`` over finite alphabets.

    Parameters
    ----------
    x1, x2, y : sequence of hashable
        Alphabet labels, one per index.
    transition : array_like, shape (|X1|, |X2|, |Y|)
        ``transition[a, b, c] = p(y_c | x1_a, x2_b)``.
    """

    x1: tuple
    x2: tuple
    y: tuple
    transition: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x1", tuple(self.x1))
        object.__setattr__(self, "x2", tuple(self.x2))
        object.__setattr__(self, "y", tuple(self.y))
        p = _frozen(self.transition)
        shape = (len(self.x1), len(self.x2), len(self.y))
        if p.shape != shape:
            raise ValueError(f"transition shape {p.shape} does not match alphabets {shape}")
        if min(shape) < 1:
            raise ValueError("alphabets must be non-empty")
        for labels, name in ((self.x1, "x1"), (self.x2, "x2"), (self.y, "y")):
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate labels in {name} alphabet")
        _check_distribution(p, "transition")
        object.__setattr__(self, "transition", p)
        index = {
            "x1": {v: i for i, v in enumerate(self.x1)},
            "x2": {v: i for i, v in enumerate(self.x2)},
            "y": {v: i for i, v in enumerate(self.y)},
        }
        object.__setattr__(self, "_index", index)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.transition.shape

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(np.isclose(self.transition.max(axis=2), 1.0, atol=NORM_TOL)))

    def prob(self, y: Hashable, x1: Hashable, x2: Hashable) -> float:
        """``p(y|x1,x2)`` looked up by label."""
        ix = self._index
        return float(self.transition[ix["x1"][x1], ix["x2"][x2], ix["y"][y]])

    def output_map(self) -> np.ndarray:
        """For a deterministic channel, the output index for each input pair."""
        if not self.is_deterministic:
            raise ValueError("output_map requires a deterministic channel")
        return self.transition.argmax(axis=2)

    def to_dict(self) -> dict:
        return {
            "x1": [_label_str(v) for v in self.x1],
            "x2": [_label_str(v) for v in self.x2],
            "y": [_label_str(v) for v in self.y],
            "p": self.transition.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMAC":
        try:
            return cls(data["x1"], data["x2"], data["y"], data["p"])
        except KeyError as exc:
            raise ValueError(f"channel file is missing field {exc}") from None


def _label_str(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(_label_str(u) for u in v) + ")"
    return str(v)


def contraction_mac() -> DiscreteMAC:
    """The deterministic contraction MAC.

    ``X1 = {A,B,a,b}``, ``X2 = {0,1}``, ``Y = {A,B,C,a,b,c} x {0,1}``.
    ``(a,0)`` and ``(b,0)`` both map to ``(c,0)``, ``(A,1)`` and ``(B,1)``
    both map to ``(C,1)``; every other pair maps to itself.
    """
    x1 = ("A", "B", "a", "b")
    x2 = ("0", "1")
    y = tuple(f"({s},{t})" for t in x2 for s in ("A", "B", "C", "a", "b", "c"))
    yi = {v: i for i, v in enumerate(y)}
    p = np.zeros((4, 2, len(y)))
    for i, s in enumerate(x1):
        for j, t in enumerate(x2):
            if t == "0" and s in ("a", "b"):
                out = "(c,0)"
            elif t == "1" and s in ("A", "B"):
                out = "(C,1)"
            else:
                out = f"({s},{t})"
            p[i, j, yi[out]] = 1.0
    return DiscreteMAC(x1, x2, y, p)


def binary_adder_mac() -> DiscreteMAC:
    """Noiseless binary adder: ``Y = X1 + X2`` over the integers."""
    p = np.zeros((2, 2, 3))
    for a in range(2):
        for b in range(2):
            p[a, b, a + b] = 1.0
    return DiscreteMAC(("0", "1"), ("0", "1"), ("0", "1", "2"), p)


def check_extension_size(mac: DiscreteMAC, n: int, max_log_size: float = DEFAULT_MAX_LOG_SIZE) -> None:
    """Raise :class:`SizeLimitError` if ``n * log2|Y|`` exceeds the guard."""
    log_y = n * math.log2(len(mac.y))
    if log_y > max_log_size + 1e-12:
        raise SizeLimitError("output alphabet Y^n", log_y, max_log_size)


def extend(mac: DiscreteMAC, n: int, max_log_size: float = DEFAULT_MAX_LOG_SIZE) -> DiscreteMAC:
    """The n-th memoryless extension, with n-tuple labels.

    Index order is row-major over the tuple, so the first channel use is the
    most significant digit.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    check_extension_size(mac, n, max_log_size)
    a, b, c = mac.shape
    # the full tensor is |X1|^n |X2|^n |Y|^n entries
    log_total = n * math.log2(a * b * c)
    if log_total > max_log_size + 4:
        raise SizeLimitError("extension tensor X1^n x X2^n x Y^n", log_total, max_log_size + 4)
    p = np.ones((1, 1, 1))
    for _ in range(n):
        p = np.einsum("ijk,abc->iajbkc", p, mac.transition).reshape(
            p.shape[0] * a, p.shape[1] * b, p.shape[2] * c
        )
    tuples = lambda labels: list(itertools.product(labels, repeat=n))  # noqa: E731
    return DiscreteMAC(tuples(mac.x1), tuples(mac.x2), tuples(mac.y), p)


def entropy(dist) -> float:
    """Shannon entropy in bits of a normalized distribution (any shape)."""
    p = np.asarray(dist, dtype=float)
    _check_distribution(p.reshape(-1), "distribution")
    return float(-xlogy(p, p).sum() / math.log(2))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary_entropy argument {p} outside [0, 1]")
    return entropy([p, 1.0 - p])


_DEFAULT_AXES = {3: ("X1", "X2", "Y"), 4: ("U", "X1", "X2", "Y")}


def _marginal_entropy(joint: np.ndarray, keep: Sequence[int]) -> float:
    drop = tuple(i for i in range(joint.ndim) if i not in keep)
    m = joint.sum(axis=drop) if drop else joint
    return float(-xlogy(m, m).sum() / math.log(2))


def mutual_info(joint, grouping: str, axes: Sequence[str] | None = None) -> float:
    """Conditional mutual information from a joint probability tensor.

    ``grouping`` reads like ``"X1,X2;Y"`` or ``"X1;Y|U,X2"``.  Axis names
    default to ``(X1, X2, Y)`` for 3-d tensors and ``(U, X1, X2, Y)`` for
    4-d tensors.
    """
    p = np.asarray(joint, dtype=float)
    _check_distribution(p.reshape(-1), "joint distribution")
    names = tuple(axes) if axes is not None else _DEFAULT_AXES.get(p.ndim)
    if names is None or len(names) != p.ndim:
        raise ValueError("axis names must be given for this tensor")
    m = re.fullmatch(r"\s*([^;|]+);([^;|]+)(?:\|(.+))?\s*", grouping)
    if not m:
        raise ValueError(f"cannot parse grouping {grouping!r}")

    def axes_of(part):
        if part is None:
            return []
        out = []
        for tok in part.split(","):
            tok = tok.strip()
            if tok not in names:
                raise ValueError(f"unknown variable {tok!r}")
            out.append(names.index(tok))
        return out

    a, b, c = axes_of(m.group(1)), axes_of(m.group(2)), axes_of(m.group(3))
    h = lambda idx: _marginal_entropy(p, sorted(set(idx)))  # noqa: E731
    return h(a + c) + h(b + c) - h(a + b + c) - h(c)


@dataclass(frozen=True, eq=False)
class ProductInput:
    """Input law ``p(u) p(x1|u) p(x2|u)``; no auxiliary means ``|U| = 1``.

    Build with :meth:`independent` or :meth:`with_auxiliary`.
    """

    pu: np.ndarray
    p1_given_u: np.ndarray
    p2_given_u: np.ndarray

    def __post_init__(self):
        pu = _frozen(self.pu)
        p1 = _frozen(np.atleast_2d(self.p1_given_u))
        p2 = _frozen(np.atleast_2d(self.p2_given_u))
        if pu.ndim != 1 or p1.shape[0] != pu.size or p2.shape[0] != pu.size:
            raise ValueError("auxiliary cardinality mismatch between p(u) and conditionals")
        _check_distribution(pu, "p(u)")
        _check_distribution(p1, "p(x1|u)")
        _check_distribution(p2, "p(x2|u)")
        object.__setattr__(self, "pu", pu)
        object.__setattr__(self, "p1_given_u", p1)
        object.__setattr__(self, "p2_given_u", p2)

    @classmethod
    def independent(cls, p1, p2) -> "ProductInput":
        return cls(np.ones(1), np.atleast_2d(p1), np.atleast_2d(p2))

    @classmethod
    def with_auxiliary(cls, pu, p1_given_u, p2_given_u) -> "ProductInput":
        return cls(pu, p1_given_u, p2_given_u)

    @property
    def u_cardinality(self) -> int:
        return self.pu.size

    @property
    def p1(self) -> np.ndarray:
        return self.pu @ self.p1_given_u

    @property
    def p2(self) -> np.ndarray:
        return self.pu @ self.p2_given_u

    def joint(self, mac: DiscreteMAC) -> np.ndarray:
        """``p(u, x1, x2, y)``."""
        return product_joint(mac.transition, self.pu, self.p1_given_u, self.p2_given_u)


def product_joint(transition: np.ndarray, pu, p1u, p2u) -> np.ndarray:
    return np.einsum("u,ua,ub,abc->uabc", pu, p1u, p2u, transition)
