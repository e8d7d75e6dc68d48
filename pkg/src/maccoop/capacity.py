"""Support functions of MAC capacity regions and their numerical evaluation.

The support function of a region ``R`` in the nonnegative quadrant is
``C^alpha = max over (x, y) in R of alpha x + (1 - alpha) y``.  For convex,
axis-projection-closed regions the sampled support function determines the
region by half-plane intersection.

Numerical maximizations over product input laws are nonconvex; every value
returned by an optimizer here is the best one found, hence a lower bound on
the true maximum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit, xlogy

from .channel import DiscreteMAC, binary_entropy
from .code import worker_count

__all__ = [
    "SupportCurve",
    "RegionPolytope",
    "OptimizerConfig",
    "OptimizerResult",
    "c_alpha_of_polytope",
    "region_from_support",
    "hausdorff_distance",
    "mac_avg_calpha",
    "mac_avg_objective",
    "dueck_witness",
    "dueck_pstar",
    "dueck_max_upper",
    "dueck_avg_lower",
    "dueck_gap_report",
    "conferencing_calpha",
    "conferencing_terms",
    "rstar",
    "continuity_checks",
    "gap_cin_choice",
]

LOG3 = math.log2(3)


# ---------------------------------------------------------------- geometry


@dataclass(frozen=True, eq=False)
class SupportCurve:
    alphas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float)
        v = np.array(self.values, dtype=float)
        if a.ndim != 1 or a.shape != v.shape:
            raise ValueError("alphas and values must be 1-d arrays of equal length")
        if np.any(np.diff(a) <= 0):
            raise ValueError("alphas must be strictly increasing")
        if a.size and (a[0] < 0 or a[-1] > 1):
            raise ValueError("alphas must lie in [0, 1]")
        if not np.all(np.isfinite(v)):
            raise ValueError("support values must be finite")
        a.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, fn: Callable[[float], float], alphas: Sequence[float]) -> "SupportCurve":
        a = np.asarray(alphas, dtype=float)
        return cls(a, np.array([fn(x) for x in a]))

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.alphas.tolist(), self.values.tolist()))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull(points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Counter-clockwise convex hull (monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, np.round(points, 15))))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def _clip(poly: list, a: float, b: float, c: float) -> list:
    """Clip a convex polygon by ``a x + b y <= c``."""
    out = []
    if not poly:
        return out
    val = lambda p: a * p[0] + b * p[1] - c  # noqa: E731
    for i, p in enumerate(poly):
        q = poly[(i + 1) % len(poly)]
        vp, vq = val(p), val(q)
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


@dataclass(frozen=True, eq=False)
class RegionPolytope:
    """A convex polygon in the nonnegative quadrant, closed under axis projections."""

    vertices: np.ndarray
    half_planes: tuple = ()
    kind: str = ""

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if v.size == 0:
            raise ValueError("empty region")
        if np.any(v < -1e-12):
            raise ValueError("vertices must lie in the nonnegative quadrant")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(cls, points, kind: str = "") -> "RegionPolytope":
        """Smallest convex, projection-closed region containing ``points``."""
        p = np.array(points, dtype=float).reshape(-1, 2)
        if np.any(p < 0):
            raise ValueError("points must lie in the nonnegative quadrant")
        closure = np.vstack([p, p * (1, 0), p * (0, 1), np.zeros((1, 2))])
        return cls(_hull(closure), kind=kind)

    @classmethod
    def from_half_planes(cls, alphas, values, kind: str = "") -> "RegionPolytope":
        """Intersection of ``alpha x + (1 - alpha) y <= c`` with the quadrant."""
        alphas = np.asarray(alphas, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values < 0):
            raise ValueError("support values must be nonnegative")
        big = 1.0 + 2 * float(values.max(initial=0.0)) / max(1e-12, min(1.0, _min_weight(alphas)))
        poly = [(0.0, 0.0), (big, 0.0), (big, big), (0.0, big)]
        for a, c in zip(alphas, values):
            poly = _clip(poly, a, 1.0 - a, c)
        verts = _hull(np.array(poly)) if poly else np.zeros((1, 2))
        if verts.size == 0:
            verts = np.zeros((1, 2))
        verts = np.clip(verts, 0.0, None)
        return cls(verts, tuple(zip(alphas.tolist(), values.tolist())), kind)

    def c_alpha(self, alpha: float) -> float:
        return c_alpha_of_polytope(self, alpha)

    def contains(self, point, tol: float = 1e-9) -> bool:
        return _distance_to_polygon(np.asarray(point, dtype=float), self.vertices) <= tol

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=2)))


def _min_weight(alphas: np.ndarray) -> float:
    # the box must reach past every half-plane; weights near 0 on an axis need a bigger box
    has0 = np.any(np.isclose(alphas, 0.0))
    has1 = np.any(np.isclose(alphas, 1.0))
    return 1.0 if has0 and has1 else 1e-6


def c_alpha_of_polytope(region: RegionPolytope, alpha: float) -> float:
    """``max over vertices of alpha x + (1 - alpha) y``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    v = region.vertices
    if v.size == 0:
        raise ValueError("empty region")
    return float(np.max(alpha * v[:, 0] + (1 - alpha) * v[:, 1]))


def region_from_support(curve: SupportCurve, kind: str = "") -> RegionPolytope:
    if curve.alphas.size < 2 or not (np.isclose(curve.alphas[0], 0) and np.isclose(curve.alphas[-1], 1)):
        raise ValueError("need at least two samples including alpha = 0 and alpha = 1")
    return RegionPolytope.from_half_planes(curve.alphas, curve.values, kind)


def _segment_distance(p, a, b) -> float:
    d = b - a
    L = float(d @ d)
    t = 0.0 if L == 0 else min(1.0, max(0.0, float((p - a) @ d) / L))
    return float(np.linalg.norm(p - (a + t * d)))


def _distance_to_polygon(p: np.ndarray, verts: np.ndarray) -> float:
    k = len(verts)
    if k == 1:
        return float(np.linalg.norm(p - verts[0]))
    if k == 2:
        return _segment_distance(p, verts[0], verts[1])
    inside = all(_cross(verts[i], verts[(i + 1) % k], p) >= -1e-12 for i in range(k))
    if inside:
        return 0.0
    return min(_segment_distance(p, verts[i], verts[(i + 1) % k]) for i in range(k))


def hausdorff_distance(r1: RegionPolytope, r2: RegionPolytope) -> float:
    """Hausdorff distance between two convex polygons (regions, not boundaries).

    Distance to a convex set is a convex function, so each one-sided
    supremum is attained at a vertex.
    """
    d12 = max(_distance_to_polygon(v, r2.vertices) for v in r1.vertices)
    d21 = max(_distance_to_polygon(v, r1.vertices) for v in r2.vertices)
    return max(d12, d21)


# ---------------------------------------------------------------- optimizer


@dataclass(frozen=True)
class OptimizerConfig:
    grid: int = 21
    sweeps: int = 8
    restarts: int = 16
    seed: int = 0
    workers: int | None = 1

    def to_dict(self) -> dict:
        # the worker count does not change results, so it is left out of reports
        return {"grid": self.grid, "sweeps": self.sweeps, "restarts": self.restarts, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class OptimizerResult:
    value: float
    params: tuple = field(repr=False)
    start: int
    evaluations: int
    bound_kind: str = "lower_bound"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bound_kind": self.bound_kind,
            "best_start": self.start,
            "evaluations": self.evaluations,
            "argmax": [np.asarray(p).tolist() for p in self.params],
        }


def _line_candidates(row: np.ndarray, j: int, ts: np.ndarray) -> np.ndarray:
    """Points ``t e_j + (1 - t) q`` where q is ``row`` with coordinate j removed."""
    d = row.size
    rest = row.copy()
    rest[j] = 0.0
    s = rest.sum()
    if s <= 1e-15:
        rest = np.ones(d)
        rest[j] = 0.0
        s = d - 1
    rest = rest / s
    e = np.zeros(d)
    e[j] = 1.0
    return ts[:, None] * e + (1 - ts[:, None]) * rest


def _ascend(params: list[np.ndarray], fn, config: OptimizerConfig) -> tuple[float, list[np.ndarray], int]:
    """Coordinate ascent over a list of stochastic arrays (last axis sums to one).

    ``fn`` takes a list of batched arrays (leading batch axis) and returns a
    value per batch entry.  Each step line-searches one coordinate of one
    row on a coarse grid and then on a finer grid around the incumbent.
    """
    params = [p.copy() for p in params]
    coarse = np.linspace(0.0, 1.0, config.grid)
    step = 1.0 / max(1, config.grid - 1)
    best = float(fn([p[None] for p in params])[0])
    evals = 1
    for _ in range(config.sweeps):
        before = best
        for b, p in enumerate(params):
            for row in np.ndindex(p.shape[:-1]):
                d = p.shape[-1]
                if d == 1:
                    continue
                for j in range(d):
                    cur = p[row]
                    fine = np.clip(cur[j] + np.linspace(-step, step, config.grid), 0.0, 1.0)
                    ts = np.concatenate([coarse, fine])
                    cands = _line_candidates(cur, j, ts)
                    batch = [np.repeat(q[None], len(ts), axis=0) for q in params]
                    batch[b][(slice(None),) + row] = cands
                    vals = fn(batch)
                    evals += len(ts)
                    k = int(np.argmax(vals))
                    if vals[k] > best + 1e-15:
                        best = float(vals[k])
                        p[row] = cands[k]
        if best - before <= 1e-12:
            break
    return best, params, evals


def _run_starts(starts: list[list[np.ndarray]], fn, config: OptimizerConfig) -> OptimizerResult:
    nw = worker_count(config.workers)
    run = lambda s: _ascend(s, fn, config)  # noqa: E731
    if nw == 1:
        results = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(nw) as pool:
            results = list(pool.map(run, starts))
    # deterministic reduce: highest value, ties to the lowest start index
    best_i = max(range(len(results)), key=lambda i: (results[i][0], -i))
    total = sum(r[2] for r in results)
    v, p, _ = results[best_i]
    return OptimizerResult(v, tuple(p), best_i, total)


def _random_starts(shapes, config: OptimizerConfig) -> list[list[np.ndarray]]:
    starts = []
    for child in np.random.SeedSequence(config.seed).spawn(config.restarts):
        rng = np.random.default_rng(child)
        starts.append([rng.dirichlet(np.ones(s[-1]), size=s[:-1]) for s in shapes])
    return starts


def _h_rows(p: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis."""
    return -xlogy(p, p).sum(axis=-1) / math.log(2)


def _mac_entropies(w: np.ndarray, p1: np.ndarray, p2: np.ndarray, hw: np.ndarray | None):
    """H(Y), H(Y|X1), H(Y|X2), H(Y|X1,X2) for batched product inputs."""
    y_given_1 = np.einsum("bc,acy->bay", p2, w)
    y_given_2 = np.einsum("ba,acy->bcy", p1, w)
    py = np.einsum("ba,bay->by", p1, y_given_1)
    hy = _h_rows(py)
    hy1 = np.einsum("ba,ba->b", p1, _h_rows(y_given_1))
    hy2 = np.einsum("bc,bc->b", p2, _h_rows(y_given_2))
    hy12 = np.zeros_like(hy) if hw is None else np.einsum("ba,bc,ac->b", p1, p2, hw)
    return hy, hy1, hy2, hy12


def mac_avg_objective(mac: DiscreteMAC, alpha: float):
    """Batched objective ``alpha R1 + (1 - alpha) R2`` at the dominant corner point.

    For alpha <= 1/2 the corner is ``(I(X1;Y), I(X2;Y|X1))``, otherwise
    ``(I(X1;Y|X2), I(X2;Y))``.  Deterministic channels have
    ``H(Y|X1,X2) = 0``, which the entropies skip.
    """
    w = mac.transition
    hw = None if mac.is_deterministic else _h_rows(w)

    def fn(batch):
        p1, p2 = batch
        hy, hy1, hy2, hy12 = _mac_entropies(w, p1, p2, hw)
        if alpha <= 0.5:
            return alpha * (hy - hy1) + (1 - alpha) * (hy1 - hy12)
        return alpha * (hy2 - hy12) + (1 - alpha) * (hy - hy2)

    return fn


def mac_avg_calpha(
    mac: DiscreteMAC,
    alpha: float,
    config: OptimizerConfig = OptimizerConfig(),
    seeds: Sequence[tuple] = (),
    *,
    full: bool = False,
):
    """Best found ``C^alpha`` of the no-cooperation average-error region.

    Starts: the uniform input, any caller-supplied ``(p1, p2)`` seeds, and
    ``config.restarts`` seeded Dirichlet draws.  Returns a float, or the
    full :class:`OptimizerResult` when ``full`` is set.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a, b, _ = mac.shape
    starts = [[np.full(a, 1.0 / a), np.full(b, 1.0 / b)]]
    for s in seeds:
        starts.append([np.asarray(s[0], dtype=float), np.asarray(s[1], dtype=float)])
    starts += _random_starts([(a,), (b,)], config)
    res = _run_starts(starts, mac_avg_objective(mac, alpha), config)
    return res if full else res.value


# ---------------------------------------------------------------- contraction MAC


def dueck_pstar(alpha: float) -> float:
    """``1 / (1 + 2^{alpha/(1-alpha)})``, extended by 0 at alpha = 1."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        return 0.0
    t = alpha / (1.0 - alpha)
    return float(expit(-t * math.log(2)))


def dueck_witness(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Product input ``p_A = p_B = 1/3``, ``p_a = p_b = 1/6``, ``P(X2 = 1) = p*``.

    Ordered as the alphabets of :func:`maccoop.channel.contraction_mac`.
    """
    q = dueck_pstar(alpha)
    return np.array([1 / 3, 1 / 3, 1 / 6, 1 / 6]), np.array([1 - q, q])


def dueck_max_upper(alpha: float, form: str = "closed") -> float:
    """Upper bound on the maximal-error support function of the contraction MAC.

    ``form="closed"``: ``alpha (log3 - 1) + (1 - alpha) log(1 + 2^{alpha/(1-alpha)})``.
    ``form="pstar"``: ``(1 - alpha) h(p*) + alpha (log3 - p*)``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if form == "closed":
        if alpha == 1.0:
            return LOG3
        t = alpha / (1.0 - alpha)
        return alpha * (LOG3 - 1) + (1 - alpha) * float(np.logaddexp2(0.0, t))
    if form == "pstar":
        p = dueck_pstar(alpha)
        return (1 - alpha) * binary_entropy(p) + alpha * (LOG3 - p)
    raise ValueError(f"unknown form {form!r}")


def dueck_avg_lower(alpha: float) -> float:
    """``(1 - alpha) h(p*) + alpha (log3 - p*/3)``, the value of :func:`dueck_witness`."""
    p = dueck_pstar(alpha)
    return (1 - alpha) * binary_entropy(p) + alpha * (LOG3 - p / 3)


def dueck_gap_report(alphas: Sequence[float]) -> list[dict]:
    rows = []
    for a in alphas:
        a = float(a)
        lo, up = dueck_avg_lower(a), dueck_max_upper(a)
        rows.append({
            "alpha": a,
            "pstar": dueck_pstar(a),
            "avg_lower": lo,
            "max_upper": up,
            "max_upper_pstar_form": dueck_max_upper(a, "pstar"),
            "gap": lo - up,
            "gap_positive": bool(lo - up > 1e-12),
        })
    return rows


def gap_cin_choice(gap: float, fraction: float = 0.9) -> dict:
    """Input capacities with ``(C1 + C2)/2 < gap``, so the gap survives cooperation."""
    if gap <= 0:
        return {"exists": False, "gap": gap}
    c = fraction * gap
    return {"exists": True, "gap": gap, "c_in": [c, c], "half_sum": c, "margin": gap - c}


# ---------------------------------------------------------------- conferencing


def _conf_terms(w, hw, pu, p1u, p2u):
    """I(X1;Y|U,X2), I(X2;Y|U,X1), I(X1,X2;Y|U), I(X1,X2;Y) for batched inputs."""
    y_u1 = np.einsum("buc,acy->buay", p2u, w)  # p(y|u,x1)
    y_u2 = np.einsum("bua,acy->bucy", p1u, w)  # p(y|u,x2)
    y_u = np.einsum("bua,buay->buy", p1u, y_u1)
    py = np.einsum("bu,buy->by", pu, y_u)
    h_y = _h_rows(py)
    h_yu = np.einsum("bu,bu->b", pu, _h_rows(y_u))
    h_yu1 = np.einsum("bu,bua,bua->b", pu, p1u, _h_rows(y_u1))
    h_yu2 = np.einsum("bu,buc,buc->b", pu, p2u, _h_rows(y_u2))
    if hw is None:
        h_y12 = np.zeros_like(h_y)
    else:
        h_y12 = np.einsum("bu,bua,buc,ac->b", pu, p1u, p2u, hw)
    return h_yu2 - h_y12, h_yu1 - h_y12, h_yu - h_y12, h_y - h_y12


def conferencing_terms(mac: DiscreteMAC, pu, p1u, p2u) -> dict:
    """The four mutual informations bounding the conferencing region at one input law."""
    hw = None if mac.is_deterministic else _h_rows(mac.transition)
    i1, i2, i3, i0 = _conf_terms(
        mac.transition, hw, np.asarray(pu, float)[None], np.asarray(p1u, float)[None],
        np.asarray(p2u, float)[None],
    )
    return {"I1": float(i1[0]), "I2": float(i2[0]), "I3": float(i3[0]), "I0": float(i0[0])}


def _conf_lp(i1, i2, i3, i0, c12, c21, alpha):
    """max alpha R1 + (1-alpha) R2 over the conferencing pentagon.

    The constraint on the sum of positive parts is equivalent to the three
    linear bounds ``R1 <= C12 + I3``, ``R2 <= C21 + I3`` and
    ``R1 + R2 <= C12 + C21 + I3``, so the region is
    ``{R1 <= a, R2 <= b, R1 + R2 <= s}`` and a greedy fill is optimal.
    """
    a = c12 + np.minimum(i1, i3)
    b = c21 + np.minimum(i2, i3)
    s = np.minimum(c12 + c21 + i3, i0)
    a, b, s = (np.maximum(x, 0.0) for x in (a, b, s))
    if alpha >= 0.5:
        r1 = np.minimum(a, s)
        r2 = np.minimum(b, s - r1)
    else:
        r2 = np.minimum(b, s)
        r1 = np.minimum(a, s - r2)
    return alpha * r1 + (1 - alpha) * r2


def _conf_starts(shape_u, a, b, config, seeds):
    starts = [[np.full(shape_u, 1.0 / shape_u), np.full((shape_u, a), 1.0 / a), np.full((shape_u, b), 1.0 / b)]]
    # one deterministic start per corner pairing, so that U can select point masses
    eye_a, eye_b = np.eye(a), np.eye(b)
    corners = [(x, y) for x in range(a) for y in range(b)]
    if shape_u > 1:
        p1 = np.array([eye_a[corners[u % len(corners)][0]] for u in range(shape_u)])
        p2 = np.array([eye_b[corners[u % len(corners)][1]] for u in range(shape_u)])
        starts.append([np.full(shape_u, 1.0 / shape_u), 0.9 * p1 + 0.1 / a, 0.9 * p2 + 0.1 / b])
    for s in seeds:
        starts.append([np.asarray(x, dtype=float) for x in s])
    starts += _random_starts([(shape_u,), (shape_u, a), (shape_u, b)], config)
    return starts


def conferencing_calpha(
    mac: DiscreteMAC,
    c12: float,
    c21: float,
    alpha: float,
    u_cardinality: int = 4,
    config: OptimizerConfig = OptimizerConfig(),
    seeds: Sequence[tuple] = (),
    *,
    full: bool = False,
):
    """Best found ``C^alpha`` of the conferencing average-error region.

    The region at an input law ``p(u)p(x1|u)p(x2|u)`` is
    ``(R1 - C12)^+ <= I(X1;Y|U,X2)``, ``(R2 - C21)^+ <= I(X2;Y|U,X1)``,
    ``(R1 - C12)^+ + (R2 - C21)^+ <= I(X1,X2;Y|U)``, ``R1 + R2 <= I(X1,X2;Y)``.
    The inner linear program is solved in closed form.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if c12 < 0 or c21 < 0:
        raise ValueError("conferencing capacities must be nonnegative")
    if u_cardinality < 1:
        raise ValueError("u_cardinality must be at least 1")
    w = mac.transition
    hw = None if mac.is_deterministic else _h_rows(w)
    a, b, _ = mac.shape

    def fn(batch):
        return _conf_lp(*_conf_terms(w, hw, *batch), c12, c21, alpha)

    res = _run_starts(_conf_starts(u_cardinality, a, b, config, seeds), fn, config)
    return res if full else res.value


def rstar(
    mac: DiscreteMAC,
    c12: float,
    c21: float,
    u_cardinality: int = 4,
    config: OptimizerConfig = OptimizerConfig(),
) -> tuple[float, float]:
    """Best found ``max min{I(X1;Y|U,X2) + C12, I(X1,X2;Y)}`` and its mirror."""
    w = mac.transition
    hw = None if mac.is_deterministic else _h_rows(w)
    a, b, _ = mac.shape
    out = []
    for i, c in ((0, c12), (1, c21)):
        def fn(batch, i=i, c=c):
            i1, i2, _, i0 = _conf_terms(w, hw, *batch)
            return np.minimum((i1, i2)[i] + c, i0)

        out.append(_run_starts(_conf_starts(u_cardinality, a, b, config, ()), fn, config).value)
    return out[0], out[1]


def continuity_checks(
    mac: DiscreteMAC,
    grid: Sequence[tuple[float, float]],
    alpha: float,
    *,
    u_cardinality: int = 4,
    config: OptimizerConfig = OptimizerConfig(),
    tau: float = 0.02,
    max_base: float | None = None,
) -> dict:
    """Check ``C(c12,c21) <= C(c12,0) + (1-alpha) c21`` and ``<= C(0,c21) + alpha c12``.

    All values come from the same optimizer configuration.  When
    ``max_base`` (a maximal-error value at zero cooperation) is given, the
    table also lists ``max_base + (c12 + c21)/2``, the bound on the
    maximal-error value obtained by fixing the conferencing output.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    cache: dict = {}

    def C(c12, c21):
        key = (float(c12), float(c21))
        if key not in cache:
            cache[key] = conferencing_calpha(mac, key[0], key[1], alpha, u_cardinality, config)
        return cache[key]

    rows = []
    for c12, c21 in grid:
        val = C(c12, c21)
        rhs_a = C(c12, 0.0) + (1 - alpha) * c21
        rhs_b = C(0.0, c21) + alpha * c12
        row = {
            "c12": float(c12),
            "c21": float(c21),
            "value": val,
            "drop_c21_bound": rhs_a,
            "drop_c12_bound": rhs_b,
            "drop_c21_holds": bool(val <= rhs_a + tau),
            "drop_c12_holds": bool(val <= rhs_b + tau),
            "max_error_offset": 0.5 * (c12 + c21),
        }
        if max_base is not None:
            row["max_error_bound"] = max_base + 0.5 * (c12 + c21)
        rows.append(row)
    return {
        "alpha": alpha,
        "tau": tau,
        "u_cardinality": u_cardinality,
        "bound_kind": "lower_bound",
        "rows": rows,
        "all_hold": all(r["drop_c21_holds"] and r["drop_c12_holds"] for r in rows),
    }
