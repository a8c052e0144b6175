"""Bounded open domains in R^n.

Membership is strict everywhere (boundary points are outside).  Every
query accepts a single point of shape ``(n,)`` or a batch ``(m, n)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

DEFAULT_SEGMENT_SAMPLES = 64
MAX_SNOWFLAKE_DEPTH = 6
DOMAIN_KINDS = ("box", "ball", "polygon", "lshape", "snowflake", "comb", "difference", "union")


class DomainError(ValueError):
    pass


def _as_points(points, dim: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got {pts.shape[-1]}")
    return pts, single


def _unwrap(values: np.ndarray, single: bool):
    if single:
        v = values[0]
        return v.item() if hasattr(v, "item") else v
    return values


class Domain:
    """Base class.  Subclasses implement the ``_contains`` / ``_segments`` kernels."""

    kind: str = "domain"
    dim: int
    lo: np.ndarray
    hi: np.ndarray
    anchor: np.ndarray
    exact_distance: bool = False
    convex: bool = False
    segment_samples: int = DEFAULT_SEGMENT_SAMPLES

    def _check(self) -> None:
        if np.any(self.hi - self.lo <= 0):
            raise DomainError("bounding box must have positive side lengths")
        if not self.contains(self.anchor):
            raise DomainError(f"anchor {self.anchor.tolist()} is not inside the domain")

    # -- membership ---------------------------------------------------
    def contains(self, points):
        pts, single = _as_points(points, self.dim)
        return _unwrap(self._contains(pts), single)

    def contains_closed(self, points):
        pts, single = _as_points(points, self.dim)
        return _unwrap(self._contains_closed(pts), single)

    def _contains_closed(self, pts: np.ndarray) -> np.ndarray:
        raise DomainError(f"closure membership not available for {self.kind}")

    # -- segments -----------------------------------------------------
    def segments_inside(self, p, q) -> np.ndarray:
        """Vectorized closed-segment containment for row-paired endpoints."""
        p, _ = _as_points(p, self.dim)
        q, _ = _as_points(q, self.dim)
        ok = self._contains(p) & self._contains(q)
        if not ok.any():
            return ok
        if self.convex:
            return ok
        idx = np.flatnonzero(ok)
        ok[idx] = self._segments(p[idx], q[idx])
        return ok

    def _segments(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return self._sampled_segments(p, q)

    def _sampled_segments(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        m = self.segment_samples
        s = (np.arange(1, m + 1) / (m + 1))[None, :, None]
        pts = p[:, None, :] + s * (q - p)[:, None, :]
        inside = self._contains(pts.reshape(-1, self.dim)).reshape(len(p), m)
        return inside.all(axis=1)

    # -- distance -----------------------------------------------------
    def distance_to_boundary(self, points):
        """Certified lower bound on dist(x, boundary); raises for points outside."""
        pts, single = _as_points(points, self.dim)
        if not self._contains(pts).all():
            raise DomainError("distance_to_boundary requires points inside the domain")
        return _unwrap(self._distance(pts), single)

    def _distance(self, pts: np.ndarray) -> np.ndarray:
        return np.zeros(len(pts))

    # -- measure ------------------------------------------------------
    @property
    def box_volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def exact_area(self) -> float | None:
        return None

    def area(self, mc_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
        if mc_samples < 1:
            raise DomainError("mc_samples must be >= 1")
        exact = self.exact_area()
        if exact is not None:
            return exact, 0.0
        from .rng import Stream

        stream = Stream(seed, "area")
        hits = 0
        chunk = 1 << 18
        for start in range(0, mc_samples, chunk):
            idx = np.arange(start, min(start + chunk, mc_samples))
            u = stream.uniform_block(self.dim, c3=idx)
            hits += int(self._contains(self.lo + u * (self.hi - self.lo)).sum())
        p = hits / mc_samples
        vol = self.box_volume
        return p * vol, math.sqrt(p * (1 - p) / mc_samples) * vol

    # -- serialization ------------------------------------------------
    def parameters(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "dimension": self.dim,
            "parameters": self.parameters(),
            "anchor": [float(a) for a in self.anchor],
        }


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


# ---------------------------------------------------------------------------
# convex shapes


@dataclass(eq=False)
class Box(Domain):
    lower: Sequence[float]
    upper: Sequence[float]
    anchor_point: Sequence[float] | None = None
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        self.lo = _arr(self.lower)
        self.hi = _arr(self.upper)
        self.dim = len(self.lo)
        self.anchor = _arr(self.anchor_point) if self.anchor_point is not None else (self.lo + self.hi) / 2
        self.convex = True
        self.exact_distance = True
        self._check()

    def _contains(self, pts):
        return np.all((pts > self.lo) & (pts < self.hi), axis=-1)

    def _contains_closed(self, pts):
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=-1)

    def _distance(self, pts):
        return np.minimum(pts - self.lo, self.hi - pts).min(axis=-1)

    def exact_area(self):
        return self.box_volume

    def parameters(self):
        return {"lower": self.lo.tolist(), "upper": self.hi.tolist()}


@dataclass(eq=False)
class Ball(Domain):
    center: Sequence[float]
    radius: float
    anchor_point: Sequence[float] | None = None
    kind: str = field(default="ball", init=False)

    def __post_init__(self):
        self.c = _arr(self.center)
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise DomainError("radius must be positive")
        self.dim = len(self.c)
        self.lo = self.c - self.radius
        self.hi = self.c + self.radius
        self.anchor = _arr(self.anchor_point) if self.anchor_point is not None else self.c.copy()
        self.convex = True
        self.exact_distance = True
        self._check()

    def _norm(self, pts):
        return np.sqrt(((pts - self.c) ** 2).sum(axis=-1))

    def _contains(self, pts):
        return self._norm(pts) < self.radius

    def _contains_closed(self, pts):
        return self._norm(pts) <= self.radius

    def _distance(self, pts):
        return self.radius - self._norm(pts)

    def exact_area(self):
        n = self.dim
        return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.radius**n

    def parameters(self):
        return {"center": self.c.tolist(), "radius": self.radius}


# ---------------------------------------------------------------------------
# polygons


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _closed_segments_meet(p, q, a, b) -> bool:
    o1 = np.sign(_orient(*p, *q, *a))
    o2 = np.sign(_orient(*p, *q, *b))
    o3 = np.sign(_orient(*a, *b, *p))
    o4 = np.sign(_orient(*a, *b, *q))
    if o1 == 0 and o2 == 0:
        d = 0 if abs(q[0] - p[0]) >= abs(q[1] - p[1]) else 1
        return max(min(p[d], q[d]), min(a[d], b[d])) <= min(max(p[d], q[d]), max(a[d], b[d]))
    return o1 * o2 <= 0 and o3 * o4 <= 0


@dataclass(eq=False)
class Polygon(Domain):
    """Simple polygon in the plane, vertices in either orientation, not repeated."""

    vertices: Sequence[Sequence[float]]
    anchor_point: Sequence[float] | None = None
    kind: str = "polygon"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError("polygon needs at least 3 planar vertices")
        self.v = v
        self.a = v
        self.b = np.roll(v, -1, axis=0)
        self.dim = 2
        self.lo = v.min(axis=0)
        self.hi = v.max(axis=0)
        self.anchor = _arr(self.anchor_point) if self.anchor_point is not None else v.mean(axis=0)
        self.exact_distance = True
        self._check()

    def _on_edge(self, pts):
        x, y = pts[:, 0:1], pts[:, 1:2]
        ax, ay, bx, by = self.a[:, 0], self.a[:, 1], self.b[:, 0], self.b[:, 1]
        col = _orient(ax, ay, bx, by, x, y) == 0
        within = (
            (x >= np.minimum(ax, bx)) & (x <= np.maximum(ax, bx))
            & (y >= np.minimum(ay, by)) & (y <= np.maximum(ay, by))
        )
        return (col & within).any(axis=1)

    def _crossing(self, pts):
        x, y = pts[:, 0:1], pts[:, 1:2]
        ax, ay, bx, by = self.a[:, 0], self.a[:, 1], self.b[:, 0], self.b[:, 1]
        straddle = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (y - ay) * (bx - ax) / (by - ay)
        hits = straddle & (x < xint)
        return (hits.sum(axis=1) % 2) == 1

    def _contains(self, pts):
        out = np.zeros(len(pts), dtype=bool)
        inbox = np.all((pts >= self.lo) & (pts <= self.hi), axis=-1)
        if inbox.any():
            sub = pts[inbox]
            out[inbox] = self._crossing(sub) & ~self._on_edge(sub)
        return out

    def _contains_closed(self, pts):
        out = np.zeros(len(pts), dtype=bool)
        inbox = np.all((pts >= self.lo) & (pts <= self.hi), axis=-1)
        if inbox.any():
            sub = pts[inbox]
            out[inbox] = self._crossing(sub) | self._on_edge(sub)
        return out

    def _segments(self, p, q):
        # endpoints are strictly inside; any contact with an edge leaves the open set
        px, py, qx, qy = p[:, 0:1], p[:, 1:2], q[:, 0:1], q[:, 1:2]
        ax, ay, bx, by = self.a[:, 0], self.a[:, 1], self.b[:, 0], self.b[:, 1]
        o1 = np.sign(_orient(px, py, qx, qy, ax, ay))
        o2 = np.sign(_orient(px, py, qx, qy, bx, by))
        o3 = np.sign(_orient(ax, ay, bx, by, px, py))
        o4 = np.sign(_orient(ax, ay, bx, by, qx, qy))
        cross = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        collinear = (o1 == 0) & (o2 == 0)
        if collinear.any():
            # collinear edge: overlap iff projections intersect
            d = np.where(np.abs(qx - px) >= np.abs(qy - py), 0, 1)
            pp = np.where(d == 0, px, py)
            qq = np.where(d == 0, qx, qy)
            aa = np.where(d == 0, ax, ay)
            bb = np.where(d == 0, bx, by)
            overlap = (np.maximum(np.minimum(pp, qq), np.minimum(aa, bb))
                       <= np.minimum(np.maximum(pp, qq), np.maximum(aa, bb)))
            cross = np.where(collinear, overlap, cross)
        return ~cross.any(axis=1)

    def _distance(self, pts):
        x, y = pts[:, 0:1], pts[:, 1:2]
        ax, ay = self.a[:, 0], self.a[:, 1]
        dx, dy = self.b[:, 0] - ax, self.b[:, 1] - ay
        t = np.clip(((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
        ex = x - (ax + t * dx)
        ey = y - (ay + t * dy)
        return np.sqrt(ex * ex + ey * ey).min(axis=1)

    def exact_area(self):
        x, y = self.v[:, 0], self.v[:, 1]
        return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) / 2)

    def is_simple(self) -> bool:
        """Pairwise check that non-adjacent edges do not meet (O(E^2))."""
        E = len(self.v)
        for i in range(E):
            for j in range(i + 1, E):
                if j == i + 1 or (i == 0 and j == E - 1):
                    continue
                if _closed_segments_meet(self.a[i], self.b[i], self.a[j], self.b[j]):
                    return False
        return True

    def parameters(self):
        if self.kind == "snowflake":
            return {"depth": self.meta["depth"]}
        if self.kind == "lshape":
            return {}
        return {"vertices": self.v.tolist()}


def make_lshape() -> Polygon:
    """(0,1)^2 minus the closed-open quadrant [1/2,1)^2."""
    v = [(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)]
    return Polygon(v, anchor_point=(0.25, 0.25), kind="lshape")


def koch_vertices(depth: int) -> np.ndarray:
    # counterclockwise unit triangle, centroid at the origin
    R = 1 / math.sqrt(3)
    ang = np.deg2rad([90.0, 210.0, 330.0])
    v = np.stack([R * np.cos(ang), R * np.sin(ang)], axis=1)
    c, s = math.cos(-math.pi / 3), math.sin(-math.pi / 3)
    rot = np.array([[c, -s], [s, c]])
    for _ in range(depth):
        a = v
        d = np.roll(v, -1, axis=0) - a
        p1 = a + d / 3
        peak = p1 + (d / 3) @ rot.T  # clockwise turn points outward for a CCW polygon
        p2 = a + 2 * d / 3
        v = np.stack([a, p1, peak, p2], axis=1).reshape(-1, 2)
    return v


def make_koch_snowflake(depth: int) -> Polygon:
    if depth < 0 or depth > MAX_SNOWFLAKE_DEPTH:
        raise DomainError(f"snowflake depth must be in [0, {MAX_SNOWFLAKE_DEPTH}]")
    return Polygon(koch_vertices(depth), anchor_point=(0.0, 0.0), kind="snowflake",
                   meta={"depth": depth})


# ---------------------------------------------------------------------------
# comb counterexample


@dataclass(frozen=True)
class CombSchedule:
    eps: tuple[float, ...]

    @classmethod
    def default(cls, max_level: int = 8) -> "CombSchedule":
        return cls(tuple(2.0 ** (-2 * k - 5) for k in range(1, max_level + 1)))

    @property
    def max_level(self) -> int:
        return len(self.eps)

    def strip_bounds(self) -> list[tuple[float, float]]:
        """(upper bound on strip area, required bound) per level."""
        return [(4 * e * (2**k + 1), 2.0 ** (-k - 1)) for k, e in enumerate(self.eps, start=1)]

    def validate(self) -> None:
        if not self.eps:
            raise DomainError("comb schedule needs at least one level")
        for k, (bound, limit) in enumerate(self.strip_bounds(), start=1):
            if not self.eps[k - 1] > 0 or not bound < limit:
                raise DomainError(f"comb level {k}: strip area bound {bound} !< {limit}")


@dataclass(eq=False)
class Comb(Domain):
    """Union over levels k of strips |x - j 2^-k| < eps_k or |y - j 2^-k| < eps_k, inside (0,1)^2."""

    schedule: CombSchedule
    kind: str = field(default="comb", init=False)

    def __post_init__(self):
        self.schedule.validate()
        self.dim = 2
        self.lo = np.zeros(2)
        self.hi = np.ones(2)
        self.anchor = np.array([0.5, 0.5])
        self.levels = np.arange(1, self.schedule.max_level + 1)
        self.eps = np.asarray(self.schedule.eps)
        self._check()

    def _line_gap(self, coord: np.ndarray) -> np.ndarray:
        """eps_k minus distance to the nearest level-k line, shape (m, K); positive = in strip."""
        scale = 2.0 ** self.levels
        c = coord[:, None]
        d = np.abs(c - np.round(c * scale) / scale)
        return self.eps[None, :] - d

    def _in_square(self, pts):
        return np.all((pts > 0) & (pts < 1), axis=-1)

    def _contains(self, pts):
        sq = self._in_square(pts)
        out = np.zeros(len(pts), dtype=bool)
        if sq.any():
            sub = pts[sq]
            out[sq] = (self._line_gap(sub[:, 0]) > 0).any(axis=1) | (self._line_gap(sub[:, 1]) > 0).any(axis=1)
        return out

    def _segments(self, p, q):
        out = np.zeros(len(p), dtype=bool)
        axis_aligned = (p[:, 0] == q[:, 0]) | (p[:, 1] == q[:, 1])
        # a segment varying along axis a with fixed other coordinate c lies in one strip family
        # iff c is inside a strip of the lines parallel to the segment
        fixed_axis = np.where(p[:, 0] == q[:, 0], 0, 1)
        fixed = np.where(fixed_axis == 0, p[:, 0], p[:, 1])
        in_family = (self._line_gap(fixed) > 0).any(axis=1)
        out[axis_aligned & in_family] = True
        rest = np.flatnonzero(axis_aligned & ~in_family)
        for i in rest:
            a = 1 - fixed_axis[i]
            out[i] = self._covered(min(p[i, a], q[i, a]), max(p[i, a], q[i, a]))
        oblique = np.flatnonzero(~axis_aligned)
        if len(oblique):
            out[oblique] = self._sampled_segments(p[oblique], q[oblique])
        return out

    def _covered(self, a: float, b: float) -> bool:
        """Is the closed interval [a, b] covered by the union of open perpendicular strips?"""
        intervals = []
        for k, e in zip(self.levels, self.eps):
            s = 2.0 ** -k
            for j in range(int(math.floor((a - e) / s)), int(math.ceil((b + e) / s)) + 1):
                intervals.append((j * s - e, j * s + e))
        x = a
        while True:
            reach = max((hi for lo, hi in intervals if lo < x < hi), default=None)
            if reach is None:
                return False
            if reach > b:
                return True
            x = reach

    def strip_measure(self, a: float, b: float) -> float:
        """Length of {t in (a, b) ∩ (0, 1) : t within eps_k of some level-k line}."""
        a, b = max(a, 0.0), min(b, 1.0)
        if b <= a:
            return 0.0
        iv = []
        for k, e in zip(self.levels, self.eps):
            s = 2.0 ** -k
            for j in range(int(math.floor((a - e) / s)), int(math.ceil((b + e) / s)) + 1):
                lo, hi = max(j * s - e, a), min(j * s + e, b)
                if hi > lo:
                    iv.append((lo, hi))
        iv.sort()
        total, end = 0.0, a
        for lo, hi in iv:
            if hi > end:
                total += hi - max(lo, end)
                end = hi
        return total

    def rect_area(self, lo, hi) -> float:
        """Exact area of U inside the rectangle [lo, hi]: vertical and horizontal
        strip sets are products, so inclusion-exclusion is a product formula."""
        lx = max(min(hi[0], 1.0) - max(lo[0], 0.0), 0.0)
        ly = max(min(hi[1], 1.0) - max(lo[1], 0.0), 0.0)
        A = self.strip_measure(lo[0], hi[0])
        B = self.strip_measure(lo[1], hi[1])
        return A * ly + lx * B - A * B

    def _distance(self, pts):
        # ball inside one strip and inside the square is inside U
        sq = np.minimum(pts, 1 - pts).min(axis=1)
        best = np.maximum(self._line_gap(pts[:, 0]).max(axis=1), self._line_gap(pts[:, 1]).max(axis=1))
        return np.clip(np.minimum(best, sq), 0.0, None)

    def parameters(self):
        return {"eps": list(self.schedule.eps)}


def make_comb_domain(schedule: CombSchedule | None = None) -> Comb:
    return Comb(schedule if schedule is not None else CombSchedule.default())


# ---------------------------------------------------------------------------
# set operations


@dataclass(eq=False)
class Difference(Domain):
    """outer minus the closure of inner."""

    outer: Domain
    inner: Domain
    anchor_point: Sequence[float] | None = None
    kind: str = field(default="difference", init=False)

    def __post_init__(self):
        self.dim = self.outer.dim
        self.lo, self.hi = self.outer.lo.copy(), self.outer.hi.copy()
        self.anchor = _arr(self.anchor_point) if self.anchor_point is not None else self.outer.anchor.copy()
        self._check()

    def _contains(self, pts):
        return self.outer._contains(pts) & ~self.inner._contains_closed(pts)

    def parameters(self):
        return {"outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


@dataclass(eq=False)
class Union(Domain):
    parts: Sequence[Domain]
    anchor_point: Sequence[float] | None = None
    kind: str = field(default="union", init=False)

    def __post_init__(self):
        self.parts = list(self.parts)
        self.dim = self.parts[0].dim
        self.lo = np.min([p.lo for p in self.parts], axis=0)
        self.hi = np.max([p.hi for p in self.parts], axis=0)
        self.anchor = _arr(self.anchor_point) if self.anchor_point is not None else self.parts[0].anchor.copy()
        self._check()

    def _contains(self, pts):
        out = np.zeros(len(pts), dtype=bool)
        for p in self.parts:
            out |= p._contains(pts)
        return out

    def _distance(self, pts):
        best = np.zeros(len(pts))
        for p in self.parts:
            inside = p._contains(pts)
            if inside.any():
                best[inside] = np.maximum(best[inside], p._distance(pts[inside]))
        return best

    def parameters(self):
        return {"parts": [p.to_dict() for p in self.parts]}


# ---------------------------------------------------------------------------
# module-level operations and factories


def contains(domain: Domain, point) -> bool:
    return domain.contains(point)


def segment_in_domain(domain: Domain, p, q) -> bool:
    return bool(domain.segments_inside(np.atleast_2d(p), np.atleast_2d(q))[0])


def distance_to_boundary(domain: Domain, point) -> float:
    return domain.distance_to_boundary(point)


def area(domain: Domain, mc_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    return domain.area(mc_samples, seed)


def unit_square() -> Box:
    return Box([0.0, 0.0], [1.0, 1.0])


def unit_interval() -> Box:
    return Box([0.0], [1.0])


def unit_disk() -> Ball:
    return Ball([0.0, 0.0], 1.0)


def domain_from_dict(d: dict[str, Any]) -> Domain:
    kind = d.get("kind")
    if kind not in DOMAIN_KINDS:
        raise DomainError(f"unknown domain kind {kind!r}")
    p = d.get("parameters", {}) or {}
    anchor = d.get("anchor")
    if kind == "box":
        dom = Box(p["lower"], p["upper"], anchor)
    elif kind == "ball":
        dom = Ball(p["center"], p["radius"], anchor)
    elif kind == "polygon":
        dom = Polygon(p["vertices"], anchor)
    elif kind == "lshape":
        dom = make_lshape()
    elif kind == "snowflake":
        dom = make_koch_snowflake(int(p["depth"]))
    elif kind == "comb":
        eps = p.get("eps")
        dom = make_comb_domain(CombSchedule(tuple(eps)) if eps else CombSchedule.default(int(p.get("max_level", 8))))
    elif kind == "difference":
        dom = Difference(domain_from_dict(p["outer"]), domain_from_dict(p["inner"]), anchor)
    else:
        dom = Union([domain_from_dict(x) for x in p["parts"]], anchor)
    if "dimension" in d and int(d["dimension"]) != dom.dim:
        raise DomainError(f"dimension {d['dimension']} does not match {kind} ({dom.dim})")
    if anchor is not None and kind in ("lshape", "snowflake", "comb"):
        dom.anchor = _arr(anchor)
        dom._check()
    return dom


_SHORTHANDS = {
    "square": unit_square,
    "interval": unit_interval,
    "disk": unit_disk,
    "lshape": make_lshape,
}


def parse_domain(spec) -> Domain:
    """Build a domain from a dict, a JSON/YAML file path, or a shorthand.

    Shorthands: ``square``, ``interval``, ``disk``, ``lshape``,
    ``snowflake:<depth>``, ``comb[:<max level>]``.
    """
    if isinstance(spec, Domain):
        return spec
    if isinstance(spec, dict):
        return domain_from_dict(spec)
    spec = str(spec)
    if spec in _SHORTHANDS:
        return _SHORTHANDS[spec]()
    if spec.startswith("snowflake"):
        _, _, depth = spec.partition(":")
        return make_koch_snowflake(int(depth or 2))
    if spec.startswith("comb"):
        _, _, K = spec.partition(":")
        return make_comb_domain(CombSchedule.default(int(K or 8)))
    path = Path(spec)
    if path.exists():
        text = path.read_text()
        if path.suffix in (".yaml", ".yml"):
            import yaml

            return domain_from_dict(yaml.safe_load(text))
        return domain_from_dict(json.loads(text))
    raise DomainError(f"cannot interpret domain {spec!r}")
