"""Analytic sets and bounded regions in one and two dimensions.

Shapes are kept analytic so that rescaling, exact measures, slice
intervals and ray/segment intersections never go through pixel data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SHAPE_KINDS = ("interval_union", "ball", "box", "half_space")


@dataclass(frozen=True)
class BoundedRegion:
    """Ball or axis-aligned box; used as the region U or Omega."""

    kind: str
    center: tuple[float, ...] = ()
    radius: float = 0.0
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0:
                raise ValueError(f"ball radius must be positive, got {self.radius}")
        elif self.kind == "box":
            if len(self.lo) != len(self.hi) or not all(b > a for a, b in zip(self.lo, self.hi)):
                raise ValueError(f"box needs lo < hi componentwise, got {self.lo}, {self.hi}")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def ball(cls, center, radius) -> BoundedRegion:
        return cls("ball", center=tuple(float(c) for c in np.atleast_1d(center)), radius=float(radius))

    @classmethod
    def box(cls, lo, hi) -> BoundedRegion:
        return cls("box", lo=tuple(float(c) for c in np.atleast_1d(lo)), hi=tuple(float(c) for c in np.atleast_1d(hi)))

    @classmethod
    def interval(cls, a, b) -> BoundedRegion:
        return cls.box((a,), (b,))

    @property
    def n(self) -> int:
        return len(self.center) if self.kind == "ball" else len(self.lo)

    @property
    def diam(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return math.sqrt(sum((b - a) ** 2 for a, b in zip(self.lo, self.hi)))

    @property
    def volume(self) -> float:
        if self.kind == "ball":
            return math.pi ** (self.n / 2) / math.gamma(self.n / 2 + 1) * self.radius**self.n
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "ball":
            c = np.asarray(self.center)
            return c - self.radius, c + self.radius
        return np.asarray(self.lo), np.asarray(self.hi)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Membership of points with coordinates on the last axis (closed region)."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "ball":
            d2 = np.sum((pts - np.asarray(self.center)) ** 2, axis=-1)
            return d2 <= self.radius**2
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def as_shape(self) -> ShapeSet:
        if self.kind == "ball":
            return ShapeSet.ball(self.center, self.radius)
        return ShapeSet.box(self.lo, self.hi)

    def to_dict(self) -> dict:
        if self.kind == "ball":
            return {"kind": "ball", "center": list(self.center), "radius": self.radius}
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class ShapeSet:
    """Measurable set from the shape library.

    ``interval_union`` is one-dimensional; ``ball``, ``box`` and
    ``half_space`` work in one or two dimensions.  The half-space is
    ``{x : x . normal >= offset}``.
    """

    kind: str
    n: int
    intervals: tuple[tuple[float, float], ...] = ()
    center: tuple[float, ...] = ()
    radius: float = 0.0
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    normal: tuple[float, ...] = ()
    offset: float = 0.0
    empty: bool = field(default=False)

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.kind == "interval_union":
            prev = -math.inf
            for a, b in self.intervals:
                if not a < b:
                    raise ValueError(f"interval ({a}, {b}) is empty")
                if a < prev:
                    raise ValueError("intervals must be disjoint and ordered")
                prev = b
        elif self.kind == "ball" and not self.radius > 0:
            raise ValueError("ball radius must be positive")
        elif self.kind == "box" and not all(b > a for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi componentwise")
        elif self.kind == "half_space":
            if abs(math.hypot(*self.normal) - 1.0) > 1e-12:
                raise ValueError(f"half-space normal must be unit length, got {self.normal}")

    # construction -------------------------------------------------------

    @classmethod
    def interval(cls, a: float, b: float) -> ShapeSet:
        return cls("interval_union", 1, intervals=((float(a), float(b)),))

    @classmethod
    def interval_union(cls, pairs) -> ShapeSet:
        pairs = tuple((float(a), float(b)) for a, b in pairs)
        return cls("interval_union", 1, intervals=pairs, empty=len(pairs) == 0)

    @classmethod
    def ball(cls, center, radius) -> ShapeSet:
        c = tuple(float(v) for v in np.atleast_1d(center))
        return cls("ball", len(c), center=c, radius=float(radius))

    @classmethod
    def box(cls, lo, hi) -> ShapeSet:
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        return cls("box", len(lo), lo=lo, hi=hi)

    @classmethod
    def half_space(cls, normal, offset=0.0) -> ShapeSet:
        nrm = np.atleast_1d(np.asarray(normal, dtype=float))
        nrm = nrm / np.linalg.norm(nrm)
        return cls("half_space", len(nrm), normal=tuple(float(v) for v in nrm), offset=float(offset))

    @classmethod
    def parse(cls, text: str) -> ShapeSet:
        """Parse ``kind:comma,separated,numbers`` (e.g. ``interval:0,1``, ``ball:0,0,1``)."""
        kind, _, rest = text.partition(":")
        vals = [float(v) for v in rest.split(",") if v.strip()] if rest else []
        kind = kind.strip().lower()
        if kind == "interval" and len(vals) == 2:
            return cls.interval(*vals)
        if kind in ("intervals", "interval_union") and len(vals) % 2 == 0:
            return cls.interval_union(zip(vals[::2], vals[1::2]))
        if kind in ("ball", "disk") and len(vals) in (2, 3):
            return cls.ball(vals[:-1], vals[-1])
        if kind == "box" and len(vals) in (2, 4):
            k = len(vals) // 2
            return cls.box(vals[:k], vals[k:])
        if kind in ("half_space", "halfspace") and len(vals) in (2, 3):
            return cls.half_space(vals[:-1], vals[-1])
        raise ValueError(f"cannot parse shape {text!r}")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "n": self.n}
        if self.kind == "interval_union":
            d["intervals"] = [list(p) for p in self.intervals]
        elif self.kind == "ball":
            d.update(center=list(self.center), radius=self.radius)
        elif self.kind == "box":
            d.update(lo=list(self.lo), hi=list(self.hi))
        else:
            d.update(normal=list(self.normal), offset=self.offset)
        return d

    # basic geometry -----------------------------------------------------

    @property
    def bounded(self) -> bool:
        if self.kind == "half_space":
            return False
        if self.kind == "interval_union":
            return all(math.isfinite(a) and math.isfinite(b) for a, b in self.intervals)
        return True

    def intervals1d(self) -> list[tuple[float, float]]:
        """The set as an ordered list of open intervals (n = 1 only)."""
        if self.n != 1:
            raise ValueError("intervals1d is only defined in one dimension")
        if self.kind == "interval_union":
            return list(self.intervals)
        if self.kind == "ball":
            return [(self.center[0] - self.radius, self.center[0] + self.radius)]
        if self.kind == "box":
            return [(self.lo[0], self.hi[0])]
        if self.normal[0] > 0:
            return [(self.offset, math.inf)]
        return [(-math.inf, -self.offset)]

    def measure(self) -> float:
        if self.n == 1:
            return sum(b - a for a, b in self.intervals1d())
        if self.kind == "ball":
            return math.pi * self.radius**2
        if self.kind == "box":
            return math.prod(b - a for a, b in zip(self.lo, self.hi))
        return math.inf

    def classical_perimeter(self) -> float:
        if self.n == 1:
            return float(sum(math.isfinite(a) + math.isfinite(b) for a, b in self.intervals1d()))
        if self.kind == "ball":
            return 2 * math.pi * self.radius
        if self.kind == "box":
            return 2 * sum(b - a for a, b in zip(self.lo, self.hi))
        return math.inf

    def min_feature(self) -> float:
        """Smallest length scale that must be resolved by a grid."""
        if self.n == 1:
            ivs = self.intervals1d()
            lengths = [b - a for a, b in ivs]
            gaps = [ivs[i + 1][0] - ivs[i][1] for i in range(len(ivs) - 1)]
            return min(lengths + [g for g in gaps if g > 0], default=math.inf)
        if self.kind == "ball":
            return 2 * self.radius
        if self.kind == "box":
            return min(b - a for a, b in zip(self.lo, self.hi))
        return math.inf

    def contains(self, pts) -> np.ndarray:
        """Open-set membership.

        In one dimension ``pts`` is a bare array of coordinates; in two
        dimensions the coordinates sit on the last axis.
        """
        pts = np.asarray(pts, dtype=float)
        if self.n == 1:
            x = pts
            out = np.zeros(np.shape(x), dtype=bool)
            for a, b in self.intervals1d():
                out |= (x > a) & (x < b)
            return out
        if self.kind == "ball":
            return np.sum((pts - np.asarray(self.center)) ** 2, axis=-1) < self.radius**2
        if self.kind == "box":
            return np.all((pts > np.asarray(self.lo)) & (pts < np.asarray(self.hi)), axis=-1)
        return pts @ np.asarray(self.normal) > self.offset

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n == 1:
            ivs = self.intervals1d()
            return np.array([ivs[0][0]]), np.array([ivs[-1][1]])
        if self.kind == "ball":
            c = np.asarray(self.center)
            return c - self.radius, c + self.radius
        if self.kind == "box":
            return np.asarray(self.lo), np.asarray(self.hi)
        return np.full(2, -np.inf), np.full(2, np.inf)

    # transformations ----------------------------------------------------

    def rescale(self, x, r: float) -> ShapeSet:
        """Return (E - x) / r."""
        if not r > 0:
            raise ValueError("rescaling factor must be positive")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "interval_union":
            return ShapeSet.interval_union(((a - x[0]) / r, (b - x[0]) / r) for a, b in self.intervals)
        if self.kind == "ball":
            return ShapeSet.ball((np.asarray(self.center) - x) / r, self.radius / r)
        if self.kind == "box":
            return ShapeSet.box((np.asarray(self.lo) - x) / r, (np.asarray(self.hi) - x) / r)
        nrm = np.asarray(self.normal)
        return ShapeSet.half_space(nrm, (self.offset - float(nrm @ x)) / r)

    def dilate(self, lam: float) -> ShapeSet:
        """Return lam * E (dilation about the origin)."""
        return self.rescale(np.zeros(self.n), 1.0 / lam)

    # slices and rays (n = 2) -------------------------------------------

    def slice_x1(self, x1: float):
        """Interval of x2 values with (x1, x2) in the closure, or None."""
        if self.kind == "ball":
            dx = x1 - self.center[0]
            if abs(dx) >= self.radius:
                return None
            w = math.sqrt(self.radius**2 - dx * dx)
            return (self.center[1] - w, self.center[1] + w)
        if self.kind == "box":
            if not self.lo[0] < x1 < self.hi[0]:
                return None
            return (self.lo[1], self.hi[1])
        if self.kind == "half_space":
            n1, n2 = self.normal
            if abs(n2) < 1e-15:
                return (-math.inf, math.inf) if n1 * x1 > self.offset else None
            t = (self.offset - n1 * x1) / n2
            return (t, math.inf) if n2 > 0 else (-math.inf, t)
        raise ValueError("slices need a two-dimensional shape")

    def ray_segment(self, x: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Parameters t1 <= t2 with {x + t e : t1 < t < t2, t >= 0} = ray inside the shape.

        ``x`` has shape (..., 2) and ``e`` (..., 2) (broadcastable, unit vectors).
        Empty intersections return t1 = t2 = 0.
        """
        x = np.asarray(x, dtype=float)
        e = np.asarray(e, dtype=float)
        if self.kind == "ball":
            d = x - np.asarray(self.center)
            b = np.sum(d * e, axis=-1)
            c = np.sum(d * d, axis=-1) - self.radius**2
            disc = b * b - c
            sq = np.sqrt(np.maximum(disc, 0.0))
            t1 = -b - sq
            t2 = -b + sq
            ok = disc > 0
        elif self.kind == "box":
            lo, hi = np.asarray(self.lo), np.asarray(self.hi)
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = 1.0 / e
                ta = (lo - x) * inv
                tb = (hi - x) * inv
            tmin = np.where(np.isnan(ta), -np.inf, np.minimum(ta, tb))
            tmax = np.where(np.isnan(ta), np.inf, np.maximum(ta, tb))
            # zero direction component: inside the slab or never
            zero = e == 0
            inside = (x > lo) & (x < hi)
            tmin = np.where(zero, np.where(inside, -np.inf, np.inf), tmin)
            tmax = np.where(zero, np.where(inside, np.inf, -np.inf), tmax)
            t1 = np.max(tmin, axis=-1)
            t2 = np.min(tmax, axis=-1)
            ok = t2 > t1
        else:
            nrm = np.asarray(self.normal)
            en = e @ nrm
            gap = self.offset - x @ nrm
            with np.errstate(divide="ignore", invalid="ignore"):
                tc = gap / en
            pos = en > 0
            t1 = np.where(pos, tc, -np.inf)
            t2 = np.where(pos, np.inf, tc)
            par = en == 0
            t1 = np.where(par, np.where(gap < 0, -np.inf, np.inf), t1)
            t2 = np.where(par, np.where(gap < 0, np.inf, -np.inf), t2)
            ok = t2 > t1
        t1 = np.maximum(t1, 0.0)
        ok = ok & (t2 > t1)
        return np.where(ok, t1, 0.0), np.where(ok, t2, 0.0)


def interval_list_complement(ivs: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    prev = -math.inf
    for a, b in ivs:
        if a > prev:
            out.append((prev, a))
        prev = b
    if prev < math.inf:
        out.append((prev, math.inf))
    return out


def box_exit_distance(x: np.ndarray, e: np.ndarray, lo, hi) -> np.ndarray:
    """Distance along e from x (inside the box) to the box boundary."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(e > 0, (hi - x) / e, np.where(e < 0, (lo - x) / e, np.inf))
    return np.min(t, axis=-1)


def slice_intersection(a, b):
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if hi > lo else None
