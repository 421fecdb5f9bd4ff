"""Grids, sampled fields, analytic test functions and their rasterization.

Grids are cell-centred: sample ``i`` sits at ``origin + (i + 1/2) h`` along
each axis, so cell ``i`` is ``[origin + i h, origin + (i + 1) h)``.  Arrays
use ``ij`` indexing; vector fields carry the component on axis 0.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np
from scipy import signal

from .geometry import BoundedRegion, ShapeSet

DEFAULT_CAP = 2**24


class ResolutionError(ValueError):
    """A shape or kernel is not resolved by the grid."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    origin: tuple[float, ...]
    h: float
    extents: tuple[int, ...]
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"grids support n in {{1, 2}}, got {self.n}")
        if len(self.origin) != self.n or len(self.extents) != self.n:
            raise ValueError("origin and extents must have one entry per axis")
        if not self.h > 0:
            raise ValueError(f"spacing must be positive, got {self.h}")
        if any(e < 2 for e in self.extents):
            raise ValueError(f"need at least 2 samples per axis, got {self.extents}")
        if math.prod(self.extents) > self.cap:
            raise ValueError(f"grid has {math.prod(self.extents)} samples, above the cap {self.cap}")

    @classmethod
    def covering(cls, lo, hi, h: float, cap: int = DEFAULT_CAP) -> GridSpec:
        """Grid whose cells tile [lo, hi] (rounded up to whole cells)."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        ext = tuple(int(math.ceil((b - a) / h - 1e-9)) for a, b in zip(lo, hi))
        return cls(len(lo), tuple(float(a) for a in lo), float(h), ext, cap)

    @classmethod
    def centered(cls, n: int, half_width: float, h: float, center=None, cap: int = DEFAULT_CAP) -> GridSpec:
        c = np.zeros(n) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
        return cls.covering(c - half_width, c + half_width, h, cap)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.extents

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.h * np.asarray(self.extents)

    def axes(self) -> list[np.ndarray]:
        return [o + (np.arange(N) + 0.5) * self.h for o, N in zip(self.origin, self.extents)]

    def points(self) -> np.ndarray:
        """Sample coordinates: shape (N,) in 1-D, (N0, N1, 2) in 2-D."""
        ax = self.axes()
        if self.n == 1:
            return ax[0]
        X, Y = np.meshgrid(*ax, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def index_of(self, x) -> tuple[int, ...]:
        """Index of the cell containing x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = tuple(int(math.floor((xi - o) / self.h)) for xi, o in zip(x, self.origin))
        if any(not 0 <= i < N for i, N in zip(idx, self.extents)):
            raise ValueError(f"point {x.tolist()} lies outside the grid")
        return idx

    def subsampled(self) -> GridSpec:
        """Grid of the even-index samples (spacing 2h), used for Richardson checks."""
        ext = tuple((N + 1) // 2 for N in self.extents)
        return GridSpec(self.n, tuple(o - self.h / 2 for o in self.origin), 2 * self.h, ext, self.cap)

    def dilated(self, lam: float) -> GridSpec:
        """The same index lattice scaled by lam about the origin of coordinates."""
        return GridSpec(self.n, tuple(lam * o for o in self.origin), lam * self.h, self.extents, self.cap)

    def region_mask(self, region: BoundedRegion | None) -> np.ndarray:
        if region is None:
            return np.ones(self.extents, dtype=bool)
        pts = self.points()
        if self.n == 1:
            pts = pts[:, None]
        return region.contains(pts)

    def to_dict(self) -> dict:
        return {"n": self.n, "origin": list(self.origin), "h": self.h, "extents": list(self.extents)}

    @classmethod
    def from_dict(cls, d: dict) -> GridSpec:
        return cls(int(d["n"]), tuple(d["origin"]), float(d["h"]), tuple(int(e) for e in d["extents"]))


@dataclass(frozen=True)
class ErrorBudget:
    """Bounds on the three error sources of a singular-integral evaluation."""

    inner_term: float = 0.0
    tail_term: float = 0.0
    quadrature_term: float = 0.0
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("inner_term", "tail_term", "quadrature_term"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be non-negative, got {v}")

    @property
    def total(self) -> float:
        return self.inner_term + self.tail_term + self.quadrature_term

    def __add__(self, other: ErrorBudget) -> ErrorBudget:
        flags = tuple(dict.fromkeys(self.flags + other.flags))
        return ErrorBudget(
            self.inner_term + other.inner_term,
            self.tail_term + other.tail_term,
            self.quadrature_term + other.quadrature_term,
            flags,
        )

    def scaled(self, c: float) -> ErrorBudget:
        c = abs(c)
        return ErrorBudget(c * self.inner_term, c * self.tail_term, c * self.quadrature_term, self.flags)

    def to_dict(self) -> dict:
        return {
            "inner": self.inner_term,
            "tail": self.tail_term,
            "quadrature": self.quadrature_term,
            "total": self.total,
            "flags": list(self.flags),
        }


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray
    support_hint: BoundedRegion | None = None
    budget: ErrorBudget | None = None
    provenance: dict = field(default_factory=dict)
    shape: ShapeSet | None = None

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != self.grid.extents:
            raise ValueError(f"values have shape {v.shape}, grid expects {self.grid.extents}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def is_indicator(self) -> bool:
        return self.shape is not None

    def with_values(self, values, **changes) -> ScalarField:
        changes.setdefault("shape", None)
        return replace(self, values=values, **changes)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self.values * other.values)
        return ScalarField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other: ScalarField) -> ScalarField:
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: ScalarField) -> ScalarField:
        return ScalarField(self.grid, self.values - other.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: GridSpec
    values: np.ndarray
    support_hint: BoundedRegion | None = None
    budget: ErrorBudget | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != (self.grid.n,) + self.grid.extents:
            raise ValueError(f"vector values have shape {v.shape}, expected {(self.grid.n,) + self.grid.extents}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def component(self, c: int) -> ScalarField:
        return ScalarField(self.grid, self.values[c])

    def dot(self, other: VectorField) -> ScalarField:
        return ScalarField(self.grid, np.sum(self.values * other.values, axis=0))

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return VectorField(self.grid, self.values * other.values[None])
        return VectorField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.grid, self.values + other.values)

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(self.grid, self.values - other.values)


Field = Union[ScalarField, VectorField]


# --------------------------------------------------------------------------
# analytic functions

FN_KINDS = ("gaussian", "bump", "atom_witness", "ramp_annulus", "custom_polynomial_bump")


def _as_points(pts, n: int) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    return pts[..., None] if n == 1 else pts


@dataclass(frozen=True)
class AnalyticFn:
    """Closed-form test function.

    gaussian:  amplitude * exp(-|x - c|^2 / (2 sigma^2))
    bump:      amplitude * exp(1 - 1 / (1 - |x - c|^2 / radius^2)) inside the ball
    custom_polynomial_bump: amplitude * (1 - |x - c|^2 / radius^2)_+^power
    ramp_annulus: 1 on B_r(c), linear down to 0 on the annulus of width eps
    atom_witness: |x - b|^(alpha-1) sgn(x - b) - |x - a|^(alpha-1) sgn(x - a), n = 1
    """

    kind: str
    n: int
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.kind not in FN_KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        p = self.p
        if self.kind == "atom_witness":
            if self.n != 1:
                raise ValueError("atom_witness is one-dimensional")
            if p["a"] == p["b"]:
                raise ValueError("atom_witness needs a != b")
            if not 0 < p["alpha"] < 1:
                raise ValueError("atom_witness needs alpha in (0, 1)")
        if self.kind == "ramp_annulus" and not (p["eps"] > 0 and p["r"] > 0):
            raise ValueError("ramp_annulus needs eps > 0 and r > 0")
        if self.kind in ("gaussian",) and not p["sigma"] > 0:
            raise ValueError("gaussian needs sigma > 0")
        if self.kind in ("bump", "custom_polynomial_bump") and not p["radius"] > 0:
            raise ValueError(f"{self.kind} needs radius > 0")

    @property
    def p(self) -> dict:
        return dict(self.params)

    # constructors -----------------------------------------------------

    @staticmethod
    def _c(center, n):
        return tuple(float(c) for c in np.broadcast_to(np.asarray(center, dtype=float), (n,)))

    @classmethod
    def gaussian(cls, n: int = 1, center=0.0, sigma: float = 1.0, amplitude: float = 1.0) -> AnalyticFn:
        return cls("gaussian", n, (("center", cls._c(center, n)), ("sigma", float(sigma)), ("amplitude", float(amplitude))))

    @classmethod
    def bump(cls, n: int = 1, center=0.0, radius: float = 1.0, amplitude: float = 1.0) -> AnalyticFn:
        return cls("bump", n, (("center", cls._c(center, n)), ("radius", float(radius)), ("amplitude", float(amplitude))))

    @classmethod
    def polynomial_bump(cls, n: int = 1, center=0.0, radius: float = 1.0, power: int = 4, amplitude: float = 1.0) -> AnalyticFn:
        return cls(
            "custom_polynomial_bump",
            n,
            (("center", cls._c(center, n)), ("radius", float(radius)), ("power", int(power)), ("amplitude", float(amplitude))),
        )

    @classmethod
    def ramp_annulus(cls, n: int, eps: float, r: float, center=0.0) -> AnalyticFn:
        return cls("ramp_annulus", n, (("center", cls._c(center, n)), ("eps", float(eps)), ("r", float(r))))

    @classmethod
    def atom_witness(cls, a: float, b: float, alpha: float) -> AnalyticFn:
        return cls("atom_witness", 1, (("a", float(a)), ("b", float(b)), ("alpha", float(alpha))))

    @classmethod
    def parse(cls, text: str, n: int = 1) -> AnalyticFn:
        """``kind`` or ``kind:k=v,k=v`` (e.g. ``gaussian:sigma=0.5``)."""
        kind, _, rest = text.partition(":")
        kw: dict[str, Any] = {}
        for item in filter(None, rest.split(",")):
            k, _, v = item.partition("=")
            kw[k.strip()] = float(v) if k.strip() != "center" else [float(c) for c in v.split(";")]
        if kind == "gaussian":
            return cls.gaussian(n, **kw)
        if kind == "bump":
            return cls.bump(n, **kw)
        if kind in ("custom_polynomial_bump", "polynomial_bump"):
            if "power" in kw:
                kw["power"] = int(kw["power"])
            return cls.polynomial_bump(n, **kw)
        if kind == "ramp_annulus":
            return cls.ramp_annulus(n, **kw)
        if kind == "atom_witness":
            return cls.atom_witness(kw.get("a", 0.0), kw.get("b", 1.0), kw.get("alpha", 0.5))
        raise ValueError(f"unknown function kind {kind!r}; choose from {', '.join(FN_KINDS)}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, **{k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params}}

    # evaluation -------------------------------------------------------

    def _radius2(self, pts) -> np.ndarray:
        x = _as_points(pts, self.n)
        c = np.asarray(self.p["center"])
        return np.sum((x - c) ** 2, axis=-1)

    def __call__(self, pts) -> np.ndarray:
        p = self.p
        k = self.kind
        if k == "atom_witness":
            x = np.asarray(pts, dtype=float)
            a, b, al = p["a"], p["b"], p["alpha"]
            with np.errstate(divide="ignore"):
                return np.sign(x - b) * np.abs(x - b) ** (al - 1) - np.sign(x - a) * np.abs(x - a) ** (al - 1)
        r2 = self._radius2(pts)
        if k == "gaussian":
            return p["amplitude"] * np.exp(-r2 / (2 * p["sigma"] ** 2))
        if k == "bump":
            t = r2 / p["radius"] ** 2
            out = np.zeros_like(t)
            m = t < 1
            out[m] = p["amplitude"] * np.exp(1 - 1 / (1 - t[m]))
            return out
        if k == "custom_polynomial_bump":
            t = r2 / p["radius"] ** 2
            return p["amplitude"] * np.clip(1 - t, 0, None) ** p["power"]
        r = np.sqrt(r2)
        return np.clip((p["r"] + p["eps"] - r) / p["eps"], 0.0, 1.0)

    def gradient(self, pts) -> np.ndarray:
        """Classical gradient, components on the last axis (drops it in 1-D)."""
        p = self.p
        k = self.kind
        if k == "atom_witness":
            raise ValueError("atom_witness has no integrable classical gradient")
        x = _as_points(pts, self.n)
        d = x - np.asarray(p["center"])
        r2 = np.sum(d * d, axis=-1)
        if k == "gaussian":
            g = -d / p["sigma"] ** 2 * self(pts)[..., None]
        elif k == "bump":
            R2 = p["radius"] ** 2
            t = r2 / R2
            val = self(pts)
            with np.errstate(divide="ignore", invalid="ignore"):
                fac = np.where(t < 1, -2 / (R2 * (1 - t) ** 2), 0.0)
            g = (fac * val)[..., None] * d
        elif k == "custom_polynomial_bump":
            R2 = p["radius"] ** 2
            t = r2 / R2
            q = p["power"]
            fac = np.where(t < 1, -2 * q / R2 * np.clip(1 - t, 0, None) ** (q - 1), 0.0)
            g = (p["amplitude"] * fac)[..., None] * d
        else:
            r = np.sqrt(r2)
            inside = (r > p["r"]) & (r < p["r"] + p["eps"])
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(inside[..., None], -d / (p["eps"] * r[..., None]), 0.0)
        return g[..., 0] if self.n == 1 else g

    def support(self) -> BoundedRegion | None:
        """Ball outside which the function vanishes (gaussian: below 1e-16)."""
        p = self.p
        if self.kind == "atom_witness":
            return None
        if self.kind == "gaussian":
            rad = p["sigma"] * math.sqrt(2 * math.log(1e16 * max(abs(p["amplitude"]), 1e-300)))
            return BoundedRegion.ball(p["center"], rad)
        if self.kind == "ramp_annulus":
            return BoundedRegion.ball(p["center"], p["r"] + p["eps"])
        return BoundedRegion.ball(p["center"], p["radius"])

    def lipschitz(self) -> float:
        p = self.p
        if self.kind == "gaussian":
            return abs(p["amplitude"]) / (p["sigma"] * math.sqrt(math.e))
        if self.kind == "ramp_annulus":
            return 1 / p["eps"]
        if self.kind == "atom_witness":
            return math.inf
        s = self.support()
        r = np.linspace(0, s.radius, 2001)
        pts = np.zeros((r.size, self.n))
        pts[:, 0] = r + np.asarray(p["center"])[0]
        g = self.gradient(pts if self.n > 1 else pts[:, 0])
        return float(np.max(np.abs(g)))

    def atom_cell_averages(self, grid: GridSpec) -> np.ndarray:
        """Exact cell averages of the atom witness (its antiderivative is |x - b|^a/a - |x - a|^a/a)."""
        if self.kind != "atom_witness":
            raise ValueError("cell averages are implemented for atom_witness only")
        p = self.p
        a, b, al = p["a"], p["b"], p["alpha"]

        def F(x):
            return (np.abs(x - b) ** al - np.abs(x - a) ** al) / al

        edges = grid.origin[0] + np.arange(grid.extents[0] + 1) * grid.h
        Fe = F(edges)
        return (Fe[1:] - Fe[:-1]) / grid.h


# --------------------------------------------------------------------------
# rasterization and elementary operations


def _fits(grid: GridSpec, lo, hi, margin: float = 0.0) -> bool:
    return bool(np.all(np.asarray(lo) >= grid.lo - 1e-12 + margin) and np.all(np.asarray(hi) <= grid.hi + 1e-12 - margin))


def rasterize(obj: ShapeSet | AnalyticFn, grid: GridSpec, rule: str = "point", warn_truncated: bool = True) -> ScalarField:
    """Sample a shape (as an indicator) or an analytic function on the grid.

    ``rule='cell_average'`` is available for the atom witness, whose point
    samples are too crude near the singularities.  Callers that account for
    the part of a shape beyond the grid pass ``warn_truncated=False``; the
    provenance still records the truncation.
    """
    if obj.n != grid.n:
        raise ValueError(f"object is {obj.n}-dimensional, grid is {grid.n}-dimensional")
    pts = grid.points()
    if isinstance(obj, ShapeSet):
        feat = obj.min_feature()
        if feat < 4 * grid.h:
            raise ResolutionError(f"shape feature {feat:g} spans fewer than 4 cells of size {grid.h:g}")
        vals = obj.contains(pts).astype(float)
        lo, hi = obj.bbox()
        hint = None
        flags = ()
        if not _fits(grid, lo, hi):
            flags = ("truncated_by_grid",)
            if obj.bounded and warn_truncated:
                warnings.warn("shape extends beyond the grid; samples are truncated", stacklevel=2)
        prov = {"source": "shape", "shape": obj.to_dict(), "truncated": bool(flags)}
        _stamp(prov)
        return ScalarField(grid, vals, hint, None, prov, obj)
    if rule == "cell_average":
        vals = obj.atom_cell_averages(grid)
    else:
        vals = obj(pts)
    sup = obj.support()
    if sup is not None:
        lo, hi = sup.bounds()
        if not _fits(grid, lo, hi):
            warnings.warn(f"{obj.kind} support is not covered by the grid; samples are truncated", stacklevel=2)
    prov = {"source": "function", "function": obj.to_dict(), "rule": rule}
    _stamp(prov)
    return ScalarField(grid, vals, sup, None, prov)


def _stamp(prov: dict) -> None:
    # Only record a date when the build environment pins one, so that
    # repeated runs serialize identically.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        import datetime

        prov["rasterized"] = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc).isoformat()


def vector_field(grid: GridSpec, fns) -> VectorField:
    """Vector field from one analytic function (or callable) per component."""
    pts = grid.points()
    comps = [f(pts) for f in fns]
    if len(comps) != grid.n:
        raise ValueError("one component per axis is required")
    return VectorField(grid, np.stack(comps))


def mollifier_weights(n: int, eps: float, h: float) -> np.ndarray:
    """Discrete standard mollifier rho_eps on the lattice, renormalised to unit mass."""
    m = int(math.floor(eps / h))
    ax = np.arange(-m, m + 1) * h
    if n == 1:
        r2 = ax**2
    else:
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        r2 = X**2 + Y**2
    t = r2 / eps**2
    w = np.zeros_like(t)
    inside = t < 1
    w[inside] = np.exp(-1 / (1 - t[inside]))
    return w / w.sum()


def mollify(f: ScalarField | VectorField, eps: float) -> ScalarField | VectorField:
    """Discrete convolution with rho_eps; mass leaving the grid is dropped."""
    if eps < 2 * f.grid.h:
        raise ResolutionError(f"mollifier radius {eps:g} is below 2h = {2 * f.grid.h:g}")
    w = mollifier_weights(f.grid.n, eps, f.grid.h)
    if isinstance(f, VectorField):
        vals = np.stack([signal.fftconvolve(c, w, mode="same") for c in f.values])
        return VectorField(f.grid, vals, f.support_hint, None, {"mollified": eps, **f.provenance})
    vals = signal.fftconvolve(f.values, w, mode="same")
    return ScalarField(f.grid, vals, f.support_hint, None, {"mollified": eps, **f.provenance})


def cutoff_profile(r: np.ndarray, R: float) -> np.ndarray:
    """eta_R as a function of |x|: 1 on [0, R], C^1 cubic decay to 0 at R + 1 (slope <= 3/2)."""
    t = np.clip(np.asarray(r, dtype=float) - R, 0.0, 1.0)
    return 1 - t * t * (3 - 2 * t)


def cutoff_approximate(f: ScalarField, R: float) -> ScalarField:
    """f * eta_R with eta_R centred at the origin of coordinates."""
    pts = _as_points(f.grid.points(), f.grid.n)
    r = np.sqrt(np.sum(pts**2, axis=-1))
    return ScalarField(f.grid, f.values * cutoff_profile(r, R), f.support_hint, None, {"cutoff": R, **f.provenance})


def lp_norm(f: Field, p: float = 1.0, region: BoundedRegion | None = None) -> float:
    """Riemann-sum L^p norm (pointwise Euclidean norm for vector fields)."""
    if not (p >= 1):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    a = f.magnitude() if isinstance(f, VectorField) else np.abs(f.values)
    mask = f.grid.region_mask(region)
    a = a[mask]
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    return float((f.grid.cell_volume * np.sum(a**p)) ** (1 / p))


def l1_distance(f: Field, g: Field, region: BoundedRegion | None = None) -> float:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    cls = VectorField if isinstance(f, VectorField) else ScalarField
    return lp_norm(cls(f.grid, f.values - g.values), 1.0, region)


# --------------------------------------------------------------------------
# serialization


def field_metadata(f: Field) -> dict:
    meta = {
        "type": "vector" if isinstance(f, VectorField) else "scalar",
        "grid": f.grid.to_dict(),
        "provenance": f.provenance,
    }
    if f.budget is not None:
        meta["budget"] = f.budget.to_dict()
    if f.support_hint is not None:
        meta["support_hint"] = f.support_hint.to_dict()
    return meta


def save_field(path: str, f: Field) -> None:
    """Binary container: npz with row-major samples and a JSON metadata entry."""
    meta = json.dumps(field_metadata(f), sort_keys=True)
    with open(path, "wb") as fh:
        np.savez(fh, values=np.ascontiguousarray(f.values), meta=np.array(meta))


def _budget_from(d: dict | None) -> ErrorBudget | None:
    if not d:
        return None
    return ErrorBudget(d["inner"], d["tail"], d["quadrature"], tuple(d.get("flags", ())))


def _region_from(d: dict | None) -> BoundedRegion | None:
    if not d:
        return None
    if d["kind"] == "ball":
        return BoundedRegion.ball(d["center"], d["radius"])
    return BoundedRegion.box(d["lo"], d["hi"])


def load_field(path: str) -> Field:
    with np.load(path, allow_pickle=False) as z:
        values = z["values"]
        meta = json.loads(str(z["meta"]))
    grid = GridSpec.from_dict(meta["grid"])
    cls = VectorField if meta["type"] == "vector" else ScalarField
    return cls(grid, values, _region_from(meta.get("support_hint")), _budget_from(meta.get("budget")), meta.get("provenance", {}))


def field_to_json(f: Field) -> str:
    d = field_metadata(f)
    d["values"] = f.values.tolist()
    return json.dumps(d, sort_keys=True)


def field_to_csv(f: Field) -> str:
    """Long-format CSV: '#'-prefixed metadata header, then coordinates and values."""
    buf = io.StringIO()
    buf.write("# " + json.dumps({"grid": f.grid.to_dict(), "provenance": f.provenance}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    n = f.grid.n
    coords = ["x"] if n == 1 else ["x1", "x2"]
    vals = ["value"] if isinstance(f, ScalarField) else [f"v{c}" for c in range(n)]
    w.writerow(coords + vals)
    pts = _as_points(f.grid.points(), n).reshape(-1, n)
    data = f.values.reshape(1, -1) if isinstance(f, ScalarField) else f.values.reshape(n, -1)
    for k in range(pts.shape[0]):
        w.writerow([repr(float(c)) for c in pts[k]] + [repr(float(v)) for v in data[:, k]])
    return buf.getvalue()
