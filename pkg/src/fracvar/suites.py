"""Named verification suites.

Each suite rebuilds one identity, inequality or procedure from the
fractional calculus implemented in this package and returns a
:class:`SuiteReport`.  Every check is phrased either as an equality with an
absolute tolerance or as a list of inequalities ``measured <= bound +
tolerance``; identities that hold only up to discretisation error are
written as ``|residual| <= error budget``.

Suites are deterministic for a given configuration: random inputs come
from a seeded generator and nothing time dependent enters a report.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import blowup
from . import constants as C
from . import measures as M
from . import oracles as O
from .fields import (
    AnalyticFn,
    ErrorBudget,
    GridSpec,
    ScalarField,
    VectorField,
    cutoff_approximate,
    lp_norm,
    mollify,
    rasterize,
)
from .geometry import BoundedRegion, ShapeSet
from .operators import (
    adjoint_divergence,
    frac_divergence,
    frac_divergence_neg,
    frac_gradient,
    frac_laplacian,
    nl_divergence_remainder,
    nl_gradient_remainder,
)

__all__ = ["SuiteConfig", "SuiteReport", "SUITES", "suite_ids", "run_suite", "run_all", "reports_to_json", "reports_to_csv"]

STATUSES = ("pass", "fail", "skip")
KINDS = ("equality", "inequality")


@dataclass(frozen=True)
class SuiteConfig:
    """Inputs shared by all suites.

    ``n=None`` lets every suite use its own default dimension; ``h=None``
    likewise selects the per-suite default resolution.
    """

    alpha: float = 0.5
    n: int | None = None
    h: float | None = None
    lam: float = 2.0
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")  # reports must not depend on the worker count
        return d


@dataclass
class SuiteReport:
    suite_id: str
    inputs: dict
    measured: list[float]
    expected_or_bound: list[float]
    tolerance: float
    kind: str
    status: str
    labels: list[str] = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    reason: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return _plain(
            {
                "suite_id": self.suite_id,
                "status": self.status,
                "kind": self.kind,
                "labels": self.labels,
                "measured": self.measured,
                "expected_or_bound": self.expected_or_bound,
                "tolerance": self.tolerance,
                "inputs": self.inputs,
                "budgets": self.budgets,
                "constants": self.constants,
                "details": self.details,
                "reason": self.reason,
            }
        )


def _plain(obj):
    """Convert numpy scalars and tuples so that json.dumps output is stable."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def decide(measured, expected, tolerance: float, kind: str) -> str:
    m = np.atleast_1d(np.asarray(measured, dtype=float))
    e = np.atleast_1d(np.asarray(expected, dtype=float))
    if m.shape != e.shape:
        raise ValueError("measured and expected_or_bound must have the same length")
    if m.size == 0:
        return "fail"
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(e))):
        return "fail"
    if kind == "equality":
        ok = np.all(np.abs(m - e) <= tolerance)
    else:
        ok = np.all(m <= e + tolerance)
    return "pass" if ok else "fail"


def _report(
    suite_id: str,
    cfg: SuiteConfig,
    n: int,
    inputs: dict,
    checks: list[tuple[str, float, float]],
    tolerance: float,
    kind: str,
    budgets: dict | None = None,
    constants: dict | None = None,
    details: dict | None = None,
) -> SuiteReport:
    labels = [c[0] for c in checks]
    measured = [float(c[1]) for c in checks]
    expected = [float(c[2]) for c in checks]
    consts = C.constants_table(n, cfg.alpha)
    consts.update(constants or {})
    inp = {"config": cfg.to_dict(), "n": n}
    inp.update(inputs)
    status = decide(measured, expected, tolerance, kind)
    return SuiteReport(
        suite_id,
        inp,
        measured,
        expected,
        float(tolerance),
        kind,
        status,
        labels,
        {k: (v.to_dict() if isinstance(v, ErrorBudget) else v) for k, v in (budgets or {}).items()},
        consts,
        details or {},
    )


def _skip(suite_id: str, cfg: SuiteConfig, n: int | None, reason: str, kind: str = "inequality") -> SuiteReport:
    return SuiteReport(suite_id, {"config": cfg.to_dict(), "n": n}, [], [], 0.0, kind, "skip", reason=reason)


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _Suite:
    suite_id: str
    fn: Callable[[SuiteConfig, int], SuiteReport]
    dims: tuple[int, ...]
    default_dim: int
    summary: str
    refusal: str = ""


SUITES: dict[str, _Suite] = {}


def _suite(suite_id: str, dims=(1,), default_dim: int = 1, summary: str = "", refusal: str = ""):
    def wrap(fn):
        SUITES[suite_id] = _Suite(suite_id, fn, tuple(dims), default_dim, summary, refusal)
        return fn

    return wrap


def suite_ids() -> list[str]:
    return list(SUITES)


def run_suite(suite_id: str, config: SuiteConfig | dict | None = None) -> SuiteReport:
    """Run one suite.  Unknown ids raise KeyError; inadmissible configurations give a skip."""
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; known suites: {', '.join(SUITES)}")
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig(**(config or {}))
    entry = SUITES[suite_id]
    n = cfg.n if cfg.n is not None else entry.default_dim
    if not 0 < cfg.alpha < 1:
        return _skip(suite_id, cfg, n, f"alpha={cfg.alpha} lies outside (0, 1)")
    if n not in entry.dims:
        why = entry.refusal or f"suite supports n in {list(entry.dims)}, got n={n}"
        return _skip(suite_id, cfg, n, why)
    if cfg.h is not None and not cfg.h > 0:
        return _skip(suite_id, cfg, n, f"grid spacing h={cfg.h} must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return entry.fn(cfg, n)
        except (ValueError, ArithmeticError) as exc:
            # a grid too coarse for the inputs and similar configuration
            # problems surface here; report them instead of aborting a batch
            report = _skip(suite_id, cfg, n, f"{type(exc).__name__}: {exc}")
            report.status = "fail"
            return report


def run_all(config: SuiteConfig | dict | None = None, only: list[str] | None = None) -> list[SuiteReport]:
    """Run the registry (or the ``only`` subset) and merge the reports in registry order."""
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig(**(config or {}))
    ids = [s for s in SUITES if only is None or s in only]
    if cfg.threads <= 1 or len(ids) <= 1:
        return [run_suite(s, cfg) for s in ids]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda s: run_suite(s, cfg), ids))


def reports_to_json(reports: list[SuiteReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def reports_to_csv(reports: list[SuiteReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite_id", "measured", "expected", "status"])
    for r in reports:
        w.writerow([r.suite_id, ";".join(repr(v) for v in r.measured), ";".join(repr(v) for v in r.expected_or_bound), r.status])
    return buf.getvalue()


# --------------------------------------------------------------------------
# shared inputs


def _h(cfg: SuiteConfig, default: float) -> float:
    return cfg.h if cfg.h is not None else default


def _origin(n: int):
    return 0.0 if n == 1 else [0.0] * n


def _gaussian_grid(n: int, h: float, half_width: float | None = None) -> GridSpec:
    return GridSpec.centered(n, half_width or (16.0 if n == 1 else 7.0), h)


def _probe_indices(grid: GridSpec, count: int, radius: float = 2.0) -> list[tuple[int, ...]]:
    if grid.n == 1:
        return [grid.index_of(x) for x in np.linspace(-radius, radius, count)]
    th = np.linspace(0, 2 * np.pi, count, endpoint=False)
    rr = np.linspace(0.1, radius, count)
    return [grid.index_of([r * math.cos(t), r * math.sin(t)]) for r, t in zip(rr, th)]


def _bump_field(grid: GridSpec, centre, radius: float, amplitude: float = 1.0) -> ScalarField:
    return rasterize(AnalyticFn.bump(grid.n, centre, radius, amplitude), grid)


# --------------------------------------------------------------------------
# calculus identities


@_suite("duality", dims=(1, 2), summary="int f div^a phi = -int phi . grad^a f")
def _duality(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256 if n == 1 else 1 / 16)
    grid = GridSpec.centered(n, 8.0 if n == 1 else 6.0, h)
    rng = np.random.default_rng(cfg.seed)
    pairs = 10
    checks = []
    worst_budget = ErrorBudget()
    for k in range(pairs):
        c_f = rng.uniform(-1, 1, n)
        sigma = float(rng.uniform(0.6, 1.0))
        c_p = rng.uniform(-1, 1, n)
        rad = float(rng.uniform(0.8, 1.5))
        amp = float(rng.uniform(0.5, 1.5))
        f = rasterize(AnalyticFn.gaussian(n, c_f[0] if n == 1 else c_f, sigma), grid)
        comps = [_bump_field(grid, c_p[0] if n == 1 else c_p, rad, amp).values]
        if n == 2:
            comps.append(_bump_field(grid, c_p[::-1], rad, -0.5 * amp).values)
        phi = VectorField(grid, np.stack(comps))
        div = frac_divergence(phi, alpha)
        lhs = grid.cell_volume * float(np.sum(f.values * div.values))
        g = adjoint_divergence(f, alpha)
        rhs_adj = -grid.cell_volume * float(np.sum(g.values * phi.values))
        checks.append((f"adjoint_relative_residual_{k}", abs(lhs - rhs_adj) / max(abs(lhs), 1e-300), 1e-12))
        # independent path: the exact gradient of the Gaussian against phi
        pts = grid.points()
        shifted = pts - (c_f[0] if n == 1 else c_f)
        exact = O.gaussian_frac_gradient(n, alpha, shifted, sigma)
        rhs = -grid.cell_volume * float(np.sum(exact * phi.values))
        budget = div.budget.scaled(lp_norm(f))
        worst_budget = budget if budget.total > worst_budget.total else worst_budget
        checks.append((f"independent_residual_{k}", abs(lhs - rhs), budget.total))
    return _report(
        "duality",
        cfg,
        n,
        {"grid": grid.to_dict(), "pairs": pairs, "f": "gaussian", "phi": "bump"},
        checks,
        1e-15,
        "inequality",
        {"independent_path_worst": worst_budget},
    )


def _inversion_errors(alpha: float, n: int, hs: list[float]) -> tuple[list[float], list[ErrorBudget]]:
    errs, budgets = [], []
    for h in hs:
        grid = _gaussian_grid(n, h, 16.0 if n == 1 else 8.0)
        f = rasterize(AnalyticFn.gaussian(n, _origin(n)), grid)
        grad = frac_gradient(f, alpha, allow_tail=True)
        back = frac_divergence_neg(grad, alpha)
        errs.append(float(np.sum(np.abs(-back.values - f.values)) / np.sum(np.abs(f.values))))
        budgets.append(back.budget)
    return errs, budgets


@_suite("inversion", dims=(1, 2), summary="-div^{-a} grad^a f = f")
def _inversion(cfg: SuiteConfig, n: int) -> SuiteReport:
    base = _h(cfg, 1 / 32 if n == 1 else 1 / 8)
    hs = [base, base / 2, base / 4]
    errs, budgets = _inversion_errors(cfg.alpha, n, hs)
    checks = [
        ("error_after_first_refinement", errs[1], errs[0]),
        ("error_after_second_refinement", errs[2], errs[1]),
        ("finest_relative_l1_error", errs[2], 0.05),
    ]
    return _report(
        "inversion",
        cfg,
        n,
        {"f": "unit gaussian", "h": hs},
        checks,
        1e-12,
        "inequality",
        {f"h={h!r}": b for h, b in zip(hs, budgets)},
        details={"relative_l1_errors": errs},
    )


@_suite("composition", dims=(1, 2), summary="-div^a grad^a = (-Delta)^a")
def _composition(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 128 if n == 1 else 1 / 16)
    grid = _gaussian_grid(n, h)
    f = rasterize(AnalyticFn.gaussian(n, _origin(n)), grid)
    grad = frac_gradient(f, alpha, allow_tail=True)
    div = frac_divergence(grad, alpha, allow_tail=True)
    lap = frac_laplacian(f, 2 * alpha)
    budget = grad.budget + div.budget + lap.budget
    exact = O.gaussian_frac_laplacian(n, 2 * alpha, grid.points())
    checks = []
    for k, idx in enumerate(_probe_indices(grid, 10)):
        checks.append((f"probe_{k}", abs(-div.values[idx] - lap.values[idx]), budget.total))
    lap_err = float(np.max(np.abs(lap.values - exact)))
    checks.append(("laplacian_vs_closed_form", lap_err, lap.budget.total))
    return _report(
        "composition",
        cfg,
        n,
        {"grid": grid.to_dict(), "f": "unit gaussian"},
        checks,
        1e-12,
        "inequality",
        {"gradient": grad.budget, "divergence": div.budget, "laplacian": lap.budget},
        {"nu": C.nu(n, 2 * alpha) if 2 * alpha < 2 else None},
    )


def _random_pairs(grid: GridSpec, rng, count: int, values: np.ndarray, min_gap: float) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    out = []
    while len(out) < count:
        a = rng.uniform(-2, 2, grid.n)
        b = rng.uniform(-2, 2, grid.n)
        ia, ib = grid.index_of(a), grid.index_of(b)
        if abs(values[ib] - values[ia]) >= min_gap:
            out.append((ia, ib))
    return out


@_suite("ftc", dims=(1, 2), summary="f(y) - f(x) from grad^a f")
def _ftc(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 128 if n == 1 else 1 / 16)
    grid = _gaussian_grid(n, h, 16.0 if n == 1 else 5.0)
    f = rasterize(AnalyticFn.gaussian(n, _origin(n)), grid)
    grad = frac_gradient(f, alpha, allow_tail=True)
    rng = np.random.default_rng(cfg.seed)
    checks = []
    for k, (ix, iy) in enumerate(_random_pairs(grid, rng, 10, f.values, 0.05)):
        rec = O.ftc_reconstruct(grad, alpha, ix, iy)
        diff = float(f.values[iy] - f.values[ix])
        checks.append((f"pair_{k}", abs(rec - diff), 0.01 * abs(diff)))
    return _report(
        "ftc",
        cfg,
        n,
        {"grid": grid.to_dict(), "f": "unit gaussian", "pairs": 10},
        checks,
        1e-15,
        "inequality",
        {"gradient": grad.budget},
        {"mu_neg": C.mu(n, -alpha)},
    )


@_suite("ftc_delta", dims=(1, 2), summary="mu_{n,-a} div^a (K_y - K_x) = delta_y - delta_x")
def _ftc_delta(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 128 if n == 1 else 1 / 16)
    grid = _gaussian_grid(n, h, 16.0 if n == 1 else 5.0)
    pts = grid.points()
    rng = np.random.default_rng(cfg.seed + 1)
    checks = []
    for k, sigma in enumerate((0.7, 1.0, 1.4)):
        centre = rng.uniform(-0.5, 0.5, n)
        c = centre[0] if n == 1 else centre
        psi = rasterize(AnalyticFn.gaussian(n, c, sigma), grid)
        # the test function enters only through its exact fractional gradient
        exact = VectorField(grid, O.gaussian_frac_gradient(n, alpha, pts - c, sigma))
        for j, (ix, iy) in enumerate(_random_pairs(grid, rng, 3, psi.values, 0.05)):
            pairing = O.ftc_reconstruct(exact, alpha, ix, iy)
            diff = float(psi.values[iy] - psi.values[ix])
            checks.append((f"sigma_{sigma}_pair_{j}", abs(pairing - diff), 0.01 * abs(diff)))
    return _report(
        "ftc_delta",
        cfg,
        n,
        {"grid": grid.to_dict(), "tests": "gaussians sigma in (0.7, 1.0, 1.4)"},
        checks,
        1e-15,
        "inequality",
        constants={"mu_neg": C.mu(n, -alpha)},
    )


def _outside_l1(values: np.ndarray, grid: GridSpec, alpha: float) -> float:
    """Mass beyond the grid of |grad^alpha u| for a compactly supported u (1-D exact when single signed)."""
    u = ScalarField(grid, values)
    if grid.n == 1:
        return M._outside_variation_1d(u, alpha)[0]
    return M._outside_variation_2d(u, alpha)[0]


@_suite("leibniz_grad", dims=(1, 2), summary="grad^a(fg) = f grad^a g + g grad^a f + grad_NL(f, g)")
def _leibniz_grad(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256 if n == 1 else 1 / 16)
    grid = GridSpec.centered(n, 4.0 if n == 1 else 3.0, h)
    f = _bump_field(grid, -0.3 if n == 1 else [-0.3, 0.1], 1.0)
    g = _bump_field(grid, 0.4 if n == 1 else [0.4, -0.2], 1.2)
    fg = ScalarField(grid, f.values * g.values)
    G_fg, G_f, G_g = (frac_gradient(u, alpha) for u in (fg, f, g))
    nl = nl_gradient_remainder(f, g, alpha)
    res = G_fg.values - f.values * G_g.values - g.values * G_f.values - nl.values
    sup_f, sup_g = float(np.max(np.abs(f.values))), float(np.max(np.abs(g.values)))
    budget = G_fg.budget + G_g.budget.scaled(sup_f) + G_f.budget.scaled(sup_g) + nl.budget
    # outside the supports grad_NL(f, g) coincides with grad^a(fg)
    nl_l1 = lp_norm(nl) + _outside_l1(fg.values, grid, alpha)
    mu = C.mu(n, alpha)
    holder = mu * M.gagliardo_seminorm(f, alpha / 2, 2) * M.gagliardo_seminorm(g, alpha / 2, 2)
    sup_bound = 2 * mu * sup_f * M.gagliardo_seminorm(g, alpha, 1)
    checks = [
        ("max_reconstruction_residual", float(np.max(np.abs(res))), budget.total),
        ("nl_l1_vs_holder_p2", nl_l1, holder),
        ("nl_l1_vs_sup_f_seminorm_g", nl_l1, sup_bound),
    ]
    return _report(
        "leibniz_grad",
        cfg,
        n,
        {"grid": grid.to_dict(), "f": "bump(-0.3, 1.0)", "g": "bump(0.4, 1.2)"},
        checks,
        1e-9 * max(nl_l1, 1.0),
        "inequality",
        {"combined": budget},
    )


@_suite("leibniz_div", dims=(1, 2), summary="div^a(f phi) = f div^a phi + phi . grad^a f + div_NL(f, phi)")
def _leibniz_div(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256 if n == 1 else 1 / 16)
    grid = GridSpec.centered(n, 4.0 if n == 1 else 3.0, h)
    f = _bump_field(grid, -0.3 if n == 1 else [-0.3, 0.1], 1.0)
    p = _bump_field(grid, 0.4 if n == 1 else [0.4, -0.2], 1.2, 0.7)
    # phi = p e for a fixed unit vector e, so the seminorms of phi are those of p
    direction = np.array([1.0]) if n == 1 else np.array([0.6, 0.8])
    phi = VectorField(grid, direction.reshape((n,) + (1,) * n) * p.values[None])
    fphi = VectorField(grid, f.values[None] * phi.values)
    D_fphi, D_phi = frac_divergence(fphi, alpha), frac_divergence(phi, alpha)
    G_f = frac_gradient(f, alpha)
    nl = nl_divergence_remainder(f, phi, alpha)
    res = D_fphi.values - f.values * D_phi.values - np.sum(phi.values * G_f.values, axis=0) - nl.values
    sup_f, sup_phi = float(np.max(np.abs(f.values))), float(np.max(np.abs(p.values)))
    budget = D_fphi.budget + D_phi.budget.scaled(sup_f) + G_f.budget.scaled(sup_phi) + nl.budget
    # outside the supports div_NL(f, phi) = div^a(f phi), whose far mass is at most that of |f phi|
    nl_l1 = lp_norm(nl) + _outside_l1(np.abs(f.values * p.values), grid, alpha)
    mu = C.mu(n, alpha)
    checks = [
        ("max_reconstruction_residual", float(np.max(np.abs(res))), budget.total),
        ("nl_l1_vs_holder_p2", nl_l1, mu * M.gagliardo_seminorm(f, alpha / 2, 2) * M.gagliardo_seminorm(p, alpha / 2, 2)),
        ("nl_l1_vs_sup_f_seminorm_phi", nl_l1, 2 * mu * sup_f * M.gagliardo_seminorm(p, alpha, 1)),
        ("nl_l1_vs_sup_phi_seminorm_f", nl_l1, 2 * mu * sup_phi * M.gagliardo_seminorm(f, alpha, 1)),
    ]
    return _report(
        "leibniz_div",
        cfg,
        n,
        {"grid": grid.to_dict(), "f": "bump(-0.3, 1.0)", "phi": "0.7 bump(0.4, 1.2) e", "e": direction.tolist()},
        checks,
        1e-9 * max(nl_l1, 1.0),
        "inequality",
        {"combined": budget},
    )


@_suite("mollifier_commute", dims=(1, 2), summary="div^a(rho_eps * phi) = rho_eps * div^a phi")
def _mollifier_commute(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 128 if n == 1 else 1 / 16)
    grid = GridSpec.centered(n, 4.0, h)
    base = _bump_field(grid, _origin(n), 1.0).values
    phi = VectorField(grid, np.stack([base] * n) * (np.arange(1, n + 1)[(slice(None),) + (None,) * n]))
    div = frac_divergence(phi, alpha, allow_tail=True)
    checks = []
    epsilons = (0.1, 0.2, 0.4)
    for eps in epsilons:
        lhs = frac_divergence(mollify(phi, eps), alpha, allow_tail=True).values
        rhs = mollify(div, eps).values
        # compare away from the grid edge, where mollification loses mass
        inner = grid.region_mask(BoundedRegion.ball(np.zeros(n), 4.0 - eps - 4 * h))
        scale = float(np.max(np.abs(div.values)))
        checks.append((f"commutator_eps_{eps}", float(np.max(np.abs(lhs - rhs)[inner])), 1e-12 * scale))
    # weak convergence of D^a(rho_eps * chi) to D^a chi, tested against a smooth field
    ind = rasterize(ShapeSet.interval(0, 1) if n == 1 else ShapeSet.ball([0, 0], 1.0), grid)
    test = rasterize(AnalyticFn.gaussian(n, 0.2 if n == 1 else [0.2, 0.1], 0.8), grid).values
    target = float(np.sum(test * M._gradient_density(ind, alpha)[0])) * grid.cell_volume
    gaps = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        if eps < 2 * h:
            continue
        sm = mollify(ind, eps)
        val = float(np.sum(test * adjoint_divergence(sm, alpha).values[0])) * grid.cell_volume
        gaps.append(abs(val - target))
    for k in range(1, len(gaps)):
        checks.append((f"weak_convergence_step_{k}", gaps[k], gaps[k - 1]))
    return _report(
        "mollifier_commute",
        cfg,
        n,
        {"grid": grid.to_dict(), "phi": "bump", "epsilons": list(epsilons)},
        checks,
        1e-14,
        "inequality",
        {"divergence": div.budget},
        details={"weak_convergence_gaps": gaps},
    )


# --------------------------------------------------------------------------
# estimates with explicit constants


@_suite("translation", dims=(1, 2), summary="||f(. + y) - f||_1 <= gamma |y|^a ||grad^a f||_1")
def _translation(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 128 if n == 1 else 1 / 16)
    grid = _gaussian_grid(n, h, 12.0 if n == 1 else 6.0)
    fn = AnalyticFn.gaussian(n, _origin(n))
    f = rasterize(fn, grid)
    total = M.frac_variation(f, alpha).value
    gam = C.gamma_translation_constant(n, alpha)
    checks = []
    for k in (1, 4, 16, 64, 256):
        shift = k * h if n == 1 else [k * h * 0.6, k * h * 0.8]
        moved = rasterize(AnalyticFn.gaussian(n, shift if n == 2 else float(shift)), grid)
        lhs = lp_norm(ScalarField(grid, moved.values - f.values))
        size = float(np.linalg.norm(np.atleast_1d(shift)))
        checks.append((f"offset_{size:.6g}", lhs, gam.value * size**alpha * total))
    checks.append(("gamma_vs_closed_bound", gam.value, C.gamma_translation_bound(n, alpha)))
    return _report(
        "translation",
        cfg,
        n,
        {"grid": grid.to_dict(), "f": "unit gaussian"},
        checks,
        1e-9,
        "inequality",
        constants={"gamma": gam.value, "gamma_error": gam.error, "gamma_bound": C.gamma_translation_bound(n, alpha)},
        details={"frac_variation": total},
    )


@_suite("mollifier_distance", dims=(1, 2), summary="||rho_eps * f - f||_1 <= gamma eps^a |D^a f|")
def _mollifier_distance(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 1024 if n == 1 else 1 / 64)
    grid = GridSpec.centered(n, 2.0, h, center=[0.5] if n == 1 else None)
    E = ShapeSet.interval(0, 1) if n == 1 else ShapeSet.ball([0, 0], 1.0)
    f = rasterize(E, grid)
    report = M.frac_variation(f, alpha)
    gam = C.gamma_translation_constant(n, alpha)
    checks = []
    for eps in (1 / 64, 1 / 32, 1 / 16, 1 / 8, 1 / 4):
        if eps < 2 * h:
            continue
        lhs = lp_norm(ScalarField(grid, mollify(f, eps).values - f.values))
        checks.append((f"eps_{eps:g}", lhs, gam.value * eps**alpha * report.value))
    return _report(
        "mollifier_distance",
        cfg,
        n,
        {"grid": grid.to_dict(), "shape": E.to_dict()},
        checks,
        1e-9,
        "inequality",
        {"variation": report.budget},
        {"gamma": gam.value},
        {"frac_variation": report.value},
    )


@_suite("homogeneity", dims=(1, 2), summary="grad^a(f o delta_lam) = lam^a (grad^a f) o delta_lam")
def _homogeneity(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha, lam = cfg.alpha, cfg.lam
    h = _h(cfg, 1 / 64 if n == 1 else 1 / 8)
    coarse = GridSpec.centered(n, 8.0 if n == 1 else 7.0, h)
    fine = GridSpec.centered(n, (8.0 if n == 1 else 7.0) / lam, h / lam)
    f = rasterize(AnalyticFn.gaussian(n, _origin(n)), coarse)
    f_lam = rasterize(AnalyticFn.gaussian(n, _origin(n), 1.0 / lam), fine)
    g = frac_gradient(f, alpha).values
    g_lam = frac_gradient(f_lam, alpha).values
    scale = float(np.max(np.abs(g)))
    rel = float(np.max(np.abs(g_lam - lam**alpha * g))) / scale
    return _report(
        "homogeneity",
        cfg,
        n,
        {"coarse_grid": coarse.to_dict(), "fine_grid": fine.to_dict(), "lambda": lam},
        [("relative_max_deviation", rel, 0.0)],
        1e-10,
        "equality",
    )


def _variation_ratio(E: ShapeSet, alpha: float, lam: float, h: float, half_width: float) -> tuple[float, float, float]:
    n = E.n
    g1 = GridSpec.centered(n, half_width, h)
    g2 = GridSpec.centered(n, half_width * lam, h * lam)
    v1 = M.frac_variation(rasterize(E, g1), alpha).value
    v2 = M.frac_variation(rasterize(E.dilate(lam), g2), alpha).value
    return v2 / v1, v1, v2


@_suite("scaling_sets", dims=(1, 2), summary="|D^a chi_{lam E}| = lam^(n-a) |D^a chi_E|")
def _scaling_sets(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha, lam = cfg.alpha, cfg.lam
    dims = [cfg.n] if cfg.n is not None else [1, 2]
    checks, details = [], {}
    for d in dims:
        if d == 1:
            E, h, hw = ShapeSet.interval(-0.5, 0.5), _h(cfg, 1 / 512), 2.0
        else:
            E, h, hw = ShapeSet.ball([0, 0], 1.0), _h(cfg, 1 / 32), 2.0
        ratio, v1, v2 = _variation_ratio(E, alpha, lam, h, hw)
        expected = lam ** (d - alpha)
        checks.append((f"ratio_n{d}", ratio, expected))
        details[f"n{d}"] = {"shape": E.to_dict(), "variation": v1, "variation_scaled": v2, "h": h}
    tol = 0.01 * min(c[2] for c in checks)
    return _report("scaling_sets", cfg, dims[0], {"lambda": lam, "dims": dims}, checks, tol, "equality", details=details)


def _test_family_1d(grid: GridSpec) -> list[tuple[str, ScalarField]]:
    return [
        ("interval(0,1)", rasterize(ShapeSet.interval(0, 1), grid)),
        ("gaussian", rasterize(AnalyticFn.gaussian(1, 0.5, 0.6), grid)),
        ("bump", _bump_field(grid, 0.5, 1.0)),
    ]


@_suite("sobolev_bound", dims=(1, 2), summary="|D^a f| <= mu [f]_{W^{a,1}}")
def _sobolev_bound(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    mu = C.mu(n, alpha)
    if n == 1:
        grid = GridSpec.centered(1, 6.0, _h(cfg, 1 / 256), center=[0.5])
        family = _test_family_1d(grid)
    else:
        grid = GridSpec.centered(2, 2.5, _h(cfg, 1 / 32))
        family = [("disk", rasterize(ShapeSet.ball([0, 0], 1.0), grid)), ("bump", _bump_field(grid, [0, 0], 1.5))]
    checks, budgets = [], {}
    for name, f in family:
        rep = M.frac_variation(f, alpha)
        semi = M.gagliardo_seminorm(f, alpha, 1)
        checks.append((name, rep.value, mu * semi))
        budgets[name] = rep.budget
    return _report("sobolev_bound", cfg, n, {"grid": grid.to_dict()}, checks, 1e-9, "inequality", budgets)


@_suite("sup_bound", dims=(1, 2), summary="||div^a phi||_inf <= C_{n,a,U} ||div phi||_inf")
def _sup_bound(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256 if n == 1 else 1 / 32)
    grid = GridSpec.centered(n, 3.0, h)
    checks = []
    consts = {}
    for radius in (0.5, 1.0, 2.0):
        fn = AnalyticFn.bump(n, _origin(n), radius)
        vals = rasterize(fn, grid).values
        phi = VectorField(grid, np.stack([vals] * n))
        div = frac_divergence(phi, alpha)
        grad = fn.gradient(grid.points())
        classical = grad if n == 1 else grad.sum(axis=-1)
        U = BoundedRegion.ball(np.zeros(n), radius)
        c = C.c_div_sup_constant(n, alpha, U)
        consts[f"C_U_radius_{radius}"] = c
        checks.append((f"radius_{radius}", float(np.max(np.abs(div.values))), c * float(np.max(np.abs(classical)))))
    return _report("sup_bound", cfg, n, {"grid": grid.to_dict(), "phi": "bump in each component"}, checks, 1e-9, "inequality", constants=consts)


def _ratio_family(cfg: SuiteConfig, items, h: float, value) -> dict[str, float]:
    out = {}
    for name, obj, half_width in items:
        grid = GridSpec.centered(2, half_width, h)
        f = rasterize(obj, grid)
        out[name] = value(f, obj) / M.frac_variation(f, cfg.alpha).value
    return out


@_suite(
    "gns",
    dims=(2,),
    default_dim=2,
    summary="||f||_{n/(n-a)} <= c |D^a f|, boundedness only",
    refusal="the inequality fails for n = 1: the exponent 1/(1-a) admits no uniform constant on the line",
)
def _gns(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    q = n / (n - alpha)
    items = [
        ("disk_r0.5", ShapeSet.ball([0, 0], 0.5), 1.5),
        ("disk_r1", ShapeSet.ball([0, 0], 1.0), 2.0),
        ("square_side1", ShapeSet.box([-0.5, -0.5], [0.5, 0.5]), 1.5),
        ("bump_r1", AnalyticFn.bump(2, [0, 0], 1.0), 2.0),
        ("gaussian_s0.4", AnalyticFn.gaussian(2, [0, 0], 0.4), 3.0),
    ]
    base = _h(cfg, 1 / 16)
    norm = lambda f, obj: lp_norm(f, q)  # noqa: E731
    coarse = _ratio_family(cfg, items, base, norm)
    fine = _ratio_family(cfg, items, base / 2, norm)
    checks = [("max_ratio_fine_vs_coarse", max(fine.values()), 1.1 * max(coarse.values()))]
    return _report(
        "gns",
        cfg,
        n,
        {"family": [i[0] for i in items], "h": [base, base / 2], "exponent": q},
        checks,
        1e-12,
        "inequality",
        details={"ratios_coarse": coarse, "ratios_fine": fine, "empirical_constant": max(fine.values())},
    )


@_suite("isoperimetric", dims=(2,), default_dim=2, summary="|E|^((n-a)/n) <= c |D^a chi_E|, boundedness only")
def _isoperimetric(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    items = [
        ("disk_r0.5", ShapeSet.ball([0, 0], 0.5), 1.5),
        ("disk_r1", ShapeSet.ball([0, 0], 1.0), 2.0),
        ("square_side1", ShapeSet.box([-0.5, -0.5], [0.5, 0.5]), 1.5),
        ("rectangle_2x0.5", ShapeSet.box([-1.0, -0.25], [1.0, 0.25]), 2.0),
    ]
    base = _h(cfg, 1 / 16)
    vol = lambda f, obj: obj.measure() ** ((n - alpha) / n)  # noqa: E731
    coarse = _ratio_family(cfg, items, base, vol)
    fine = _ratio_family(cfg, items, base / 2, vol)
    checks = [("max_ratio_fine_vs_coarse", max(fine.values()), 1.1 * max(coarse.values()))]
    return _report(
        "isoperimetric",
        cfg,
        n,
        {"family": [i[0] for i in items], "h": [base, base / 2]},
        checks,
        1e-12,
        "inequality",
        details={"ratios_coarse": coarse, "ratios_fine": fine, "empirical_constant": max(fine.values())},
    )


@_suite("embedding", dims=(1, 2), summary="[f]_{W^{b,1}} <= C_{n,a,b} ||f||_{BV^a}")
def _embedding(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    if n == 1:
        grid = GridSpec.centered(1, 6.0, _h(cfg, 1 / 256), center=[0.5])
        family = _test_family_1d(grid)
    else:
        grid = GridSpec.centered(2, 2.5, _h(cfg, 1 / 32))
        family = [("disk", rasterize(ShapeSet.ball([0, 0], 1.0), grid)), ("bump", _bump_field(grid, [0, 0], 1.5))]
    checks, consts = [], {}
    for beta in (alpha / 4, alpha / 2, 3 * alpha / 4):
        cst = C.embedding_constant(n, alpha, beta)
        consts[f"C_beta_{beta:g}"] = cst
        for name, f in family:
            bv = lp_norm(f) + M.frac_variation(f, alpha).value
            checks.append((f"{name}_beta_{beta:g}", M.gagliardo_seminorm(f, beta, 1), cst * bv))
    consts["gamma"] = C.gamma_translation_constant(n, alpha).value
    return _report("embedding", cfg, n, {"grid": grid.to_dict()}, checks, 1e-9, "inequality", constants=consts)


LEVELS = 128


@_suite("coarea", dims=(1, 2), summary="D^a f = int D^a chi_{f>t} dt; |D^a f| <= int |D^a chi_{f>t}| dt")
def _coarea(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256 if n == 1 else 1 / 32)
    grid = GridSpec.centered(n, 4.0 if n == 1 else 2.5, h)
    unimodal = _bump_field(grid, _origin(n), 1.0)
    twin = ScalarField(grid, _bump_field(grid, -0.8 if n == 1 else [-0.8, 0], 0.7).values + 0.6 * _bump_field(grid, 0.9 if n == 1 else [0.9, 0], 0.8).values)
    checks, details = [], {}
    for name, f in (("unimodal", unimodal), ("two_bumps", twin)):
        res = M.coarea_integral(f, alpha, LEVELS)
        grad = frac_gradient(f, alpha).values
        rel = float(np.sum(np.abs(res.accumulated.values - grad)) / np.sum(np.sqrt(np.sum(grad**2, axis=0))))
        checks.append((f"{name}_accumulated_vs_gradient_rel_l1", rel, 0.05))
        checks.append((f"{name}_variation_vs_level_integral", res.variation, res.level_total))
        details[name] = {"variation": res.variation, "level_total": res.level_total, "gap": res.level_total - res.variation, "skipped_levels": list(res.skipped)}
    return _report("coarea", cfg, n, {"grid": grid.to_dict(), "levels": LEVELS}, checks, 1e-9, "inequality", details=details)


# --------------------------------------------------------------------------
# worked examples


@_suite("strict_interval", dims=(1,), summary="|D^a chi_(0,1)| < mu P_a((0,1))")
def _strict_interval(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 1024)
    E = ShapeSet.interval(0, 1)
    grid = GridSpec.centered(1, 2.0, h, center=[0.5])
    var = M.frac_variation(rasterize(E, grid), alpha)
    per = M.frac_perimeter(E, alpha, method="grid", h=h)
    bound = C.mu(1, alpha) * per
    margin = 1 - var.value / bound
    analytic_margin = O.strict_margin(alpha)
    checks = [
        ("variation_vs_mu_perimeter", var.value, bound),
        ("ninety_percent_of_analytic_margin", 0.9 * analytic_margin, margin),
    ]
    return _report(
        "strict_interval",
        cfg,
        1,
        {"shape": E.to_dict(), "grid": grid.to_dict()},
        checks,
        1e-12,
        "inequality",
        {"variation": var.budget},
        {"perimeter_closed_form": O.interval_perimeter(0, 1, alpha), "variation_closed_form": O.interval_gradient_l1(0, 1, alpha)},
        {"perimeter": per, "margin": margin, "analytic_margin": analytic_margin},
    )


@_suite("atom_pairing", dims=(1,), summary="D^a f_{0,1,a} = (delta_1 - delta_0)/mu_{1,-a}")
def _atom_pairing(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 1024)
    grid = GridSpec.centered(1, 4.0, h, center=[0.5])
    f = rasterize(AnalyticFn.atom_witness(0, 1, alpha), grid, rule="cell_average")
    x = grid.points()
    checks = []
    tests = [(0.0, 0.6), (0.3, 0.8), (1.0, 0.5), (-0.2, 1.0), (0.7, 0.4)]
    for centre, width in tests:
        def phi(t, c=centre, w=width):
            return np.exp(-((t - c) ** 2) / w**2) * (1 + 0.25 * t)

        field_ = VectorField(grid, phi(x)[None])
        val = M.pair_with_field(f, field_, alpha)
        exp = O.atom_pairing_expected(float(phi(0.0)), float(phi(1.0)), alpha)
        checks.append((f"gaussian_c{centre}_w{width}", abs(val - exp), 0.02 * abs(exp)))
    return _report(
        "atom_pairing",
        cfg,
        1,
        {"grid": grid.to_dict(), "witness": [0, 1, alpha], "tests": tests},
        checks,
        1e-15,
        "inequality",
        constants={"mu_neg": C.mu(1, -alpha), "pairing_constant": 1 / C.mu(1, -alpha)},
    )


@_suite("ibp_ball", dims=(1, 2), summary="integration by parts on balls B_r(x)")
def _ibp_ball(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    if n == 1:
        h = _h(cfg, 1 / 1024)
        grid = GridSpec.centered(1, 4.0, h)
        E = ShapeSet.interval(0, 1)
        balls = [(0.0, 0.2), (0.0, 0.3), (1.0, 0.25)]
        phi = VectorField(grid, rasterize(AnalyticFn.bump(1, 0.2, 2.0), grid).values[None])
    else:
        h = _h(cfg, 1 / 32)
        grid = GridSpec.centered(2, 2.5, h)
        E = ShapeSet.ball([0, 0], 1.0)
        balls = [([1.0, 0.0], 0.3)]
        comp = [rasterize(AnalyticFn.bump(2, [0.8, 0.1], 1.5), grid).values, 0.5 * rasterize(AnalyticFn.bump(2, [1.0, -0.2], 1.5), grid).values]
        phi = VectorField(grid, np.stack(comp))
    chi_E = rasterize(E, grid)
    div = frac_divergence(phi, alpha)
    dens_E = M._gradient_density(chi_E, alpha)
    sup_phi = float(np.max(np.abs(phi.values)))
    checks, budgets, details = [], {}, {}
    vol = grid.cell_volume
    for centre, r in balls:
        B = ShapeSet.interval(centre - r, centre + r) if n == 1 else ShapeSet.ball(centre, r)
        chi_B = rasterize(B, grid)
        term_div = vol * float(np.sum(chi_E.values * chi_B.values * div.values))
        grad_B = frac_gradient(chi_B, alpha)
        term_grad = vol * float(np.sum(chi_E.values * np.sum(phi.values * grad_B.values, axis=0)))
        nl = nl_divergence_remainder(chi_B, phi, alpha)
        term_nl = vol * float(np.sum(chi_E.values * nl.values))
        rhs = -vol * float(np.sum(chi_B.values[None] * phi.values * dens_E))
        lhs = term_div + term_grad + term_nl
        budget = div.budget.scaled(B.measure()) + grad_B.budget.scaled(sup_phi * E.measure()) + nl.budget.scaled(E.measure())
        key = f"x={centre}_r={r}"
        budgets[key] = budget
        checks.append((key, abs(lhs - rhs), budget.total))
        details[key] = {"div_term": term_div, "gradient_term": term_grad, "nl_term": term_nl, "rhs": rhs}
    return _report("ibp_ball", cfg, n, {"grid": grid.to_dict(), "shape": E.to_dict()}, checks, 1e-12, "inequality", budgets, details=details)


@_suite("approximation", dims=(1,), summary="mollify + cut off: strict convergence in BV^a")
def _approximation(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    h = _h(cfg, 1 / 256)
    grid = GridSpec.centered(1, 16.0, h)
    ind = rasterize(ShapeSet.interval(0, 1), grid).values
    gauss = rasterize(AnalyticFn.gaussian(1, 0.0, 1.5, 0.5), grid).values
    f = ScalarField(grid, ind + gauss)
    target = M.frac_variation(f, alpha)
    steps = [(0.4, 1.0), (0.2, 2.0), (0.1, 4.0), (0.05, 8.0)]
    dists, variations = [], []
    for eps, R in steps:
        fk = cutoff_approximate(mollify(f, eps), R)
        vk = M.frac_variation(fk, alpha).value
        variations.append(vk)
        dists.append(lp_norm(ScalarField(grid, fk.values - f.values)) + abs(vk - target.value))
    checks = [(f"distance_step_{k}", dists[k], dists[k - 1]) for k in range(1, len(dists))]
    # lower semicontinuity along the sequence
    checks.append(("lsc_liminf", target.value - target.budget.total, min(variations[-2:]) + dists[-1]))
    return _report(
        "approximation",
        cfg,
        1,
        {"grid": grid.to_dict(), "f": "chi_(0,1) + 0.5 gaussian(1.5)", "steps": steps},
        checks,
        1e-12,
        "inequality",
        {"target": target.budget},
        details={"distances": dists, "variations": variations, "target_variation": target.value},
    )


@_suite("decay_density", dims=(1, 2), summary="|D^a chi_E|(B_r(x)) / (w_{n-a} r^(n-a)) <= A / w_{n-a}")
def _decay_density(cfg: SuiteConfig, n: int) -> SuiteReport:
    alpha = cfg.alpha
    if n == 1:
        E, x = ShapeSet.interval(0, 1), 0.0
        radii = [0.2, 0.1, 0.05, 0.025, 0.0125]
    else:
        E, x = ShapeSet.ball([0, 0], 1.0), [1.0, 0.0]
        radii = [0.2, 0.1, 0.05, 0.025]
    policy = blowup.GridPolicy(h=cfg.h)
    prof = blowup.decay_profile(E, x, alpha, radii, policy)
    bound = C.density_bound(n, alpha)
    checks = [(f"r={row['radius']}", row["density_ratio"], bound) for row in prof.rows]
    return _report(
        "decay_density",
        cfg,
        n,
        {"shape": E.to_dict(), "point": x, "radii": radii, "grid_policy": policy.to_dict()},
        checks,
        1e-12,
        "inequality",
        constants=prof.constants,
        details={"rows": prof.rows, "exponent": prof.exponent},
    )
