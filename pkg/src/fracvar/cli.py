"""Command-line entry point: ``fracvar <command> [flags]``.

Every command prints a JSON document (the canonical format) or a CSV view
of it.  Exit status is 0 on success, 1 when a verification suite fails and
2 on a usage error.  Settings may also come from an INI file given with
``--config``; flags on the command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from . import __version__
from . import blowup
from . import constants as C
from . import measures as M
from . import suites as S
from .fields import AnalyticFn, GridSpec, ScalarField, VectorField, field_metadata, field_to_csv, rasterize
from .geometry import BoundedRegion, ShapeSet
from .operators import BACKENDS, Backend, frac_divergence, frac_gradient, frac_laplacian, riesz_potential

THREADS_ENV = "FRACVAR_THREADS"
COMMANDS = ("gradient", "divergence", "laplacian", "riesz", "perimeter", "variation", "coarea", "verify", "blowup", "constants")
CONFIG_SECTION = "fracvar"


class UsageError(Exception):
    """Bad flag value; carries the flag name so the message can point at it."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str = ""
    target: str = ""
    alpha: float = 0.5
    beta: float | None = None
    s: float | None = None
    dim: int | None = None
    h: float | None = None
    half_width: float | None = None
    center: str = ""
    shape: str = ""
    fn: str = ""
    region: str = ""
    method: str = "auto"
    backend: str = "direct"
    levels: int = 64
    lam: float = 2.0
    seed: int = 0
    point: str = ""
    radii: str = ""
    windows: str = "0.5,1,2"
    mode: str = "trace"
    out: str = "json"
    output: str = ""
    threads: int | None = None

    def validate(self) -> RunConfig:
        if self.command not in COMMANDS:
            raise UsageError("command", f"expected one of {', '.join(COMMANDS)}")
        if not 0 < self.alpha < 1:
            raise UsageError("--alpha", f"{self.alpha} outside the admissible range (0, 1)")
        if self.dim is not None and self.dim not in (1, 2):
            raise UsageError("--dim", f"{self.dim} outside the admissible range {{1, 2}}")
        if self.h is not None and not self.h > 0:
            raise UsageError("--h", f"{self.h} outside the admissible range (0, inf)")
        if self.half_width is not None and not self.half_width > 0:
            raise UsageError("--half-width", f"{self.half_width} outside the admissible range (0, inf)")
        if self.beta is not None and not 0 < self.beta < (self.dim or 1):
            raise UsageError("--beta", f"{self.beta} outside the admissible range (0, {self.dim or 1})")
        if self.s is not None and not -1 < self.s < 2:
            raise UsageError("--s", f"{self.s} outside the admissible range (-1, 2)")
        if self.backend not in BACKENDS:
            raise UsageError("--backend", f"{self.backend!r} not in {{{', '.join(BACKENDS)}}}")
        if self.out not in ("json", "csv"):
            raise UsageError("--out", f"{self.out!r} not in {{json, csv}}")
        if self.levels < 2:
            raise UsageError("--levels", f"{self.levels} outside the admissible range [2, inf)")
        if not self.lam > 0:
            raise UsageError("--lam", f"{self.lam} outside the admissible range (0, inf)")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads", f"{self.threads} outside the admissible range [1, inf)")
        if self.mode not in ("trace", "decay", "tangent"):
            raise UsageError("--mode", f"{self.mode!r} not in {{trace, decay, tangent}}")
        if self.shape and self.fn:
            raise UsageError("--shape", "give either --shape or --fn, not both")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, text: str):
    kind = _FIELD_TYPES[key]
    if text.strip() in ("", "None") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise UsageError(f"--{key.replace('_', '-')}", f"cannot read {text!r} as a number") from None
    return text


def load_config(path: str) -> dict:
    """Read an INI file with a single ``[fracvar]`` section; unknown keys are rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    unknown_sections = [s for s in parser.sections() if s != CONFIG_SECTION]
    if unknown_sections:
        raise UsageError("--config", f"unknown section [{unknown_sections[0]}]; use [{CONFIG_SECTION}]")
    if not parser.has_section(CONFIG_SECTION):
        return {}
    out = {}
    for key, text in parser.items(CONFIG_SECTION):
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise UsageError("--config", f"unknown key {key!r} in {path}")
        out[name] = _coerce(name, text)
    return out


def save_config(path: str, config: RunConfig) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    parser[CONFIG_SECTION] = {k: ("None" if v is None else str(v)) for k, v in asdict(config).items()}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracvar", description="Fractional gradients, variations and perimeters on grids.")
    p.add_argument("--version", action="version", version=f"fracvar {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def common(sp):
        # SUPPRESS keeps unset flags out of the namespace so the config file
        # and the dataclass defaults can fill them in
        d = argparse.SUPPRESS
        sp.add_argument("--config", default=d, help="INI file with a [fracvar] section")
        sp.add_argument("--save-config", default=d, help="write the effective configuration here")
        sp.add_argument("--alpha", type=float, default=d, help="order in (0, 1)")
        sp.add_argument("--dim", type=int, default=d, help="dimension, 1 or 2")
        sp.add_argument("--h", type=float, default=d, help="grid spacing")
        sp.add_argument("--half-width", type=float, default=d, dest="half_width", help="grid half width")
        sp.add_argument("--center", default=d, help="grid centre, comma separated")
        sp.add_argument("--out", default=d, choices=("json", "csv"))
        sp.add_argument("--output", default=d, help="write to this file instead of standard output")
        sp.add_argument("--threads", type=int, default=d, help=f"worker cap (default from ${THREADS_ENV} or 1)")
        sp.add_argument("--backend", default=d, help=f"one of {', '.join(BACKENDS)}")
        return sp

    def source(sp):
        sp.add_argument("--shape", default=argparse.SUPPRESS, help="e.g. interval:0,1 or ball:0,0,1")
        sp.add_argument("--fn", default=argparse.SUPPRESS, help="e.g. gaussian or bump:radius=2")
        return sp

    source(common(sub.add_parser("gradient", help="fractional gradient of a function or indicator")))
    source(common(sub.add_parser("divergence", help="fractional divergence of fn times the unit vector field")))
    sp = source(common(sub.add_parser("laplacian", help="(-Delta)^(s/2)")))
    sp.add_argument("--s", type=float, default=argparse.SUPPRESS, help="order in (-1, 2); default 2 alpha")
    sp = source(common(sub.add_parser("riesz", help="Riesz potential I_beta")))
    sp.add_argument("--beta", type=float, default=argparse.SUPPRESS, help="order in (0, n)")
    sp = common(sub.add_parser("perimeter", help="fractional perimeter of a shape"))
    sp.add_argument("--shape", default=argparse.SUPPRESS)
    sp.add_argument("--region", default=argparse.SUPPRESS, help="ball:c..,r or box:lo..,hi..")
    sp.add_argument("--method", default=argparse.SUPPRESS, choices=("auto", "exact", "grid"))
    sp = source(common(sub.add_parser("variation", help="fractional variation |D^a f|(region)")))
    sp.add_argument("--region", default=argparse.SUPPRESS)
    sp.add_argument("--method", default=argparse.SUPPRESS, choices=M.METHODS)
    sp = source(common(sub.add_parser("coarea", help="level-set decomposition of D^a f")))
    sp.add_argument("--levels", type=int, default=argparse.SUPPRESS)
    sp = common(sub.add_parser("verify", help="run a verification suite or all of them"))
    sp.add_argument("target", nargs="?", default=argparse.SUPPRESS, help=f"suite id or 'all' ({', '.join(S.suite_ids())})")
    sp.add_argument("--lam", type=float, default=argparse.SUPPRESS)
    sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sp = common(sub.add_parser("blowup", help="normal traces, decay profiles, tangent convergence"))
    sp.add_argument("--shape", default=argparse.SUPPRESS)
    sp.add_argument("--point", default=argparse.SUPPRESS, help="base point, comma separated")
    sp.add_argument("--radii", default=argparse.SUPPRESS, help="strictly decreasing, comma separated")
    sp.add_argument("--windows", default=argparse.SUPPRESS)
    sp.add_argument("--mode", default=argparse.SUPPRESS, choices=("trace", "decay", "tangent"))
    common(sub.add_parser("constants", help="table of the constants for (dim, alpha)"))
    return p


def resolve_config(argv: Sequence[str]) -> tuple[RunConfig, str | None]:
    ns = vars(build_parser().parse_args(list(argv)))
    merged: dict = {}
    if "config" in ns:
        merged.update(load_config(ns.pop("config")))
    save_to = ns.pop("save_config", None)
    merged.update(ns)
    cfg = RunConfig(**merged)
    if cfg.threads is None:
        env = os.environ.get(THREADS_ENV, "")
        try:
            cfg.threads = int(env) if env else 1
        except ValueError:
            raise UsageError(THREADS_ENV, f"{env!r} is not a positive integer") from None
    return cfg.validate(), save_to


# --------------------------------------------------------------------------
# command implementations


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(flag, f"cannot read {text!r} as comma-separated numbers") from None


def _shape(cfg: RunConfig) -> ShapeSet:
    try:
        E = ShapeSet.parse(cfg.shape)
    except ValueError as exc:
        raise UsageError("--shape", str(exc)) from None
    if cfg.dim is not None and E.n != cfg.dim:
        raise UsageError("--shape", f"{cfg.shape!r} is {E.n}-dimensional but --dim is {cfg.dim}")
    cfg.dim = E.n
    return E


def _grid_for(cfg: RunConfig, obj) -> GridSpec:
    n = obj.n
    h = cfg.h if cfg.h is not None else (1 / 256 if n == 1 else 1 / 32)
    centre = _floats(cfg.center, "--center") if cfg.center else None
    half_width = cfg.half_width
    if isinstance(obj, ShapeSet) and obj.bounded:
        lo, hi = obj.bbox()
        centre = centre or list((np.asarray(lo) + np.asarray(hi)) / 2)
        half_width = half_width or float(np.max(np.asarray(hi) - np.asarray(lo))) / 2 + 1.0
    half_width = half_width or (8.0 if n == 1 else 5.0)
    if centre is not None and len(centre) != n:
        raise UsageError("--center", f"expected {n} coordinates")
    return GridSpec.centered(n, half_width, h, center=centre)


def _source(cfg: RunConfig) -> ScalarField:
    if cfg.shape:
        obj = _shape(cfg)
    else:
        try:
            obj = AnalyticFn.parse(cfg.fn or "gaussian", cfg.dim or 1)
        except (ValueError, TypeError) as exc:
            raise UsageError("--fn", str(exc)) from None
    rule = "cell_average" if isinstance(obj, AnalyticFn) and obj.kind == "atom_witness" else "point"
    return rasterize(obj, _grid_for(cfg, obj), rule)


def _region(cfg: RunConfig) -> BoundedRegion | None:
    if not cfg.region:
        return None
    kind, _, rest = cfg.region.partition(":")
    vals = _floats(rest, "--region")
    if kind == "ball" and len(vals) in (2, 3):
        return BoundedRegion.ball(vals[:-1], vals[-1])
    if kind in ("box", "interval") and len(vals) in (2, 4):
        k = len(vals) // 2
        return BoundedRegion.box(vals[:k], vals[k:])
    raise UsageError("--region", f"cannot parse {cfg.region!r}; use ball:c..,r or box:lo..,hi..")


def _field_doc(f: ScalarField | VectorField, tag: str) -> dict:
    doc = field_metadata(f)
    doc["tag"] = tag
    doc["values"] = f.values.tolist()
    return doc


def _run_field(cfg: RunConfig) -> tuple[object, int]:
    f = _source(cfg)
    backend = Backend(cfg.backend)
    if cfg.command == "gradient":
        out = frac_gradient(f, cfg.alpha, backend, allow_tail=True)
    elif cfg.command == "divergence":
        vec = VectorField(f.grid, np.stack([f.values] * f.grid.n), provenance=f.provenance)
        out = frac_divergence(vec, cfg.alpha, backend, allow_tail=True)
    elif cfg.command == "laplacian":
        out = frac_laplacian(f, cfg.s if cfg.s is not None else 2 * cfg.alpha)
    else:
        out = riesz_potential(f, cfg.beta if cfg.beta is not None else cfg.alpha)
    if cfg.out == "csv":
        return field_to_csv(out), 0
    return _field_doc(out, "quadrature"), 0


def _run_perimeter(cfg: RunConfig) -> tuple[object, int]:
    if not cfg.shape:
        raise UsageError("--shape", "perimeter needs a shape, e.g. interval:0,1")
    E = _shape(cfg)
    region = _region(cfg)
    value = M.frac_perimeter(E, cfg.alpha, region, method=cfg.method, h=cfg.h)
    tag = "oracle" if cfg.method == "exact" or (cfg.method == "auto" and E.n == 1) else "quadrature"
    doc = {"command": "perimeter", "shape": E.to_dict(), "alpha": cfg.alpha, "method": cfg.method, "h": cfg.h, "value": value, "tag": tag}
    doc["region"] = region.to_dict() if region is not None else "all"
    if E.kind == "interval_union" and len(E.intervals) == 1 and region is None:
        from .oracles import interval_perimeter

        closed = interval_perimeter(*E.intervals[0], cfg.alpha)
        doc["closed_form"] = closed
        doc["relative_deviation"] = abs(value - closed) / closed
    return doc, 0


def _run_variation(cfg: RunConfig) -> tuple[object, int]:
    f = _source(cfg)
    method = cfg.method if cfg.method in M.METHODS else "adjoint_l1"
    rep = M.frac_variation(f, cfg.alpha, _region(cfg), method)
    doc = {"command": "variation", "alpha": cfg.alpha, "grid": f.grid.to_dict(), "tag": "oracle" if method == "oracle" else "adjoint"}
    doc.update(rep.to_dict())
    return doc, 0


def _run_coarea(cfg: RunConfig) -> tuple[object, int]:
    f = _source(cfg)
    res = M.coarea_integral(f, cfg.alpha, cfg.levels)
    doc = {"command": "coarea", "alpha": cfg.alpha, "grid": f.grid.to_dict(), "tag": "adjoint"}
    doc.update(res.to_dict())
    return doc, 0


def _run_verify(cfg: RunConfig) -> tuple[object, int]:
    target = cfg.target or "all"
    suite_cfg = S.SuiteConfig(alpha=cfg.alpha, n=cfg.dim, h=cfg.h, lam=cfg.lam, seed=cfg.seed, threads=cfg.threads or 1)
    if target == "all":
        reports = S.run_all(suite_cfg)
    else:
        if target not in S.SUITES:
            raise UsageError("verify", f"unknown suite {target!r}; choose from all, {', '.join(S.suite_ids())}")
        reports = [S.run_suite(target, suite_cfg)]
    code = 1 if any(r.status == "fail" for r in reports) else 0
    if cfg.out == "csv":
        return S.reports_to_csv(reports), code
    return [r.to_dict() for r in reports], code


def _run_blowup(cfg: RunConfig) -> tuple[object, int]:
    if not cfg.shape:
        raise UsageError("--shape", "blowup needs a shape, e.g. ball:0,0,1")
    E = _shape(cfg)
    point = _floats(cfg.point, "--point") if cfg.point else [0.0] * E.n
    if len(point) != E.n:
        raise UsageError("--point", f"expected {E.n} coordinates")
    x = point[0] if E.n == 1 else point
    radii = _floats(cfg.radii, "--radii") if cfg.radii else [0.2, 0.1, 0.05, 0.025]
    if any(b >= a for a, b in zip(radii, radii[1:])) or min(radii) <= 0:
        raise UsageError("--radii", "radii must be positive and strictly decreasing")
    policy = blowup.GridPolicy(h=cfg.h, threads=cfg.threads or 1)
    if cfg.mode == "decay":
        prof = blowup.decay_profile(E, x, cfg.alpha, radii, policy)
        return (prof.to_csv() if cfg.out == "csv" else prof.to_dict()), 0
    if cfg.mode == "tangent":
        trace = blowup.tangent_convergence(E, x, cfg.alpha, radii, tuple(_floats(cfg.windows, "--windows")), policy)
    else:
        trace = blowup.frac_normal_trace(E, x, cfg.alpha, radii, policy)
    return (trace.to_csv() if cfg.out == "csv" else trace.to_dict()), 0


def _run_constants(cfg: RunConfig) -> tuple[object, int]:
    cfg.dim = cfg.dim or 1
    table = C.constants_table(cfg.dim, cfg.alpha)
    if cfg.out == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value"])
        for k, v in table.items():
            w.writerow([k, repr(v)])
        return buf.getvalue(), 0
    return {"command": "constants", "dim": cfg.dim, "alpha": cfg.alpha, "tag": "quadrature", "constants": table}, 0


_HANDLERS = {
    "gradient": _run_field,
    "divergence": _run_field,
    "laplacian": _run_field,
    "riesz": _run_field,
    "perimeter": _run_perimeter,
    "variation": _run_variation,
    "coarea": _run_coarea,
    "verify": _run_verify,
    "blowup": _run_blowup,
    "constants": _run_constants,
}


def _render(payload) -> str:
    if isinstance(payload, str):
        return payload
    return json.dumps(S._plain(payload), indent=2, sort_keys=False, allow_nan=False) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, save_to = resolve_config(argv)
        if save_to:
            save_config(save_to, cfg)
        payload, code = _HANDLERS[cfg.command](cfg)
    except SystemExit as exc:  # argparse reports its own usage errors
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"fracvar: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"fracvar: error: {exc}", file=sys.stderr)
        return 2
    text = _render(payload)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
