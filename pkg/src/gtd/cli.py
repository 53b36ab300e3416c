"""Command line front end.

    gtd <metric|curvature|geodesic|ng-check|legendre-check> --config FILE [--out FILE]

The config is a JSON object naming a catalog system with its parameters at
top level, e.g. ``{"system": "vdw", "kappa": 1.0, "a": 0.1, "b": 0.05}``,
plus optional blocks (``metric``, ``grid``, ``geodesic``, ``output``, ...).
Exit codes: 0 ok, 1 failed check, 2 config error, 3 domain error,
4 no convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .deriv import FDConfig
from .equilibrium import ClosedFormMetric, PullbackMetric, curvature
from .errors import (
    ConfigError,
    DegenerateMetricError,
    DomainError,
    NoConvergenceError,
    ParamError,
    SingularProductError,
)
from .extremal import ng_residual
from .phasespace import (
    PhaseMetricSpec,
    all_subsets,
    check_legendre_invariance,
    euclidean_metric,
    metric_G,
)
from .processes import cumulative_length, integrate_geodesic, shoot_between
from .systems import CATALOG, ENTROPY, FundamentalEquation, build_system

COMMANDS = ("metric", "curvature", "geodesic", "ng-check", "legendre-check")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


def _floats(value, name, length=None):
    if not isinstance(value, (list, tuple)) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{name} must be a list of numbers")
    if length is not None and len(value) != length:
        raise ConfigError(f"{name} must have {length} entries")
    return [float(v) for v in value]


def _check_keys(block: dict, allowed, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass
class GridConfig:
    lower: Optional[list] = None
    upper: Optional[list] = None
    points: Optional[list] = None

    KEYS = ("lower", "upper", "points")

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls.KEYS, "grid")
        out = cls(
            _floats(d["lower"], "grid.lower") if "lower" in d else None,
            _floats(d["upper"], "grid.upper") if "upper" in d else None,
            None,
        )
        if "points" in d:
            pts = d["points"]
            if not isinstance(pts, list) or not all(isinstance(p, int) and p >= 1 for p in pts):
                raise ConfigError("grid.points must be a list of positive integers")
            out.points = list(pts)
        return out

    def to_dict(self):
        return {k: getattr(self, k) for k in self.KEYS if getattr(self, k) is not None}

    def nodes(self, n: int):
        lower = self.lower or [0.5] * n
        upper = self.upper or [5.0] * n
        points = self.points or [20] * n
        if not (len(lower) == len(upper) == len(points) == n):
            raise ConfigError(f"grid needs {n} entries in lower, upper and points")
        axes = [np.linspace(lo, hi, m) for lo, hi, m in zip(lower, upper, points)]
        return [np.array(p) for p in itertools.product(*axes)]


@dataclass
class GeodesicConfig:
    start: Optional[list] = None
    velocity: Optional[list] = None
    end: Optional[list] = None
    tau_max: float = 1.0
    step: float = 0.01
    tol: float = 1e-8
    max_iter: int = 50

    KEYS = ("start", "velocity", "end", "tau_max", "step", "tol", "max_iter")

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls.KEYS, "geodesic")
        out = cls()
        for k in ("start", "velocity", "end"):
            if k in d:
                setattr(out, k, _floats(d[k], f"geodesic.{k}"))
        for k in ("tau_max", "step", "tol"):
            if k in d:
                v = d[k]
                if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                    raise ConfigError(f"geodesic.{k} must be a positive number")
                setattr(out, k, float(v))
        if "max_iter" in d:
            v = d["max_iter"]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError("geodesic.max_iter must be a positive integer")
            out.max_iter = v
        if out.velocity is not None and out.end is not None:
            raise ConfigError("geodesic takes either 'velocity' (initial value) or 'end' (two-point), not both")
        return out

    def to_dict(self):
        return {k: getattr(self, k) for k in self.KEYS if getattr(self, k) is not None}


@dataclass
class RunConfig:
    """Parsed run configuration; ``to_dict`` is the canonical serialization."""

    system: str = "ideal_gas"
    params: dict = field(default_factory=dict)
    metric: dict = field(default_factory=lambda: {"k": -1, "Lambda": "const:-1.0", "representation": ENTROPY})
    grid: GridConfig = field(default_factory=GridConfig)
    geodesic: GeodesicConfig = field(default_factory=GeodesicConfig)
    tolerance: float = 1e-6
    report_only: bool = False
    samples: int = 100
    seed: int = 0
    n: Optional[int] = None
    phase_metric: str = "gtd"
    sample_box: list = field(default_factory=lambda: [0.5, 2.0])
    output: dict = field(default_factory=lambda: {"format": "csv"})
    fd: dict = field(default_factory=dict)

    BLOCKS = (
        "system", "metric", "grid", "geodesic", "tolerance", "report_only", "samples",
        "seed", "n", "phase_metric", "sample_box", "output", "fd",
    )

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        cfg = cls()
        name = d.get("system", "ideal_gas")
        if name not in CATALOG:
            raise ConfigError(f"unknown system {name!r}; choose from {sorted(CATALOG)}")
        cfg.system = name
        param_keys = set(CATALOG[name][1])
        _check_keys(d, set(cls.BLOCKS) | param_keys, "config")
        cfg.params = {k: d[k] for k in d if k in param_keys}
        if "metric" in d:
            _check_keys(d["metric"], ("k", "Lambda", "representation"), "metric")
            cfg.metric = dict(cfg.metric, **d["metric"])
            try:
                PhaseMetricSpec.from_config(cfg.metric)
            except ParamError as exc:
                raise ConfigError(str(exc)) from None
            if cfg.metric["representation"] not in ("energy", "entropy"):
                raise ConfigError("metric.representation must be 'energy' or 'entropy'")
        if "grid" in d:
            cfg.grid = GridConfig.from_dict(d["grid"])
        if "geodesic" in d:
            cfg.geodesic = GeodesicConfig.from_dict(d["geodesic"])
        for key, typ in (("tolerance", float), ("samples", int), ("seed", int), ("n", int)):
            if key in d:
                v = d[key]
                ok = isinstance(v, (int, float)) if typ is float else isinstance(v, int)
                if isinstance(v, bool) or not ok:
                    raise ConfigError(f"{key} must be {'a number' if typ is float else 'an integer'}")
                setattr(cfg, key, typ(v))
        if "report_only" in d:
            if not isinstance(d["report_only"], bool):
                raise ConfigError("report_only must be true or false")
            cfg.report_only = d["report_only"]
        if "phase_metric" in d:
            if d["phase_metric"] not in ("gtd", "euclidean"):
                raise ConfigError("phase_metric must be 'gtd' or 'euclidean'")
            cfg.phase_metric = d["phase_metric"]
        if "sample_box" in d:
            cfg.sample_box = _floats(d["sample_box"], "sample_box", 2)
        if "output" in d:
            _check_keys(d["output"], ("path", "format"), "output")
            cfg.output = dict(cfg.output, **d["output"])
            if cfg.output["format"] not in ("csv", "json"):
                raise ConfigError("output.format must be 'csv' or 'json'")
        if "fd" in d:
            _check_keys(d["fd"], ("grad_base", "hess_base", "third_base", "richardson"), "fd")
            cfg.fd = dict(d["fd"])
        return cfg

    def to_dict(self) -> dict:
        out = {"system": self.system}
        out.update(self.params)
        out.update(
            metric=dict(self.metric),
            grid=self.grid.to_dict(),
            geodesic=self.geodesic.to_dict(),
            tolerance=self.tolerance,
            report_only=self.report_only,
            samples=self.samples,
            seed=self.seed,
            phase_metric=self.phase_metric,
            sample_box=list(self.sample_box),
            output=dict(self.output),
            fd=dict(self.fd),
        )
        if self.n is not None:
            out["n"] = self.n
        return out

    # -- derived objects -----------------------------------------------------

    def spec(self) -> PhaseMetricSpec:
        return PhaseMetricSpec.from_config(self.metric)

    def equation(self) -> FundamentalEquation:
        return build_system(self.system, self.params, self.metric.get("representation", ENTROPY))

    def fd_config(self) -> FDConfig:
        return FDConfig(**self.fd)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x) + 0.0) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _upper(m):
    n = m.shape[0]
    return [float(m[i, j]) for i in range(n) for j in range(i, n)]


def _emit(cfg: RunConfig, header, rows, records):
    if cfg.output.get("format", "csv") == "json":
        return _json(records)
    return _csv(header, rows)


def cmd_metric(cfg: RunConfig):
    spec, eq = cfg.spec(), cfg.equation()
    fd = cfg.fd_config()
    pb, cf = PullbackMetric(spec, eq, fd), ClosedFormMetric(spec, eq, fd)
    n, names = eq.n, eq.coordinates
    pairs = [f"{i + 1}{j + 1}" for i in range(n) for j in range(i, n)]
    header = list(names) + [f"g{p}_pullback" for p in pairs] + [f"g{p}_closed" for p in pairs] + ["discrepancy"]
    rows, records, worst = [], [], 0.0
    for E in cfg.grid.nodes(n):
        gp, gc = pb.metric(E), cf.metric(E)
        disc = float(np.max(np.abs(gp - gc)) / max(np.max(np.abs(gp)), np.finfo(float).tiny))
        worst = max(worst, disc)
        rows.append([float(x) for x in E] + _upper(gp) + _upper(gc) + [disc])
        records.append({"E": E.tolist(), "pullback": gp.tolist(), "closed_form": gc.tolist(), "discrepancy": disc})
    return _emit(cfg, header, rows, records), f"metric: {len(rows)} points, max discrepancy {worst:.3e}", True


def cmd_curvature(cfg: RunConfig):
    spec, eq = cfg.spec(), cfg.equation()
    field_ = ClosedFormMetric(spec, eq, cfg.fd_config())
    rows, records, worst = [], [], 0.0
    for E in cfg.grid.nodes(eq.n):
        rep = curvature(field_, E)
        det = float(np.linalg.det(field_.metric(E)))
        worst = max(worst, abs(rep.scalar))
        rows.append([float(x) for x in E] + [det, rep.scalar])
        records.append({"E": E.tolist(), "det_g": det, "R": rep.scalar})
    header = list(eq.coordinates) + ["det_g", "R"]
    return _emit(cfg, header, rows, records), f"curvature: max|R| = {worst:.6e}", True


def cmd_geodesic(cfg: RunConfig):
    spec, eq = cfg.spec(), cfg.equation()
    field_ = ClosedFormMetric(spec, eq, cfg.fd_config())
    geo, n = cfg.geodesic, eq.n
    start = geo.start if geo.start is not None else [1.0] * n
    if geo.end is not None:
        path = shoot_between(
            field_, start, geo.end, geo.tol, steps=max(1, round(1.0 / geo.step)), max_iter=geo.max_iter, eq=eq
        )
    else:
        vel = geo.velocity if geo.velocity is not None else [1.0] * n
        path = integrate_geodesic(field_, start, vel, geo.tau_max, geo.step, eq=eq)
    cum = cumulative_length(field_, path)
    names = list(eq.coordinates)
    header = ["tau"] + names + [f"d{c}" for c in names] + ["S", "cumulative_L"]
    rows = [
        [float(t)] + [float(x) for x in E] + [float(v) for v in V] + [float(s), float(L)]
        for t, E, V, s, L in zip(path.tau, path.E, path.Edot, path.entropy_trace, cum)
    ]
    verdict = {
        "admissible": path.admissible,
        "violation_tau": path.violation_tau,
        "truncated": path.truncated,
        "length": path.length,
        "speed_drift": path.speed_drift,
    }
    if cfg.output.get("format", "csv") == "json":
        text = _json(dict(verdict, samples=[dict(zip(header, r)) for r in rows]))
    else:
        text = _csv(header, rows)
    summary = "geodesic: " + ", ".join(f"{k}={v}" for k, v in verdict.items())
    return text, summary, bool(path.admissible) or cfg.report_only


def cmd_ng_check(cfg: RunConfig):
    spec, eq = cfg.spec(), cfg.equation()
    records, rows, worst = [], [], 0.0
    for E in cfg.grid.nodes(eq.n):
        rep = ng_residual(spec, eq, E)
        worst = max(worst, rep.max_norm)
        records.append({"E": E.tolist(), "max_norm": rep.max_norm, "components": rep.components.tolist()})
        rows.append([float(x) for x in E] + [rep.max_norm] + [float(c) for c in rep.components])
    ok = worst <= cfg.tolerance
    header = list(eq.coordinates) + ["max_norm"] + [f"D{A}" for A in range(2 * eq.n + 1)]
    mode = "report-only" if cfg.report_only else ("PASS" if ok else "FAIL")
    summary = f"ng-check: {mode} max residual {worst:.3e} (tolerance {cfg.tolerance:g})"
    return _emit(cfg, header, rows, records), summary, ok or cfg.report_only


def cmd_legendre_check(cfg: RunConfig):
    spec = cfg.spec()
    n = cfg.n if cfg.n is not None else cfg.equation().n
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.sample_box
    # magnitudes in [lo, hi] with random signs keep every E^a I^a away from zero
    pts = rng.uniform(lo, hi, size=(cfg.samples, 2 * n + 1)) * rng.choice([-1.0, 1.0], size=(cfg.samples, 2 * n + 1))
    metric = euclidean_metric if cfg.phase_metric == "euclidean" else (lambda z: metric_G(spec, z))
    records, rows, all_ok = [], [], True
    for subset in all_subsets(n):
        worst = max(check_legendre_invariance(spec, Z, subset, metric=metric) for Z in pts)
        ok = worst <= 1e-9
        all_ok &= ok
        records.append({"subset": subset, "max_residual": worst, "pass": ok})
        rows.append([" ".join(str(i) for i in subset), worst, str(ok).lower()])
    text = _emit(cfg, ["subset", "max_residual", "pass"], rows, records)
    verdict = "report-only" if cfg.report_only else ("PASS" if all_ok else "FAIL")
    summary = f"legendre-check: {verdict} {len(records)} subsets x {cfg.samples} points"
    return text, summary, all_ok or cfg.report_only


HANDLERS = {
    "metric": cmd_metric,
    "curvature": cmd_curvature,
    "geodesic": cmd_geodesic,
    "ng-check": cmd_ng_check,
    "legendre-check": cmd_legendre_check,
}


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return RunConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gtd", description="Geometrothermodynamics toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output file (default: output.path from config, else stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text, summary, ok = HANDLERS[args.command](cfg)
    except (ConfigError, ParamError) as exc:
        print(f"gtd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, SingularProductError, DegenerateMetricError) as exc:
        print(f"gtd: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NoConvergenceError as exc:
        print(f"gtd: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    out = args.out or cfg.output.get("path")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
