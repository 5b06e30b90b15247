"""Experiment orchestration, configuration and report files.

Reports are long-format CSV with a fixed header, one row per named value,
sorted so that reruns (serial or threaded) are byte-identical. A JSON mirror
adds the timestamp and the config hash.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .elliptic import ProbeReport, SolverFailure, solve_dirichlet, wente_solve
from .geometry import (
    CATALOG,
    MalformedFileError,
    RejectedImmersionError,
    SingularImmersionError,
    analyze,
    curvature,
    energy,
    make_immersion,
    read_wimm,
)
from .grid import DegenerateSubdiskError, DiskGrid, Subdisk, UNIT_DISK
from .noether import derivative_stack, solve_potentials, theorem1_probe, verify_structure
from .norms import lp_norm
from .willmore import build_inhomogeneity

CSV_HEADER = ("experiment", "immersion", "grid_n", "rho", "cx", "cy", "key", "value", "status")
COMMANDS = ("catalog", "analyze", "verify-identities", "probe-theorem1", "wente-suite", "gap-experiment")

DEFAULTS: dict[str, str] = {
    "grid.n": "129",
    "probe.rho": "0.5",
    "probe.centers": "0,0",
    "probe.part": "i",
    "probe.exponent": "2",
    "probe.q": "4,8,16",
    "epsilon0.threshold": "1.0",
    "solver.tol": "1e-10",
    "seed": "0",
    "output.dir": "willmore_out",
    "run.workers": "1",
    "immersion.name": "sphere",
    "inhomogeneity.tag": "none",
    "wente.pairs": "20",
    "wente.grids": "65,129",
    "gap.amplitudes": "0.1,0.05,0.025",
    "gap.c_cubic": "1.0",
}
OPEN_PREFIXES = ("immersion.", "inhomogeneity.")
# keys that do not change any reported number
UNHASHED = ("output.dir", "run.workers")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class ConfigError(ValueError):
    """Unknown key, malformed value or inconsistent experiment setup."""


# ---------------------------------------------------------------------------
# configuration


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected key=value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {num}: empty key")
        out[k] = v
    return out


def validate_keys(cfg: dict[str, str]) -> None:
    for k in cfg:
        if k in DEFAULTS or any(k.startswith(p) and len(k) > len(p) for p in OPEN_PREFIXES):
            continue
        raise ConfigError(f"unknown config key {k!r}")


def _num(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


class Config:
    def __init__(self, values: dict[str, str] | None = None):
        validate_keys(values or {})
        self.values = {**DEFAULTS, **(values or {})}

    def str(self, key: str) -> str:
        return self.values[key]

    def int(self, key: str) -> int:
        try:
            return int(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {self.values[key]!r}") from None

    def float(self, key: str) -> float:
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {self.values[key]!r}") from None

    def floats(self, key: str) -> list[float]:
        try:
            return [float(x) for x in self.values[key].split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key} must be a comma list of numbers") from None

    def ints(self, key: str) -> list[int]:
        try:
            return [int(x) for x in self.values[key].split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key} must be a comma list of integers") from None

    def centers(self) -> list[tuple[float, float]]:
        out = []
        for part in self.values["probe.centers"].split(";"):
            xy = [s for s in part.split(",") if s.strip()]
            if len(xy) != 2:
                raise ConfigError("probe.centers must look like 'x,y;x,y'")
            try:
                out.append((float(xy[0]), float(xy[1])))
            except ValueError:
                raise ConfigError("probe.centers must hold numbers") from None
        return out

    def seed(self) -> int:
        s = self.int("seed")
        if not 0 <= s < 2**64:
            raise ConfigError("seed must lie in [0, 2^64)")
        return s

    def section(self, prefix: str, skip: Iterable[str] = ()) -> dict:
        skip = set(skip)
        out = {}
        for k, v in self.values.items():
            if k.startswith(prefix):
                sub = k[len(prefix):]
                if sub not in skip:
                    out[sub] = _num(v)
        return out

    def hash(self, command: str) -> str:
        items = sorted((k, v) for k, v in self.values.items() if k not in UNHASHED)
        text = command + "\n" + "\n".join(f"{k}={v}" for k, v in items)
        return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# rows


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


@dataclass(frozen=True)
class Row:
    experiment: str
    immersion: str
    grid_n: int | None
    rho: float | None
    cx: float | None
    cy: float | None
    key: str
    value: object
    status: str = "ok"

    def cells(self) -> tuple[str, ...]:
        opt = lambda x: "" if x is None else fmt(x)  # noqa: E731
        return (self.experiment, self.immersion, opt(self.grid_n), opt(self.rho), opt(self.cx), opt(self.cy),
                self.key, fmt(self.value), self.status)

    def sort_key(self):
        num = lambda x: -math.inf if x is None else float(x)  # noqa: E731
        return (self.experiment, self.immersion, num(self.grid_n), num(self.rho), num(self.cx), num(self.cy),
                self.key)


def report_rows(rep: ProbeReport, immersion: str, grid_n: int | None, sd: Subdisk | None,
                experiment: str | None = None) -> list[Row]:
    exp = experiment or rep.experiment
    rho, cx, cy = (None, None, None) if sd is None else (sd.radius, sd.cx, sd.cy)
    return [Row(exp, immersion, grid_n, rho, cx, cy, k, v, rep.status) for k, v in rep.values.items()]


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(rows, key=Row.sort_key):
        w.writerow(r.cells())
    return buf.getvalue()


def write_reports(rows: list[Row], outdir: Path, command: str, cfg: Config) -> tuple[Path, Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    stem = command.replace("-", "_")
    csv_path = outdir / f"{stem}.csv"
    csv_path.write_text(rows_to_csv(rows))
    doc = {
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config_hash": cfg.hash(command),
        "config": dict(sorted(cfg.values.items())),
        "header": list(CSV_HEADER),
        "rows": [dict(zip(CSV_HEADER, r.cells())) for r in sorted(rows, key=Row.sort_key)],
    }
    json_path = outdir / f"{stem}.json"
    json_path.write_text(json.dumps(doc, indent=1) + "\n")
    return csv_path, json_path


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# inputs


def load_immersion(cfg: Config, n: int | None = None):
    n = cfg.int("grid.n") if n is None else n
    grid = DiskGrid(n)
    name = cfg.str("immersion.name")
    params = cfg.section("immersion.", skip={"name"})
    pert = {k[len("perturbation."):]: v for k, v in params.items() if k.startswith("perturbation.")}
    params = {k: v for k, v in params.items() if not k.startswith("perturbation.")}
    if pert:
        pert.setdefault("seed", cfg.seed())
    return make_immersion(name, grid, params, pert or None)


def load_inhomogeneity(cfg: Config, cd, sd: Subdisk):
    tag = cfg.str("inhomogeneity.tag")
    params = cfg.section("inhomogeneity.", skip={"tag"})
    q = params.get("q")
    if isinstance(q, str) and q not in ("zero", "constant", "linear", "quadratic", "mixed"):
        vals, _ = read_wimm(q, components=(2,))
        if vals.shape[0] != cd.grid.n:
            raise ConfigError(f"q file has {vals.shape[0]} nodes per side, grid has {cd.grid.n}")
        params["q"] = vals
    return build_inhomogeneity(tag, params, cd, sd)


def _subdisks(cfg: Config, grid: DiskGrid) -> list[Subdisk]:
    return [grid.check_subdisk(Subdisk(c[0], c[1], r)) for r in cfg.floats("probe.rho") for c in cfg.centers()]


# ---------------------------------------------------------------------------
# experiments


def bump_pair(seed: int, index: int, grid: DiskGrid) -> tuple[np.ndarray, np.ndarray]:
    """Two random sums of Gaussian bumps, reproducible from (seed, index)."""
    rng = np.random.default_rng([seed, index])
    X1, X2 = grid.coords
    out = []
    for _ in range(2):
        f = np.zeros_like(X1)
        for _ in range(int(rng.integers(1, 4))):
            r, th = 0.5 * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
            w = rng.uniform(0.15, 0.4)
            amp = rng.normal()
            f += amp * np.exp(-((X1 - r * math.cos(th)) ** 2 + (X2 - r * math.sin(th)) ** 2) / w**2)
        out.append(f)
    return out[0], out[1]


def wente_suite(seed: int = 0, pairs: int = 20, grids=(65, 129), tol: float = 1e-10,
                workers: int = 1) -> tuple[list[tuple[int, int, ProbeReport]], ProbeReport]:
    jobs = [(n, k) for n in grids for k in range(pairs)]

    def one(job):
        n, k = job
        g = DiskGrid(n)
        a, b = bump_pair(seed, k, g)
        _, rep = wente_solve(a, b, UNIT_DISK, g, tol)
        return n, k, rep

    cases = _map(one, jobs, workers)
    summary = ProbeReport("wente-summary")
    bounds = []
    for n in grids:
        ratios = [rep.values.get("ratio", 0.0) for m, _, rep in cases if m == n]
        bounds.append(max(ratios))
        summary.values[f"fitted_bound_n{n}"] = bounds[-1]
    for (n0, b0), (n1, b1) in zip(zip(grids, bounds), zip(grids[1:], bounds[1:])):
        summary.values[f"relative_change_n{n0}_n{n1}"] = abs(b1 - b0) / b0 if b0 > 0 else 0.0
    return cases, summary


def gap_experiment(amplitudes=(0.1, 0.05, 0.025), c_cubic: float = 1.0, grid: DiskGrid | None = None,
                   threshold: float = 1.0, deltas=(0.5, 0.25), tol: float = 1e-10) -> list[ProbeReport]:
    """Inequality-chain quantities on the graph-bump family with cubic data.

    Per amplitude t (largest first) the report holds ε₀ = ‖∇n‖_{L²}, the
    two sides of the Hessian-vs-T estimate at q = 2 - δ, and the contraction
    factor ‖∇V_cub‖ / ‖∇V_self‖ where V_self carries the surface's own
    defect and V_cub solves -ΔV = e^{2λ}c|A|³n̂ up to sign. A factor below
    one with ε₀² under the threshold is the gap-regime indicator: cubic data
    that small cannot produce the defect of a non-flat member. The last
    report summarises monotonicity across the family.
    """
    grid = DiskGrid(129) if grid is None else grid
    ts = sorted({float(t) for t in amplitudes}, reverse=True)
    if len(ts) != len(list(amplitudes)):
        raise ConfigError("gap amplitudes must be distinct")
    half = Subdisk(0.0, 0.0, 0.5)
    # the defect needs two stencil layers; the bump support stays well inside
    big = Subdisk(0.0, 0.0, 1.0 - 2 * grid.h)
    reports = []
    for t in ts:
        cd = curvature(make_immersion("graph_bump", grid, {"t": t}))
        eps0_sq = energy(cd)
        eps0 = math.sqrt(eps0_sq)
        self_inh = build_inhomogeneity("self", {}, cd)
        cub_inh = build_inhomogeneity("cubic", {"c": c_cubic}, cd)
        gV_self = solve_dirichlet(grid, big, -self_inh.v, None, tol).gradient()
        gV_cub = solve_dirichlet(grid, big, -cub_inh.v, None, tol).gradient()
        n_self = lp_norm(gV_self, 2, big, grid).value
        n_cub = lp_norm(gV_cub, 2, big, grid).value
        _, g2n, _ = derivative_stack(cd)
        el = np.exp(cd.lam)[:, :, None, None]
        vals = {"t": t, "eps0": eps0, "eps0_sq": eps0_sq, "gradV_self_l2": n_self, "gradV_cubic_l2": n_cub}
        for d in deltas:
            q = 2.0 - d
            lhs = lp_norm(g2n, q, half, grid).value
            rhs = lp_norm(el * gV_self, q, big, grid).value
            vals[f"hess_n_q{q:g}"] = lhs
            vals[f"eT_q{q:g}"] = rhs
            vals[f"rozen4_ratio_q{q:g}"] = lhs / rhs if rhs > 0 else 0.0
        factor = n_cub / n_self if n_self > 0 else 0.0
        vals["contraction_factor"] = factor
        vals["effective_constant"] = factor / eps0 if eps0 > 0 else 0.0
        inside = eps0_sq < threshold
        vals["gap_regime_indicator"] = float(inside and factor < 1.0)
        status = "ok" if inside else "out-of-hypothesis"
        reports.append(ProbeReport("gap-experiment", vals, status))
    e = [r.values["eps0"] for r in reports]
    f = [r.values["contraction_factor"] for r in reports]
    if any(b >= a for a, b in zip(e, e[1:])):
        raise ConfigError("eps0 is not strictly decreasing along the amplitude family")
    summary = ProbeReport("gap-summary", {
        "eps0_strictly_decreasing": 1.0,
        "contraction_strictly_decreasing": float(all(b < a for a, b in zip(f, f[1:]))),
        "family_size": float(len(ts)),
    })
    for d in deltas:
        q = 2.0 - d
        rs = [r.values[f"rozen4_ratio_q{q:g}"] for r in reports if r.values["eps0"] > 0]
        summary.values[f"rozen4_ratio_max_q{q:g}"] = max(rs) if rs else 0.0
    return reports + [summary]


# ---------------------------------------------------------------------------
# commands; each returns (rows, checks) with checks = [(name, ok, detail)]


def cmd_catalog(cfg: Config):
    rows = []
    for name, e in CATALOG.items():
        rows.append(Row("catalog", name, None, None, None, None, "ambient_dim", e.ambient_dim))
        rows.append(Row("catalog", name, None, None, None, None, "summary", e.summary))
        for k, v in e.defaults.items():
            rows.append(Row("catalog", name, None, None, None, None, f"param.{k}", v))
    return rows, [("catalog has 6 entries", len(CATALOG) == 6, f"{len(CATALOG)} entries")]


def cmd_analyze(cfg: Config):
    imm = load_immersion(cfg)
    sd = Subdisk(0.0, 0.0, 0.75)
    vals = analyze(imm, sd)
    rows = report_rows(ProbeReport("analyze", vals), imm.tag, imm.grid.n, sd)
    h2 = imm.grid.h**2
    checks = [("frame is orthonormal", vals["star_n_unit_defect"] <= 1e-10, f"{vals['star_n_unit_defect']:.2e}")]
    name = cfg.str("immersion.name")
    if name == "sphere" and "perturbation.amplitude" not in cfg.section("immersion."):
        R = float(cfg.section("immersion.").get("R", 1.0))
        ok = max(abs(vals["H_max"] - 1 / R), abs(vals["H_min"] - 1 / R),
                 abs(vals["K_max"] - 1 / R**2), abs(vals["K_min"] - 1 / R**2), vals["h0_max"]) <= 5 * h2
        checks.append(("sphere curvature matches closed form", ok, ""))
    if name in ("plane", "catenoid", "enneper"):
        checks.append(("minimal: H vanishes", vals["H_max"] <= 5 * h2, f"{vals['H_max']:.2e}"))
    return rows, checks


def cmd_verify(cfg: Config):
    imm = load_immersion(cfg)
    cd = curvature(imm)
    tol = cfg.float("solver.tol")
    sds = _subdisks(cfg, imm.grid)

    def one(sd):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                inh = load_inhomogeneity(cfg, cd, sd)
                ps = solve_potentials(cd, inh, sd, tol)
                return verify_structure(ps, cd), sd
        except SolverFailure as exc:
            return ProbeReport("verify_structure", {"solver_residual": exc.report.residual}, "solver-failure"), sd

    rows, checks = [], []
    h2 = imm.grid.h**2
    for rep, sd in _map(one, sds, cfg.int("run.workers")):
        rows += report_rows(rep, imm.tag, imm.grid.n, sd, "verify-identities")
        if rep.status != "ok":
            continue
        scale = max(1.0, rep.values["scale_e2lH"])
        for k in ("rotation_law", "dilation_law", "sysRS_R", "sysRS_S", "backimm", "rozen2"):
            v = rep.values[k]
            checks.append((f"{k} at rho={sd.radius:g} c=({sd.cx:g},{sd.cy:g})", v <= 100 * h2 * scale, f"{v:.3e}"))
    return rows, checks


def cmd_theorem1(cfg: Config):
    imm = load_immersion(cfg)
    cd = curvature(imm)
    sds = _subdisks(cfg, imm.grid)
    part = cfg.str("probe.part")
    if part not in ("i", "ii"):
        raise ConfigError("probe.part must be 'i' or 'ii'")

    def one(sd):
        try:
            inh = load_inhomogeneity(cfg, cd, sd)
            return theorem1_probe(cd, inh, part, cfg.float("probe.exponent"), (sd.radius,), ((sd.cx, sd.cy),),
                                  tuple(cfg.floats("probe.q")), cfg.float("epsilon0.threshold"))[0]
        except SolverFailure as exc:
            return exc

    rows, checks = [], []
    for sd, q in zip(sds, _map(one, sds, cfg.int("run.workers"))):
        base = ("probe-theorem1", imm.tag, imm.grid.n, sd.radius, sd.cx, sd.cy)
        if isinstance(q, SolverFailure):
            rows.append(Row(*base, "solver_residual", q.report.residual, "solver-failure"))
            continue
        rows.append(Row(*base, "M", q.M, q.status))
        rows.append(Row(*base, "eps0_sq", q.eps0_sq, q.status))
        for k in q.lhs:
            rows.append(Row(*base, f"lhs.{k}", q.lhs[k], q.status))
            rows.append(Row(*base, f"rhs.{k}", q.rhs[k], q.status))
            rows.append(Row(*base, f"ratio.{k}", q.ratios[k], q.status))
        for k, lab in q.labels.items():
            rows.append(Row(*base, f"label.{k}", lab, q.status))
        ok = all(math.isfinite(v) and v <= 10.0 for v in q.ratios.values())
        checks.append((f"ratios finite and <= 10 at rho={sd.radius:g} c=({sd.cx:g},{sd.cy:g})", ok, f"max {max(q.ratios.values(), default=0):.3g}"))
    return rows, checks


def cmd_wente(cfg: Config):
    grids = tuple(cfg.ints("wente.grids"))
    cases, summary = wente_suite(cfg.seed(), cfg.int("wente.pairs"), grids, cfg.float("solver.tol"),
                                 cfg.int("run.workers"))
    rows = []
    for n, k, rep in cases:
        rows += report_rows(rep, f"bump_pair_{k:03d}", n, UNIT_DISK, "wente-suite")
    rows += report_rows(summary, "bump_pairs", None, None, "wente-suite")
    checks = [(k, v < 0.15, f"{v:.3%}") for k, v in summary.values.items() if k.startswith("relative_change")]
    return rows, checks


def cmd_gap(cfg: Config):
    g = DiskGrid(cfg.int("grid.n"))
    reps = gap_experiment(cfg.floats("gap.amplitudes"), cfg.float("gap.c_cubic"), g,
                          cfg.float("epsilon0.threshold"), tol=cfg.float("solver.tol"))
    rows = []
    for rep in reps[:-1]:
        rows += report_rows(rep, f"graph_bump_t{rep.values['t']:g}", g.n, UNIT_DISK)
    rows += report_rows(reps[-1], "graph_bump_family", g.n, None, "gap-experiment")
    s = reps[-1].values
    checks = [("eps0 strictly decreasing as t decreases", s["eps0_strictly_decreasing"] == 1.0, ""),
              ("contraction factor strictly decreasing as t decreases", s["contraction_strictly_decreasing"] == 1.0, "")]
    return rows, checks


HANDLERS = {
    "catalog": cmd_catalog,
    "analyze": cmd_analyze,
    "verify-identities": cmd_verify,
    "probe-theorem1": cmd_theorem1,
    "wente-suite": cmd_wente,
    "gap-experiment": cmd_gap,
}


def run(command: str, cfg: Config, check: bool = False, outdir: Path | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    rows, checks = HANDLERS[command](cfg)
    outdir = Path(cfg.str("output.dir")) if outdir is None else outdir
    csv_path, _ = write_reports(rows, outdir, command, cfg)
    failures = [r for r in rows if r.status == "solver-failure"]
    if command == "catalog":
        for name, e in CATALOG.items():
            params = ", ".join(f"{k}={v}" for k, v in e.defaults.items())
            print(f"{name:11s} m={e.ambient_dim}  {params}  -- {e.summary}", file=out)
    print(f"wrote {len(rows)} rows to {csv_path}", file=out)
    if failures:
        print(f"{len(failures)} solver failure(s)", file=out)
    status = EXIT_SOLVER if failures else EXIT_OK
    if check:
        for name, ok, detail in checks:
            print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}".rstrip(), file=out)
        if not all(ok for _, ok, _ in checks) and status == EXIT_OK:
            status = EXIT_CHECK
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--immersion", help="catalog name or WIMM file")
    common.add_argument("--grid", type=int, help="nodes per side (odd, >= 33)")
    common.add_argument("--seed", type=int, help="integer seed in [0, 2^64)")
    common.add_argument("--output", type=Path, help="report directory")
    common.add_argument("--check", action="store_true", help="assert the command's acceptance checks")
    p = argparse.ArgumentParser(prog="willmore-lab", description="Willmore-type surface experiments.")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        values = parse_config_text(args.config.read_text()) if args.config else {}
        if args.immersion:
            values["immersion.name"] = args.immersion
        if args.grid is not None:
            values["grid.n"] = str(args.grid)
        if args.seed is not None:
            values["seed"] = str(args.seed)
        env = os.environ.get("WILLMORE_LAB_OUTPUT")
        if env:
            values["output.dir"] = env
        if args.output is not None:
            values["output.dir"] = str(args.output)
        cfg = Config(values)
        cfg.seed()
        return run(args.command, cfg, args.check)
    except (ConfigError, KeyError, MalformedFileError, DegenerateSubdiskError, RejectedImmersionError,
            SingularImmersionError, OSError) as exc:
        print(f"willmore-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"willmore-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
