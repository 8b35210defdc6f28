"""Command-line experiment runner.

Configs are flat ``key = value`` files with ``#`` comments and ``[section]``
headers. Function specs are ``const c``, ``linear c d`` (``c*t + d``),
``power c p d`` (``c*t^p + d``) or ``table t0 v0 t1 v1 ...``, optionally quoted.

Exit codes: 0 pass or data run, 1 config or hypothesis error, 2 numerical
failure, 3 verification FAIL.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fracfront import __version__, hopf, specfun, stefan
from fracfront.caputo import FractionalOrder, TimeMesh, caputo_l1
from fracfront.domain import BoundaryCurve, MovingRegion, ProblemData
from fracfront.errors import DomainError, FracFrontError, HypothesisNotMet
from fracfront.fde_solver import (
    relative_linf_error,
    remark2_problem,
    remark2_solution,
    solve_moving_boundary,
)

log = logging.getLogger("fracfront")

KINDS = (
    "specfun_eval",
    "solve_moving",
    "solve_stefan",
    "verify_hopf",
    "verify_maxprin",
    "monotonicity",
    "convergence_study",
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_FAIL = 0, 1, 2, 3


class ConfigError(ValueError):
    """Malformed or inconsistent experiment config."""


# -- config -----------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    """Sections of raw string values; top-level keys live under ``""``."""
    out: dict[str, dict[str, str]] = {"": {}}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[section][key] = value
    return out


def parse_function_spec(spec: str, name: str = "function") -> BoundaryCurve:
    words = spec.split()
    if not words:
        raise ConfigError(f"{name}: empty function spec")
    kind, args = words[0], words[1:]
    try:
        nums = [float(w) for w in args]
    except ValueError as exc:
        raise ConfigError(f"{name}: non-numeric argument in {spec!r}") from exc
    arity = {"const": 1, "linear": 2, "power": 3}
    if kind in arity:
        if len(nums) != arity[kind]:
            raise ConfigError(f"{name}: '{kind}' takes {arity[kind]} numbers, got {len(nums)}")
        return getattr(BoundaryCurve, kind)(*nums)
    if kind == "table":
        if len(nums) < 4 or len(nums) % 2:
            raise ConfigError(f"{name}: 'table' needs pairs 't v' (at least two)")
        try:
            return BoundaryCurve.table(nums[0::2], nums[1::2])
        except DomainError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    raise ConfigError(f"{name}: unknown function kind {kind!r}")


@dataclass
class ExperimentConfig:
    kind: str
    alpha: float
    T: float
    N: int
    grading: float
    nx: int
    output: Path
    sections: dict[str, dict[str, str]] = field(default_factory=dict)
    workers: int = 1

    @property
    def order(self) -> FractionalOrder:
        return FractionalOrder(self.alpha)

    @property
    def mesh(self) -> TimeMesh:
        return TimeMesh.graded(self.T, self.N, self.grading)

    def section(self, name: str) -> dict[str, str]:
        return self.sections.get(name, {})

    def number(self, section: str, key: str, default: float | None = None) -> float:
        raw = self.section(section).get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing [{section or 'top'}] {key}")
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section or 'top'}] {key}: not a number: {raw!r}") from exc

    def curve(self, section: str, key: str, default: str | None = None) -> BoundaryCurve:
        raw = self.section(section).get(key, default)
        if raw is None:
            raise ConfigError(f"missing [{section}] {key}")
        return parse_function_spec(raw, f"[{section}] {key}")


def load_config(path: Path, base: Path | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_config_text(text), base or Path(path).parent)


def build_config(sections: dict[str, dict[str, str]], base: Path) -> ExperimentConfig:
    top = sections.get("", {})
    kind = top.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {', '.join(KINDS)}, got {kind!r}")

    def num(key, default, cast=float):
        raw = top.get(key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: not a valid number: {raw!r}") from exc

    alpha = num("alpha", 0.5)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {alpha}")
    N = num("N", 100, int)
    nx = num("nx", 100, int)
    if N < 4:
        raise ConfigError(f"N: must be >= 4, got {N}")
    if nx < 4:
        raise ConfigError(f"nx: must be >= 4, got {nx}")
    T = num("T", 1.0)
    if not T > 0.0:
        raise ConfigError(f"T: must be positive, got {T}")
    grading = num("grading", 1.0)
    if grading < 1.0:
        raise ConfigError(f"grading: must be >= 1, got {grading}")
    out = Path(top.get("output", kind))
    if not out.is_absolute():
        out = base / out
    workers = num("workers", 1, int)
    return ExperimentConfig(kind, alpha, T, N, grading, nx, out, sections, max(1, workers))


# -- artifacts ----------------------------------------------------------------


def _file_mode() -> int:
    # mkstemp creates 0600 files; published artifacts follow the umask instead
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


FILE_MODE = _file_mode()


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, FILE_MODE)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def g17(v) -> str:
    return format(float(v), ".17g")


def csv_text(header: list[str], rows: list[list]) -> str:
    def cell(v) -> str:
        if isinstance(v, (float, np.floating)):
            return g17(v)
        s = str(v)
        if any(ch in s for ch in ',"\n'):
            s = '"' + s.replace('"', '""') + '"'
        return s

    lines = [",".join(header)] + [",".join(cell(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


@dataclass
class Outcome:
    verdict: str  # PASS | FAIL | NOT_APPLICABLE
    reason: str
    files: dict[str, str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if self.verdict == "FAIL" else EXIT_OK


# -- problem assembly -----------------------------------------------------------


def moving_problem(cfg: ExperimentConfig) -> tuple[MovingRegion, ProblemData, dict | None]:
    """Region and data from ``[remark2]`` or from ``[curves]`` plus ``[data]``."""
    if "remark2" in cfg.sections:
        B = cfg.number("remark2", "B")
        C = cfg.number("remark2", "C")
        natural = cfg.section("remark2").get("extension", "natural") == "natural"
        region, data = remark2_problem(B, C, cfg.order, cfg.T, natural_extension=natural)
        return region, data, {"B": B, "C": C}
    region = MovingRegion(cfg.curve("curves", "s1"), cfg.curve("curves", "s2"), cfg.T)
    d = cfg.section("data")
    f = cfg.curve("data", "f") if "f" in d else None
    data = ProblemData(f, cfg.curve("data", "g"), cfg.curve("data", "h"))
    return region, data, None


def stefan_data(cfg: ExperimentConfig, section: str) -> stefan.StefanData:
    sec = cfg.section(section)
    if not sec:
        raise ConfigError(f"missing section [{section}]")
    b = cfg.number(section, "b")
    f = cfg.curve(section, "f") if "f" in sec else None
    try:
        return stefan.StefanData(b, f, cfg.curve(section, "g"), cfg.number(section, "k", 1.0), cfg.order)
    except DomainError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


# -- experiments ----------------------------------------------------------------


def _grid(spec: str) -> np.ndarray:
    words = spec.split()
    if words and words[0] == "linspace":
        if len(words) != 4:
            raise ConfigError("grid: 'linspace lo hi count'")
        return np.linspace(float(words[1]), float(words[2]), int(words[3]))
    return np.array([float(w) for w in words])


SPECFUN_EVAL = {
    "ml": (("rho", "beta"), lambda z, p: specfun.mittag_leffler(p["rho"], p["beta"], z)),
    "wright": (("rho", "beta"), lambda z, p: specfun.wright(z, p["rho"], p["beta"])),
    "frac_erf": (("alpha",), lambda z, p: specfun.frac_erf(z, p["alpha"])),
    "gamma": ((), lambda z, p: specfun.gamma(z)),
    "h_ratio": (("muA", "alpha"), lambda z, p: hopf.h_ratio(z, p["muA"], p["alpha"])),
}


def run_specfun_eval(cfg: ExperimentConfig) -> Outcome:
    sec = cfg.section("specfun")
    fn = sec.get("fn")
    if fn not in SPECFUN_EVAL:
        raise ConfigError(f"[specfun] fn: expected one of {', '.join(SPECFUN_EVAL)}, got {fn!r}")
    names, call = SPECFUN_EVAL[fn]
    params = {k: cfg.number("specfun", k) for k in names}
    try:
        grid = _grid(sec.get("z", "linspace -1 1 11"))
    except ValueError as exc:
        raise ConfigError(f"[specfun] z: {exc}") from exc
    rows = []
    for z in grid:
        v = call(float(z), params)
        bound = getattr(v, "error_bound", 0.0)
        rows.append([float(z), float(v), float(bound)])
    text = csv_text(["z", "value", "error_bound"], rows)
    return Outcome("NOT_APPLICABLE", f"{fn} evaluated at {len(rows)} points", {"values.csv": text})


def run_solve_moving(cfg: ExperimentConfig) -> Outcome:
    region, data, r2 = moving_problem(cfg)
    field_ = solve_moving_boundary(region, data, cfg.order, cfg.nx, cfg.mesh, workers=cfg.workers)
    files = {"field.csv": field_.to_csv()}
    if r2 is None:
        return Outcome("NOT_APPLICABLE", "data run", files)
    lo = cfg.number("remark2", "t_min", 0.1)
    hi = cfg.number("remark2", "t_max", cfg.T)
    tol = cfg.number("tolerances", "rel_linf", 5e-2)
    err = relative_linf_error(field_, _remark2_exact(r2, cfg.order), (lo, hi))
    files["error.csv"] = csv_text(["nx", "N", "t_min", "t_max", "rel_linf"], [[cfg.nx, cfg.N, lo, hi, err]])
    ok = err <= tol
    return Outcome("PASS" if ok else "FAIL", f"relative Linf error {err:.6g} vs tol {tol:g}", files)


def _remark2_exact(r2: dict, order: FractionalOrder):
    return lambda x, t: remark2_solution(r2["B"], r2["C"], order, x, t)


def run_solve_stefan(cfg: ExperimentConfig) -> Outcome:
    data = stefan_data(cfg, "data")
    cap = cfg.section("data").get("x_cap")
    sol = stefan.solve_stefan(
        data, cfg.nx, cfg.mesh, x_cap=None if cap is None else float(cap), workers=cfg.workers
    )
    files = {"front.csv": sol.front_csv(), "field.csv": sol.field.to_csv()}
    return Outcome("NOT_APPLICABLE", f"front reached {sol.front[-1]:.6g} at T={cfg.T:g}", files)


def run_verify_hopf(cfg: ExperimentConfig) -> Outcome:
    region, data, _ = moving_problem(cfg)
    order = cfg.order
    field_ = solve_moving_boundary(region, data, order, cfg.nx, cfg.mesh, workers=cfg.workers)
    sec = cfg.section("hopf")
    t0 = cfg.number("hopf", "t0", cfg.T)
    delta = cfg.number("hopf", "delta", 0.2)
    window = int(cfg.number("hopf", "window", 4))
    sides = sec.get("sides", "right left").split()
    rows = []
    for side in sides:
        if side not in ("left", "right"):
            raise ConfigError(f"[hopf] sides: unknown side {side!r}")
        rows.extend(_hopf_rows(field_, region, side, t0, delta, window, order))
    text = csv_text(["check", "side", "t0", "verdict", "bound", "detail"], rows)
    bad = [r for r in rows if r[3] == "FAIL"]
    reason = f"{len(rows) - len(bad)}/{len(rows)} checks passed"
    return Outcome("FAIL" if bad else "PASS", reason, {"report.csv": text})


def _hopf_rows(field_, region, side, t0, delta, window, order) -> list[list]:
    rows = []
    try:
        p = hopf.select_barrier_parameters(region, field_, t0, delta, order, side=side)
    except (HypothesisNotMet, hopf.BarrierConstructionError) as exc:
        # a boundary minimum has no barrier; the sign check below still applies
        p = None
        rows.append(["barrier", side, t0, "NOT_APPLICABLE", 0.0, str(exc)])
    if p is not None:
        rows.append(["barrier", side, t0, "PASS", p.eps * p.mu, f"A={p.A:.6g} t1={p.t1:.6g} eta={p.eta:.6g}"])
        neg = hopf.verify_barrier_negativity(p, order)
        rows.append(["negativity", side, t0, "PASS" if neg.negative_everywhere else "FAIL",
                     neg.max_L_alpha, f"points={neg.points}"])
        fld = field_ if side == "right" else field_.reflected()
        cmp_ = hopf.barrier_comparison(fld, p, order)
        rows.append(["segment", side, t0, "PASS" if cmp_.segment_ok == cmp_.segment_points else "FAIL",
                     p.M - p.eta, f"{cmp_.segment_ok}/{cmp_.segment_points}"])
        rows.append(["curve", side, t0, "PASS" if cmp_.curve_ok == cmp_.curve_points else "FAIL",
                     p.M, f"{cmp_.curve_ok}/{cmp_.curve_points}"])
    chk = hopf.hopf_sign_check(field_, region, side, t0, delta, window, params=p)
    q = " ".join(g17(v) for v in chk.quotients)
    rows.append(["hopf_sign", side, t0, chk.verdict if chk.passed else "FAIL", chk.bound,
                 f"case={chk.case} extrapolated={g17(chk.extrapolated)} quotients={q}"])
    return rows


def run_verify_maxprin(cfg: ExperimentConfig) -> Outcome:
    region, data, _ = moving_problem(cfg)
    field_ = solve_moving_boundary(region, data, cfg.order, cfg.nx, cfg.mesh, workers=cfg.workers)
    v = hopf.check_max_principle(field_)
    where = "" if v.witness is None else f"x={g17(v.witness[0])} t={g17(v.witness[1])}"
    rows = [["max_principle", v.part or "", "", v.kind, v.min_value, where]]
    text = csv_text(["check", "side", "t0", "verdict", "bound", "detail"], rows)
    return Outcome("PASS" if v.ok else "FAIL", f"{v.kind} (min {v.min_value:.6g})",
                   {"report.csv": text, "field.csv": field_.to_csv()})


def run_monotonicity(cfg: ExperimentConfig) -> Outcome:
    d1, d2 = stefan_data(cfg, "data1"), stefan_data(cfg, "data2")
    rep, s1, s2 = stefan.monotonicity_experiment(d1, d2, cfg.nx, cfg.mesh)
    t = cfg.mesh.nodes
    rows = [[float(t[n]), float(s1.front[n]), float(s2.front[n]), float(rep.separation[n])] for n in range(t.size)]
    files = {"fronts.csv": csv_text(["t", "s1", "s2", "separation"], rows)}
    reason = f"min separation {rep.min_separation:.6g} (tol_front {rep.tol_front:.6g})"
    return Outcome("PASS" if rep.passed else "FAIL", reason, files)


def run_convergence_study(cfg: ExperimentConfig) -> Outcome:
    sec = cfg.section("study")
    target = sec.get("target", "remark2")
    if target == "remark2":
        levels = [tuple(int(v) for v in lv.split(":")) for lv in sec.get("levels", "50:100 100:200 200:400").split()]
        region, data, r2 = moving_problem(cfg)
        if r2 is None:
            raise ConfigError("convergence_study with target remark2 needs a [remark2] section")
        exact = _remark2_exact(r2, cfg.order)
        lo = cfg.number("remark2", "t_min", 0.1)
        rows = []
        for nx, N in levels:
            fld = solve_moving_boundary(region, data, cfg.order, nx, TimeMesh.graded(cfg.T, N, cfg.grading),
                                        workers=cfg.workers)
            rows.append([nx, N, relative_linf_error(fld, exact, (lo, cfg.T))])
        errs = [r[2] for r in rows]
        ok = all(b < a for a, b in zip(errs, errs[1:]))
        text = csv_text(["nx", "N", "rel_linf"], rows)
        return Outcome("PASS" if ok else "FAIL",
                       "errors strictly decreasing" if ok else "errors not strictly decreasing",
                       {"study.csv": text})
    if target == "ml_eigen":
        order = cfg.order
        c = cfg.number("study", "c", 2.0)
        Ns = [int(v) for v in sec.get("N_list", "64 128 256 512 1024").split()]
        exact = c * specfun.ml(order.alpha, 1.0, c * cfg.T**order.alpha)
        rows = []
        for N in Ns:
            m = TimeMesh.uniform_mesh(cfg.T, N)
            f = np.array([specfun.ml(order.alpha, 1.0, c * tv**order.alpha) for tv in m.nodes])
            rows.append([N, cfg.T / N, abs(caputo_l1(f, order, N, m) - exact)])
        orders = [math.log(rows[k][2] / rows[k + 1][2]) / math.log(rows[k][1] / rows[k + 1][1])
                  for k in range(len(rows) - 1)]
        lo_o = cfg.number("tolerances", "order_min", 1.3)
        hi_o = cfg.number("tolerances", "order_max", 1.7)
        ok = all(lo_o <= o <= hi_o for o in orders)
        for r, o in zip(rows, [math.nan] + orders):
            r.append(o)
        text = csv_text(["N", "dt", "error", "order"], rows)
        return Outcome("PASS" if ok else "FAIL", "orders " + " ".join(f"{o:.3f}" for o in orders),
                       {"study.csv": text})
    raise ConfigError(f"[study] target: expected remark2 or ml_eigen, got {target!r}")


RUNNERS = {
    "specfun_eval": run_specfun_eval,
    "solve_moving": run_solve_moving,
    "solve_stefan": run_solve_stefan,
    "verify_hopf": run_verify_hopf,
    "verify_maxprin": run_verify_maxprin,
    "monotonicity": run_monotonicity,
    "convergence_study": run_convergence_study,
}


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment, write its artifacts and verdict, and return the exit code."""
    try:
        outcome = RUNNERS[cfg.kind](cfg)
    except (ConfigError, HypothesisNotMet, DomainError) as exc:
        _write_verdict(cfg, "FAIL", f"config: {exc}")
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FracFrontError, ArithmeticError, RuntimeError) as exc:
        _write_verdict(cfg, "FAIL", f"numerical: {exc}")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, text in outcome.files.items():
        write_atomic(Path(f"{cfg.output}_{name}"), text)
    _write_verdict(cfg, outcome.verdict, outcome.reason)
    print(f"{outcome.verdict}: {outcome.reason}")
    return outcome.exit_code


def _write_verdict(cfg: ExperimentConfig, verdict: str, reason: str) -> None:
    write_atomic(Path(f"{cfg.output}_verdict"), f"{verdict} {reason}\n")


# -- entry point --------------------------------------------------------------------


SPECFUN_CLI = {
    "gamma": (1, lambda a: specfun.gamma(a[0])),
    "ml": (3, lambda a: specfun.ml(a[0], a[1], a[2])),
    "wright": (3, lambda a: specfun.wright(a[0], a[1], a[2]).value),
    "frac_erf": (2, lambda a: specfun.frac_erf(a[0], a[1])),
    "h_ratio": (3, lambda a: hopf.h_ratio(a[0], a[1], a[2])),
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fracfront", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver events")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", type=Path)
    p_sf = sub.add_parser("specfun", help="evaluate one special function value")
    p_sf.add_argument("fn", choices=sorted(SPECFUN_CLI))
    p_sf.add_argument("args", nargs="*", type=float)
    sub.add_parser("version", help="print the package version")
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(name)s: %(message)s")

    if ns.cmd == "version":
        print(__version__)
        return EXIT_OK
    if ns.cmd == "specfun":
        arity, call = SPECFUN_CLI[ns.fn]
        if len(ns.args) != arity:
            print(f"{ns.fn} takes {arity} arguments, got {len(ns.args)}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            print(g17(call(ns.args)))
        except (ValueError, DomainError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (FracFrontError, ArithmeticError) as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        return EXIT_OK
    try:
        cfg = load_config(ns.config)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
