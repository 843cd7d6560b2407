"""Reproducible experiment runs: config validation, sweeps, CSV/JSON output.

Configs are TOML (key/value with nested sections); unknown keys are rejected
so typos fail loudly.  Every run writes RFC-4180 CSV data files (with a
'#'-prefixed comment block documenting units and conventions) plus a JSON
manifest echoing the config, the per-point cutoffs and residuals, and the
wall clock.  Data files are byte-identical across reruns of the same config:
grid points are merged in grid order whatever the worker pool does, and every
point starts from the configured seed cutoff rather than inheriting state.
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import __version__
from .fock import FockSpace, fock_state, laguerre_assoc1
from .models import (
    JosephsonParams,
    MicromaserParams,
    TwoCavityParams,
    jj_liouvillian,
    micromaser_liouvillian,
    partial_trace,
    two_cavity_liouvillian,
)
from .observables import (
    UndefinedObservableError,
    fano,
    fidelity_fock,
    g2_tau,
    g2_zero,
    mean_n,
    noise_averaged_psd,
    psd,
    wigner,
)
from .semiclassical import bifurcation_scan
from .solvers import converged_steady_state, steady_state

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

OUTPUT_DIR_ENV = "SIMULATE_OUT"
DEFAULT_OUTPUT_DIR = "simulate-out"

EXPERIMENTS = (
    "sweep-phi",
    "sweep-delta0",
    "fidelity",
    "wigner",
    "psd",
    "g2",
    "semiclassical",
)

PI_OVER_SQRT2 = math.pi / math.sqrt(2.0)
SQRT2 = math.sqrt(2.0)


class ConfigError(ValueError):
    """Invalid or unparsable experiment configuration."""


# ---------------------------------------------------------------------------
# config loading and validation
# ---------------------------------------------------------------------------


def _check_keys(table, allowed, where):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


def _get(table, key, kind, where, default=None, required=False, positive=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{key}' in {where}")
        return default
    v = table[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise ConfigError(f"key '{key}' in {where} must be an integer, got {v!r}")
    if not isinstance(v, kind):
        raise ConfigError(f"key '{key}' in {where} must be {kind.__name__}, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"key '{key}' in {where} must be > 0, got {v!r}")
    return v


def _grid_values(table, where, positive_start=True):
    _check_keys(table, {"start", "stop", "step", "num"}, where)
    start = _get(table, "start", float, where, required=True)
    stop = _get(table, "stop", float, where, required=True)
    if positive_start and not start > 0:
        raise ConfigError(f"grid start in {where} must be > 0, got {start}")
    if not stop > start:
        raise ConfigError(f"grid stop must exceed start in {where}")
    if ("step" in table) == ("num" in table):
        raise ConfigError(f"{where} needs exactly one of 'step' or 'num'")
    if "step" in table:
        step = _get(table, "step", float, where, positive=True)
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = start + step * np.arange(n)
    else:
        num = _get(table, "num", int, where, positive=True)
        if num < 2:
            raise ConfigError(f"grid num in {where} must be >= 2")
        values = np.linspace(start, stop, num)
    return values


def _solver_options(table, where):
    _check_keys(
        table,
        {"seed_cutoff", "tail_tol", "residual_tol", "gap_tol", "check_uniqueness", "max_cutoff"},
        where,
    )
    return {
        "seed_cutoff": _get(table, "seed_cutoff", int, where, default=20, positive=True),
        "tail_tol": _get(table, "tail_tol", float, where, default=1e-8, positive=True),
        "residual_tol": _get(table, "residual_tol", float, where, default=1e-9, positive=True),
        "gap_tol": _get(table, "gap_tol", float, where, default=1e-8, positive=True),
        "check_uniqueness": _get(table, "check_uniqueness", bool, where, default=True),
        "max_cutoff": _get(table, "max_cutoff", int, where, default=240, positive=True),
    }


@dataclass
class ExperimentConfig:
    experiment: str
    model: dict
    grid: dict
    solver: dict
    extra: dict
    out: str | None
    workers: int
    raw: dict = field(repr=False, default_factory=dict)


def validate_config(data):
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    top_allowed = {"experiment", "out", "workers", "model", "grid", "solver", "spectrum",
                   "noise", "cases", "scan"}
    _check_keys(data, top_allowed, "top level")
    experiment = _get(data, "experiment", str, "top level", required=True)
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    out = _get(data, "out", str, "top level")
    workers = _get(data, "workers", int, "top level", default=1, positive=True)

    model = dict(data.get("model", {}))
    grid = dict(data.get("grid", {}))
    solver = _solver_options(dict(data.get("solver", {})), "[solver]")
    extra = {}

    if experiment == "sweep-phi":
        _check_keys(model, {"pump_ratio"}, "[model]")
        model = {"pump_ratio": _get(model, "pump_ratio", float, "[model]", required=True,
                                    positive=True)}
        grid = {"values": _grid_values(grid, "[grid]"), "name": "rabi_angle"}
    elif experiment == "sweep-delta0":
        _check_keys(model, {"ej_star_ratio"}, "[model]")
        model = {"ej_star_ratio": _get(model, "ej_star_ratio", float, "[model]",
                                       required=True, positive=True)}
        grid = {"values": _grid_values(grid, "[grid]"), "name": "delta0"}
    elif experiment == "fidelity":
        _check_keys(model, {"rabi_angle", "delta0", "gamma_ratio_aux", "cutoff_two_cavity"},
                    "[model]")
        model = {
            "rabi_angle": _get(model, "rabi_angle", float, "[model]", default=PI_OVER_SQRT2),
            "delta0": _get(model, "delta0", float, "[model]", default=SQRT2, positive=True),
            "gamma_ratio_aux": _get(model, "gamma_ratio_aux", float, "[model]", default=100.0,
                                    positive=True),
            "cutoff_two_cavity": _get(model, "cutoff_two_cavity", int, "[model]", default=3,
                                      positive=True),
        }
        grid = {"values": _grid_values(grid, "[grid]"), "name": "drive"}
    elif experiment == "wigner":
        system = _get(model, "system", str, "[model]", required=True)
        if system == "micromaser":
            allowed = {"system", "pump_ratio", "rabi_angle"}
        elif system == "josephson":
            allowed = {"system", "ej_star_ratio", "delta0"}
        elif system == "two-cavity":
            allowed = {"system", "ej_star_ratio", "delta_a", "delta_b", "gamma_ratio_aux",
                       "cutoff_a", "cutoff_b"}
        else:
            raise ConfigError(f"unknown wigner system {system!r}")
        _check_keys(model, allowed, "[model]")
        for key in allowed - {"system", "cutoff_a", "cutoff_b"}:
            model[key] = _get(model, key, float, "[model]", required=True, positive=True)
        if system == "two-cavity":
            model["cutoff_a"] = _get(model, "cutoff_a", int, "[model]", default=4, positive=True)
            model["cutoff_b"] = _get(model, "cutoff_b", int, "[model]", default=4, positive=True)
        _check_keys(grid, {"span", "num"}, "[grid]")
        grid = {
            "span": _get(grid, "span", float, "[grid]", default=None, positive=True),
            "num": _get(grid, "num", int, "[grid]", default=101, positive=True),
        }
    elif experiment == "psd":
        _check_keys(model, {"ej_star_ratio", "delta0"}, "[model]")
        model = {
            "ej_star_ratio": _get(model, "ej_star_ratio", float, "[model]", required=True,
                                  positive=True),
            "delta0": _get(model, "delta0", float, "[model]", required=True, positive=True),
        }
        spectrum = dict(data.get("spectrum", {}))
        _check_keys(spectrum, {"freq_max", "freq_num", "window", "n_times", "eta", "normalize"},
                    "[spectrum]")
        extra["spectrum"] = {
            "freq_max": _get(spectrum, "freq_max", float, "[spectrum]", required=True,
                             positive=True),
            "freq_num": _get(spectrum, "freq_num", int, "[spectrum]", default=2001,
                             positive=True),
            "window": _get(spectrum, "window", float, "[spectrum]", default=60.0, positive=True),
            "n_times": _get(spectrum, "n_times", int, "[spectrum]", default=4096, positive=True),
            "eta": _get(spectrum, "eta", float, "[spectrum]", default=0.01, positive=True),
            "normalize": _get(spectrum, "normalize", bool, "[spectrum]", default=True),
        }
        noise = dict(data.get("noise", {}))
        _check_keys(noise, {"width", "nodes", "check_convergence", "per_detuning"}, "[noise]")
        extra["noise"] = {
            "width": _get(noise, "width", float, "[noise]", default=0.1),
            "nodes": _get(noise, "nodes", int, "[noise]", default=21, positive=True),
            "check_convergence": _get(noise, "check_convergence", bool, "[noise]",
                                      default=False),
            "per_detuning": _get(noise, "per_detuning", bool, "[noise]", default=True),
        }
        if extra["noise"]["width"] < 0:
            raise ConfigError("[noise] width must be >= 0")
        grid = {}
    elif experiment == "g2":
        cases = data.get("cases")
        if not isinstance(cases, list) or not cases:
            raise ConfigError("g2 needs at least one [[cases]] table")
        parsed = []
        for i, case in enumerate(cases):
            where = f"[[cases]] #{i}"
            if not isinstance(case, dict):
                raise ConfigError(f"{where} must be a table")
            _check_keys(case, {"ej_star_ratio", "delta0", "label"}, where)
            parsed.append({
                "ej_star_ratio": _get(case, "ej_star_ratio", float, where, required=True,
                                      positive=True),
                "delta0": _get(case, "delta0", float, where, required=True, positive=True),
                "label": _get(case, "label", str, where, default=f"case{i}"),
            })
        extra["cases"] = parsed
        _check_keys(grid, {"tau_max", "num"}, "[grid]")
        grid = {
            "tau_max": _get(grid, "tau_max", float, "[grid]", default=20.0, positive=True),
            "num": _get(grid, "num", int, "[grid]", default=801, positive=True),
        }
        model = {}
    elif experiment == "semiclassical":
        _check_keys(model, {"delta0"}, "[model]")
        model = {"delta0": _get(model, "delta0", float, "[model]", required=True, positive=True)}
        grid = {"values": _grid_values(grid, "[grid]"), "name": "drive"}
        scan = dict(data.get("scan", {}))
        _check_keys(scan, {"a_max", "rel_tol"}, "[scan]")
        extra["scan"] = {
            "a_max": _get(scan, "a_max", float, "[scan]", default=None, positive=True),
            "rel_tol": _get(scan, "rel_tol", float, "[scan]", default=1e-6, positive=True),
        }

    return ExperimentConfig(
        experiment=experiment,
        model=model,
        grid=grid,
        solver=solver,
        extra=extra,
        out=out,
        workers=workers,
        raw=data,
    )


def load_config(path):
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return validate_config(data)


def resolve_out_dir(config, cli_out=None):
    out = cli_out or config.out or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, comments, columns, rows):
    """RFC-4180 CSV (CRLF, minimal quoting) behind a '#' comment block."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in comments:
            f.write(f"# {line}\r\n")
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_manifest(path, manifest):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass
class RunResult:
    files: list
    manifest: dict
    failed_points: int

    @property
    def ok(self):
        return self.failed_points == 0


def _base_manifest(config, t0):
    return {
        "experiment": config.experiment,
        "config": config.raw,
        "library_version": __version__,
        "wall_clock_seconds": round(time.time() - t0, 3),
    }


# ---------------------------------------------------------------------------
# steady-state sweeps (Fock-occupation dips)
# ---------------------------------------------------------------------------


def _sweep_point(task):
    """One steady-state solve; returns a plain dict so workers stay picklable."""
    kind, value, pump, solver = task
    if kind == "sweep-phi":
        def build(cutoff):
            return micromaser_liouvillian(
                MicromaserParams(pump_ratio=pump, rabi_angle=value, cutoff=cutoff)
            )
    else:
        def build(cutoff):
            return jj_liouvillian(
                JosephsonParams(ej_star_ratio=pump, delta0=value, cutoff=cutoff)
            )
    try:
        res = converged_steady_state(
            build,
            solver["seed_cutoff"],
            tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"],
            check_uniqueness=solver["check_uniqueness"],
            gap_tol=solver["gap_tol"],
            residual_tol=solver["residual_tol"],
        )
    except Exception as exc:
        return {
            "parameter": value, "mean_n": math.nan, "fano": math.nan, "g2_zero": math.nan,
            "fidelity_fock1": math.nan, "cutoff": -1, "residual": math.nan,
            "status": f"failed: {type(exc).__name__}: {exc}",
        }
    state = res.state
    try:
        f = fano(state)
    except UndefinedObservableError:
        f = math.nan
    try:
        g2 = g2_zero(state)
    except UndefinedObservableError:
        g2 = math.nan
    return {
        "parameter": value,
        "mean_n": mean_n(state),
        "fano": f,
        "g2_zero": g2,
        "fidelity_fock1": fidelity_fock(state, 1),
        "cutoff": res.cutoff_used,
        "residual": res.residual,
        "status": "ok",
    }


def _run_tasks(tasks, workers, fn):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks, chunksize=1))
    return [fn(t) for t in tasks]


def predicted_micromaser_traps(phi_lo, phi_hi, max_level=5):
    """Rabi angles where the upward rate above N_max vanishes: phi sqrt(N_max+1) = j pi."""
    traps = []
    for n_max in range(max_level + 1):
        root = math.sqrt(n_max + 1.0)
        j = 1
        while j * math.pi / root <= phi_hi + 1e-12:
            phi = j * math.pi / root
            if phi >= phi_lo - 1e-12:
                traps.append({"n_max": n_max, "rabi_angle": phi, "branch": j})
            j += 1
    return sorted(traps, key=lambda t: t["rabi_angle"])


def predicted_jj_traps(delta0_lo, delta0_hi, max_level=5):
    """delta0 values at zeros of L^1_N(delta0^2); no N_max = 0 trap exists (L^1_0 = 1)."""
    traps = []
    x_hi = delta0_hi**2
    for n_max in range(1, max_level + 1):
        fn = lambda x, n=n_max: laguerre_assoc1(n, x)
        xs = np.linspace(1e-9, x_hi, 2000)
        vals = fn(xs)
        for i in range(len(xs) - 1):
            if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
                root = optimize.brentq(fn, xs[i], xs[i + 1], xtol=1e-14)
                d0 = math.sqrt(root)
                if delta0_lo - 1e-12 <= d0 <= delta0_hi + 1e-12:
                    traps.append({"n_max": n_max, "delta0": d0, "laguerre_zero": root})
    return sorted(traps, key=lambda t: t["delta0"])


def run_sweep(config, out_dir):
    """Occupation/statistics sweep over the nonlinearity parameter (phi or delta0)."""
    t0 = time.time()
    values = config.grid["values"]
    if config.experiment == "sweep-phi":
        pump = config.model["pump_ratio"]
        comments = [
            "steady-state sweep over the Rabi angle (micromaser)",
            f"pump_ratio N/gamma = {pump!r}; rates in units of gamma",
            "columns: rabi angle, <n>, Fano factor, g2(0), <1|rho|1>, cutoff used, "
            "max |L[rho]| residual, status",
        ]
        traps = predicted_micromaser_traps(float(values[0]), float(values[-1]))
    else:
        pump = config.model["ej_star_ratio"]
        comments = [
            "steady-state sweep over the zero-point spread delta0 (JJ cavity)",
            f"ej_star_ratio E*_J/(hbar gamma) = {pump!r}; rates in units of gamma",
            "columns: delta0, <n>, Fano factor, g2(0), <1|rho|1>, cutoff used, "
            "max |L[rho]| residual, status",
        ]
        traps = predicted_jj_traps(float(values[0]), float(values[-1]))

    tasks = [(config.experiment, float(v), pump, config.solver) for v in values]
    rows = _run_tasks(tasks, config.workers, _sweep_point)

    name = config.experiment.replace("sweep-", "sweep_")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    columns = ["parameter", "mean_n", "fano", "g2_zero", "fidelity_fock1", "cutoff",
               "residual", "status"]
    write_csv(csv_path, comments, columns, [[r[c] for c in columns] for r in rows])

    traps_path = os.path.join(out_dir, f"{name}_traps.json")
    with open(traps_path, "w", encoding="utf-8") as f:
        payload = {"predicted_traps": traps}
        if config.experiment == "sweep-delta0":
            payload["note"] = "no vacuum trap: the 0->1 matrix element never vanishes"
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")

    failed = sum(1 for r in rows if r["status"] != "ok")
    manifest = _base_manifest(config, t0)
    manifest["points"] = [
        {"parameter": r["parameter"], "cutoff": r["cutoff"], "residual": r["residual"],
         "status": r["status"]}
        for r in rows
    ]
    manifest["failed_points"] = failed
    manifest["files"] = [os.path.basename(csv_path), os.path.basename(traps_path)]
    manifest_path = os.path.join(out_dir, f"{name}.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=[csv_path, traps_path, manifest_path], manifest=manifest,
                     failed_points=failed)


# ---------------------------------------------------------------------------
# fidelity curves (few-level trapping regime)
# ---------------------------------------------------------------------------


def _fidelity_point(task):
    drive, model, solver = task
    out = {"drive": drive, "status": "ok"}
    try:
        mm = converged_steady_state(
            lambda c: micromaser_liouvillian(
                MicromaserParams(pump_ratio=drive, rabi_angle=model["rabi_angle"], cutoff=c)
            ),
            solver["seed_cutoff"],
            tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"],
            check_uniqueness=solver["check_uniqueness"],
        )
        jj = converged_steady_state(
            lambda c: jj_liouvillian(
                JosephsonParams(ej_star_ratio=drive, delta0=model["delta0"], cutoff=c)
            ),
            solver["seed_cutoff"],
            tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"],
            check_uniqueness=solver["check_uniqueness"],
        )
        cut2 = model["cutoff_two_cavity"]
        two = steady_state(
            two_cavity_liouvillian(
                TwoCavityParams(
                    ej_star_ratio=drive,
                    delta_a=model["delta0"],
                    delta_b=model["delta0"],
                    gamma_ratio_aux=model["gamma_ratio_aux"],
                    cutoff_a=cut2,
                    cutoff_b=cut2,
                )
            ),
            check_uniqueness=solver["check_uniqueness"],
        )
        reduced = partial_trace(two.state.matrix, (cut2 + 1, cut2 + 1), keep=0)
        out.update(
            micromaser=fidelity_fock(mm.state, 1),
            jj_single=fidelity_fock(jj.state, 1),
            jj_two_cavity=float(np.real(reduced[1, 1])),
            mm_cutoff=mm.cutoff_used,
            jj_cutoff=jj.cutoff_used,
            residual_max=max(mm.residual, jj.residual, two.residual),
        )
    except Exception as exc:
        out.update(
            micromaser=math.nan, jj_single=math.nan, jj_two_cavity=math.nan,
            mm_cutoff=-1, jj_cutoff=-1, residual_max=math.nan,
            status=f"failed: {type(exc).__name__}: {exc}",
        )
    return out


def run_fidelity(config, out_dir):
    """Fock-|1> fidelity vs drive for micromaser, single- and two-cavity JJ systems."""
    t0 = time.time()
    values = config.grid["values"]
    tasks = [(float(v), config.model, config.solver) for v in values]
    rows = _run_tasks(tasks, config.workers, _fidelity_point)
    comments = [
        "Fock-|1> fidelity <1|rho_st|1> vs pump strength in the two-level situation",
        f"micromaser at rabi_angle = {config.model['rabi_angle']!r}; "
        f"JJ at delta0 = {config.model['delta0']!r}",
        f"two-cavity scheme with gamma_aux/gamma = {config.model['gamma_ratio_aux']!r}",
        "drive = N/gamma (micromaser) or E*_J/(hbar gamma) (JJ systems)",
    ]
    columns = ["drive", "micromaser", "jj_single", "jj_two_cavity", "mm_cutoff", "jj_cutoff",
               "residual_max", "status"]
    csv_path = os.path.join(out_dir, "fidelity.csv")
    write_csv(csv_path, comments, columns, [[r[c] for c in columns] for r in rows])
    failed = sum(1 for r in rows if r["status"] != "ok")
    manifest = _base_manifest(config, t0)
    manifest["points"] = [
        {"drive": r["drive"], "mm_cutoff": r["mm_cutoff"], "jj_cutoff": r["jj_cutoff"],
         "residual_max": r["residual_max"], "status": r["status"]}
        for r in rows
    ]
    manifest["failed_points"] = failed
    manifest["files"] = [os.path.basename(csv_path)]
    manifest_path = os.path.join(out_dir, "fidelity.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=[csv_path, manifest_path], manifest=manifest, failed_points=failed)


# ---------------------------------------------------------------------------
# remaining single-shot experiments
# ---------------------------------------------------------------------------


def _wigner_state(config):
    model = config.model
    solver = config.solver
    if model["system"] == "micromaser":
        res = converged_steady_state(
            lambda c: micromaser_liouvillian(
                MicromaserParams(pump_ratio=model["pump_ratio"],
                                 rabi_angle=model["rabi_angle"], cutoff=c)
            ),
            solver["seed_cutoff"], tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"], check_uniqueness=solver["check_uniqueness"],
        )
        return res.state, {"cutoff": res.cutoff_used, "residual": res.residual}
    if model["system"] == "josephson":
        res = converged_steady_state(
            lambda c: jj_liouvillian(
                JosephsonParams(ej_star_ratio=model["ej_star_ratio"],
                                delta0=model["delta0"], cutoff=c)
            ),
            solver["seed_cutoff"], tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"], check_uniqueness=solver["check_uniqueness"],
        )
        return res.state, {"cutoff": res.cutoff_used, "residual": res.residual}
    params = TwoCavityParams(
        ej_star_ratio=model["ej_star_ratio"],
        delta_a=model["delta_a"],
        delta_b=model["delta_b"],
        gamma_ratio_aux=model["gamma_ratio_aux"],
        cutoff_a=model["cutoff_a"],
        cutoff_b=model["cutoff_b"],
    )
    res = steady_state(two_cavity_liouvillian(params),
                       check_uniqueness=solver["check_uniqueness"])
    reduced = partial_trace(res.state.matrix, (model["cutoff_a"] + 1, model["cutoff_b"] + 1),
                            keep=0)
    from .fock import DensityMatrix

    return DensityMatrix(reduced), {"cutoff": model["cutoff_a"], "residual": res.residual}


def run_wigner(config, out_dir):
    """Wigner function of a steady state on a square phase-space grid.

    Without an explicit span the grid is sized from the state's quadrature
    moments (5 standard deviations past the means, rounded up)."""
    t0 = time.time()
    state, info = _wigner_state(config)
    span = config.grid["span"]
    if span is None:
        from .observables import _quadrature_stats

        mx, sx, mp_, sp_ = _quadrature_stats(state)
        span = 0.5 * math.ceil(2.0 * max(abs(mx) + 5.0 * sx, abs(mp_) + 5.0 * sp_))
    num = config.grid["num"]
    axis = np.linspace(-span, span, num)
    grid = wigner(state, axis, axis)
    rows = [
        (float(axis[i]), float(axis[j]), float(grid.values[i, j]))
        for i in range(num)
        for j in range(num)
    ]
    comments = [
        f"Wigner function of the {config.model['system']} steady state",
        "x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2); integral W dx dp = 1, "
        "vacuum peak 1/pi",
        f"discrete normalization on this grid: {grid.integral()!r}",
    ]
    csv_path = os.path.join(out_dir, "wigner.csv")
    write_csv(csv_path, comments, ["x", "p", "w"], rows)
    manifest = _base_manifest(config, t0)
    manifest.update(info)
    manifest["grid_integral"] = grid.integral()
    manifest["min_w"] = float(grid.values.min())
    manifest["files"] = [os.path.basename(csv_path)]
    manifest_path = os.path.join(out_dir, "wigner.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=[csv_path, manifest_path], manifest=manifest, failed_points=0)


def run_psd(config, out_dir):
    """Emission spectrum: per-detuning spectra plus the noise-averaged one."""
    t0 = time.time()
    model = config.model
    solver = config.solver
    spec = config.extra["spectrum"]
    noise = config.extra["noise"]
    freqs = np.linspace(-spec["freq_max"], spec["freq_max"], spec["freq_num"])
    base = converged_steady_state(
        lambda c: jj_liouvillian(
            JosephsonParams(ej_star_ratio=model["ej_star_ratio"], delta0=model["delta0"],
                            cutoff=c)
        ),
        solver["seed_cutoff"], tail_tol=solver["tail_tol"], max_cutoff=solver["max_cutoff"],
        check_uniqueness=solver["check_uniqueness"],
    )
    cutoff = base.cutoff_used
    params = JosephsonParams(ej_star_ratio=model["ej_star_ratio"], delta0=model["delta0"],
                             cutoff=cutoff)
    files = []
    comments_common = [
        "frequency axis: (omega - omega_0)/gamma; PSD arbitrary units",
        f"window = {spec['window']!r}/gamma, n_times = {spec['n_times']}, "
        f"coherent-line eta = {spec['eta']!r}",
    ]

    if noise["width"] > 0:
        avg = noise_averaged_psd(
            params, noise["width"], freqs,
            n_nodes=noise["nodes"], window=spec["window"], n_times=spec["n_times"],
            eta=spec["eta"], normalize=spec["normalize"],
            check_convergence=noise["check_convergence"],
            solver_kwargs={"check_uniqueness": solver["check_uniqueness"]},
        )
        avg_path = os.path.join(out_dir, "psd_averaged.csv")
        write_csv(
            avg_path,
            comments_common
            + [f"Gaussian quasi-static detuning noise, std = {noise['width']!r} gamma, "
               f"{noise['nodes']} Gauss-Hermite nodes",
               f"peak normalization value: {avg.normalization!r}"],
            ["frequency", "psd"],
            list(zip(avg.frequencies.tolist(), avg.psd.tolist())),
        )
        files.append(avg_path)

    if noise["width"] == 0 or noise["per_detuning"]:
        detunings = [0.0]
        if noise["width"] > 0:
            from .observables import _gauss_hermite_detunings

            detunings = _gauss_hermite_detunings(noise["width"], min(noise["nodes"], 7))[0]
        rows = []
        for delta in detunings:
            from dataclasses import replace

            p = replace(params, detuning_ratio=float(delta))
            superop = jj_liouvillian(p)
            rho = steady_state(superop, check_uniqueness=solver["check_uniqueness"]).state
            one = psd(superop, rho, freqs - float(delta), window=spec["window"],
                      n_times=spec["n_times"], eta=spec["eta"], normalize=spec["normalize"])
            rows.extend(
                (float(delta), float(f), float(v)) for f, v in zip(freqs, one.psd)
            )
        per_path = os.path.join(out_dir, "psd_per_detuning.csv")
        write_csv(
            per_path,
            comments_common + ["per-detuning spectra on the common frequency axis"],
            ["detuning", "frequency", "psd"],
            rows,
        )
        files.append(per_path)

    manifest = _base_manifest(config, t0)
    manifest["cutoff"] = cutoff
    manifest["files"] = [os.path.basename(p) for p in files]
    manifest_path = os.path.join(out_dir, "psd.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=files + [manifest_path], manifest=manifest, failed_points=0)


def run_g2(config, out_dir):
    """g2(tau) traces, one CSV per parameter case."""
    t0 = time.time()
    solver = config.solver
    taus = np.linspace(0.0, config.grid["tau_max"], config.grid["num"])
    files = []
    points = []
    for case in config.extra["cases"]:
        res = converged_steady_state(
            lambda c: jj_liouvillian(
                JosephsonParams(ej_star_ratio=case["ej_star_ratio"], delta0=case["delta0"],
                                cutoff=c)
            ),
            solver["seed_cutoff"], tail_tol=solver["tail_tol"],
            max_cutoff=solver["max_cutoff"], check_uniqueness=solver["check_uniqueness"],
        )
        superop = jj_liouvillian(
            JosephsonParams(ej_star_ratio=case["ej_star_ratio"], delta0=case["delta0"],
                            cutoff=res.cutoff_used)
        )
        trace = g2_tau(superop, res.state, taus)
        zero = g2_zero(res.state)
        path = os.path.join(out_dir, f"g2_{case['label']}.csv")
        write_csv(
            path,
            [
                f"intensity correlation g2(tau), ej_star_ratio = {case['ej_star_ratio']!r}, "
                f"delta0 = {case['delta0']!r}",
                "tau in units of 1/gamma; g2_zero column repeats the tau = 0 value",
            ],
            ["tau", "g2", "g2_zero"],
            [(float(t), float(v), zero) for t, v in zip(taus, trace.values)],
        )
        files.append(path)
        points.append({"label": case["label"], "cutoff": res.cutoff_used,
                       "residual": res.residual, "g2_zero": zero, "status": "ok"})
    manifest = _base_manifest(config, t0)
    manifest["points"] = points
    manifest["files"] = [os.path.basename(p) for p in files]
    manifest_path = os.path.join(out_dir, "g2.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=files + [manifest_path], manifest=manifest, failed_points=0)


def run_semiclassical(config, out_dir):
    """Mean-field branch table over a drive grid plus the locking threshold."""
    t0 = time.time()
    params = JosephsonParams(ej_star_ratio=1.0, delta0=config.model["delta0"], cutoff=2)
    scan = bifurcation_scan(
        params,
        config.grid["values"],
        a_max=config.extra["scan"]["a_max"],
        rel_tol=config.extra["scan"]["rel_tol"],
    )
    rows = [
        (ej, fp.state.amplitude, fp.state.phase, fp.kind, fp.stable,
         fp.jacobian_eigenvalues[0].real, fp.jacobian_eigenvalues[1].real)
        for ej, fp in scan.rows
    ]
    comments = [
        f"mean-field fixed points, delta0 = {config.model['delta0']!r}",
        "drive = E*_J/(hbar gamma); amplitude A with <a> = A e^{i phase}; rates in gamma",
    ]
    columns = ["drive", "amplitude", "phase", "kind", "stable", "jacobian_re_0",
               "jacobian_re_1"]
    csv_path = os.path.join(out_dir, "semiclassical_branches.csv")
    write_csv(csv_path, comments, columns, rows)
    thr_path = os.path.join(out_dir, "semiclassical_threshold.json")
    with open(thr_path, "w", encoding="utf-8") as f:
        json.dump({"threshold_drive": scan.threshold,
                   "delta0": config.model["delta0"]}, f, indent=2, sort_keys=True)
        f.write("\n")
    manifest = _base_manifest(config, t0)
    manifest["threshold_drive"] = scan.threshold
    manifest["files"] = [os.path.basename(csv_path), os.path.basename(thr_path)]
    manifest_path = os.path.join(out_dir, "semiclassical.manifest.json")
    write_manifest(manifest_path, manifest)
    return RunResult(files=[csv_path, thr_path, manifest_path], manifest=manifest,
                     failed_points=0)


RUNNERS = {
    "sweep-phi": run_sweep,
    "sweep-delta0": run_sweep,
    "fidelity": run_fidelity,
    "wigner": run_wigner,
    "psd": run_psd,
    "g2": run_g2,
    "semiclassical": run_semiclassical,
}


def run_experiment(config, out_dir):
    return RUNNERS[config.experiment](config, out_dir)
