"""Command-line front end.

Subcommands: simulate, scan-omega, scan-time, sensitivity, disambiguate,
compare-oracle, validate-rwa.

Configuration is a flat ``key = value`` text file (``--config``); command
line flags override it. Output files embed the resolved configuration as
``#! key = value`` lines, which ``--config`` reads back, so any CSV or JSON
output re-runs to the same rows.

Exit codes: 0 ok, 2 configuration error, 3 numerical or truncation error,
4 acceptance threshold not met.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import fock
from . import metrology as met
from . import phasespace as ps
from . import sequence as seq
from .model import DomainError, PhysicalParams, gamma_decay

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_THRESHOLD = 0, 2, 3, 4
FORMAT_VERSION = "sagnac-pmdd v1"
ORACLE_THRESHOLD = 1e-8
RWA_THRESHOLD = 0.99


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    omega: float = 0.8
    alpha: float = 0.5
    beta: float = 0.25
    tau: float = 1.0
    reps: int = 1
    trap_freq: float = 1.0e4
    drive_freq: float = 1.0e4
    engine: str = "phasespace"
    sequence: str = "pmdd"
    cutoff_a: int = 40
    cutoff_b: int = 40
    leakage_tol: float = 1e-10
    min: float = 0.0
    max: float = 1.0
    points: int = 101
    slope: bool = False
    out: str = ""
    format: str = "csv"
    workers: int = 1
    p_target: float = 0.5
    time: float = 0.0
    ratios: str = "200,400,800,1600"
    rwa_alpha_t: float = 0.5
    dt_factor: float = 0.1
    seed: int = 0  # reserved; every run is deterministic

    def params(self, **overrides) -> PhysicalParams:
        kw = dict(
            omega_rot=self.omega,
            alpha=self.alpha,
            beta=self.beta,
            tau=self.tau,
            repetitions=self.reps,
            trap_freqs=(self.trap_freq, self.trap_freq, self.trap_freq / 10),
            drive_freq=self.drive_freq,
        )
        kw.update(overrides)
        return PhysicalParams(**kw)

    def fock_config(self) -> fock.FockConfig:
        return fock.FockConfig(self.cutoff_a, self.cutoff_b, self.leakage_tol)

    def embedded(self) -> list[str]:
        skip = {"out"}
        return [f"#! {k} = {v}" for k, v in sorted(asdict(self).items()) if k not in skip]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    kind = _FIELD_TYPES[key]
    if isinstance(value, str):
        value = value.strip()
    try:
        if kind == "bool":
            if isinstance(value, bool):
                return value
            return value.lower() in ("1", "true", "yes", "on")
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines (also ``#! key = value`` from outputs, or JSON outputs)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text).get("config", {})
        items = data.items()
    else:
        items = []
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("#!"):
                line = line[2:].strip()
            elif line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            items.append((key.strip(), value.strip()))
    out = {}
    for key, value in items:
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--engine", choices=["phasespace", "fock"])
    common.add_argument("--sequence", help="pmdd | ideal | baseline | explicit element list")
    for flag in ("omega", "alpha", "beta", "tau", "min", "max", "p-target", "time",
                 "trap-freq", "drive-freq", "leakage-tol", "dt-factor", "rwa-alpha-t"):
        common.add_argument(f"--{flag}", type=float)
    for flag in ("reps", "cutoff-a", "cutoff-b", "points", "workers"):
        common.add_argument(f"--{flag}", type=int)
    common.add_argument("--ratios", help="comma separated omega/alpha ladder for validate-rwa")
    common.add_argument("--slope", action="store_const", const=True)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])

    parser = argparse.ArgumentParser(prog="sagnac-pmdd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "single end-to-end run with readout"),
        ("scan-omega", "population versus rotation speed"),
        ("scan-time", "population versus evolution time"),
        ("sensitivity", "sensitivity table over an Omega grid"),
        ("disambiguate", "candidate Omega values for one measured population"),
        ("compare-oracle", "phase-space engine versus Fock oracle"),
        ("validate-rwa", "lab-frame versus rotating-wave propagation"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        try:
            values.update(read_config(ns.config))
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
    for key in _FIELD_TYPES:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(**values)
    if cfg.points < 1:
        raise ConfigError("points must be >= 1")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    return cfg


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_table(cfg: RunConfig, kind: str, columns: list, rows: list, extra: dict | None = None) -> str:
    if cfg.format == "json":
        doc = {"format": FORMAT_VERSION, "kind": kind, "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
               "columns": columns, "rows": [[_json_num(x) for x in r] for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# {FORMAT_VERSION} {kind}\n")
    for line in cfg.embedded():
        buf.write(line + "\n")
    for k, v in (extra or {}).items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json_num(x):
    if isinstance(x, (float, np.floating)) and not math.isfinite(x):
        return str(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


# ---------------------------------------------------------------- commands


def _run_point(cfg: RunConfig, params: PhysicalParams, spec: seq.SequenceSpec):
    init = ps.initial_state()
    result = seq.run(spec, init, params, engine=cfg.engine, fock_config=cfg.fock_config())
    return met.ramsey_population(result.state), result


def cmd_simulate(cfg: RunConfig, stdout) -> int:
    params = cfg.params()
    spec = seq.parse_sequence(cfg.sequence, cfg.tau, cfg.reps)
    readout, result = _run_point(cfg, params, spec)
    report = {
        "p_down": readout.p_down,
        "contrast": readout.contrast,
        "rel_phase": readout.rel_phase,
        "frame": result.frame,
        "engine": cfg.engine,
        "sequence": seq.format_sequence(spec),
        "repetitions": spec.repetitions,
        "total_duration": spec.total_duration,
        "closed_form": _closed_form(spec, params),
        "trace": result.trace,
    }
    stdout.write(
        f"p_down={readout.p_down:.12g} contrast={readout.contrast:.12g} "
        f"rel_phase={readout.rel_phase:.12g} frame={result.frame}\n"
    )
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump({"format": FORMAT_VERSION, "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
                       "result": report}, fh, indent=1, sort_keys=True, default=_json_num)
    return EXIT_OK


def _closed_form(spec: seq.SequenceSpec, params: PhysicalParams) -> float:
    if spec.name == "baseline":
        if not spec.elements:
            return 1.0
        if spec.repetitions != 1:
            return math.nan
        return met.population_baseline(params, spec.elements[0].duration)
    if spec.name in ("pmdd", "ideal"):
        return met.population_pmdd(replace(params, repetitions=spec.repetitions), spec.elements[0].duration)
    return math.nan


def _scan(cfg: RunConfig, axis: str, stdout) -> int:
    if cfg.points < 1:
        raise ConfigError("zero-length grid")
    grid = np.linspace(cfg.min, cfg.max, cfg.points) if cfg.points > 1 else np.array([cfg.min])
    if axis == "time" and np.any(grid < 0):
        raise ConfigError("time grid must be non-negative")
    name = cfg.sequence.strip().lower()
    per_unit = 1 if name == "baseline" else 4

    def point(x):
        if axis == "omega":
            params, tau = cfg.params(omega_rot=float(x)), cfg.tau
        else:
            params = cfg.params()
            tau = float(x) / (per_unit * cfg.reps) if name != "baseline" else float(x)
        if tau == 0:
            return [float(x), 1.0, 1.0, 1.0]
        params = replace(params, tau=tau)
        spec = seq.parse_sequence(cfg.sequence, tau, cfg.reps)
        readout, _ = _run_point(cfg, params, spec)
        return [float(x), readout.p_down, _closed_form(spec, params), readout.contrast]

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(point, grid))
    else:
        rows = [point(x) for x in grid]
    columns = [axis, "p_down", "p_down_closed_form", "contrast"]
    if cfg.slope:
        columns.append("slope")
        h = 1e-6 * max(abs(cfg.max - cfg.min), 1e-12)
        for r in rows:
            r.append(_closed_slope(cfg, axis, r[0], h, name, per_unit))
    meta = {"axis_units": "rad/s" if axis == "omega" else "s", "engine": cfg.engine}
    _emit(cfg, render_table(cfg, f"scan-{axis}", columns, rows, {"metadata": meta}), stdout)
    return EXIT_OK


def _closed_slope(cfg, axis, x, h, name, per_unit):
    def closed(v):
        if axis == "omega":
            params = cfg.params(omega_rot=v)
            tau = cfg.tau
        else:
            params = cfg.params()
            tau = v if name == "baseline" else v / (per_unit * cfg.reps)
        if tau <= 0:
            return 1.0
        params = replace(params, tau=tau)
        spec = seq.parse_sequence(cfg.sequence, tau, cfg.reps)
        return _closed_form(spec, params)

    lo = x - h if (axis == "omega" or x - h > 0) else x
    return (closed(x + h) - closed(lo)) / (x + h - lo)


def cmd_sensitivity(cfg: RunConfig, stdout) -> int:
    grid = np.linspace(cfg.min, cfg.max, cfg.points) if cfg.points > 1 else np.array([cfg.min])
    rows = []
    for w in grid:
        params = cfg.params(omega_rot=float(w))
        r = met.sensitivity(params)
        r1 = met.sensitivity(replace(params, repetitions=1))
        rows.append([float(w), params.theta(), cfg.reps, r.delta_omega, r.small_angle, r.ratio,
                     r.delta_omega / r1.delta_omega if not r.dead_point else math.nan, r.dead_point])
    columns = ["omega", "theta", "reps", "delta_omega", "small_angle", "ratio", "m_scaling", "dead_point"]
    _emit(cfg, render_table(cfg, "sensitivity", columns, rows,
                            {"metadata": {"units": "(rad/s)/sqrt(Hz)", "total_time": cfg.params().total_time}}),
          stdout)
    return EXIT_OK


def cmd_disambiguate(cfg: RunConfig, stdout) -> int:
    t = cfg.time or cfg.tau
    params = cfg.params()
    res = met.disambiguate(cfg.p_target, t, params, (cfg.min, cfg.max), grid_points=max(cfg.points, 2))
    rows = []
    for i, c in enumerate(res.candidates):
        ratio = res.ratios[i] if i < len(res.ratios) else math.nan
        rows.append([c.omega, c.slope, ratio])
    extra = {"summary": {"n_candidates": len(res.candidates), "min_adjacent_ratio": _json_num(res.min_ratio),
                         "unresolved": res.unresolved}}
    _emit(cfg, render_table(cfg, "disambiguate", ["omega", "slope_dP_dt", "ratio_to_next"], rows, extra), stdout)
    return EXIT_OK


def cmd_compare_oracle(cfg: RunConfig, stdout) -> int:
    params = cfg.params()
    spec = seq.parse_sequence(cfg.sequence, cfg.tau, cfg.reps)
    config = cfg.fock_config()
    init = ps.initial_state()
    analytic = seq.run(spec, init, params, engine="phasespace")
    report = {"sequence": seq.format_sequence(spec), "repetitions": spec.repetitions,
              "max_amplitude": max([d["max_amplitude"] for d in analytic.trace] or [0.0]),
              "threshold": ORACLE_THRESHOLD}
    try:
        oracle = seq.run(spec, init, params, engine="fock", fock_config=config)
        expanded = ps.to_fock(analytic.state, config)
    except fock.TruncationError as exc:
        report.update(passed=False, error=str(exc), leakage=exc.leakage, element_index=exc.element_index)
        stdout.write(json.dumps(report, sort_keys=True, default=_json_num) + "\n")
        return EXIT_NUMERIC
    fid = fock.fidelity(expanded, oracle.state)
    report.update(
        fidelity=fid,
        infidelity=1.0 - fid,
        leakage=[d["leakage"] for d in oracle.trace],
        frame=oracle.frame,
        passed=bool(1.0 - fid <= ORACLE_THRESHOLD),
    )
    text = json.dumps(report, indent=1, sort_keys=True, default=_json_num) + "\n"
    _emit(cfg, text, stdout)
    return EXIT_OK if report["passed"] else EXIT_THRESHOLD


def rwa_ladder(cfg: RunConfig, ratios: list[float]) -> list[dict]:
    """Lab-frame vs rotating-wave fidelity for each omega/alpha ratio."""
    config = cfg.fock_config()
    ops = fock.build_operators(config)
    t_total = cfg.rwa_alpha_t / cfg.alpha
    init = ps.to_fock(ps.initial_state(), config)
    out = []
    for ratio in ratios:
        w = ratio * cfg.alpha
        params = cfg.params(trap_freqs=(w, w, w / 10), drive_freq=w)
        ref = fock.propagate_static(init, fock.hamiltonian_plus(params, ops), t_total)
        dt = cfg.dt_factor / w
        lab = fock.propagate_timedep(init, params, t_total, dt, ops=ops)
        fid = fock.fidelity(lab, ref)
        out.append({"ratio": ratio, "fidelity": fid, "infidelity": 1.0 - fid, "dt": dt,
                    "integrator_error": fock.timedep_error(init, params, t_total, dt, ops=ops)})
    return out


def cmd_validate_rwa(cfg: RunConfig, stdout) -> int:
    try:
        ratios = [float(r) for r in cfg.ratios.split(",") if r.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad ratios {cfg.ratios!r}") from exc
    if not ratios or cfg.alpha <= 0:
        raise ConfigError("validate-rwa needs alpha > 0 and at least one ratio")
    ladder = rwa_ladder(cfg, ratios)
    infid = [r["infidelity"] for r in ladder]
    monotone = all(b < a for a, b in zip(infid, infid[1:]))
    passed = ladder[0]["fidelity"] >= RWA_THRESHOLD and monotone
    report = {"alpha_t": cfg.rwa_alpha_t, "ladder": ladder, "monotone": monotone,
              "threshold": RWA_THRESHOLD, "passed": passed}
    _emit(cfg, json.dumps(report, indent=1, sort_keys=True) + "\n", stdout)
    return EXIT_OK if passed else EXIT_THRESHOLD


COMMANDS = {
    "simulate": cmd_simulate,
    "scan-omega": lambda cfg, out: _scan(cfg, "omega", out),
    "scan-time": lambda cfg, out: _scan(cfg, "time", out),
    "sensitivity": cmd_sensitivity,
    "disambiguate": cmd_disambiguate,
    "compare-oracle": cmd_compare_oracle,
    "validate-rwa": cmd_validate_rwa,
}


def _fail(kind: str, exc: Exception, code: int, stderr, **extra) -> int:
    stderr.write(json.dumps({"error": str(exc), "kind": kind, **extra}, default=_json_num) + "\n")
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ns = _parser().parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg, stdout)
    except (ConfigError, DomainError, TypeError) as exc:
        return _fail("config", exc, EXIT_CONFIG, stderr)
    except fock.TruncationError as exc:
        return _fail("truncation", exc, EXIT_NUMERIC, stderr, leakage=exc.leakage, element_index=exc.element_index)
    except (fock.AccuracyError, MemoryError, met.AmbiguityError, ValueError, ArithmeticError) as exc:
        return _fail("numerical", exc, EXIT_NUMERIC, stderr)


if __name__ == "__main__":
    sys.exit(main())
