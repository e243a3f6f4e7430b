"""Command-line frontend: config parsing, subcommand dispatch, and
bit-stable CSV serialization.

Config files are plain ``key = value`` lines (``#`` starts a comment);
command-line flags mirror the config keys and override them.  Every
output CSV starts with a format-version line, an alphabetized
``# params:`` line carrying all drive parameters, and a ``# config:``
line from which the run can be reproduced.  Floats are rendered with 17
significant digits so a parse -> emit cycle is bit-exact.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure,
3 selftest failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, fields as dataclass_fields
from typing import Optional, Sequence, Union

import numpy as np

from .hamiltonians import DriveParams
from .propagator import StepControl, Trajectory
from .experiments import (
    Axis,
    SweepGrid,
    double_crossing_scan,
    grover_run,
    success_time,
    runtime_scaling,
    noise_map,
    three_level_scan,
    rwa_vs_exact_report,
    rwa_table,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_axis",
    "parse_config",
    "emit_csv",
    "read_csv",
    "CsvTable",
    "main",
]

FORMAT_VERSION = "lzs-search-sim v1"

SUBCOMMANDS = (
    "double-crossing",
    "grover-run",
    "runtime-scaling",
    "noise-map",
    "three-level-scan",
    "rwa-table",
    "rwa-vs-exact",
    "selftest",
)


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


_INT_KEYS = {"n", "steps_per_period", "order", "record_stride", "snapshot_stride"}
_FLOAT_KEYS = {
    "delta",
    "epsilon",
    "a",
    "b",
    "omega",
    "a1",
    "omega1",
    "phi",
    "eta",
    "t_end",
    "window",
    "a_over_omega",
    "tolerance",
}
_BOOL_KEYS = {"average_phases"}
_AXIS_KEYS = {
    "omega_axis",
    "omega1_axis",
    "t_axis",
    "omega_over_delta_axis",
    "a_over_omega_axis",
}
_STR_KEYS = {"algorithm", "out", "n_list"}
ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _AXIS_KEYS | _STR_KEYS

# flag spellings that differ from key.replace("_", "-")
_FLAG_OF_KEY = {"a": "amplitude-a", "b": "amplitude-b"}


def _flag_name(key: str) -> str:
    return "--" + _FLAG_OF_KEY.get(key, key.replace("_", "-"))


def parse_axis(spec: str, key: str = "axis") -> Axis:
    """Parse ``min:max:points[:log]`` into an Axis named after the key."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(
            f"{key}: expected min:max:points[:log], got {spec!r}"
        )
    if len(parts) == 4 and parts[3] != "log":
        raise ConfigError(f"{key}: fourth field must be 'log', got {parts[3]!r}")
    try:
        lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise ConfigError(f"{key}: unparseable number in {spec!r} ({e})") from None
    name = key[: -len("_axis")] if key.endswith("_axis") else key
    try:
        return Axis(name, lo, hi, points, log=(len(parts) == 4))
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def _convert(key: str, raw: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            low = raw.strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _AXIS_KEYS:
            return parse_axis(raw, key)
        if key == "n_list":
            return tuple(int(tok) for tok in raw.replace(" ", "").split(",") if tok)
        return raw
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"{where}: key {key!r}: {e}") from None


@dataclass
class RunConfig:
    """A validated subcommand invocation: typed values keyed by config name."""

    subcommand: str
    values: dict

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, *keys: str):
        missing = [k for k in keys if k not in self.values]
        if missing:
            raise ConfigError(
                f"{self.subcommand}: missing required key(s): {', '.join(missing)}"
            )

    def drive_params(self, **overrides) -> DriveParams:
        kw = {}
        for f in dataclass_fields(DriveParams):
            if f.name in self.values:
                kw[f.name] = self.values[f.name]
        kw.update(overrides)
        try:
            return DriveParams(**kw)
        except ValueError as e:
            raise ConfigError(f"{self.subcommand}: {e}") from None

    def step_control(self) -> Optional[StepControl]:
        keys = ("steps_per_period", "order", "tolerance", "record_stride", "snapshot_stride")
        if not any(k in self.values for k in keys):
            return None
        kw = {}
        if "steps_per_period" in self.values:
            kw["steps_per_drive_period"] = self.values["steps_per_period"]
        for k in ("order", "tolerance", "record_stride", "snapshot_stride"):
            if k in self.values:
                kw[k] = self.values[k]
        try:
            return StepControl(**kw)
        except ValueError as e:
            raise ConfigError(f"{self.subcommand}: {e}") from None


def _read_config_file(path: str) -> dict:
    """key -> (raw value, "path:lineno") with unknown keys rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    out = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line.strip()!r}")
        key, _, raw = text.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if not raw:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        out[key] = (raw, f"{path}:{lineno}")
    return out


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lzs-search-sim",
        description="Simulator for diabatic quantum search driven through "
        "repeated avoided-crossing passages.",
    )
    p.add_argument("subcommand", help="one of: " + ", ".join(SUBCOMMANDS))
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    for key in sorted(ALL_KEYS):
        if key in _BOOL_KEYS:
            p.add_argument(
                _flag_name(key), dest=key, default=None,
                action=argparse.BooleanOptionalAction,
            )
        else:
            p.add_argument(_flag_name(key), dest=key, default=None, metavar="V")
    return p


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Merge config file and flags (flags win) into a typed RunConfig."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.subcommand not in SUBCOMMANDS:
        raise ConfigError(
            f"unknown subcommand {ns.subcommand!r}\n{parser.format_usage()}"
        )
    raw: dict = {}
    if ns.config:
        raw.update(_read_config_file(ns.config))
    for key in ALL_KEYS:
        val = getattr(ns, key)
        if val is not None:
            raw[key] = (val, f"flag {_flag_name(key)}")
    values = {}
    for key, (rawval, where) in raw.items():
        if isinstance(rawval, (bool, Axis)):
            values[key] = rawval
        else:
            values[key] = _convert(key, rawval, where)
    return RunConfig(subcommand=ns.subcommand, values=values)


# ---------------------------------------------------------------------------
# CSV serialization


def _fmt(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _params_line(params: DriveParams) -> str:
    items = sorted(
        (f.name, getattr(params, f.name)) for f in dataclass_fields(DriveParams)
    )
    return "# params: " + " ".join(f"{k}={_fmt(v)}" for k, v in items)


@dataclass
class CsvTable:
    """Parsed CSV: comment metadata plus named float columns."""

    version: str
    params: dict
    config: dict
    comments: list
    names: list
    columns: dict

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"no column {name!r}; available: {self.names}")
        return self.columns[name]


def emit_csv(
    obj: Union[Trajectory, SweepGrid, dict],
    path: str,
    params: Optional[DriveParams] = None,
    config: Optional[dict] = None,
    comments: Optional[Sequence[str]] = None,
) -> None:
    """Write a trajectory, sweep grid, or plain column dict as CSV.

    Layout: version line, ``# params:`` (alphabetized), ``# config:``
    (alphabetized), optional extra comment lines, column-name row, data
    rows at 17 significant digits.
    """
    lines = [f"# {FORMAT_VERSION}"]
    if params is None and isinstance(obj, SweepGrid):
        params = obj.params
    if params is not None:
        lines.append(_params_line(params))
    if config:
        lines.append(
            "# config: " + " ".join(f"{k}={v}" for k, v in sorted(config.items()))
        )
    for extra in comments or ():
        lines.append(f"# {extra}")

    if isinstance(obj, Trajectory):
        names = ["time"] + [f"p{i}" for i in range(obj.populations.shape[1])]
        cols = [obj.times] + [obj.populations[:, i] for i in range(obj.populations.shape[1])]
    elif isinstance(obj, SweepGrid):
        mesh = np.meshgrid(*(ax.values() for ax in obj.axes), indexing="ij")
        names = [ax.name for ax in obj.axes] + list(obj.columns)
        cols = [m.ravel() for m in mesh] + [obj.columns[k] for k in obj.columns]
    else:
        names = list(obj)
        cols = [np.asarray(obj[k]) for k in names]

    lines.append(",".join(names))
    if cols and len(cols[0]):
        stacked = np.column_stack(cols)
        for row in stacked:
            lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise RuntimeError(f"cannot write {path}: {e}") from None


def _parse_comment_kv(rest: str) -> dict:
    out = {}
    for tok in rest.split():
        if "=" in tok:
            k, _, v = tok.partition("=")
            out[k] = v
    return out


def read_csv(path: str) -> CsvTable:
    """Parse a CSV produced by emit_csv back into named float columns."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as e:
        raise RuntimeError(f"cannot read {path}: {e}") from None
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: missing format-version line")
    version = lines[0][2:]
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format {version!r}")
    params: dict = {}
    config: dict = {}
    comments: list = []
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if body.startswith("params:"):
            params = _parse_comment_kv(body[len("params:"):])
        elif body.startswith("config:"):
            config = _parse_comment_kv(body[len("config:"):])
        else:
            comments.append(body)
        i += 1
    if i >= len(lines) or not lines[i]:
        raise ValueError(f"{path}: missing column-name row")
    names = lines[i].split(",")
    i += 1
    rows = [ln.split(",") for ln in lines[i:] if ln]
    data = np.array([[float(v) for v in row] for row in rows]) if rows else np.empty((0, len(names)))
    if rows and data.shape[1] != len(names):
        raise ValueError(f"{path}: row width does not match {len(names)} columns")
    columns = {name: data[:, j] for j, name in enumerate(names)}
    return CsvTable(
        version=version,
        params=params,
        config=config,
        comments=comments,
        names=names,
        columns=columns,
    )


# ---------------------------------------------------------------------------
# subcommand runners


def _config_echo(cfg: RunConfig) -> dict:
    out = {"subcommand": cfg.subcommand}
    for key, val in cfg.values.items():
        if key == "out":
            continue
        if isinstance(val, Axis):
            spec = f"{_fmt(val.lo)}:{_fmt(val.hi)}:{val.points}"
            out[key] = spec + (":log" if val.log else "")
        elif key == "n_list":
            out[key] = ",".join(str(v) for v in val)
        else:
            out[key] = _fmt(val)
    return out


def _run_double_crossing(cfg: RunConfig):
    cfg.require("delta", "a", "omega_axis", "out")
    grid = double_crossing_scan(
        cfg.get("delta"), cfg.get("a"), cfg.get("omega_axis"), cfg.step_control()
    )
    worst = float(np.max(grid.column("p_plus_2")))
    return grid, grid.params, f"points={grid.axes[0].points} p_plus_2_max={worst:.6g}"


def _run_grover(cfg: RunConfig):
    cfg.require("n", "a", "omega", "out")
    traj = grover_run(
        cfg.get("n"),
        cfg.get("a"),
        cfg.get("omega"),
        cfg.get("b", 0.0),
        cfg.get("t_end"),
        cfg.step_control(),
    )
    t_s = success_time(traj)
    params = cfg.drive_params()
    return traj, params, f"success_time={_fmt(t_s)}"


def _run_runtime_scaling(cfg: RunConfig):
    cfg.require("n_list", "a", "out")
    fit = runtime_scaling(
        cfg.get("n_list"), cfg.get("a"), cfg.get("a_over_omega", 1.0), cfg.step_control()
    )
    table = {
        "n": np.asarray(fit.n_values, dtype=float),
        "success_time": np.asarray(fit.times),
    }
    comment = (
        f"fit: exponent={_fmt(fit.exponent)} intercept={_fmt(fit.intercept)} "
        f"residual={_fmt(fit.residual)} excluded={','.join(map(str, fit.excluded)) or 'none'}"
    )
    summary = f"exponent={fit.exponent:.6g} residual={fit.residual:.3g}"
    return table, None, summary, [comment]


def _run_noise_map(cfg: RunConfig):
    cfg.require("algorithm", "a1", "omega1_axis", "t_axis", "out")
    if cfg.get("n") is None:
        cfg.require("delta")
    algorithm = cfg.get("algorithm")
    if algorithm == "algB":
        cfg.require("a", "b", "omega")
    grid = noise_map(
        algorithm,
        cfg.drive_params(a1=0.0, omega1=0.0).delta,
        cfg.get("a", 0.0),
        cfg.get("b", 0.0),
        cfg.get("omega", 1.0),
        cfg.get("a1"),
        cfg.get("omega1_axis"),
        cfg.get("t_axis"),
        cfg.get("phi", 0.0),
        cfg.get("average_phases", False),
        cfg.step_control(),
    )
    peak = float(np.max(grid.column("p_plus")))
    return grid, grid.params, f"algorithm={algorithm} p_plus_max={peak:.6g}"


def _run_three_level(cfg: RunConfig):
    cfg.require("a", "b", "eta", "omega_axis", "window", "out")
    if cfg.get("n") is None:
        cfg.require("delta")
    params = cfg.drive_params()
    grid = three_level_scan(
        params, cfg.get("omega_axis"), cfg.get("window"), cfg.step_control()
    )
    p1 = grid.column("max_p1")
    k = int(np.argmax(p1))
    at = grid.axes[0].values()[k]
    base = grid.column("baseline_max_p1")[0]
    return (
        grid,
        params,
        f"max_p1_peak={p1[k]:.6g} at_omega={at:.6g} baseline_max_p1={base:.3g}",
    )


def _run_rwa_table(cfg: RunConfig):
    cfg.require("a", "b", "omega_axis", "delta", "out")
    grid = rwa_table(cfg.get("a"), cfg.get("b"), cfg.get("omega_axis"), cfg.get("delta"))
    return grid, grid.params, f"points={grid.axes[0].points}"


def _run_rwa_vs_exact(cfg: RunConfig):
    cfg.require("omega_over_delta_axis", "a_over_omega_axis", "out")
    grid = rwa_vs_exact_report(
        cfg.get("omega_over_delta_axis"),
        cfg.get("a_over_omega_axis"),
        cfg.get("delta", 2.0**-8),
        cfg.step_control(),
    )
    err = grid.column("rel_error")
    defined = err[~np.isnan(err)]
    worst = float(defined.max()) if len(defined) else math.nan
    return grid, grid.params, f"cells={err.size} worst_defined_error={worst:.3g}"


_RUNNERS = {
    "double-crossing": _run_double_crossing,
    "grover-run": _run_grover,
    "runtime-scaling": _run_runtime_scaling,
    "noise-map": _run_noise_map,
    "three-level-scan": _run_three_level,
    "rwa-table": _run_rwa_table,
    "rwa-vs-exact": _run_rwa_vs_exact,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # argparse exits itself on bad flags / --help
        code = e.code if isinstance(e.code, int) else 1
        return 0 if code == 0 else 1

    if cfg.subcommand == "selftest":
        from .selftest import run_selftest

        failures = run_selftest()
        return 3 if failures else 0

    t0 = time.perf_counter()
    try:
        result = _RUNNERS[cfg.subcommand](cfg)
        obj, params, summary = result[0], result[1], result[2]
        comments = result[3] if len(result) > 3 else None
        emit_csv(obj, cfg.get("out"), params=params, config=_config_echo(cfg), comments=comments)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # propagation/physics/I-O failures
        print(f"runtime error: {e}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0
    print(f"{cfg.subcommand}: {summary} out={cfg.get('out')} elapsed={elapsed:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
