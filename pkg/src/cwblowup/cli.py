"""Command-line front end: configuration, experiment modes and file outputs.

Outputs in ``--out``::

    config.txt                 resolved configuration (re-readable with --config)
    history.csv                n,t_n,tau_n,h_n,N_n,M_n per step
    snapshots/profile_<n>.csv  x,u profiles, indexed by snapshots/index.csv
    report.txt                 outcome, blow-up time, rate fit, bounds

Exit codes: 0 success (any outcome), 1 configuration error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .driver import (
    BLOWUP,
    DECAY,
    BlowupReport,
    DampingComparison,
    RunResult,
    StepRecord,
    build_report,
    compare_damping,
    initial_state,
    run,
)
from .mesh import MeshControl
from .problem import (
    InitialData,
    ParameterError,
    PDEParams,
    build_sine_profile,
    check_assumptions,
    discrete_energy,
    tabulated_profile,
    validate_params,
)
from .scheme import SchemeInvariantError, State

MODES = ("single", "compare-damping", "sweep")
HISTORY_COLUMNS = ("n", "t_n", "tau_n", "h_n", "N_n", "M_n")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    p: float = 3.0
    q: float = 1.3
    a: float = 1.0
    b: float = 1.0
    profile: str = "sine"
    amplitude: float = 1000.0
    sweep_amplitudes: tuple[float, ...] = ()
    tau: float = 1e-4
    h: float = 0.2
    M_stop: float = 1e6
    tau_floor: float = 1e-16
    max_iter: int = 500_000
    snapshot_every: int = 0
    mode: str = "single"
    out: str = "out"
    force: bool = False

    @property
    def params(self) -> PDEParams:
        return PDEParams(self.p, self.q, self.a, self.b)

    @property
    def control(self) -> MeshControl:
        return MeshControl(self.tau, self.h, self.M_stop, self.tau_floor, self.max_iter)

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return self.sweep_amplitudes or (self.amplitude,)


# flag / config-file key -> RunConfig field
_KEYS = {
    "p": "p",
    "q": "q",
    "a": "a",
    "b": "b",
    "amplitude": "amplitude",
    "tau": "tau",
    "h": "h",
    "M-stop": "M_stop",
    "tau-floor": "tau_floor",
    "max-iter": "max_iter",
    "snapshot-every": "snapshot_every",
    "profile": "profile",
    "mode": "mode",
    "out": "out",
    "force": "force",
}
_FIELD_TO_KEY = {v: k for k, v in _KEYS.items()}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="cwblowup",
        description="Adaptive finite-difference blow-up runs for u_t = u_xx + a|u|^(p-1)u - b|u_x|^q on (-1,1).",
        argument_default=argparse.SUPPRESS,
        allow_abbrev=False,
    )
    ap.add_argument("--config", help="flat 'key = value' file; flags override it")
    ap.add_argument("--p", help="reaction exponent, p > 1 (default 3)")
    ap.add_argument("--q", help="gradient exponent, 1 <= q <= 2p/(p+1) (default 1.3)")
    ap.add_argument("--a", help="reaction coefficient (default 1)")
    ap.add_argument("--b", help="gradient coefficient, 0 disables the term (default 1)")
    ap.add_argument("--amplitude", help="sine amplitude; comma list in sweep mode (default 1000)")
    ap.add_argument("--tau", help="base time step (default 1e-4)")
    ap.add_argument("--h", help="base space step, tau/h^2 < 1/16 (default 0.2)")
    ap.add_argument("--M-stop", dest="M-stop", help="blow-up threshold (default 1e6)")
    ap.add_argument("--tau-floor", dest="tau-floor", help="smallest admissible tau_n (default 1e-16)")
    ap.add_argument("--max-iter", dest="max-iter", help="iteration cap (default 500000)")
    ap.add_argument("--snapshot-every", dest="snapshot-every", help="profile snapshot interval, 0 = first/last only")
    ap.add_argument("--profile", help="'sine' or a two-column x,u0 CSV file")
    ap.add_argument("--mode", help="single | compare-damping | sweep")
    ap.add_argument("--out", help="output directory (default ./out)")
    ap.add_argument("--force", action="store_const", const="true", help="run even if u0 fails (A1)-(A3),(A5)")
    return ap


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    return _parse_config_text(text)


def _parse_config_text(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key.lower() == "m-stop":
            key = "M-stop"
        if key not in _KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


def _number(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"--{key}: cannot parse {value!r} as a number") from None


def _integer(key: str, value: str) -> int:
    x = _number(key, value)
    if not x.is_integer():
        raise ConfigError(f"--{key}: expected an integer, got {value!r}")
    return int(x)


def _boolean(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"--{key}: expected true/false, got {value!r}")


def _config_from_raw(raw: dict[str, str]) -> RunConfig:
    kw: dict = {}
    for key, value in raw.items():
        name = _KEYS[key]
        if name in ("profile", "mode", "out"):
            kw[name] = value
        elif name in ("max_iter", "snapshot_every"):
            kw[name] = _integer(key, value)
        elif name == "force":
            kw[name] = _boolean(key, value)
        elif name == "amplitude":
            values = tuple(_number(key, v) for v in value.split(",") if v.strip())
            if not values:
                raise ConfigError("--amplitude: no value given")
            kw["amplitude"] = values[0]
            kw["sweep_amplitudes"] = values if len(values) > 1 else ()
        else:
            kw[name] = _number(key, value)
    cfg = RunConfig(**kw)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        validate_params(cfg.params)
        cfg.control
        for amp in cfg.amplitudes:
            if cfg.profile == "sine":
                build_sine_profile(amp)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.mode not in MODES:
        raise ConfigError(f"--mode: expected one of {', '.join(MODES)}, got {cfg.mode!r}")
    if cfg.snapshot_every < 0:
        raise ConfigError("--snapshot-every: must be >= 0")
    if cfg.sweep_amplitudes and cfg.mode != "sweep":
        raise ConfigError("--amplitude: several values are only allowed with --mode sweep")


def parse_config(argv=None) -> RunConfig:
    """Build a validated RunConfig from flags and an optional config file."""
    ns = vars(_build_parser().parse_args(argv))
    raw = _read_config_file(ns.pop("config")) if "config" in ns else {}
    raw.update(ns)
    return _config_from_raw(raw)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        if f.name == "sweep_amplitudes":
            continue
        value = getattr(cfg, f.name)
        if f.name == "amplitude":
            text = ", ".join(repr(a) for a in cfg.amplitudes)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {text}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> RunConfig:
    return _config_from_raw(_parse_config_text(text))


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def write_history(history: list[StepRecord], path) -> Path:
    if not history:
        raise ValueError("refusing to write an empty history")
    path = Path(path)
    rows = [",".join(HISTORY_COLUMNS)]
    for r in history:
        rows.append(f"{r.n},{_fmt(r.t_n)},{_fmt(r.tau_n)},{_fmt(r.h_n)},{r.N_n},{_fmt(r.M_n)}")
    path.write_text("\n".join(rows) + "\n")
    return path


def read_history(path) -> list[StepRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            StepRecord(int(r["n"]), float(r["t_n"]), float(r["tau_n"]),
                       float(r["h_n"]), int(r["N_n"]), float(r["M_n"]))
            for r in reader
        ]


def write_snapshots(states: list[State], directory) -> list[Path]:
    """One ``x,u`` file per state plus ``index.csv`` (snapshot,n,t_n)."""
    if not states:
        raise ValueError("no snapshots to write")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    index = ["snapshot,n,t_n"]
    for s in states:
        name = f"profile_{s.n}.csv"
        lines = ["x,u"] + [f"{_fmt(x)},{_fmt(u)}" for x, u in zip(s.grid.nodes, s.values)]
        (directory / name).write_text("\n".join(lines) + "\n")
        index.append(f"{name},{s.n},{_fmt(s.t)}")
        written.append(directory / name)
    (directory / "index.csv").write_text("\n".join(index) + "\n")
    return written


def format_report(report: BlowupReport) -> str:
    def opt(x):
        return "n/a" if x is None else _fmt(x)

    lines = [
        f"outcome: {report.outcome}",
        f"stop_reason: {report.stop_reason}",
        f"p: {report.p!r}",
        f"q: {report.q!r}",
        f"n_stop: {report.n_stop}",
        f"t_stop: {_fmt(report.t_stop)}",
        f"M_0: {_fmt(report.M_0)}",
        f"M_final: {_fmt(report.M_final)}",
        f"energy_0: {opt(report.energy_0)}",
        f"r_exponent: {_fmt(report.r_exponent)}",
        f"rho_min: {opt(report.rho_min)}",
    ]
    if report.outcome == BLOWUP:
        lines += [
            f"T_star: {opt(report.T_star)}",
            f"T_star_lower_bound: {_fmt(report.lower_bound)}",
            f"T_star_above_lower_bound: {report.T_star is not None and report.T_star >= report.lower_bound}",
            f"C_fit: {opt(report.C_fit)}",
            f"exponent_fit: {opt(report.exponent_fit)}",
            f"exponent_theory: {_fmt(report.theoretical_exponent)}",
        ]
    elif report.outcome == DECAY:
        lines.append("rate_fit: omitted (solution decays)")
    else:
        lines.append("rate_fit: omitted (no blow-up detected)")
    return "\n".join(lines) + "\n"


def write_report(report: BlowupReport, path) -> Path:
    path = Path(path)
    path.write_text(format_report(report))
    return path


def write_comparison_report(cmp: DampingComparison, path) -> Path:
    text = (
        "[with gradient term, b = 1]\n"
        + format_report(cmp.report_with)
        + "\n[without gradient term, b = 0]\n"
        + format_report(cmp.report_without)
        + "\n[comparison]\n"
        + f"fewer_iterations_without_gradient: {cmp.fewer_iterations}\n"
        + f"less_time_without_gradient: {cmp.less_time}\n"
        + f"verdict: {cmp.verdict}\n"
    )
    path = Path(path)
    path.write_text(text)
    return path


def load_profile(cfg: RunConfig, amplitude: float) -> InitialData:
    if cfg.profile == "sine":
        return build_sine_profile(amplitude)
    try:
        data = np.loadtxt(cfg.profile, delimiter=",", comments="#", ndmin=2,
                          skiprows=_header_rows(cfg.profile))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"--profile: cannot read {cfg.profile!r}: {exc}") from None
    if data.shape[1] != 2:
        raise ConfigError(f"--profile: expected two columns x,u0 in {cfg.profile!r}")
    try:
        return tabulated_profile(data[:, 0], data[:, 1])
    except ParameterError as exc:
        raise ConfigError(f"--profile: {exc}") from None


def _header_rows(path: str) -> int:
    with open(path) as fh:
        first = fh.readline().split(",")[0].strip()
    try:
        float(first)
        return 0
    except ValueError:
        return 1


def _write_run(result: RunResult, report: BlowupReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if result.history:
        write_history(result.history, out / "history.csv")
    snaps = list(result.snapshots)
    if not snaps or snaps[-1].n != result.final_state.n:
        snaps.append(result.final_state)
    write_snapshots(snaps, out / "snapshots")
    write_report(report, out / "report.txt")


def _single(cfg: RunConfig, data: InitialData, out: Path, params=None) -> BlowupReport:
    params = params or cfg.params
    control = cfg.control
    s0 = initial_state(data, params, control)
    energy = discrete_energy(s0.values, s0.grid, params)
    result = run(data, params, control, snapshot_every=cfg.snapshot_every)
    if not result.snapshots:
        result.snapshots.append(s0)
    report = build_report(result, params, control, energy_0=energy)
    _write_run(result, report, out)
    return report


def _check_data(cfg: RunConfig, data: InitialData) -> None:
    s0 = initial_state(data, cfg.params, cfg.control)
    rep = check_assumptions(data, s0.grid)
    if rep.failed():
        print(f"initial data fails {', '.join(rep.failed())}", file=sys.stderr)
    if not rep.structural_ok and not cfg.force:
        raise ConfigError("initial data violates (A1)-(A3)/(A5); pass --force to run anyway")


def execute(cfg: RunConfig) -> str:
    """Run the configured experiment, write outputs, return a one-line summary."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(serialize_config(cfg))

    if cfg.mode == "single":
        data = load_profile(cfg, cfg.amplitude)
        _check_data(cfg, data)
        rep = _single(cfg, data, out)
        return f"{rep.outcome} at n={rep.n_stop}, t={rep.t_stop:.6e}"

    if cfg.mode == "compare-damping":
        data = load_profile(cfg, cfg.amplitude)
        _check_data(cfg, data)
        cmp = compare_damping(data, cfg.params, cfg.control, snapshot_every=cfg.snapshot_every)
        for sub, res, rep in (
            ("with_gradient", cmp.with_gradient, cmp.report_with),
            ("without_gradient", cmp.without_gradient, cmp.report_without),
        ):
            _write_run(res, rep, out / sub)
        write_comparison_report(cmp, out / "report.txt")
        return cmp.verdict

    rows = ["amplitude,outcome,n_stop,t_stop,T_star"]
    for i, amp in enumerate(cfg.amplitudes):
        data = load_profile(cfg, amp)
        _check_data(cfg, data)
        rep = _single(cfg, data, out / f"run_{i:03d}")
        T = "" if rep.T_star is None else _fmt(rep.T_star)
        rows.append(f"{_fmt(amp)},{rep.outcome},{rep.n_stop},{_fmt(rep.t_stop)},{T}")
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")
    return f"{len(cfg.amplitudes)} runs written to {out}"


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        summary = execute(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SchemeInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
