"""Command-line front end.

Subcommands: ``bound-state``, ``anomaly``, ``evolve``, ``algebra-check``, ``sweep``.

Configuration is a flat JSON object whose keys are the :class:`RunConfig`
field names; command-line flags override file values. Floats are written in
shortest round-trip form (``repr``), JSON keys are sorted and CSV uses ``,``
with ``\\n`` line endings, so identical inputs give byte-identical files.

Exit codes: 0 success, 2 configuration, 3 quadrature, 4 integrator, 5 grid.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    RadialGrid,
    anomaly_identity_residual,
    gaussian_bump,
    refinement_study,
)
from .anomaly import anomaly_closed_form_energy, evaluate_anomaly
from .boundstate import (
    PhysicalConfig,
    bound_energy,
    lambda_coupling,
    make_bound_state,
    matching_residual,
    matching_residual_truncated,
    small_cutoff_root,
)
from .dynamics import (
    DriveParams,
    EffectiveParams,
    SpinState,
    propagate_numeric,
    rabi_period_estimate,
    resonance_omega,
    rotating_frame_solution,
)
from .errors import ConfigError, DomainError, QAnomalyError

ANOMALY_SOURCES = ("closed_form", "delta_reduction")
SWEEP_AXES = ("anomaly", "b0", "theta", "cutoff")
TRAJECTORY_COLUMNS = (
    "t", "re_c1", "im_c1", "re_c2", "im_c2", "norm2", "deficit", "bloch_x", "bloch_y", "bloch_z",
)
SWEEP_COLUMNS = ("value", "status", "final_deficit", "max_deviation", "rabi_period_estimate")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    # physics
    e: float = 1.0
    g: float = 1.0
    mass: float = 1.0
    cutoff: float = 1.0
    b0: float = 200.0
    omega: float | None = None  # None: resonance 2 E cos(theta)
    theta: float = math.pi / 3
    phi: float = 0.0
    anomaly_source: str = "closed_form"
    coupling: float | None = None  # override of lambda for the anomaly report
    # numerics
    t_end: float = 0.1
    samples: int = 101
    tol: float = 1e-10
    smoothing: float | None = None  # None: 1e-3 * cutoff
    levels: int = 3
    # algebra grid
    r_min: float = 0.5
    r_max: float = 3.5
    grid_sizes: tuple = (256, 512, 1024)
    psi_center: float = 2.0
    psi_width: float = 0.17
    omega_ho: float = 1.0
    random_potentials: int = 5
    # sweep
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    workers: int = 4
    seed: int = 0

    def physical(self, cutoff: float | None = None) -> PhysicalConfig:
        return PhysicalConfig(
            e=self.e, g=self.g, m=self.mass, cutoff=self.cutoff if cutoff is None else cutoff
        )

    def effective(self) -> EffectiveParams:
        src = self.anomaly_source
        if src not in ANOMALY_SOURCES:
            src = float(src)
        return EffectiveParams.from_physics(self.physical(), self.theta, self.phi, src)

    def drive(self, p: EffectiveParams) -> DriveParams:
        w = resonance_omega(p.E, p.theta) if self.omega is None else self.omega
        return DriveParams(B0=self.b0, omega=w, e=self.e, m=self.mass)

    def validate(self) -> "RunConfig":
        try:
            self.physical()
            EffectiveParams(E=-1.0, A=0.0, theta=self.theta, phi=self.phi)
            DriveParams(B0=self.b0, omega=0.0 if self.omega is None else self.omega, e=self.e, m=self.mass)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        src = self.anomaly_source
        if src not in ANOMALY_SOURCES:
            try:
                v = float(src)
            except ValueError:
                raise ConfigError(
                    f"anomaly_source must be one of {ANOMALY_SOURCES} or a number, got {src!r}"
                ) from None
            if not math.isfinite(v):
                raise ConfigError("explicit anomaly value must be finite")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if not 1e-12 <= self.tol <= 1e-4:
            raise ConfigError("tol must lie in [1e-12, 1e-4]")
        if self.smoothing is not None and not self.smoothing > 0:
            raise ConfigError("smoothing must be positive")
        if self.levels < 1:
            raise ConfigError("levels must be at least 1")
        if len(self.grid_sizes) < 2 or any(n < 16 for n in self.grid_sizes):
            raise ConfigError("grid_sizes needs at least two sizes, each >= 16")
        if not 0 < self.r_min < self.r_max:
            raise ConfigError("need 0 < r_min < r_max")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["grid_sizes"] = list(self.grid_sizes)
        d["sweep_values"] = list(self.sweep_values)
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TUPLE_FIELDS = {"grid_sizes", "sweep_values"}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, JSON file and command-line overrides (in that order) and validate."""
    values = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(raw) - set(_FIELDS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values.update(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in _TUPLE_FIELDS & set(values):
        values[key] = tuple(values[key])
    if "anomaly_source" in values:
        values["anomaly_source"] = str(values["anomaly_source"])
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# --- serialization ---------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)


def _report(command: str, cfg: RunConfig, result: dict) -> dict:
    return {"command": command, "version": __version__, "config": cfg.as_dict(), "result": result}


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            flat[key] = ";".join(_fmt(x) for x in v)
        else:
            flat[key] = v
    return flat


# --- subcommands -----------------------------------------------------------


def bound_state_result(cfg: RunConfig) -> dict:
    pc = cfg.physical()
    state = make_bound_state(pc)
    limit = make_bound_state(pc, normalize=False)
    x = state.x
    root = small_cutoff_root(pc)
    return {
        "eg": pc.eg,
        "lambda": lambda_coupling(pc),
        "beta": state.beta,
        "beta_cutoff": x,
        "energy": state.energy,
        "energy_formula": bound_energy(pc),
        "norm_exterior": state.norm_exterior,
        "norm_interior": state.norm_interior,
        "norm_exterior_limit": limit.norm_exterior,
        "norm_interior_limit": limit.norm_interior,
        "normalization": state.normalization,
        "norm_quadrature_error": state.norm_error,
        "continuity_jump": abs(state.interior(pc.cutoff) - state.exterior(pc.cutoff)),
        "matching": {
            "small_cutoff_root": root,
            "truncated_residual_at_root": float(matching_residual_truncated(root, pc)),
            "residual_at_root": float(matching_residual(root, pc)),
            "residual_at_beta_cutoff": float(matching_residual(x, pc)),
            "residual_at_zero": float(matching_residual(0.0, pc)),
        },
    }


def anomaly_result(cfg: RunConfig) -> dict:
    pc = cfg.physical()
    state = make_bound_state(pc)
    res = evaluate_anomaly(state, lam=cfg.coupling, smoothing=cfg.smoothing, levels=cfg.levels)
    out = res.as_dict()
    lam = res.lam
    # same closed form written through the bound energy; only meaningful for the physical coupling
    out["closed_form_energy_form"] = (
        anomaly_closed_form_energy(pc, state.energy) if cfg.coupling is None else 2.0 * lam * state.beta**2
    )
    out["coupling_source"] = "physical" if cfg.coupling is None else "override"
    return out


def evolve_run(cfg: RunConfig):
    """Numeric and closed-form trajectories (both in the rotating frame) and their summary."""
    p = cfg.effective()
    d = cfg.drive(p)
    psi0 = SpinState.up()
    lab = propagate_numeric(psi0, p, d, cfg.t_end, tol=cfg.tol, samples=cfg.samples)
    num = lab.in_rotating_frame(d.omega)
    c1, c2 = rotating_frame_solution(psi0, p, d, num.t)
    closed = dataclasses.replace(num, c1=c1, c2=c2, metadata={"method": "closed_form", "frame": "rotating"})
    dev = float(max(np.max(np.abs(num.c1 - closed.c1)), np.max(np.abs(num.c2 - closed.c2))))
    summary = {
        "E": p.E,
        "A": p.A,
        "Omega": d.Omega,
        "omega": d.omega,
        "frame": "rotating",
        "samples": len(num),
        "max_deviation": dev,
        "final_deficit": float(num.deficit[-1]),
        "final_deficit_closed_form": float(closed.deficit[-1]),
        "max_norm_dev_numeric": float(np.max(np.abs(num.norm2 - 1.0))),
        "max_norm_dev_closed_form": float(np.max(np.abs(closed.norm2 - 1.0))),
        "rabi_period_estimate": rabi_period_estimate(p, d),
        "steps": lab.metadata["steps"],
        "rejected": lab.metadata["rejected"],
        "approximation_ratio": abs(p.complex_energy) / d.Omega if d.Omega > 0 else math.inf,
    }
    return num, closed, summary


def _trajectory_csv(tr) -> str:
    cols = tr.columns()
    rows = zip(*(cols[c] for c in TRAJECTORY_COLUMNS))
    return dumps_csv(TRAJECTORY_COLUMNS, rows)


def cmd_bound_state(cfg: RunConfig, fmt: str, out: str | None) -> None:
    result = bound_state_result(cfg)
    if fmt == "csv":
        flat = _flatten(result)
        _emit(dumps_csv(list(flat), [list(flat.values())]), out)
    else:
        _emit(dumps_json(_report("bound-state", cfg, result)), out)


def cmd_anomaly(cfg: RunConfig, fmt: str, out: str | None) -> None:
    result = anomaly_result(cfg)
    if fmt == "csv":
        flat = _flatten(result)
        _emit(dumps_csv(list(flat), [list(flat.values())]), out)
    else:
        _emit(dumps_json(_report("anomaly", cfg, result)), out)


def cmd_evolve(cfg: RunConfig, fmt: str, out: str | None) -> None:
    """Writes ``numeric.csv``, ``closed_form.csv`` and ``summary.json`` into directory ``out``."""
    num, closed, summary = evolve_run(cfg)
    outdir = Path(out if out is not None else "evolve_out")
    outdir.mkdir(parents=True, exist_ok=True)
    _emit(_trajectory_csv(num), str(outdir / "numeric.csv"))
    _emit(_trajectory_csv(closed), str(outdir / "closed_form.csv"))
    _emit(dumps_json(_report("evolve", cfg, summary)), str(outdir / "summary.json"))


def _random_potential(rng):
    """Polynomial times Gaussian, with its derivative."""
    coef = rng.normal(size=3)
    c = rng.uniform(1.5, 2.5)
    s = rng.uniform(0.5, 1.5)

    def V(r):
        x = r - c
        return (coef[0] + coef[1] * x + coef[2] * x * x) * np.exp(-x * x / (2 * s * s))

    def dV(r):
        x = r - c
        poly = coef[0] + coef[1] * x + coef[2] * x * x
        return (coef[1] + 2 * coef[2] * x - poly * x / (s * s)) * np.exp(-x * x / (2 * s * s))

    return V, dV, {"coefficients": coef.tolist(), "center": c, "width": s}


def algebra_result(cfg: RunConfig) -> dict:
    psi = gaussian_bump(cfg.psi_center, cfg.psi_width)
    lam = cfg.coupling if cfg.coupling is not None else lambda_coupling(cfg.physical())
    study = refinement_study(
        cfg.r_min, cfg.r_max, cfg.grid_sizes, m=cfg.mass, lam=lam, omega=cfg.omega_ho, psi=psi
    )
    rng = np.random.default_rng(cfg.seed)
    grids = [RadialGrid(cfg.r_min, cfg.r_max, n) for n in cfg.grid_sizes]
    h = [g.spacing for g in grids]
    randoms = []
    for _ in range(cfg.random_potentials):
        V, dV, desc = _random_potential(rng)
        res = [anomaly_identity_residual(g, cfg.mass, V, dV, psi) for g in grids]
        desc["residuals"] = res
        desc["fitted_order"] = float(np.polyfit(np.log(h), np.log(res), 1)[0])
        randoms.append(desc)
    study["random_potentials"] = randoms
    study["coupling"] = lam
    return study


def cmd_algebra_check(cfg: RunConfig, fmt: str, out: str | None) -> None:
    result = algebra_result(cfg)
    if fmt == "csv":
        rows = []
        for name, entry in result["potentials"].items():
            for ident, data in entry.items():
                for n, hh, r in zip(result["sizes"], result["spacings"], data["residuals"]):
                    rows.append([name, ident, n, hh, r, data["fitted_order"]])
        for k, desc in enumerate(result["random_potentials"]):
            for n, hh, r in zip(result["sizes"], result["spacings"], desc["residuals"]):
                rows.append([f"random_{k}", "anomaly_identity", n, hh, r, desc["fitted_order"]])
        _emit(dumps_csv(["potential", "identity", "n", "h", "residual", "fitted_order"], rows), out)
    else:
        _emit(dumps_json(_report("algebra-check", cfg, result)), out)


def _sweep_point(cfg: RunConfig, axis: str, value: float) -> list:
    try:
        if axis == "anomaly":
            point = dataclasses.replace(cfg, anomaly_source=repr(float(value)))
        else:
            point = dataclasses.replace(cfg, **{axis: float(value)})
        point.validate()
        _, _, s = evolve_run(point)
        return [value, "ok", s["final_deficit"], s["max_deviation"], s["rabi_period_estimate"]]
    except QAnomalyError as exc:
        print(f"qanomaly sweep: {axis} = {value!r}: {exc}", file=sys.stderr)
        return [value, f"error({exc.exit_code})", math.nan, math.nan, math.nan]


def sweep_rows(cfg: RunConfig) -> list:
    if cfg.sweep_axis is None:
        raise ConfigError("sweep needs sweep_axis")
    if len(cfg.sweep_values) < 1:
        raise ConfigError("sweep needs at least one sweep value")
    values = sorted(float(v) for v in cfg.sweep_values)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        rows = list(pool.map(lambda v: _sweep_point(cfg, cfg.sweep_axis, v), values))
    return rows


def cmd_sweep(cfg: RunConfig, fmt: str, out: str | None) -> None:
    rows = sweep_rows(cfg)
    if fmt == "json":
        result = {"axis": cfg.sweep_axis, "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows]}
        _emit(dumps_json(_report("sweep", cfg, result)), out)
    else:
        _emit(dumps_csv(SWEEP_COLUMNS, rows), out)


COMMANDS = {
    "bound-state": (cmd_bound_state, "json"),
    "anomaly": (cmd_anomaly, "json"),
    "evolve": (cmd_evolve, "csv"),
    "algebra-check": (cmd_algebra_check, "json"),
    "sweep": (cmd_sweep, "csv"),
}


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flat RunConfig keys)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", help="output file (directory for evolve)")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    phys = common.add_argument_group("physics")
    phys.add_argument("--e", type=float)
    phys.add_argument("--g", type=float)
    phys.add_argument("--mass", type=float)
    phys.add_argument("--cutoff", type=float)
    phys.add_argument("--b0", type=float)
    phys.add_argument("--omega", type=float, help="drive frequency (default: resonance)")
    phys.add_argument("--theta", type=float)
    phys.add_argument("--phi", type=float)
    phys.add_argument("--anomaly-source", dest="anomaly_source",
                      help="closed_form | delta_reduction | <number>")
    phys.add_argument("--coupling", type=float, help="override the -lambda/r^2 strength")
    phys.add_argument("--t-end", dest="t_end", type=float)
    phys.add_argument("--samples", type=int)
    phys.add_argument("--smoothing", type=float)
    num = common.add_argument_group("numerics")
    num.add_argument("--levels", type=int, help="Richardson levels for the anomaly quadrature")
    num.add_argument("--r-min", dest="r_min", type=float)
    num.add_argument("--r-max", dest="r_max", type=float)
    num.add_argument("--grid-sizes", dest="grid_sizes", type=_int_list)
    num.add_argument("--psi-center", dest="psi_center", type=float)
    num.add_argument("--psi-width", dest="psi_width", type=float)
    num.add_argument("--omega-ho", dest="omega_ho", type=float)
    num.add_argument("--random-potentials", dest="random_potentials", type=int)
    sw = common.add_argument_group("sweep")
    sw.add_argument("--sweep-axis", dest="sweep_axis", choices=SWEEP_AXES)
    sw.add_argument("--sweep-values", dest="sweep_values", type=_float_list)
    sw.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(
        prog="qanomaly",
        description="Anomaly-induced decoherence of the electron-monopole bound-state qubit.",
    )
    parser.add_argument("--version", action="version", version=f"qanomaly {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_NON_CONFIG = {"command", "config", "format", "out"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func, default_fmt = COMMANDS[args.command]
    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    try:
        cfg = load_config(args.config, overrides)
        func(cfg, args.format or default_fmt, args.out)
    except QAnomalyError as exc:
        print(f"qanomaly {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
