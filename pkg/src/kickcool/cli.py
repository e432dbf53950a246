"""Command-line driver: config-file experiments with deterministic CSVs.

Configs are flat ``key = value`` text with ``#`` comments. Every physical
key carries its unit as a suffix (``t_f_ms``, ``gradient_G_per_cm``);
values are converted to SI exactly once, at this boundary. Identical
config+seed produces byte-identical outputs regardless of ``--threads``.

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, constants, protocols, tof
from .constants import CONSTANTS, RB85
from .ensemble import ThermalSpec
from .fields import (FieldConfiguration, IdealHarmonic, IdealQuadrupole,
                     reference_coil)
from .quantum import (Absorber, Grid1D, PotentialSpec, sweep_transfer,
                      transfer_vs_depth, tunneling_decay)

KB = CONSTANTS.k_boltzmann


@dataclass(frozen=True)
class Key:
    """One config key: type, default (in config units), SI factor, bounds."""

    name: str
    kind: str                 # float | int | bool | choice | float_list
    default: object
    si_factor: float = 1.0
    positive: bool = False
    nonnegative: bool = False
    choices: tuple = ()
    help: str = ""


def _k(name, default, si=1.0, **kw):
    return Key(name=name, kind="float", default=default, si_factor=si, **kw)


_COMMON_MC = [
    Key("n_atoms", "int", 100_000, positive=True),
    _k("temperature_uK", 7.5, constants.UK, positive=True),
    _k("r0_mm", 0.25, constants.MM, positive=True),
    _k("t_f_ms", 11.0, constants.MS, positive=True),
    _k("t_k_ms", 3.0, constants.MS, positive=True),
    Key("gravity", "bool", True),
    Key("post_delays_ms", "float_list", (1.0, 5.0, 9.0, 13.0, 17.0, 20.0),
        si_factor=constants.MS),
]

_QM_TRAP = [
    _k("slope_uK_per_cm", 300.0, KB * constants.UK / 1e-2, positive=True),
    _k("waist_um", 10.0, constants.UM, positive=True),
]

REGISTRY = {
    "kick": _COMMON_MC + [
        _k("kick_dv_cm_per_s", 6.5, constants.CM_PER_S, nonnegative=True),
        Key("field", "choice", "quadrupole",
            choices=("quadrupole", "harmonic")),
        _k("harmonic_curvature_G_per_cm2", 60.0, constants.G_PER_CM2,
           positive=True),
    ],
    "scan-strength": _COMMON_MC + [
        _k("dv_min_cm_per_s", 1.0, constants.CM_PER_S, positive=True),
        _k("dv_max_cm_per_s", 9.0, constants.CM_PER_S, positive=True),
        Key("dv_points", "int", 13, positive=True),
    ],
    "scan-expansion": _COMMON_MC + [
        Key("t_f_list_ms", "float_list", (5.0, 10.0, 15.0, 20.0),
            si_factor=constants.MS),
    ],
    "multispin": [
        Key("n_atoms", "int", 70_000, positive=True),
        _k("temperature_uK", 6.0, constants.UK, positive=True),
        _k("r0_mm", 0.1, constants.MM, positive=True),
        _k("t_f_ms", 11.0, constants.MS, positive=True),
        _k("t_k_ms", 1.0, constants.MS, positive=True),
        _k("impulse_factor", 1.0, 1.0, positive=True),
        _k("spin_position_correlation", 0.0),
        _k("profile_delay_ms", 25.0, constants.MS, positive=True),
        Key("post_delays_ms", "float_list", (1.0, 6.0, 11.0, 16.0, 20.0),
            si_factor=constants.MS),
    ],
    "coil-field": [
        _k("current_A", 18.0, 1.0, positive=True),
        Key("polarity", "choice", "opposed", choices=("opposed", "aligned")),
        _k("z_min_cm", -2.0, 1e-2),
        _k("z_max_cm", 2.0, 1e-2),
        Key("z_points", "int", 81, positive=True),
    ],
    "qm-sweep": _QM_TRAP + [
        _k("temperature_uK", 1.3, constants.UK, positive=True),
        _k("barrier_nK", 600.0, KB * constants.NK, nonnegative=True),
        _k("sweep_start_um", -100.0, constants.UM),
        _k("sweep_stop_um", 400.0, constants.UM),
        _k("speed_mm_per_s", 0.5, constants.MM_PER_S, positive=True),
        _k("grid_halfwidth_um", 400.0, constants.UM, positive=True),
        Key("grid_points", "int", 8192, positive=True),
        _k("dt_us", 4.0, constants.US, positive=True),
        _k("basis_cutoff_kT", 0.5, 1.0, positive=True),
        Key("batch_size", "int", 96, positive=True),
    ],
    "qm-depth-scan": _QM_TRAP + [
        _k("temperature_uK", 1.3, constants.UK, positive=True),
        Key("depths_nK", "float_list",
            (0.0, 150.0, 250.0, 300.0, 400.0, 500.0, 600.0),
            si_factor=KB * constants.NK),
        _k("sweep_start_um", -100.0, constants.UM),
        _k("sweep_stop_um", 400.0, constants.UM),
        _k("speed_mm_per_s", 0.5, constants.MM_PER_S, positive=True),
        _k("grid_halfwidth_um", 400.0, constants.UM, positive=True),
        Key("grid_points", "int", 8192, positive=True),
        _k("dt_us", 4.0, constants.US, positive=True),
        _k("basis_cutoff_kT", 0.35, 1.0, positive=True),
        Key("batch_size", "int", 96, positive=True),
    ],
    "qm-decay": _QM_TRAP + [
        _k("barrier_nK", 267.0, KB * constants.NK, positive=True),
        _k("center_um", 80.0, constants.UM),
        _k("grid_min_um", -110.0, constants.UM),
        _k("grid_max_um", 170.0, constants.UM),
        Key("grid_points", "int", 4096, positive=True),
        _k("dt_us", 1.8, constants.US, positive=True),
        _k("horizon_ms", 500.0, constants.MS, positive=True),
        _k("absorber_fraction", 0.13, 1.0, positive=True),
        _k("absorber_rate_per_s", 2e4, 1.0, positive=True),
        _k("doubled_waist_factor", 1.0, 1.0, positive=True),
    ],
}

EXPERIMENT_KINDS = tuple(REGISTRY.keys())


@dataclass(frozen=True)
class ConfigError:
    line: int
    key: str
    message: str

    def __str__(self):
        where = f"line {self.line}" if self.line else "config"
        return f"{where}: {self.key}: {self.message}"


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment description.

    ``params`` holds values in the config file's units (so serialization
    round-trips exactly); ``params_si()`` applies the per-key factors.
    """

    kind: str
    params: dict
    seed: int = 0
    out_dir: str = "."

    def params_si(self) -> dict:
        out = {}
        for key in REGISTRY[self.kind]:
            value = self.params[key.name]
            if key.kind == "float":
                out[key.name] = float(value) * key.si_factor
            elif key.kind == "float_list":
                out[key.name] = tuple(float(v) * key.si_factor
                                      for v in value)
            else:
                out[key.name] = value
        return out

    def serialize(self) -> str:
        lines = [f"experiment = {self.kind}", f"seed = {self.seed}"]
        for key in REGISTRY[self.kind]:
            value = self.params[key.name]
            if key.kind == "float_list":
                text = ",".join(repr(float(v)) for v in value)
            elif key.kind == "bool":
                text = "on" if value else "off"
            elif key.kind == "float":
                text = repr(float(value))
            else:
                text = str(value)
            lines.append(f"{key.name} = {text}")
        return "\n".join(lines) + "\n"


def _coerce(key: Key, raw: str, line: int, errors: list):
    try:
        if key.kind == "float":
            value = float(raw)
        elif key.kind == "int":
            value = int(raw)
        elif key.kind == "bool":
            lowered = raw.strip().lower()
            if lowered in ("on", "true", "1", "yes"):
                return True
            if lowered in ("off", "false", "0", "no"):
                return False
            raise ValueError("expected on/off")
        elif key.kind == "choice":
            value = raw.strip()
            if value not in key.choices:
                raise ValueError(f"must be one of {', '.join(key.choices)}")
        elif key.kind == "float_list":
            value = tuple(float(v) for v in raw.split(","))
            if not value:
                raise ValueError("empty list")
        else:  # pragma: no cover - registry bug
            raise ValueError("unknown key kind")
    except ValueError as exc:
        errors.append(ConfigError(line, key.name, str(exc)))
        return None
    if key.kind in ("float", "int"):
        if key.positive and value <= 0:
            errors.append(ConfigError(line, key.name, "must be positive"))
        if key.nonnegative and value < 0:
            errors.append(ConfigError(line, key.name, "must be >= 0"))
    if key.kind == "float_list":
        if any(v < 0 for v in value) and key.name != "depths_nK":
            pass  # delays validated by the experiments themselves
    return value


def _suggest(name: str, known) -> str:
    stem = name.split("_")[0]
    hits = [k for k in known if k.split("_")[0] == stem]
    if hits:
        return f"unknown key (unit mismatch? did you mean {hits[0]})"
    return "unknown key"


def parse_config(text: str, kind: str | None = None):
    """Parse a flat key=value config; returns (RunConfig|None, [errors]).

    All problems are reported, not just the first. ``kind`` fixes the
    experiment (the subcommand); an ``experiment`` line must match it.
    """
    errors: list[ConfigError] = []
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        code = line.split("#", 1)[0].strip()
        if not code:
            continue
        if "=" not in code:
            errors.append(ConfigError(lineno, code.split()[0],
                                      "expected key = value"))
            continue
        name, value = (part.strip() for part in code.split("=", 1))
        if name in raw:
            errors.append(ConfigError(lineno, name, "duplicate key"))
            continue
        raw[name] = (value, lineno)

    declared = raw.pop("experiment", None)
    if declared is not None:
        if declared[0] not in EXPERIMENT_KINDS:
            errors.append(ConfigError(declared[1], "experiment",
                                      f"unknown kind {declared[0]!r}"))
        elif kind is not None and declared[0] != kind:
            errors.append(ConfigError(declared[1], "experiment",
                                      f"config is for {declared[0]!r}, "
                                      f"invoked as {kind!r}"))
        elif kind is None:
            kind = declared[0]
    if kind is None:
        errors.append(ConfigError(0, "experiment", "experiment kind missing"))
        return None, errors
    if kind not in EXPERIMENT_KINDS:
        errors.append(ConfigError(0, "experiment", f"unknown kind {kind!r}"))
        return None, errors

    seed = 0
    if "seed" in raw:
        value, lineno = raw.pop("seed")
        try:
            seed = int(value)
            if seed < 0:
                raise ValueError
        except ValueError:
            errors.append(ConfigError(lineno, "seed",
                                      "must be a nonnegative integer"))

    registry = {key.name: key for key in REGISTRY[kind]}
    params = {}
    for name, (value, lineno) in raw.items():
        if name not in registry:
            errors.append(ConfigError(lineno, name,
                                      _suggest(name, registry)))
            continue
        coerced = _coerce(registry[name], value, lineno, errors)
        if coerced is not None:
            params[name] = coerced
    for key in REGISTRY[kind]:
        params.setdefault(key.name, key.default)

    if errors:
        return None, errors
    return RunConfig(kind=kind, params=params, seed=seed), []


# --- experiment runners ---------------------------------------------------------

def _write_manifest(config: RunConfig, out_dir: str):
    canonical = config.serialize()
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    import scipy
    with open(os.path.join(out_dir, "manifest.txt"), "w") as f:
        f.write(f"experiment = {config.kind}\n")
        f.write(f"config_sha256 = {digest}\n")
        f.write(f"seed = {config.seed}\n")
        f.write(f"kickcool_version = {__version__}\n")
        f.write(f"numpy_version = {np.__version__}\n")
        f.write(f"scipy_version = {scipy.__version__}\n")
        f.write(f"python_version = {sys.version.split()[0]}\n")


def _spec_and_schedule(p, field_config):
    spec = ThermalSpec(temperature=(p["temperature_uK"],) * 3,
                       rms_radius=(p["r0_mm"],) * 3,
                       spin_populations={3: 1.0})
    schedule = protocols.KickSchedule(
        expansion_time=p["t_f_ms"], kick_duration=p["t_k_ms"],
        field=field_config, post_expansion_times=p["post_delays_ms"])
    return spec, schedule


def _result_csv(result, path):
    with open(path, "w") as f:
        f.write("axis,T_before,T_after,ratio,sigma_before,sigma_after,"
                "fit_T,fit_err\n")
        for axis, label in enumerate("xyz"):
            row = [result.temperatures_before[axis],
                   result.temperatures_after[axis],
                   result.cooling_ratio[axis],
                   result.sizes_before[axis], result.sizes_after[axis],
                   result.fit.temperature, result.fit.temperature_error]
            f.write(label + "," + ",".join(repr(float(v)) for v in row)
                    + "\n")


def _run_kick(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    if p["field"] == "quadrupole":
        gradient = protocols.delta_v_to_gradient(p["kick_dv_cm_per_s"],
                                                 p["t_k_ms"])
        field_config = FieldConfiguration((IdealQuadrupole(gradient),))
    else:
        field_config = FieldConfiguration(
            (IdealHarmonic(p["harmonic_curvature_G_per_cm2"]),))
    spec, schedule = _spec_and_schedule(p, field_config)
    result = protocols.run_kick_experiment(spec, schedule, p["gravity"],
                                           p["n_atoms"], config.seed)
    _result_csv(result, os.path.join(out_dir, "result.csv"))
    result.expansion_curve.to_csv(os.path.join(out_dir, "expansion.csv"))


def _run_scan_strength(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    template = protocols.KickSchedule(
        expansion_time=p["t_f_ms"], kick_duration=p["t_k_ms"],
        field=FieldConfiguration((IdealQuadrupole(1.0),)),
        post_expansion_times=p["post_delays_ms"])
    spec = ThermalSpec(temperature=(p["temperature_uK"],) * 3,
                       rms_radius=(p["r0_mm"],) * 3,
                       spin_populations={3: 1.0})
    strengths = np.linspace(p["dv_min_cm_per_s"], p["dv_max_cm_per_s"],
                            p["dv_points"])
    scan = protocols.scan_kick_strength(spec, template, strengths,
                                        p["gravity"], p["n_atoms"],
                                        config.seed)
    scan.to_csv(os.path.join(out_dir, "scan.csv"))


def _run_scan_expansion(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    template = protocols.KickSchedule(
        expansion_time=1e-3, kick_duration=p["t_k_ms"],
        field=FieldConfiguration((IdealQuadrupole(1.0),)),
        post_expansion_times=p["post_delays_ms"])
    spec = ThermalSpec(temperature=(p["temperature_uK"],) * 3,
                       rms_radius=(p["r0_mm"],) * 3,
                       spin_populations={3: 1.0})
    scan = protocols.scan_expansion_ratio(spec, p["t_f_list_ms"], template,
                                          p["gravity"], p["n_atoms"],
                                          config.seed)
    scan.to_csv(os.path.join(out_dir, "scan.csv"))


def _run_multispin(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    omega_sq = p["impulse_factor"] / (p["t_k_ms"] * p["t_f_ms"])
    curvature = omega_sq * RB85.mass / CONSTANTS.bohr_magneton
    schedule = protocols.KickSchedule(
        expansion_time=p["t_f_ms"], kick_duration=p["t_k_ms"],
        field=FieldConfiguration((IdealHarmonic(curvature),)),
        post_expansion_times=p["post_delays_ms"])
    spec = ThermalSpec(temperature=(p["temperature_uK"],) * 3,
                       rms_radius=(p["r0_mm"],) * 3,
                       spin_populations={m: 1.0 for m in range(-3, 4)},
                       spin_position_correlation=p[
                           "spin_position_correlation"])
    result = protocols.molasses_multispin_experiment(
        spec, schedule, p["n_atoms"], config.seed,
        profile_delay=p["profile_delay_ms"])
    with open(os.path.join(out_dir, "per_spin.csv"), "w") as f:
        f.write("mF,T_before,T_after,ratio\n")
        for m in sorted(result.per_spin):
            r = result.per_spin[m]
            row = [r.temperatures_before[2], r.temperatures_after[2],
                   r.cooling_ratio[2]]
            f.write(f"{m}," + ",".join(repr(float(v)) for v in row) + "\n")
    with open(os.path.join(out_dir, "profile.csv"), "w") as f:
        f.write("x,count\n")
        for x, c in zip(result.profile_positions, result.profile_counts):
            f.write(f"{float(x)!r},{float(c)!r}\n")
    b = result.bimodal
    with open(os.path.join(out_dir, "bimodal.csv"), "w") as f:
        f.write("narrow_weight,narrow_width,broad_weight,broad_width,"
                "center,residual,unimodal\n")
        f.write(",".join(repr(float(v)) for v in
                         [b.narrow_weight, b.narrow_width, b.broad_weight,
                          b.broad_width, b.center, b.residual_norm])
                + f",{int(b.unimodal)}\n")


def _run_coil_field(config: RunConfig, out_dir: str, threads: int):
    from .fields import axial_curvature, axial_gradient, on_axis_field
    p = config.params_si()
    pair = reference_coil(current=p["current_A"], polarity=p["polarity"])
    field_config = FieldConfiguration((pair,))
    z = np.linspace(p["z_min_cm"], p["z_max_cm"], p["z_points"])
    b = on_axis_field(pair, z)
    grad = axial_gradient(field_config, z)
    curv = axial_curvature(field_config, z)
    with open(os.path.join(out_dir, "field.csv"), "w") as f:
        f.write("z,B,gradient,curvature\n")
        for row in zip(z, b, grad, curv):
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def _sweep_inputs(p):
    spec = PotentialSpec.linear_sweep(
        p["slope_uK_per_cm"], p.get("barrier_nK", 0.0), p["waist_um"],
        p["sweep_start_um"], p["sweep_stop_um"], p["speed_mm_per_s"])
    grid = Grid1D(-p["grid_halfwidth_um"], p["grid_halfwidth_um"],
                  p["grid_points"])
    cutoff = p["basis_cutoff_kT"] * KB * p["temperature_uK"]
    return spec, grid, cutoff


def _run_qm_sweep(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    spec, grid, cutoff = _sweep_inputs(p)
    result = sweep_transfer(p["temperature_uK"], spec, grid, p["dt_us"],
                            basis_energy_cutoff=cutoff,
                            batch_size=p["batch_size"], workers=threads)
    with open(os.path.join(out_dir, "transfer.csv"), "w") as f:
        f.write("transfer,classical_estimate,qb_energy_nK,well_depth_nK,"
                "bound_states,tracked_weight\n")
        f.write(",".join(repr(float(v)) for v in
                         [result.transfer, result.classical_estimate,
                          result.quasi_bound_energy / KB * 1e9,
                          result.well_depth / KB * 1e9])
                + f",{result.bound_state_count},"
                + repr(float(result.tracked_weight)) + "\n")
    result.series_to_csv(os.path.join(out_dir, "series.csv"))


def _run_qm_depth_scan(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    base = dict(p)
    base["barrier_nK"] = max(d for d in p["depths_nK"]) or KB * 1e-9
    spec, grid, cutoff = _sweep_inputs(base)
    scan = transfer_vs_depth(p["depths_nK"], p["temperature_uK"], spec,
                             grid, p["dt_us"], basis_energy_cutoff=cutoff,
                             batch_size=p["batch_size"], workers=threads)
    scan.to_csv(os.path.join(out_dir, "transfer_vs_depth.csv"))


def _run_qm_decay(config: RunConfig, out_dir: str, threads: int):
    p = config.params_si()
    waist = p["waist_um"] * p["doubled_waist_factor"]
    height = p["barrier_nK"] * p["doubled_waist_factor"]
    spec = PotentialSpec.static(p["slope_uK_per_cm"], height, waist,
                                p["center_um"])
    grid = Grid1D(p["grid_min_um"], p["grid_max_um"], p["grid_points"])
    absorber = Absorber(width_fraction=p["absorber_fraction"],
                        rate=p["absorber_rate_per_s"])
    result = tunneling_decay(spec, grid, p["dt_us"], p["horizon_ms"],
                             absorber=absorber, workers=threads)
    result.to_csv(os.path.join(out_dir, "decay.csv"))
    with open(os.path.join(out_dir, "summary.csv"), "w") as f:
        f.write("rate,per_period_loss,tau_sec,one_over_e,qb_energy_nK\n")
        f.write(",".join(repr(float(v)) for v in
                         [result.rate, result.per_period_loss,
                          result.secular_period, result.one_over_e_time,
                          result.quasi_bound_energy / KB * 1e9]) + "\n")


_RUNNERS = {
    "kick": _run_kick,
    "scan-strength": _run_scan_strength,
    "scan-expansion": _run_scan_expansion,
    "multispin": _run_multispin,
    "coil-field": _run_coil_field,
    "qm-sweep": _run_qm_sweep,
    "qm-depth-scan": _run_qm_depth_scan,
    "qm-decay": _run_qm_decay,
}


def run(config: RunConfig, threads: int | None = None) -> int:
    """Execute one experiment; returns the process exit status."""
    if threads is None:
        threads = os.cpu_count() or 1
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    try:
        _RUNNERS[config.kind](config, out_dir, threads)
        _write_manifest(config, out_dir)
    except Exception as exc:  # runtime error contract: record and exit 3
        with open(os.path.join(out_dir, "error.txt"), "w") as f:
            f.write(f"experiment = {config.kind}\n")
            f.write(f"error_type = {type(exc).__name__}\n")
            f.write(f"error = {exc}\n")
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kickcool",
        description="Pulsed-field cooling and tunneling simulations")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        s = sub.add_parser(kind)
        s.add_argument("--config", default=None,
                       help="config file (defaults apply when omitted)")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--out", default=".")
        s.add_argument("--threads", type=int, default=None,
                       help="worker threads (results are unaffected)")
    args = parser.parse_args(argv)

    text = ""
    if args.config is not None:
        try:
            with open(args.config) as f:
                text = f.read()
        except OSError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    config, errors = parse_config(text, kind=args.kind)
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = RunConfig(kind=config.kind, params=config.params,
                           seed=args.seed, out_dir=args.out)
    else:
        config = RunConfig(kind=config.kind, params=config.params,
                           seed=config.seed, out_dir=args.out)
    return run(config, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
