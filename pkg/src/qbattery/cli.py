"""Command-line front end.

Configs are plain INI text (key = value, '#' comments, [section] headers)
with sections [model], [grid], [propagator], and [run]; every key is also
exposed as a --section-key flag that overrides the file. One experiment
runs per invocation and writes two files into the output directory: a CSV
with an explicit header and a manifest echoing the fully resolved config,
which is itself a valid config reproducing the run bit for bit.

Exit codes: 0 success, 1 validation error, 2 runtime error,
3 propagator non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

from . import experiments, kernels
from ._version import __version__
from .errors import ConvergenceError, QBatteryError, ValidationError
from .model import ModelParams
from .propagate import PropagatorConfig, TimeGrid

EXPERIMENTS = ("trace", "sweep-n", "sweep-split", "convergence", "sensitivity-a", "oracle-check")

_FMT = ".17g"  # fixed decimal rendering so outputs are byte-stable


def _parse_int(s: str) -> int:
    return int(s)


def _parse_float(s: str) -> float:
    return float(s)


def _parse_str(s: str) -> str:
    return s.strip()


def _parse_int_list(s: str) -> list[int]:
    return [int(tok) for tok in s.replace(",", " ").split()]


def _parse_float_list(s: str) -> list[float]:
    return [float(tok) for tok in s.replace(",", " ").split()]


def _parse_optional_float(s: str):
    return None if s.strip().lower() == "none" else float(s)


# section -> key -> (parser, default); _REQUIRED means no default
_REQUIRED = object()

SCHEMA: dict[str, dict[str, tuple]] = {
    "model": {
        "n_a": (_parse_int, _REQUIRED),
        "n_b": (_parse_int, _REQUIRED),
        "omega_q": (_parse_float, 1.0),
        "omega_a": (_parse_float, 1.0),
        "omega_b": (_parse_float, 1.0),
        "g": (_parse_float, 0.5),
        "g1": (_parse_float, 0.5),
        "g2": (_parse_float, 0.5),
        "exchange": (_parse_float, 0.5),
        "n_ph": (_parse_int, 30),
    },
    "grid": {
        "t_max": (_parse_float, 50.0),
        "dt": (_parse_float, 0.05),
    },
    "propagator": {
        "method": (_parse_str, "krylov"),
        "krylov_dim": (_parse_int, 30),
        "tol": (_parse_float, 1e-9),
        "max_step": (_parse_optional_float, None),
    },
    "run": {
        "experiment": (_parse_str, _REQUIRED),
        "output": (_parse_str, "out"),
        "workers": (_parse_int, 1),
        "n_list": (_parse_int_list, None),
        "split": (_parse_str, None),
        "n_total": (_parse_int, None),
        "cutoffs": (_parse_int_list, None),
        "exchange_list": (_parse_float_list, None),
    },
}

# experiment -> the [run] keys it consumes beyond experiment/output/workers
_EXPERIMENT_KEYS = {
    "trace": set(),
    "sweep-n": {"n_list", "split"},
    "sweep-split": {"n_total"},
    "convergence": {"cutoffs"},
    "sensitivity-a": {"exchange_list"},
    "oracle-check": set(),
}

# experiments that sweep n_a/n_b themselves; the model atom counts are
# placeholders there and may be omitted
_SWEEPS_ATOMS = {"sweep-n", "sweep-split"}


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    grid: TimeGrid
    propagator: PropagatorConfig
    experiment: str
    output: Path
    workers: int
    n_list: list[int] | None = None
    split: str | None = None
    n_total: int | None = None
    cutoffs: list[int] | None = None
    exchange_list: list[float] | None = None


def parse_config(text: str, overrides: dict[tuple[str, str], str] | None = None) -> RunConfig:
    """Parse and fully validate a config; overrides are (section, key) -> raw value."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config parse error: {exc}") from None

    raw: dict[tuple[str, str], str] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ValidationError(f"unknown section [{section}]")
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                raise ValidationError(f"unknown key '{key}' in [{section}]")
            raw[(section, key)] = value
    for (section, key), value in (overrides or {}).items():
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ValidationError(f"unknown key '{key}' in [{section}]")
        raw[(section, key)] = value

    values: dict[tuple[str, str], object] = {}
    for section, keys in SCHEMA.items():
        for key, (parser, default) in keys.items():
            if (section, key) in raw:
                try:
                    values[(section, key)] = parser(raw[(section, key)])
                except (ValueError, TypeError):
                    raise ValidationError(
                        f"invalid value {raw[(section, key)]!r} for {section}.{key}"
                    ) from None
            else:
                values[(section, key)] = default

    experiment = values[("run", "experiment")]
    if experiment is _REQUIRED:
        raise ValidationError("missing required key run.experiment")
    if experiment not in EXPERIMENTS:
        raise ValidationError(
            f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )

    # atom counts: required unless the experiment sweeps them itself
    for key in ("n_a", "n_b"):
        if values[("model", key)] is _REQUIRED:
            if experiment in _SWEEPS_ATOMS:
                values[("model", key)] = 2  # placeholder, replaced per sweep row
            else:
                raise ValidationError(f"missing required key model.{key}")

    params = ModelParams(**{k: values[("model", k)] for k in SCHEMA["model"]})
    grid = TimeGrid(t_max=values[("grid", "t_max")], dt=values[("grid", "dt")])
    propagator = PropagatorConfig(**{k: values[("propagator", k)] for k in SCHEMA["propagator"]})

    workers = values[("run", "workers")]
    if workers < 1:
        raise ValidationError(f"run.workers must be >= 1, got {workers}")

    allowed = _EXPERIMENT_KEYS[experiment]
    for key in ("n_list", "split", "n_total", "cutoffs", "exchange_list"):
        if values[("run", key)] is not None and key not in allowed:
            raise ValidationError(
                f"run.{key} conflicts with experiment {experiment!r}"
            )
    if experiment == "sweep-n":
        if not values[("run", "n_list")]:
            raise ValidationError("experiment sweep-n requires run.n_list")
        if values[("run", "split")] is None:
            values[("run", "split")] = "symmetric"
    if experiment == "sweep-split" and values[("run", "n_total")] is None:
        raise ValidationError("experiment sweep-split requires run.n_total")
    if experiment == "convergence" and not values[("run", "cutoffs")]:
        raise ValidationError("experiment convergence requires run.cutoffs")
    if experiment == "sensitivity-a" and not values[("run", "exchange_list")]:
        raise ValidationError("experiment sensitivity-a requires run.exchange_list")

    return RunConfig(
        params=params,
        grid=grid,
        propagator=propagator,
        experiment=experiment,
        output=Path(values[("run", "output")]),
        workers=workers,
        n_list=values[("run", "n_list")],
        split=values[("run", "split")],
        n_total=values[("run", "n_total")],
        cutoffs=values[("run", "cutoffs")],
        exchange_list=values[("run", "exchange_list")],
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, _FMT)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _manifest_text(config: RunConfig) -> str:
    lines = [
        f"# qbattery {__version__}",
        f"# kernel backend: {kernels.backend()}",
        "",
        "[model]",
    ]
    p = config.params
    for key in SCHEMA["model"]:
        lines.append(f"{key} = {_fmt(getattr(p, key))}")
    lines += ["", "[grid]"]
    lines.append(f"t_max = {_fmt(config.grid.t_max)}")
    lines.append(f"dt = {_fmt(config.grid.dt)}")
    lines += ["", "[propagator]"]
    for key in SCHEMA["propagator"]:
        value = getattr(config.propagator, key)
        lines.append(f"{key} = {'none' if value is None else _fmt(value)}")
    lines += ["", "[run]"]
    lines.append(f"experiment = {config.experiment}")
    lines.append(f"output = {config.output}")
    lines.append(f"workers = {config.workers}")
    for key in ("n_list", "split", "n_total", "cutoffs", "exchange_list"):
        value = getattr(config, key.replace("-", "_"))
        if value is not None:
            if isinstance(value, list):
                value = " ".join(_fmt(v) for v in value)
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


_SUMMARY_HEADER = [
    "N", "N_a", "N_b", "E_max", "t_E", "P_max", "t_P",
    "boundary_E", "boundary_P", "N_ph", "A", "t_max",
]


def _summary_rows(result) -> list[list]:
    rows = []
    for r in result.rows:
        p = r.params
        rows.append(
            [p.n_total, p.n_a, p.n_b, r.e_max, r.t_e, r.p_max, r.t_p,
             r.e_boundary, r.p_boundary, p.n_ph, p.exchange, result.grid.t_max]
        )
    return rows


def run(config: RunConfig) -> Path:
    """Execute one experiment; returns the CSV path. Partial files are
    removed if the run fails."""
    config.output.mkdir(parents=True, exist_ok=True)
    csv_path = config.output / (config.experiment.replace("-", "_") + ".csv")
    manifest_path = config.output / "manifest.ini"
    try:
        if config.experiment == "trace":
            trace = experiments.run_trace(config.params, config.grid, config.propagator)
            norm = config.params.n_total * config.params.omega_q
            rows = [
                [t, e, e / norm, pw, pw / norm]
                for t, e, pw in zip(config.grid.times, trace.energy, trace.power)
            ]
            _write_csv(csv_path, ["t", "E", "E_over_N", "P", "P_over_N"], rows)
        elif config.experiment == "sweep-n":
            result = experiments.sweep_total_atoms(
                config.n_list, config.split, config.params, config.grid,
                config.propagator, workers=config.workers,
            )
            _write_csv(csv_path, _SUMMARY_HEADER, _summary_rows(result))
        elif config.experiment == "sweep-split":
            result = experiments.sweep_split(
                config.n_total, config.params, config.grid,
                config.propagator, workers=config.workers,
            )
            _write_csv(csv_path, _SUMMARY_HEADER, _summary_rows(result))
        elif config.experiment == "convergence":
            study = experiments.convergence_study(
                config.params, config.cutoffs, config.grid, config.propagator
            )
            rows = [
                [r.n_ph, r.e_max, r.t_e, r.p_max, r.t_p, r.delta_e,
                 study.converged_at is not None and r.n_ph >= study.converged_at]
                for r in study.rows
            ]
            _write_csv(
                csv_path,
                ["N_ph", "E_max", "t_E", "P_max", "t_P", "delta_E", "converged"],
                rows,
            )
        elif config.experiment == "sensitivity-a":
            result = experiments.sweep_exchange(
                config.params, config.exchange_list, config.grid,
                config.propagator, workers=config.workers,
            )
            rows = [
                [r.params.exchange, r.e_max, r.t_e, r.p_max, r.t_p,
                 r.params.n_ph, result.grid.t_max]
                for r in result.rows
            ]
            _write_csv(
                csv_path, ["A", "E_max", "t_E", "P_max", "t_P", "N_ph", "t_max"], rows
            )
        elif config.experiment == "oracle-check":
            times, devs = experiments.oracle_check(
                config.params, config.grid, config.propagator
            )
            _write_csv(csv_path, ["t", "deviation"], [[t, d] for t, d in zip(times, devs)])
            print(f"max deviation = {devs.max():.3e}")
        else:  # pragma: no cover - parse_config already rejects
            raise ValidationError(f"unknown experiment {config.experiment!r}")
        manifest_path.write_text(_manifest_text(config))
    except BaseException:
        for path in (csv_path, manifest_path):
            path.unlink(missing_ok=True)
        raise
    print(f"wrote {csv_path}")
    return csv_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbattery",
        description="Dual-cavity quantum battery charging simulator.",
    )
    parser.add_argument("--config", type=Path, help="INI config file")
    for section, keys in SCHEMA.items():
        for key in keys:
            parser.add_argument(
                f"--{section}-{key.replace('_', '-')}",
                dest=f"opt__{section}__{key}",
                metavar="V",
                help=f"override {section}.{key}",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ValidationError(f"cannot read config file: {exc}") from None
        else:
            text = ""
        overrides = {}
        for name, value in vars(args).items():
            if name.startswith("opt__") and value is not None:
                _, section, key = name.split("__", 2)
                overrides[(section, key)] = value
        config = parse_config(text, overrides)
        run(config)
        return 0
    except ValidationError as exc:
        _fail("validation", exc)
        return 1
    except ConvergenceError as exc:
        _fail("non-convergence", exc)
        return 3
    except (QBatteryError, Exception) as exc:
        _fail("runtime", exc)
        return 2


def _fail(category: str, exc: BaseException) -> None:
    message = " ".join(str(exc).split())
    print(f"qbattery: {category}: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
