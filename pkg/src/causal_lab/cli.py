"""Scenario runner: ``causal-lab run | sweep | list-experiments``.

A scenario is a JSON file

    {"experiment": "flavor", "parameters": {...}, "output": "csv"}

Unknown keys are rejected. Results are written as CSV (metadata comment line,
header row, unit row, then data with 17 significant digits) or JSON. Exit
codes: 2 parse error, 3 validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from . import __version__
from .decay import ContinuumSpec, default_fit_window, energy_shift, evolve_amplitudes, fit_decay
from .decay import golden_rule_width, recurrence_time
from .errors import CausalLabError
from .fermi import AtomPairConfig, excitation_amplitude
from .flavor import MesonSystem, kabir_asymmetry_formula, oscillation_asymmetry, transition_probabilities
from .kernels import RegulatorSchedule
from .merlin import HigherDerivativeTheory, find_poles
from .propagators import CausalPrescription, ScalarTheory, SpacetimePoint
from .propagators import commutator_function, coordinate_propagator

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

THREADS_ENV = "CAUSAL_LAB_THREADS"


class ScenarioError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        self.kind = kind
        self.code = code
        super().__init__(message)


def _validation(message: str) -> ScenarioError:
    return ScenarioError("validation", message, EXIT_VALIDATION)


@dataclass(frozen=True)
class Param:
    kind: str  # float | int | choice | float_list | window
    default: Any
    unit: str = ""
    help: str = ""
    choices: tuple[str, ...] = ()

    def coerce(self, name: str, value: Any) -> Any:
        def number(v):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise _validation(f"parameter {name!r} must be a finite number, got {v!r}")
            return float(v)

        if self.kind == "float":
            return number(value)
        if self.kind == "int":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
                raise _validation(f"parameter {name!r} must be an integer, got {value!r}")
            return int(value)
        if self.kind == "choice":
            if value not in self.choices:
                raise _validation(f"parameter {name!r} must be one of {list(self.choices)}, got {value!r}")
            return value
        if self.kind == "float_list":
            if not isinstance(value, list) or not value:
                raise _validation(f"parameter {name!r} must be a non-empty list of numbers")
            return [number(v) for v in value]
        if self.kind == "window":
            if value is None:
                return None
            if not isinstance(value, list) or len(value) != 2:
                raise _validation(f"parameter {name!r} must be null or a two-element list")
            return [number(v) for v in value]
        raise AssertionError(self.kind)

    @property
    def numeric_scalar(self) -> bool:
        return self.kind in ("float", "int")


@dataclass
class ResultTable:
    columns: list[tuple[str, str]]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("result table is not rectangular")

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# " + json.dumps(self.metadata, sort_keys=True, default=_json_default) + "\n")
        out.write(",".join(name for name, _ in self.columns) + "\n")
        out.write(",".join(unit for _, unit in self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": self.metadata,
            "columns": [{"name": n, "unit": u} for n, u in self.columns],
            "rows": self.rows,
        }
        return json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n"


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v + 0.0, ".17g")  # -0.0 prints as 0
    return str(v)


def _json_default(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"not serializable: {v!r}")


def _schedule(eps: list[float]) -> RegulatorSchedule:
    return RegulatorSchedule(tuple(eps))


# --- experiments -----------------------------------------------------------------------------

EPS = Param("float_list", [1e-2, 5e-3, 2.5e-3], "1/energy", "regulator schedule (Abel damping in q)")


def _propagator(p: dict) -> Callable[[], tuple[list, list, dict]]:
    theory = ScalarTheory(p["m"], p["gamma"])
    presc = CausalPrescription.parse(p["prescription"])
    sched = _schedule(p["epsilons"])
    points = [SpacetimePoint(t, p["r"]) for t in p["t_values"]]

    def run():
        cols = [("t", "time"), ("r", "length")]
        for name in ("forward", "backward", "total"):
            cols += [(f"{name}_re", "energy^2"), (f"{name}_im", "energy^2")]
        cols.append(("error", "energy^2"))
        rows = []
        for pt in points:
            d = coordinate_propagator(theory, presc, pt, sched)
            rows.append(
                [pt.t, pt.r, d.forward.real, d.forward.imag, d.backward.real, d.backward.imag,
                 d.total.real, d.total.imag, d.error]
            )
        return cols, rows, {"max_error": max(r[-1] for r in rows)}

    return run


def _commutator(p: dict):
    theory = ScalarTheory(p["m"], 0.0)
    sched = _schedule(p["epsilons"])
    points = [SpacetimePoint(t, p["r"]) for t in p["t_values"]]

    def run():
        cols = [("t", "time"), ("r", "length"), ("interval", "length^2"),
                ("delta_re", "energy^2"), ("delta_im", "energy^2"), ("error", "energy^2")]
        rows = []
        for pt in points:
            res = commutator_function(theory, pt, sched)
            rows.append([pt.t, pt.r, pt.interval, res.value.real, res.value.imag, res.error])
        return cols, rows, {"max_error": max(r[-1] for r in rows)}

    return run


def _decay(p: dict):
    spec = ContinuumSpec(p["E_i"], p["band_width"], p["n_states"], p["coupling"], p["diag_V"],
                         p["band_low"] if p["band_low_set"] else None)
    convention = CausalPrescription.parse(p["convention"])
    if not p["t_max"] > 0:
        raise _validation("t_max must be positive")
    if p["samples"] < 3:
        raise _validation("samples must be >= 3")
    if p["window"] is not None:
        window = tuple(p["window"])
    else:
        start, end = default_fit_window(spec)
        window = (start, min(end, p["t_max"]))
    if not 0 <= window[0] < window[1] <= p["t_max"]:
        raise _validation(f"fit window {list(window)} must lie inside [0, t_max]")

    def run():
        traj = evolve_amplitudes(spec, convention, p["t_max"], p["samples"])
        fit = fit_decay(traj, window)
        cols = [("Gamma_fit", "energy"), ("DeltaE_fit", "energy"), ("Gamma_golden", "energy"),
                ("DeltaE_pv", "energy"), ("fit_residual", "1"), ("window_start", "time"),
                ("window_end", "time"), ("recurrence_time", "time"), ("max_norm_drift", "1")]
        drift = float(abs(traj.norm - 1).max())
        rows = [[fit.Gamma_fit, fit.DeltaE_fit, golden_rule_width(spec), energy_shift(spec),
                 fit.residual, float(window[0]), float(window[1]), recurrence_time(spec), drift]]
        return cols, rows, {"max_norm_drift": drift}

    return run


def _flavor(p: dict):
    system = MesonSystem(p["m1"], p["m2"], p["gamma1"], p["gamma2"], p["imM12"])
    if any(t <= 0 for t in p["t_values"]):
        raise _validation("t_values must be positive")

    def run():
        cols = [("t", "time"), ("P_K0_to_K0bar", "1"), ("P_K0bar_to_K0", "1"),
                ("asymmetry", "1"), ("kabir_formula", "1")]
        kabir = kabir_asymmetry_formula(system)
        rows = []
        for t in p["t_values"]:
            pf, pb = transition_probabilities(system, t)
            asym = oscillation_asymmetry(system, t) if (pf > 1e-300 or pb > 1e-300) else 0.0
            rows.append([t, pf, pb, asym, kabir])
        return cols, rows, {}

    return run


def _fermi(p: dict):
    if not p["omega0_r"] > 0:
        raise _validation("omega0_r must be positive")
    config = AtomPairConfig(p["r"], p["omega0_r"] / p["r"] if p["r"] > 0 else math.nan, p["lam"])
    ratios = p["delta_tau_ratios"]
    if any(x <= 0 for x in ratios) or any(b <= a for a, b in zip(ratios, ratios[1:])):
        raise _validation("delta_tau_ratios must be positive and strictly increasing")

    def run():
        cols = [("delta_tau", "time"), ("amp_re", "1"), ("amp_im", "1"), ("amp_abs", "1"), ("error", "1")]
        rows = []
        for x in ratios:
            res = excitation_amplitude(config, x * config.r)
            rows.append([x * config.r, res.value.real, res.value.imag, abs(res.value), res.error])
        return cols, rows, {"max_error": max(r[-1] for r in rows)}

    return run


def _merlin(p: dict):
    theory = HigherDerivativeTheory(p["M"], p["gamma"])

    def run():
        cols = [("pole", "1"), ("location_re", "energy^2"), ("location_im", "energy^2"),
                ("residue_re", "1"), ("residue_im", "1"), ("classification", "")]
        rows = []
        for k, rep in enumerate(find_poles(theory)):
            rows.append([k, rep.location.real, rep.location.imag, rep.residue.real,
                         rep.residue.imag, rep.classification.value])
        return cols, rows, {}

    return run


@dataclass(frozen=True)
class Experiment:
    params: dict[str, Param]
    build: Callable[[dict], Callable[[], tuple[list, list, dict]]]
    summary: str


EXPERIMENTS: dict[str, Experiment] = {
    "propagator": Experiment(
        {
            "m": Param("float", 1.0, "energy", "mass"),
            "gamma": Param("float", 0.0, "energy^2", "width parameter M*Gamma"),
            "prescription": Param("choice", "plus", "", "causal prescription", ("plus", "minus")),
            "r": Param("float", 1.0, "length", "spatial distance"),
            "t_values": Param("float_list", [-1.0, -0.5, 0.0, 0.5, 1.0], "time", "signed times"),
            "epsilons": EPS,
        },
        _propagator,
        "time-ordered decomposition of iD in coordinate space",
    ),
    "commutator": Experiment(
        {
            "m": Param("float", 1.0, "energy", "mass"),
            "r": Param("float", 1.0, "length", "spatial distance"),
            "t_values": Param("float_list", [0.0, 0.5, 2.0], "time", "signed times"),
            "epsilons": EPS,
        },
        _commutator,
        "free-field commutator function; zero at spacelike separation",
    ),
    "decay": Experiment(
        {
            "E_i": Param("float", 0.0, "energy", "unperturbed level"),
            "band_width": Param("float", 4.0, "energy", "width of the quasi-continuum"),
            "n_states": Param("int", 401, "1", "number of continuum levels"),
            "coupling": Param("float", 0.01, "energy", "constant <f|V|i>"),
            "diag_V": Param("float", 0.0, "energy", "<i|V|i>"),
            "band_low": Param("float", 0.0, "energy", "lower band edge (default: band centred on E_i)"),
            "convention": Param("choice", "plus", "", "evolution convention", ("plus", "minus")),
            "t_max": Param("float", 60.0, "time", "simulated span"),
            "samples": Param("int", 601, "1", "uniform output samples"),
            "window": Param("window", None, "time", "fit window [start, end]; null uses the default clipped to t_max"),
        },
        _decay,
        "level decay into a quasi-continuum, fitted width and shift vs golden rule",
    ),
    "flavor": Experiment(
        {
            "m1": Param("float", 0.5, "energy", "K1 mass"),
            "m2": Param("float", 0.51, "energy", "K2 mass"),
            "gamma1": Param("float", 0.1, "energy", "K1 width"),
            "gamma2": Param("float", 0.005, "energy", "K2 width"),
            "imM12": Param("float", 1e-4, "energy", "Im M12"),
            "t_values": Param("float_list", [5.0, 10.0, 20.0, 40.0], "time", "positive times"),
        },
        _flavor,
        "flavour oscillation probabilities and the T-violating asymmetry",
    ),
    "fermi": Experiment(
        {
            "r": Param("float", 1.0, "length", "atom separation"),
            "omega0_r": Param("float", 20.0, "1", "atomic gap times separation"),
            "lam": Param("float", 1.0, "1", "monopole coupling"),
            "delta_tau_ratios": Param(
                "float_list", [0.25, 0.5, 0.75, 1.25, 1.5, 2.0], "1", "windows in units of r"
            ),
        },
        _fermi,
        "two-atom excitation amplitude across the light cone",
    ),
    "merlin": Experiment(
        {
            "M": Param("float", 1.0, "energy", "heavy scale"),
            "gamma": Param("float", 0.1, "energy^2", "constant Im Sigma"),
        },
        _merlin,
        "poles, residues and Normal/Merlin classification of the higher-derivative propagator",
    ),
}

TOP_KEYS = {"experiment", "parameters", "output", "seedless"}


@dataclass(frozen=True)
class Scenario:
    experiment: str
    parameters: dict[str, Any]
    output: str = "csv"


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError("parse", f"cannot read {path}: {exc}", EXIT_PARSE) from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("parse", f"{path}: {exc}", EXIT_PARSE) from None
    return parse_scenario(doc)


def parse_scenario(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise _validation("scenario must be a JSON object")
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise _validation(f"unknown scenario keys {unknown}")
    name = doc.get("experiment")
    if name not in EXPERIMENTS:
        raise _validation(f"unknown experiment {name!r}; expected one of {sorted(EXPERIMENTS)}")
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise _validation("'parameters' must be an object")
    schema = EXPERIMENTS[name].params
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise _validation(f"unknown parameters for {name}: {unknown}")
    resolved = {k: spec.coerce(k, params[k]) if k in params else spec.default for k, spec in schema.items()}
    if name == "decay":
        resolved["band_low_set"] = "band_low" in params
    output = doc.get("output", "csv")
    if output not in ("csv", "json"):
        raise _validation(f"output must be 'csv' or 'json', got {output!r}")
    if "seedless" in doc and doc["seedless"] is not True:
        raise _validation("'seedless' is informational and may only be true")
    return Scenario(name, resolved, output)


def _public_params(scn: Scenario) -> dict:
    params = dict(scn.parameters)
    if scn.experiment == "decay":
        if not params.pop("band_low_set"):
            params["band_low"] = None
    return params


def _prepare(scn: Scenario):
    try:
        return EXPERIMENTS[scn.experiment].build(scn.parameters)
    except ScenarioError:
        raise
    except (ValueError, CausalLabError) as exc:
        raise _validation(str(exc)) from None


def _execute(run) -> tuple[list, list, dict]:
    try:
        return run()
    except ScenarioError:
        raise
    except CausalLabError as exc:
        raise ScenarioError("numerical", f"{type(exc).__name__}: {exc}", EXIT_NUMERICAL) from None
    except ValueError as exc:
        raise _validation(str(exc)) from None


def _metadata(scn: Scenario, extra: dict) -> dict:
    return {
        "tool": "causal_lab",
        "version": __version__,
        "experiment": scn.experiment,
        "parameters": _public_params(scn),
        "estimates": extra,
    }


def run_scenario(scn: Scenario) -> ResultTable:
    cols, rows, extra = _execute(_prepare(scn))
    return ResultTable(cols, rows, _metadata(scn, extra))


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise _validation(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def sweep(scn: Scenario, axis: str, values: list[float]) -> ResultTable:
    """Re-run ``scn`` for each value of the numeric parameter ``axis``."""
    schema = EXPERIMENTS[scn.experiment].params
    if axis not in schema or not schema[axis].numeric_scalar:
        numeric = sorted(k for k, v in schema.items() if v.numeric_scalar)
        raise _validation(f"axis {axis!r} is not a numeric parameter of {scn.experiment}; choose from {numeric}")
    if not values:
        raise _validation("sweep needs at least one value")
    variants = []
    for v in values:
        params = dict(scn.parameters)
        params[axis] = schema[axis].coerce(axis, v)
        if scn.experiment == "decay" and axis == "band_low":
            params["band_low_set"] = True
        variants.append(Scenario(scn.experiment, params, scn.output))
    runs = [_prepare(v) for v in variants]
    workers = min(_threads(), len(runs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute, runs))
    else:
        results = [_execute(r) for r in runs]
    cols = [(axis, schema[axis].unit)] + results[0][0]
    rows = []
    for variant, (_, group, _) in zip(variants, results):
        rows += [[variant.parameters[axis]] + row for row in group]
    meta = _metadata(scn, {"per_value": [extra for _, _, extra in results]})
    meta["sweep"] = {"axis": axis, "values": [v.parameters[axis] for v in variants]}
    return ResultTable(cols, rows, meta)


def list_experiments() -> str:
    doc = {
        name: {
            "summary": exp.summary,
            "parameters": {
                k: {"type": p.kind, "default": p.default, "unit": p.unit, "help": p.help}
                | ({"choices": list(p.choices)} if p.choices else {})
                for k, p in exp.params.items()
            },
        }
        for name, exp in EXPERIMENTS.items()
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _parse_values(text: str) -> list[float]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise _validation(f"--values must be a comma-separated list of numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ScenarioError("usage", message, EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causal-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"causal-lab {__version__}")
    parser.add_argument("--list-experiments", action="store_true", help="print scenario schemas and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the table here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="override the scenario output format")
    p_run = sub.add_parser("run", parents=[common], help="run one scenario")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", parents=[common], help="run a scenario over values of one parameter")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated list")
    sub.add_parser("list-experiments", help="print scenario schemas")
    return parser


def _emit(table: ResultTable, fmt: str, out: str | None, stdout) -> None:
    text = table.to_json() if fmt == "json" else table.to_csv()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.list_experiments or args.command == "list-experiments":
            stdout.write(list_experiments())
            return 0
        if args.command is None:
            raise ScenarioError("usage", "a subcommand is required (run, sweep, list-experiments)", EXIT_PARSE)
        scn = load_scenario(args.config)
        if args.command == "run":
            table = run_scenario(scn)
        else:
            table = sweep(scn, args.axis, _parse_values(args.values))
        _emit(table, args.format or scn.output, args.out, stdout)
        return 0
    except ScenarioError as exc:
        stderr.write(json.dumps({"error": exc.kind, "exit": exc.code, "message": str(exc)}) + "\n")
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
