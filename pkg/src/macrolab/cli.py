"""Experiment runner: reproducible numerical studies from one config file.

``macrolab run --config cfg.yaml [--out DIR] [--seed N] [--set key=value]``
executes one catalogue experiment and writes its data files plus a
``manifest.json`` recording the resolved config, seed, package versions,
and wall-clock time.  ``macrolab list`` prints the catalogue.  Identical
config and seed reproduce byte-identical data files; only manifest timing
fields vary between runs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import __version__
from .cells import coarse_observable, decompose, residual
from .dynamics import (
    EvolutionContext,
    coherent_pair_state,
    diagonality_index,
    disorder_residual,
    transition_matrix,
    weights_trajectory,
)
from .hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionCapError,
    HilbertSpace,
    LocalOperator,
    basis_state,
    build_hamiltonian,
)
from .observables import (
    build_intensive,
    commutator_norm,
    offdiag_overlap,
)
from .pointer import (
    branch_log_overlap,
    com_trajectory,
    mean_momentum,
    phase_cell_labels,
    revival_trajectory,
    uniform_branch,
)
from .states import basis_ambiguity_test, mixture_test, random_cell_vector

__all__ = ["main", "run_experiment", "EXPERIMENTS", "ConfigError"]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_PAULI = {"sigma_x": PAULI_X, "sigma_y": PAULI_Y, "sigma_z": PAULI_Z}

_MAX_WORKERS = 4

_EXPERIMENT_NAMES = (
    "commutator-scaling",
    "phase-cells",
    "superposition-mixture",
    "basis-ambiguity",
    "overlap-scaling",
    "dynamics",
    "revival",
    "pointer",
)


# ---------------------------------------------------------------------------
# config schema and loading

def _range_schema():
    return {
        "type": "object",
        "properties": {
            "start": {"type": "number"},
            "stop": {"type": "number"},
            "num": {"type": "integer", "minimum": 2},
        },
        "required": ["start", "stop", "num"],
        "additionalProperties": False,
    }


def _observable_schema():
    return {
        "type": "object",
        "properties": {
            "template": {
                "type": "array",
                "items": {"enum": sorted(_PAULI)},
                "minItems": 1,
                "maxItems": 3,
            },
            "placement": {"enum": ["all-subsets", "nearest-neighbor-chain"]},
        },
        "required": ["template"],
        "additionalProperties": False,
    }


def _base_properties():
    return {
        "experiment": {"enum": sorted(_EXPERIMENT_NAMES)},
        "seed": {"type": "integer", "minimum": 0},
        "output": {
            "type": "object",
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
            },
            "additionalProperties": False,
        },
    }


def _schema(extra: dict, required: list[str]) -> dict:
    properties = _base_properties()
    properties.update(extra)
    return {
        "type": "object",
        "properties": properties,
        "required": ["experiment", *required],
        "additionalProperties": False,
    }


_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {
            "enum": ["transverse-field-ising", "heisenberg-xxz", "diagonal-test"]
        },
        "couplings": {
            "oneOf": [
                {"type": "array", "items": {"type": "number"}},
                {"enum": ["auto"]},
            ]
        },
    },
    "required": ["kind", "couplings"],
    "additionalProperties": False,
}

_SCHEMAS = {
    "commutator-scaling": _schema(
        {
            "template_a": _observable_schema()["properties"]["template"],
            "template_b": _observable_schema()["properties"]["template"],
            "f_range": {
                "type": "array",
                "items": {"type": "integer", "minimum": 1},
                "minItems": 2,
            },
            "placement": {"enum": ["all-subsets", "nearest-neighbor-chain"]},
        },
        ["template_a", "template_b", "f_range"],
    ),
    "phase-cells": _schema(
        {
            "num_sites": {"type": "integer", "minimum": 1},
            "observables": {
                "type": "array",
                "items": _observable_schema(),
                "minItems": 1,
            },
            "resolutions": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "include_basis": {"type": "boolean"},
        },
        ["num_sites", "observables", "resolutions"],
    ),
    "superposition-mixture": _schema(
        {
            "num_sites": {"type": "integer", "minimum": 1},
            "observables": {
                "type": "array",
                "items": _observable_schema(),
                "minItems": 1,
            },
            "resolutions": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "trials": {"type": "integer", "minimum": 1},
            "observable_index": {"type": "integer", "minimum": 0},
        },
        ["num_sites", "observables", "resolutions"],
    ),
    "basis-ambiguity": _schema(
        {
            "num_sites": {"type": "integer", "minimum": 1},
            "observables": {
                "type": "array",
                "items": _observable_schema(),
                "minItems": 1,
            },
            "resolutions": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "trials": {"type": "integer", "minimum": 1},
        },
        ["num_sites", "observables", "resolutions"],
    ),
    "overlap-scaling": _schema(
        {
            "tau": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "n_range": {
                "type": "array",
                "items": {"type": "integer", "minimum": 1},
                "minItems": 2,
            },
            "template": _observable_schema()["properties"]["template"],
        },
        ["tau", "n_range"],
    ),
    "dynamics": _schema(
        {
            "num_sites": {"type": "integer", "minimum": 1},
            "model": _MODEL_SCHEMA,
            "observables": {
                "type": "array",
                "items": _observable_schema(),
                "minItems": 1,
            },
            "resolutions": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "times": _range_schema(),
            "initial": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["basis", "uniform-cell", "adversarial"]},
                    "index": {"type": "integer", "minimum": 0},
                    "cell": {"type": "integer", "minimum": 0},
                    "at": {"type": "number"},
                },
                "required": ["kind"],
                "additionalProperties": False,
            },
            "ensemble": {"type": "integer", "minimum": 2},
            "normalization": {"enum": ["column-stochastic", "target-dim"]},
        },
        ["num_sites", "model", "observables", "resolutions", "times"],
    ),
    "revival": _schema(
        {
            "pointer": {
                "type": "object",
                "properties": {
                    "num_particles": {"type": "integer", "minimum": 1},
                    "sigma": {"type": "number", "exclusiveMinimum": 0},
                    "mass": {"type": "number", "exclusiveMinimum": 0},
                    "hbar": {"type": "number", "exclusiveMinimum": 0},
                    "momentum": {"type": "number"},
                    "separation": {"type": "number", "exclusiveMinimum": 0},
                },
                "required": ["sigma", "mass", "momentum", "separation"],
                "additionalProperties": False,
            },
            "times": _range_schema(),
            "relative_phase": {"type": "number"},
        },
        ["pointer", "times"],
    ),
    "pointer": _schema(
        {
            "n_range": {
                "type": "array",
                "items": {"type": "integer", "minimum": 1},
                "minItems": 2,
            },
            "sigma": {"type": "number", "exclusiveMinimum": 0},
            "mass": {"type": "number", "exclusiveMinimum": 0},
            "hbar": {"type": "number", "exclusiveMinimum": 0},
            "momenta": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
            "separation": {"type": "number"},
            "times": _range_schema(),
            "delta_p": {"type": "number", "exclusiveMinimum": 0},
        },
        ["n_range", "sigma", "mass", "momenta", "separation", "times"],
    ),
}


def load_config(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            config = yaml.safe_load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a mapping")
    return config


def apply_overrides(config: dict, assignments: list[str]) -> dict:
    """Apply ``--set dotted.key=value`` overrides to scalar fields."""
    for assignment in assignments:
        key, sep, raw = assignment.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {assignment!r}")
        value = yaml.safe_load(raw)
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return config


def validate_config(config: dict) -> dict:
    experiment = config.get("experiment")
    if experiment not in _SCHEMAS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise ConfigError(f"unknown experiment {experiment!r}; known: {known}")
    try:
        jsonschema.validate(config, _SCHEMAS[experiment])
    except jsonschema.ValidationError as exc:
        location = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {location}: {exc.message}") from exc
    resolutions = config.get("resolutions")
    observables = config.get("observables")
    if resolutions is not None and observables is not None:
        if len(resolutions) != len(observables):
            raise ConfigError("need exactly one resolution per observable")
    return config


# ---------------------------------------------------------------------------
# small builders shared by experiments

def _template(names: list[str]) -> LocalOperator:
    matrix = _PAULI[names[0]]
    for name in names[1:]:
        matrix = np.kron(matrix, _PAULI[name])
    return LocalOperator(tuple(range(len(names))), matrix)


def _build_observables(config: dict, space: HilbertSpace):
    built = []
    for spec in config["observables"]:
        built.append(
            build_intensive(
                _template(spec["template"]),
                space,
                spec.get("placement", "all-subsets"),
            )
        )
    return built


def _time_grid(spec: dict) -> np.ndarray:
    return np.linspace(spec["start"], spec["stop"], spec["num"])


def _build_model(config: dict, space: HilbertSpace, rng: np.random.Generator):
    model = config["model"]
    couplings = model["couplings"]
    if couplings == "auto":
        if model["kind"] != "diagonal-test":
            raise ConfigError("couplings 'auto' is only for diagonal-test")
        couplings = rng.uniform(-1.0, 1.0, size=space.dimension)
    return build_hamiltonian(model["kind"], space, couplings)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _expand_complex(header: list[str], rows: list[list]) -> tuple[list[str], list[list]]:
    """Split complex columns into _re/_im pairs."""
    if not rows:
        return header, rows
    complex_cols = [
        k
        for k in range(len(header))
        if any(isinstance(row[k], (complex, np.complexfloating)) for row in rows)
    ]
    if not complex_cols:
        return header, rows
    new_header: list[str] = []
    for k, name in enumerate(header):
        if k in complex_cols:
            new_header.extend([f"{name}_re", f"{name}_im"])
        else:
            new_header.append(name)
    new_rows = []
    for row in rows:
        out_row: list = []
        for k, value in enumerate(row):
            if k in complex_cols:
                value = complex(value)
                out_row.extend([value.real, value.imag])
            else:
                out_row.append(value)
        new_rows.append(out_row)
    return new_header, new_rows


class OutputWriter:
    """Writes tabular experiment data as CSV or JSON records."""

    def __init__(self, directory: Path, fmt: str):
        self.directory = directory
        self.fmt = fmt
        self.files: list[str] = []

    def write_table(self, name: str, header: list[str], rows: list[list]) -> None:
        header, rows = _expand_complex(header, rows)
        if self.fmt == "csv":
            filename = f"{name}.csv"
            with open(self.directory / filename, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_fmt(v) for v in row])
        else:
            filename = f"{name}.json"
            records = [dict(zip(header, (_json_safe(v) for v in row))) for row in rows]
            with open(self.directory / filename, "w", encoding="utf-8") as fh:
                json.dump(records, fh, indent=1)
        self.files.append(filename)

    def write_json(self, name: str, document: dict) -> None:
        filename = f"{name}.json"
        with open(self.directory / filename, "w", encoding="utf-8") as fh:
            json.dump(_json_safe(document), fh, indent=1)
        self.files.append(filename)


def _json_safe(value):
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


# ---------------------------------------------------------------------------
# experiments

def _run_commutator_scaling(config, rng, writer):
    placement = config.get("placement", "all-subsets")
    template_a = _template(config["template_a"])
    template_b = _template(config["template_b"])
    f_values = config["f_range"]

    def norm_at(f: int) -> float:
        space = HilbertSpace(f)
        a = build_intensive(template_a, space, placement)
        b = build_intensive(template_b, space, placement)
        return commutator_norm(a, b)

    with ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        norms = list(pool.map(norm_at, f_values))
    rows = [[f, norm] for f, norm in zip(f_values, norms)]
    writer.write_table("scaling", ["num_sites", "commutator_norm"], rows)
    norms = np.asarray(norms)
    if np.all(norms > 1e-13):
        slope = float(np.polyfit(np.log(f_values), np.log(norms), 1)[0])
    else:
        slope = None
    return {"slope": slope, "num_points": len(f_values)}


def _decomposition_from(config, rng):
    space = HilbertSpace(config["num_sites"])
    observables = _build_observables(config, space)
    return space, observables, decompose(observables, config["resolutions"])


def _run_phase_cells(config, rng, writer):
    space, observables, decomp = _decomposition_from(config, rng)
    n_obs = len(observables)
    header = (
        ["label", "dim"]
        + [f"value_{m}" for m in range(n_obs)]
        + [f"window_{m}" for m in range(n_obs)]
    )
    rows = [
        [cell.label, cell.dim, *cell.values, *cell.windows] for cell in decomp.cells
    ]
    writer.write_table("cells", header, rows)
    if config.get("include_basis", False):
        writer.write_json("decomposition", decomp.to_dict(include_basis=True))
    residuals = [residual(decomp, m) for m in range(n_obs)]
    coarse = [coarse_observable(decomp, m) for m in range(n_obs)]
    max_coarse_comm = 0.0
    for a in range(n_obs):
        for b in range(a + 1, n_obs):
            comm = coarse[a].matrix @ coarse[b].matrix - coarse[b].matrix @ coarse[a].matrix
            max_coarse_comm = max(max_coarse_comm, float(np.abs(comm).max()))
    fine_comms = [
        commutator_norm(observables[a], observables[b])
        for a in range(n_obs)
        for b in range(a + 1, n_obs)
    ]
    return {
        "num_cells": decomp.num_cells,
        "residuals": residuals,
        "max_coarse_commutator_entry": max_coarse_comm,
        "fine_commutator_norms": fine_comms,
    }


def _distinct_cell_pairs(decomp, trials, rng):
    eligible = np.arange(decomp.num_cells)
    if eligible.size < 2:
        raise ConfigError("need at least two cells; lower the resolution")
    for _ in range(trials):
        a, b = rng.choice(eligible, size=2, replace=False)
        yield int(a), int(b)


def _run_superposition_mixture(config, rng, writer):
    _, _, decomp = _decomposition_from(config, rng)
    index = config.get("observable_index", 0)
    if index >= len(decomp.resolutions):
        raise ConfigError("observable_index out of range")
    trials = config.get("trials", 100)
    rows = []
    worst = 0.0
    for trial, (a, b) in enumerate(_distinct_cell_pairs(decomp, trials, rng)):
        phi1 = random_cell_vector(decomp, a, rng)
        phi2 = random_cell_vector(decomp, b, rng)
        report = mixture_test(phi1, phi2, decomp, index)
        worst = max(worst, report.discrepancy, report.discrepancy_normalized)
        rows.append(
            [
                trial,
                a,
                b,
                report.lhs,
                report.rhs,
                report.discrepancy,
                report.lhs_normalized,
                report.rhs_normalized,
                report.discrepancy_normalized,
            ]
        )
    writer.write_table(
        "trials",
        [
            "trial",
            "cell_a",
            "cell_b",
            "lhs",
            "rhs",
            "discrepancy",
            "lhs_normalized",
            "rhs_normalized",
            "discrepancy_normalized",
        ],
        rows,
    )
    return {"trials": trials, "max_discrepancy": worst}


def _run_basis_ambiguity(config, rng, writer):
    _, _, decomp = _decomposition_from(config, rng)
    trials = config.get("trials", 50)
    rows = []
    for trial, (a, b) in enumerate(_distinct_cell_pairs(decomp, trials, rng)):
        phi1 = random_cell_vector(decomp, a, rng)
        phi2 = random_cell_vector(decomp, b, rng)
        report = basis_ambiguity_test(phi1, phi2, decomp)
        discriminating = report.discriminating_index
        rows.append(
            [
                trial,
                a,
                b,
                report.value_gap,
                float(report.variances[discriminating])
                if discriminating is not None
                else 0.0,
                report.threshold,
                report.verdict,
                not (report.rotated_macro_flags[0] or report.rotated_macro_flags[1]),
            ]
        )
    writer.write_table(
        "trials",
        [
            "trial",
            "cell_a",
            "cell_b",
            "value_gap",
            "variance",
            "threshold",
            "verdict",
            "rotated_pair_rejected",
        ],
        rows,
    )
    verdicts = [row[6] for row in rows]
    return {
        "trials": trials,
        "not_macro": sum(v == "not-a-macro-state" for v in verdicts),
        "inconclusive": sum(v == "inconclusive" for v in verdicts),
    }


def _run_overlap_scaling(config, rng, writer):
    tau = float(config["tau"])
    theta = float(np.arccos(tau))
    names = config.get("template", ["sigma_z"])
    template = _template(names)
    up = np.array([1.0, 0.0])
    tilted = np.array([np.cos(theta), np.sin(theta)])

    def report_at(f: int):
        space = HilbertSpace(f)
        observable = build_intensive(template, space)
        return offdiag_overlap(observable, [up] * f, [tilted] * f)

    n_values = config["n_range"]
    with ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        reports = list(pool.map(report_at, n_values))
    rows = [
        [r.num_sites, r.value, abs(r.value), r.bound, r.tau] for r in reports
    ]
    writer.write_table(
        "overlaps", ["num_sites", "value", "value_abs", "bound", "tau"], rows
    )
    magnitudes = np.array([abs(r.value) for r in reports])
    if np.all(magnitudes > 0):
        slope = float(np.polyfit(n_values, np.log(magnitudes), 1)[0])
    else:
        slope = None
    return {
        "slope": slope,
        "log_tau": float(np.log(tau)),
        "bound_violations": int(
            sum(abs(r.value) > r.bound + 1e-12 for r in reports)
        ),
    }


def _initial_state(config, decomp, ctx, rng):
    spec = config.get("initial", {"kind": "basis", "index": 0})
    kind = spec["kind"]
    if kind == "basis":
        return basis_state(decomp.space, spec.get("index", 0)), {}
    if kind == "uniform-cell":
        label = spec.get("cell", 0)
        if label >= decomp.num_cells:
            raise ConfigError("initial cell out of range")
        cell = decomp.cells[label]
        phases = rng.uniform(0.0, 2.0 * np.pi, size=cell.dim)
        return cell.basis @ (np.exp(1j * phases) / np.sqrt(cell.dim)), {}
    psi, info = coherent_pair_state(ctx, decomp, spec.get("at", 0.0))
    return psi, info


def _run_dynamics(config, rng, writer):
    space, observables, decomp = _decomposition_from(config, rng)
    hamiltonian = _build_model(config, space, rng)
    ctx = EvolutionContext.from_hamiltonian(hamiltonian)
    times = _time_grid(config["times"])
    normalization = config.get("normalization", "column-stochastic")
    psi, initial_info = _initial_state(config, decomp, ctx, rng)

    trajectory = weights_trajectory(ctx, psi, decomp, times)
    header = ["t"] + [f"w_{j}" for j in range(decomp.num_cells)]
    writer.write_table(
        "weights",
        header,
        [[t, *w] for t, w in zip(trajectory.times, trajectory.weights)],
    )

    tm_header = ["t"] + [
        f"T_{j}_{k}" for j in range(decomp.num_cells) for k in range(decomp.num_cells)
    ]
    tm_rows = []
    diag_rows = []
    for t in times:
        tm = transition_matrix(ctx, decomp, t, normalization)
        tm_rows.append([t, *tm.entries.ravel()])
        if normalization == "column-stochastic":
            diag_rows.append([t, diagonality_index(tm)])
    writer.write_table("transition", tm_header, tm_rows)
    if diag_rows:
        writer.write_table("diagonality", ["t", "index"], diag_rows)

    probe_time = float(times[-1]) if times[-1] > 0 else 1.0
    report = disorder_residual(
        ctx, psi, decomp, probe_time, config.get("ensemble", 200), rng
    )
    summary = {
        "initial": initial_info,
        "disorder": {
            "t": report.t,
            "residual": report.residual,
            "band": report.band,
            "within_band": report.within_band,
            "ensemble_size": report.ensemble_size,
            "exact": report.exact,
            "predicted": report.predicted,
            "ensemble_mean": report.ensemble_mean,
            "ensemble_se": report.ensemble_se,
        },
    }
    return summary


def _run_revival(config, rng, writer):
    spec = config["pointer"]
    n = spec.get("num_particles", 1)
    momentum = spec["momentum"]
    separation = spec["separation"]
    hbar = spec.get("hbar", 1.0)
    left = uniform_branch(
        n, -0.5 * separation, momentum, spec["sigma"], spec["mass"], hbar, "left"
    )
    right = uniform_branch(
        n, 0.5 * separation, -momentum, spec["sigma"], spec["mass"], hbar, "right"
    )
    times = _time_grid(config["times"])
    report = revival_trajectory(
        left, right, times, config.get("relative_phase", 0.0)
    )
    writer.write_table(
        "revival",
        [
            "t",
            "overlap",
            "coincidence",
            "density_superposition",
            "density_mixture",
            "interference",
        ],
        [
            [t, o, c, ds, dm, i]
            for t, o, c, ds, dm, i in zip(
                report.times,
                report.overlap,
                report.coincidence,
                report.density_superposition,
                report.density_mixture,
                report.interference,
            )
        ],
    )
    at_crossing = revival_trajectory(
        left, right, [report.crossing_time], config.get("relative_phase", 0.0)
    )
    return {
        "crossing_time": report.crossing_time,
        "sigma_time": report.sigma_time,
        "initial_coincidence": float(report.coincidence[0]),
        "max_coincidence": float(report.coincidence.max()),
        "coincidence_at_crossing": float(at_crossing.coincidence[0]),
        "interference_at_crossing": float(at_crossing.interference[0]),
    }


def _run_pointer(config, rng, writer):
    sigma = config["sigma"]
    mass = config["mass"]
    hbar = config.get("hbar", 1.0)
    p_left, p_right = config["momenta"]
    separation = config["separation"]
    times = _time_grid(config["times"])

    def branches(n: int):
        left = uniform_branch(n, -0.5 * separation, p_left, sigma, mass, hbar, "i")
        right = uniform_branch(n, 0.5 * separation, p_right, sigma, mass, hbar, "j")
        return left, right

    n_values = config["n_range"]
    with ThreadPoolExecutor(max_workers=_MAX_WORKERS) as pool:
        logs = list(
            pool.map(lambda n: branch_log_overlap(*branches(n), 0.0), n_values)
        )
    writer.write_table(
        "orthogonalization",
        ["num_particles", "log_overlap"],
        [[n, v] for n, v in zip(n_values, logs)],
    )

    reference, partner = branches(max(n_values))
    grid, com = com_trajectory(reference, times)
    writer.write_table("com", ["t", "com_position"], [[t, x] for t, x in zip(grid, com)])
    fit, fit_diag = np.polynomial.polynomial.Polynomial.fit(
        grid, com, 1, full=True
    )
    coeffs = fit.convert().coef
    slope = float(coeffs[1]) if len(coeffs) > 1 else 0.0
    fit_residual = float(fit_diag[0][0]) if len(fit_diag[0]) else 0.0
    labels = phase_cell_labels([reference, partner], config.get("delta_p", 0.1))
    pair = np.polyfit(n_values, logs, 1)
    return {
        "com_slope": slope,
        "com_fit_residual": fit_residual,
        "expected_slope": mean_momentum(reference)
        * reference.num_particles
        / reference.total_mass,
        "log_overlap_slope": float(pair[0]),
        "cell_labels": labels,
        "mean_momenta": [mean_momentum(reference), mean_momentum(partner)],
    }


EXPERIMENTS = {
    "commutator-scaling": (
        _run_commutator_scaling,
        "commutator norm of two intensive observables across system sizes",
        "intensive-commutator-decay",
    ),
    "phase-cells": (
        _run_phase_cells,
        "joint coarse graining of observables into phase cells",
        "phase-cell-algebra",
    ),
    "superposition-mixture": (
        _run_superposition_mixture,
        "coarse expectations of two-cell superpositions vs mixtures",
        "superposition-as-mixture",
    ),
    "basis-ambiguity": (
        _run_basis_ambiguity,
        "variance certificates that cell superpositions are never macro-definite",
        "no-basis-ambiguity",
    ),
    "overlap-scaling": (
        _run_overlap_scaling,
        "exponential suppression of off-diagonal matrix elements",
        "offdiagonal-overlap-suppression",
    ),
    "dynamics": (
        _run_dynamics,
        "exact weight trajectories vs the coarse transition matrix",
        "weight-transition-dynamics",
    ),
    "revival": (
        _run_revival,
        "branch crossing: coincidence revival and midpoint interference",
        "interference-revival",
    ),
    "pointer": (
        _run_pointer,
        "collective Gaussian pointer kinematics and orthogonalization",
        "collective-pointer-kinematics",
    ),
}


def run_experiment(config: dict, out_dir: Path) -> dict:
    """Execute one validated experiment config; returns the manifest."""
    experiment = config["experiment"]
    runner, _, anchor = EXPERIMENTS[experiment]
    seed = int(config.get("seed", 0))
    rng = np.random.default_rng(seed)
    fmt = config.get("output", {}).get("format", "csv")
    out_dir.mkdir(parents=True, exist_ok=True)
    writer = OutputWriter(out_dir, fmt)

    started = time.time()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        summary = runner(config, rng, writer)
    manifest = {
        "experiment": experiment,
        "claim_anchor": anchor,
        "config": config,
        "seed": seed,
        "versions": {
            "macrolab": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "files": writer.files,
        "summary": _json_safe(summary),
        "wall_clock_s": time.time() - started,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(_json_safe(manifest), fh, indent=1)
    return manifest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macrolab", description="run catalogue experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run one experiment from a config file")
    run_parser.add_argument("--config", required=True, type=Path)
    run_parser.add_argument("--out", type=Path, default=None)
    run_parser.add_argument("--seed", type=int, default=None)
    run_parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a scalar config field (dotted path)",
    )
    sub.add_parser("list", help="list the experiment catalogue")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for name in sorted(EXPERIMENTS):
            _, description, _ = EXPERIMENTS[name]
            print(f"{name:24s} {description}")
        return 0

    try:
        config = load_config(args.config)
        config = apply_overrides(config, args.overrides)
        if args.seed is not None:
            config["seed"] = args.seed
        config = validate_config(config)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return 2

    out_dir = args.out or Path(f"runs/{config['experiment']}")
    try:
        run_experiment(config, out_dir)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return 2
    except (DimensionCapError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(json.dumps({"error": "numerical", "detail": str(exc)}), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
