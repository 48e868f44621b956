"""Declarative (c, Gamma) parameter sweeps, figure presets and serialization.

Sweep cells are independent work units executed by a bounded thread pool;
cells are written into indexed slots, so results are independent of worker
count and scheduling.  Cells are grouped into fixed-size batches advanced
together by the element-wise fixed-step integrator; the per-cell arithmetic
is identical either way.  A guard failure inside a batch triggers a per-cell
retry of that batch so sibling cells still complete, and the failing cells
carry an error record instead of a trajectory.

CSV schema (long form, one row per recorded sample):

    c,gamma_rate,t,rho_rr,rho_ll,re_rho_rl,im_rho_rl,z,coherence,purity

Numbers are serialized with 17 significant digits.  The JSON format mirrors
SweepResult including provenance.  A run-config file is the JSON encoding of
SweepSpec plus an output block {"path": ..., "format": "csv"|"json"}.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import WindowSummary, window_summary
from .integrate import (
    DEFAULT_CONFIG,
    IntegrationError,
    IntegratorConfig,
    Method,
    TimeGrid,
    Trajectory,
    _density_chart,
    _master_batch,
)
from .model import (
    InitialState,
    LindbladPreset,
    LindbladSpec,
    ModelParams,
    ValidationError,
    density_from_initial,
    format_complex,
    parse_complex,
)

__all__ = [
    "OBSERVABLES",
    "SweepSpec",
    "CellResult",
    "SweepResult",
    "run_sweep",
    "figure_preset",
    "FIGURE_NAMES",
    "export",
    "load_sweep_json",
    "load_run_config",
    "split_gamma",
]

OBSERVABLES = ("z", "coherence", "purity")
CSV_HEADER = "c,gamma_rate,t,rho_rr,rho_ll,re_rho_rl,im_rho_rl,z,coherence,purity"
_BATCH = 256  # cells advanced together; fixed so grouping never depends on workers


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    c_axis: tuple[float, float, int]
    gamma_axis: tuple[float, ...]
    init: InitialState
    grid: TimeGrid
    cfg: IntegratorConfig = DEFAULT_CONFIG
    observables: tuple[str, ...] = OBSERVABLES
    summary_window: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        lo, hi, steps = self.c_axis
        object.__setattr__(self, "c_axis", (float(lo), float(hi), int(steps)))
        if steps < 1:
            raise ValidationError(f"c_axis steps must be >= 1, got {steps}")
        if steps == 1 and lo != hi:
            raise ValidationError("single-point c_axis requires min == max")
        if steps > 1 and not hi > lo:
            raise ValidationError("c_axis requires max > min")
        gammas = tuple(float(g) for g in self.gamma_axis)
        if not gammas:
            raise ValidationError("gamma_axis must be nonempty")
        if any(g < 0.0 for g in gammas):
            raise ValidationError("decoherence rates must be >= 0")
        object.__setattr__(self, "gamma_axis", gammas)
        obs = tuple(self.observables)
        bad = set(obs) - set(OBSERVABLES)
        if bad:
            raise ValidationError(f"unknown observables: {sorted(bad)}")
        object.__setattr__(self, "observables", obs)
        w0, w1 = self.summary_window
        if self.summary_window == (0.0, 0.0):
            w0, w1 = self.grid.t_final / 2.0, self.grid.t_final
            object.__setattr__(self, "summary_window", (w0, w1))
        if not (0.0 <= w0 < w1 <= self.grid.t_final * (1.0 + 1e-12)):
            raise ValidationError(
                f"summary_window ({w0}, {w1}) must lie inside [0, {self.grid.t_final}]"
            )

    def c_values(self) -> np.ndarray:
        lo, hi, steps = self.c_axis
        return np.array([lo]) if steps == 1 else np.linspace(lo, hi, steps)

    def to_dict(self) -> dict:
        return {
            "base": {
                "gamma": self.base.gamma,
                "c": self.base.c,
                "v": self.base.v,
                "decoherence_rate": self.base.decoherence_rate,
                "lindblad": {
                    "preset": self.base.lindblad.preset.value,
                    "lambdas": [format_complex(l) for l in self.base.lindblad.lambdas],
                    "scale": self.base.lindblad.scale,
                },
            },
            "c_axis": {"min": self.c_axis[0], "max": self.c_axis[1], "steps": self.c_axis[2]},
            "gamma_axis": list(self.gamma_axis),
            "init": {"z0": self.init.z0, "theta0": self.init.theta0},
            "grid": {
                "t_final": self.grid.t_final,
                "dt": self.grid.dt,
                "record_stride": self.grid.record_stride,
            },
            "cfg": {
                "method": self.cfg.method.value,
                "abs_tol": self.cfg.abs_tol,
                "rel_tol": self.cfg.rel_tol,
                "trace_guard": self.cfg.trace_guard,
                "positivity_guard": self.cfg.positivity_guard,
            },
            "observables": list(self.observables),
            "summary_window": list(self.summary_window),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        try:
            base_doc = doc["base"]
            lind = base_doc.get("lindblad", {})
            lambdas = tuple(
                parse_complex(l) if isinstance(l, str) else complex(*l) if isinstance(l, list) else complex(l)
                for l in lind.get("lambdas", ["1", "1i", "0"])
            )
            spec = LindbladSpec(
                preset=LindbladPreset(lind.get("preset", "sigma_plus")),
                lambdas=lambdas,
                scale=float(lind.get("scale", 1.0)),
            )
            base = ModelParams(
                gamma=float(base_doc.get("gamma", 0.0)),
                c=float(base_doc.get("c", 0.0)),
                v=float(base_doc.get("v", 1.0)),
                decoherence_rate=float(base_doc.get("decoherence_rate", 0.0)),
                lindblad=spec,
            )
            ax = doc["c_axis"]
            c_axis = (
                (float(ax["min"]), float(ax["max"]), int(ax["steps"]))
                if isinstance(ax, dict)
                else (float(ax[0]), float(ax[1]), int(ax[2]))
            )
            grid_doc = doc["grid"]
            cfg_doc = doc.get("cfg", {})
            return cls(
                base=base,
                c_axis=c_axis,
                gamma_axis=tuple(float(g) for g in doc["gamma_axis"]),
                init=InitialState(
                    z0=float(doc["init"]["z0"]),
                    theta0=float(doc["init"].get("theta0", 0.0)),
                ),
                grid=TimeGrid(
                    t_final=float(grid_doc["t_final"]),
                    dt=float(grid_doc.get("dt", 1e-3)),
                    record_stride=int(grid_doc.get("record_stride", 1)),
                ),
                cfg=IntegratorConfig(
                    method=Method(cfg_doc.get("method", "rk4")),
                    abs_tol=float(cfg_doc.get("abs_tol", 1e-10)),
                    rel_tol=float(cfg_doc.get("rel_tol", 1e-8)),
                    trace_guard=float(cfg_doc.get("trace_guard", 1e-9)),
                    positivity_guard=float(cfg_doc.get("positivity_guard", 1e-9)),
                ),
                observables=tuple(doc.get("observables", OBSERVABLES)),
                summary_window=tuple(doc.get("summary_window", (0.0, 0.0))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"invalid sweep spec: {exc}") from exc


@dataclass
class CellResult:
    c: float
    gamma_rate: float
    trajectory: Trajectory | None
    summary: WindowSummary | None
    error: dict | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[list[CellResult]]  # indexed [c_index][gamma_index]
    provenance: dict = field(default_factory=dict)

    def cell(self, c_index: int, gamma_index: int) -> CellResult:
        return self.cells[c_index][gamma_index]

    def iter_cells(self):
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                yield i, j, cell

    def mean_z_curve(self, gamma_index: int) -> list[tuple[float, float]]:
        """(c, window-mean z) pairs for one decoherence rate, for the detectors."""
        out = []
        for row in self.cells:
            cell = row[gamma_index]
            if cell.summary is not None:
                out.append((cell.c, cell.summary.mean_z))
        return out


def _resolve_workers(max_workers: int | None) -> int:
    if max_workers is not None:
        return max(1, int(max_workers))
    env = os.environ.get("DUETDYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"DUETDYN_THREADS must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def _integrate_batch(spec: SweepSpec, gamma_rate: float, c_vals: np.ndarray):
    params = dataclasses.replace(spec.base, decoherence_rate=gamma_rate)
    y0 = np.tile(_density_chart(density_from_initial(spec.init)), (c_vals.size, 1))
    return _master_batch(y0, c_vals, params, spec.grid, spec.cfg)


def _run_chunk(spec: SweepSpec, gamma_rate: float, c_vals: np.ndarray) -> list[CellResult]:
    def build_cell(c, times, data):
        traj = Trajectory(times, data)
        return CellResult(
            c=float(c),
            gamma_rate=gamma_rate,
            trajectory=traj,
            summary=window_summary(traj, *spec.summary_window),
        )

    try:
        times, out = _integrate_batch(spec, gamma_rate, c_vals)
        return [build_cell(c, times, out[:, b, :].copy()) for b, c in enumerate(c_vals)]
    except IntegrationError:
        # Retry cell by cell so one failing cell cannot abort its siblings.
        cells = []
        for c in c_vals:
            try:
                times, out = _integrate_batch(spec, gamma_rate, np.array([c]))
                cells.append(build_cell(c, times, out[:, 0, :]))
            except IntegrationError as exc:
                cells.append(
                    CellResult(
                        c=float(c),
                        gamma_rate=gamma_rate,
                        trajectory=None,
                        summary=None,
                        error={
                            "type": type(exc).__name__,
                            "message": str(exc),
                            "time": exc.time,
                        },
                    )
                )
        return cells


def run_sweep(spec: SweepSpec, max_workers: int | None = None) -> SweepResult:
    """Run every (c, Gamma) cell of the sweep; deterministic in the spec only."""
    c_vals = spec.c_values()
    jobs = [
        (j, i0, min(i0 + _BATCH, c_vals.size))
        for j in range(len(spec.gamma_axis))
        for i0 in range(0, c_vals.size, _BATCH)
    ]
    workers = _resolve_workers(max_workers)
    chunk_results: dict[tuple[int, int], list[CellResult]] = {}
    if workers == 1 or len(jobs) == 1:
        for j, i0, i1 in jobs:
            chunk_results[(j, i0)] = _run_chunk(spec, spec.gamma_axis[j], c_vals[i0:i1])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                (j, i0): pool.submit(_run_chunk, spec, spec.gamma_axis[j], c_vals[i0:i1])
                for j, i0, i1 in jobs
            }
            for key, fut in futures.items():
                chunk_results[key] = fut.result()

    cells: list[list[CellResult | None]] = [
        [None] * len(spec.gamma_axis) for _ in range(c_vals.size)
    ]
    for (j, i0), chunk in chunk_results.items():
        for off, cell in enumerate(chunk):
            cells[i0 + off][j] = cell
    provenance = {
        "version": __version__,
        "spec": spec.to_dict(),
        "integrator": spec.cfg.method.value,
    }
    return SweepResult(spec=spec, cells=cells, provenance=provenance)


def split_gamma(result: SweepResult, gamma_index: int) -> SweepResult:
    """Single-rate view of a sweep result (used to write one CSV per rate)."""
    g = result.spec.gamma_axis[gamma_index]
    spec = dataclasses.replace(result.spec, gamma_axis=(g,))
    cells = [[row[gamma_index]] for row in result.cells]
    provenance = dict(result.provenance)
    provenance["spec"] = spec.to_dict()
    return SweepResult(spec=spec, cells=cells, provenance=provenance)


# --------------------------------------------------------------------------
# Figure presets
# --------------------------------------------------------------------------

FIGURE_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")

_SURFACE_C_AXIS = (0.0, 4.0, 201)  # c range and density are defaults, not given
_PRESET_GRID = TimeGrid(t_final=50.0, dt=1e-3, record_stride=50)
_PRESET_WINDOW = (25.0, 50.0)


def figure_preset(name: str) -> SweepSpec:
    """Sweep specification regenerating the dataset behind one figure.

    Values taken from the stated figure parameters: the operator family, the
    decoherence rates and the single-c values of the trajectory figures.
    Defaults chosen here: c axis [0, 4v] with 201 points for the surface
    figures, t_final = 50/v, dt = 1e-3, samples every 0.05/v, summary window
    [25, 50]/v, operator scale 1 (the raising-type operator is written as
    sigma_x + i*sigma_y, i.e. twice the conventional lowering operator).
    """
    if name not in FIGURE_NAMES:
        raise ValidationError(f"unknown figure preset {name!r}, expected one of {FIGURE_NAMES}")
    init = InitialState(z0=1.0, theta0=0.0)  # prepared in the right well
    sigma_plus = LindbladSpec.sigma_plus()
    sigma_x = LindbladSpec.sigma_x()
    table: dict[str, tuple[LindbladSpec, tuple[float, float, int], tuple[float, ...]]] = {
        "fig1": (sigma_plus, _SURFACE_C_AXIS, (0.1, 0.0)),
        "fig2": (sigma_plus, _SURFACE_C_AXIS, (0.3, 0.5)),
        "fig3": (sigma_plus, _SURFACE_C_AXIS, (0.1,)),
        "fig4": (sigma_x, (3.0, 3.0, 1), (0.01, 0.0)),
        "fig5": (sigma_x, (1.0, 1.0, 1), (0.01, 0.0)),
        "fig6": (sigma_x, (2.0, 2.0, 1), (0.01, 0.0)),
    }
    lindblad, c_axis, gammas = table[name]
    base = ModelParams(
        gamma=0.0,
        c=c_axis[0],
        v=1.0,
        decoherence_rate=gammas[0],
        lindblad=lindblad,
    )
    return SweepSpec(
        base=base,
        c_axis=c_axis,
        gamma_axis=gammas,
        init=init,
        grid=_PRESET_GRID,
        observables=OBSERVABLES,
        summary_window=_PRESET_WINDOW,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _csv_lines(result: SweepResult):
    yield CSV_HEADER
    for j in range(len(result.spec.gamma_axis)):
        for row in result.cells:
            cell = row[j]
            if cell.trajectory is None:
                continue
            traj = cell.trajectory
            c_s, g_s = _fmt(cell.c), _fmt(cell.gamma_rate)
            z = traj.z
            coh = traj.coherence
            pur = traj.purity
            d = traj.data
            for k in range(len(traj)):
                yield (
                    f"{c_s},{g_s},{_fmt(traj.times[k])},{_fmt(d[k, 0])},{_fmt(d[k, 1])},"
                    f"{_fmt(d[k, 2])},{_fmt(d[k, 3])},{_fmt(z[k])},{_fmt(coh[k])},{_fmt(pur[k])}"
                )


def _summary_dict(s: WindowSummary) -> dict:
    return {
        "t_start": s.t_start,
        "t_end": s.t_end,
        "mean_z": s.mean_z,
        "min_z": s.min_z,
        "max_z": s.max_z,
        "mean_coherence": s.mean_coherence,
    }


def _json_doc(result: SweepResult) -> dict:
    cells = []
    for i, j, cell in result.iter_cells():
        doc = {
            "c_index": i,
            "gamma_index": j,
            "c": cell.c,
            "gamma_rate": cell.gamma_rate,
        }
        if cell.error is not None:
            doc["error"] = cell.error
        else:
            traj = cell.trajectory
            doc["t"] = traj.times.tolist()
            for name in result.spec.observables:
                doc[name] = getattr(traj, name).tolist()
            doc["summary"] = _summary_dict(cell.summary)
        cells.append(doc)
    return {
        "schema": "duetdyn-sweep-v1",
        "provenance": result.provenance,
        "spec": result.spec.to_dict(),
        "cells": cells,
    }


def export(result: SweepResult, fmt: str, path) -> Path:
    """Write a sweep result as long-form CSV or as JSON mirroring SweepResult."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unknown export format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            if fmt == "csv":
                for line in _csv_lines(result):
                    fh.write(line)
                    fh.write("\n")
            else:
                json.dump(_json_doc(result), fh, indent=1)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"export to {path} failed: {exc}") from exc
    return path


def load_sweep_json(path) -> tuple[dict, dict[tuple[int, int], WindowSummary]]:
    """Re-import an exported JSON document; returns (document, summaries by cell)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != "duetdyn-sweep-v1":
        raise ValidationError(f"unrecognized sweep JSON schema in {path}")
    summaries = {}
    for cell in doc["cells"]:
        if "summary" in cell:
            summaries[(cell["c_index"], cell["gamma_index"])] = WindowSummary(
                **cell["summary"]
            )
    return doc, summaries


def load_run_config(path) -> tuple[SweepSpec, dict]:
    """Parse a run-config file: a SweepSpec plus an output block {path, format}."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    out = doc.get("output")
    if not isinstance(out, dict) or "path" not in out:
        raise ValidationError("run config must carry an output block with a path")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"output format must be csv or json, got {fmt!r}")
    spec = SweepSpec.from_dict(doc)
    return spec, {"path": out["path"], "format": fmt}
