"""Stage orchestration, on-disk caching and file output.

Stages run in the fixed order mode, potential, dispersion, evolve, probe.
Every stage writes delimited tables (CSV with a units-bearing header, or
JSON) plus a JSON summary; the run ends with ``manifest.json``.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import constants as sc

from . import probe as probe_mod
from . import wavepacket as wpm
from .config import Config
from .dispersion import DispersionTable, Timescales, derivatives_at, sweep, timescales
from .errors import ConfigError, NanofiberOrbitError, StageDependencyError
from .fibermode import FiberMode, dispersion_residual, solve_he11
from .potentials import EffectivePotential, RadialGrid, TrapModel
from .radialsolver import RadialState, solve_spectrum

log = logging.getLogger(__name__)

STAGES = ("mode", "potential", "dispersion", "evolve", "probe")
NEEDS_DISPERSION = {"evolve", "probe"}
CACHE_VERSION = 1


# -- table output ----------------------------------------------------------

def _column_strings(v: np.ndarray) -> list[str]:
    # one formatter per column; repr gives the shortest round-tripping float
    if v.dtype.kind == "b":
        return [str(int(x)) for x in v.tolist()]
    if v.dtype.kind in "iu":
        return list(map(str, v.tolist()))
    return list(map(repr, v.astype(float).tolist()))


def write_table(path: Path, columns: dict[str, np.ndarray], fmt: str = "csv") -> Path:
    """Write equal-length columns; the column names carry the units.

    ``path`` is given without suffix; ``.csv`` or ``.json`` is appended.
    """
    cols = {k: np.asarray(v) for k, v in columns.items()}
    n = {v.size for v in cols.values()}
    if len(n) != 1:
        raise ValueError(f"columns differ in length: {n}")
    if fmt == "json":
        out = path.with_suffix(".json")
        return write_json(out, cols)
    out = path.with_suffix(".csv")
    body = map(",".join, zip(*(_column_strings(v) for v in cols.values())))
    with open(out, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        fh.writelines(line + "\n" for line in body)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


# -- manifest --------------------------------------------------------------

@dataclass
class RunManifest:
    config_hash: str
    stages: list[str]
    outputs: dict[str, list[str]] = field(default_factory=dict)
    wall_times: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"config_hash": self.config_hash, "stages": self.stages,
                "outputs": self.outputs, "wall_times_s": self.wall_times}


def snapshot_times(ts: Timescales) -> list[float]:
    """Density snapshot times: 0, 20 us and the fractional revival times."""
    times = [0.0, 20e-6]
    if ts.T_rev is not None:
        times += [ts.T_rev / 8, ts.T_rev / 4, ts.T_rev / 2, ts.T_rev]
    return times


# -- pipeline --------------------------------------------------------------

class Pipeline:
    """Lazily built physics objects shared between stages of one run."""

    def __init__(self, config: Config, out: str | Path | None = None, threads: int = 1):
        config.validate()
        self.config = config
        self.out = Path(out if out is not None else config.output.directory)
        self.threads = max(1, int(threads))
        self._table: DispersionTable | None = None
        self.snapshots: list[wpm.DensitySnapshot] = []
        self.scatter: probe_mod.ScatterTrace | None = None
        self.evolve_times: list[float] | None = None

    # physics objects
    @cached_property
    def fiber(self):
        return self.config.fiber_spec()

    @cached_property
    def atom(self):
        return self.config.atom_spec()

    @cached_property
    def trap_mode(self) -> FiberMode:
        f = self.config.fiber
        return solve_he11(self.fiber, f.trap_wavelength_m, f.trap_power_W)

    @cached_property
    def probe_mode(self) -> FiberMode:
        return solve_he11(self.fiber, self.atom.probe_wavelength, 1.0)

    @cached_property
    def grid(self) -> RadialGrid:
        n = self.config.numerics
        return RadialGrid.for_fiber(self.fiber, span=n.r_span_m, n_points=n.n_points)

    @cached_property
    def trap(self) -> TrapModel:
        return TrapModel.build(self.fiber, self.atom, self.trap_mode, self.config.fiber.trap_power_W,
                               self.grid)

    @property
    def cache_path(self) -> Path:
        return self.out / "cache" / f"dispersion_v{CACHE_VERSION}_{self.config.dispersion_key()}.npz"

    @property
    def table(self) -> DispersionTable:
        if self._table is None:
            if not self.cache_path.exists():
                raise StageDependencyError("dispersion table not computed and no cached table found; "
                                           "run the dispersion stage first")
            self._table = DispersionTable.load(self.cache_path)
        return self._table

    def compute_table(self, use_cache: bool = True) -> DispersionTable:
        if use_cache and self.cache_path.exists():
            self._table = DispersionTable.load(self.cache_path)
            return self._table
        n = self.config.numerics
        self._table = sweep(self.trap, (n.m_scan_min, n.m_scan_max), threads=self.threads)
        self.cache_path.parent.mkdir(parents=True, exist_ok=True)
        self._table.save(self.cache_path)
        return self._table

    @cached_property
    def derivatives(self) -> tuple[float, float]:
        return derivatives_at(self.table, self.config.packet.m0)

    @cached_property
    def timescales(self) -> Timescales:
        E1, E2 = self.derivatives
        return timescales(E1, E2, self.config.packet.delta_m)

    @cached_property
    def packet(self) -> wpm.WavePacket:
        p = self.config.packet
        return wpm.build(self.table, p.m0, p.delta_m, p.m_min, p.m_max)

    @cached_property
    def polar(self) -> wpm.PolarGrid:
        n = self.config.numerics
        return wpm.polar_grid(self.packet, n.polar_n_r, n.polar_n_phi)

    @cached_property
    def coefficients(self) -> probe_mod.OverlapCoefficients:
        return probe_mod.coefficients(self.packet, self.probe_mode)

    @property
    def fmt(self) -> str:
        return self.config.output.format

    # -- stage bodies -------------------------------------------------
    def stage_mode(self) -> list[Path]:
        n = self.config.numerics
        r = np.linspace(self.fiber.radius, self.fiber.radius + n.r_span_m, 2001)
        paths = []
        for name, mode in (("mode_trap", self.trap_mode), ("mode_probe", self.probe_mode)):
            er2, ep2, ez2 = mode.profiles(r)
            paths.append(write_table(self.out / name, {
                "r_m": r, "e_r_sq_V2_per_m2": er2, "e_phi_sq_V2_per_m2": ep2, "e_z_sq_V2_per_m2": ez2,
            }, self.fmt))
        summary = {name: mode_summary(mode) for name, mode in
                   (("trap", self.trap_mode), ("probe", self.probe_mode))}
        paths.append(write_json(self.out / "mode.json", summary))
        return paths

    def stage_potential(self, ms=None) -> list[Path]:
        p = self.config.packet
        ms = ms if ms is not None else (p.m_min, p.m0, p.m_max)
        return [write_potential(self.out / f"potential_m{m}", self.trap.effective(int(m)), self.fmt)
                for m in ms]

    def stage_dispersion(self, m_range=None) -> list[Path]:
        table = self.compute_table()
        lo, hi = m_range if m_range is not None else table.scanned
        ms = np.array([m for m in table.ms if lo <= m <= hi], dtype=int)
        E = table.energies(ms)
        bound = np.array([table.entries[int(m)].bound for m in ms])
        csv = write_table(self.out / "dispersion", {
            "m": ms, "E_J": E, "E_over_h_Hz": E / sc.h, "bound": bound}, self.fmt)
        summary = self.dispersion_summary()
        return [csv, write_json(self.out / "dispersion_summary.json", summary)]

    def dispersion_summary(self) -> dict:
        table = self.table
        out = {
            "m0": self.config.packet.m0,
            "scanned": list(table.scanned),
            "well_window": table.well_window,
            "well_window_contiguous": table.well_window_contiguous(),
            "bound_window": table.m_window,
            "failures": table.failures,
        }
        try:
            ts = self.timescales
        except NanofiberOrbitError as exc:
            out["timescales_error"] = str(exc)
            return out
        out["timescales"] = ts.as_dict()
        out["timescales_us"] = {k[:-2] + "_us": (v * 1e6 if v is not None else None)
                                for k, v in ts.as_dict().items() if k.startswith("T_")}
        return out

    def stage_evolve(self, times=None) -> list[Path]:
        times = list(times) if times is not None else snapshot_times(self.timescales)
        self.evolve_times = times
        self.snapshots = [wpm.evolve(self.packet, t, self.polar) for t in times]
        thr = self.config.numerics.peak_threshold
        paths = []
        for k, snap in enumerate(self.snapshots):
            rr, pp = np.meshgrid(snap.r, snap.phi, indexing="ij")
            paths.append(write_table(self.out / f"density_t{k:02d}", {
                "r_m": rr.ravel(), "phi_rad": pp.ravel(), "density_per_m2": snap.density.ravel()},
                self.fmt))
        cols = {"phi_rad": self.snapshots[0].phi}
        for k, snap in enumerate(self.snapshots):
            cols[f"P_t{k:02d}_per_rad"] = snap.marginal
        paths.append(write_table(self.out / "marginals", cols, self.fmt))
        summary = {
            "times_s": times,
            "norm_density": [s.norm() for s in self.snapshots],
            "norm_marginal": [s.marginal_norm() for s in self.snapshots],
            "peak_counts": [wpm.count_azimuthal_peaks(s, thr) for s in self.snapshots],
            "circular_mean_rad": [s.circular_mean() for s in self.snapshots],
            "autocorrelation": [float(wpm.autocorrelation(self.packet, t)) for t in times],
            "peak_threshold": thr,
        }
        paths.append(write_json(self.out / "evolve.json", summary))
        return paths

    def stage_probe(self, t_max=None, dt=None, axis_angle: float = 0.0) -> list[Path]:
        n = self.config.numerics
        t_max = n.probe_t_max_s if t_max is None else t_max
        dt = n.probe_dt_s if dt is None else dt
        if not (t_max > 0 and dt > 0):
            raise ConfigError("t_max and dt must be positive", "numerics.probe_dt_s")
        times = dt * np.arange(int(math.floor(t_max / dt + 1e-9)) + 1)
        tr = probe_mod.trace(self.coefficients, times, axis_angle)
        ts = self.timescales
        summary = {
            "axis_angle_rad": axis_angle,
            "B": self.coefficients.B,
            "normalization": "gamma_rel = rate / static term B",
            "sum_modulation_weights": float(self.coefficients.modulation_weights.sum()),
            "visibility_full_trace": probe_mod.visibility(tr.values),
            "timescales": ts.as_dict(),
        }
        try:
            summary["analysis"] = probe_mod.analyze(tr, ts).as_dict()
        except NanofiberOrbitError as exc:
            summary["analysis_error"] = str(exc)
        if ts.T_rev is not None and times[-1] >= ts.T_rev / 8 + ts.T_osc_sca:
            summary["modulation_amplitude_at_T_rev_over_8"] = probe_mod.modulation_amplitude(
                tr, ts.T_rev / 8, ts.T_osc_sca)
        self.scatter = tr
        csv = write_table(self.out / "probe_trace", {"t_s": times, "gamma_rel": tr.values}, self.fmt)
        return [csv, write_json(self.out / "probe.json", summary)]

    # -- driver -------------------------------------------------------
    def run(self, stages=STAGES, write_manifest: bool = True, **stage_args) -> RunManifest:
        stages = normalize_stages(stages)
        if NEEDS_DISPERSION & set(stages) and "dispersion" not in stages and self._table is None:
            if not self.cache_path.exists():
                need = sorted(NEEDS_DISPERSION & set(stages))
                raise StageDependencyError(f"stage(s) {need} need the dispersion table: include "
                                           "'dispersion' or run it first to populate the cache")
        self.out.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(self.config.hash(), list(stages))
        for name in stages:
            t0 = time.perf_counter()
            log.info("stage %s", name)
            paths = run_stage(name, getattr(self, f"stage_{name}"), **stage_args.get(name, {}))
            manifest.wall_times[name] = time.perf_counter() - t0
            manifest.outputs[name] = [str(p.relative_to(self.out)) for p in paths]
        if write_manifest:
            write_json(self.out / "manifest.json", manifest.as_dict())
        return manifest


def run_stage(name: str, fn, **kwargs):
    """Run one stage, tagging numerical errors with the stage name."""
    try:
        return fn(**kwargs)
    except (ConfigError, StageDependencyError):
        raise
    except NanofiberOrbitError as exc:
        msg = exc.args[0] if exc.args else ""
        exc.args = (f"stage '{name}': {msg}",) + exc.args[1:]
        exc.stage = name
        raise


def normalize_stages(stages) -> list[str]:
    stages = set(stages)
    unknown = stages - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stage(s) {sorted(unknown)}", "stages")
    return [s for s in STAGES if s in stages]


def run_pipeline(config: Config, stages=STAGES, out: str | Path | None = None,
                 threads: int = 1) -> RunManifest:
    return Pipeline(config, out, threads).run(stages)


def mode_summary(mode: FiberMode) -> dict:
    return {
        "wavelength_m": mode.wavelength, "radius_m": mode.radius,
        "n_core": mode.n_core, "n_clad": mode.n_clad,
        "beta_per_m": mode.beta, "n_eff": mode.beta / mode.k, "h_per_m": mode.h, "q_per_m": mode.q,
        "s": mode.s, "V": mode.v_number, "power_W": mode.power,
        "power_integral_W": mode.power_integral(), "dispersion_residual": dispersion_residual(mode),
        "warnings": list(mode.warnings),
    }


def write_potential(path: Path, pot: EffectivePotential, fmt: str = "csv") -> Path:
    return write_table(path, {
        "r_m": pot.r, "U_cf_J": pot.centrifugal, "U_opt_J": pot.optical, "U_vdw_J": pot.vdw,
        "U_eff_J": pot.values}, fmt)


def write_eigen(path: Path, states: list[RadialState], fmt: str = "csv") -> list[Path]:
    """Eigenfunctions as columns plus a JSON sidecar with the energies."""
    cols = {"r_m": states[0].r}
    for st in states:
        cols[f"u_nu{st.nu}_per_sqrt_m"] = st.u
    table = write_table(path, cols, fmt)
    header = {
        "m": states[0].m,
        "states": [{"nu": st.nu, "E_J": st.energy, "E_over_h_Hz": st.energy / sc.h,
                    "bound": st.bound, "nodes": st.nodes()} for st in states],
    }
    return [table, write_json(path.with_name(path.name + "_energies.json"), header)]


def eigen_states(pipe: Pipeline, m: int, count: int) -> list[RadialState]:
    return solve_spectrum(pipe.trap.effective(m), count)
