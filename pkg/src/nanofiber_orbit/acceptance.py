"""Acceptance criteria evaluated on a finished pipeline, and the ``reproduce`` driver."""

from __future__ import annotations

import filecmp
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants as sc
from scipy.integrate import quad

from . import plotting
from . import probe as probe_mod
from . import wavepacket as wpm
from .config import Config
from .dispersion import Timescales, timescales
from .fibermode import SINGLE_MODE_CUTOFF, dispersion_residual
from .pipeline import STAGES, Pipeline, RunManifest, write_json
from .radialsolver import solve_dirichlet, solve_ground

# reference targets
E1_TARGET_HZ = 214e3
E2_TARGET_HZ = 2.52e3
T_ROT_TARGET = 4.67e-6
T_COLL_TARGET = 37.3e-6
T_REV_TARGET = 794e-6
V_TARGET = 1.24
WINDOW_TARGET = (430, 530)
PEAK_TARGETS = ((0.0, 1), (1 / 8, 4), (1 / 4, 2), (1 / 2, 1), (1.0, 1))


@dataclass(frozen=True)
class Row:
    criterion: int
    name: str
    measured: float | str
    target: str
    tolerance: str
    passed: bool

    def line(self) -> str:
        m = self.measured if isinstance(self.measured, str) else f"{self.measured:.6g}"
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.criterion:>2}. {self.name}: measured {m}; target {self.target} ({self.tolerance})"


@dataclass
class Report:
    rows: list[Row]
    manifest: RunManifest | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def criteria(self) -> dict[int, bool]:
        out: dict[int, bool] = {}
        for r in self.rows:
            out[r.criterion] = out.get(r.criterion, True) and r.passed
        return out

    def write(self, out: Path, fmt: str = "csv") -> list[Path]:
        cols = {
            "criterion": np.array([r.criterion for r in self.rows]),
            "name": np.array([r.name for r in self.rows], dtype=object),
            "measured": np.array([r.measured if isinstance(r.measured, str) else f"{r.measured:.10g}"
                                  for r in self.rows], dtype=object),
            "target": np.array([r.target for r in self.rows], dtype=object),
            "tolerance": np.array([r.tolerance for r in self.rows], dtype=object),
            "pass": np.array([r.passed for r in self.rows]),
        }
        paths = []
        if fmt == "csv":
            p = out / "report.csv"
            with open(p, "w", newline="\n") as fh:
                fh.write(",".join(cols) + "\n")
                for k in range(len(self.rows)):
                    fh.write(",".join(_csv_cell(cols[c][k]) for c in cols) + "\n")
            paths.append(p)
        paths.append(write_json(out / "report.json", {
            "passed": self.passed,
            "criteria": {str(k): v for k, v in self.criteria().items()},
            "rows": [r.__dict__ for r in self.rows],
        }))
        return paths


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    s = str(x)
    return f'"{s}"' if ("," in s or '"' in s) else s


def _rel(a: float, b: float) -> float:
    return abs(a / b - 1.0)


# -- criterion 1: eigensolver oracles -------------------------------------

def count_nodes(vec: np.ndarray, rel_tol: float = 1e-9) -> int:
    v = vec[np.abs(vec) > rel_tol * np.abs(vec).max()]
    return int(np.count_nonzero(np.diff(np.sign(v))))


def harmonic_oracle(mass: float = 2.2e-25, freq: float = 1e5, n: int = 20001, half_width: float = 10.0):
    """Max relative error of the lowest four levels against (nu - 1/2) hbar omega, and node counts."""
    omega = 2 * math.pi * freq
    ell = math.sqrt(sc.hbar / (mass * omega))
    x = np.linspace(-half_width * ell, half_width * ell, n + 2)[1:-1]
    dx = x[1] - x[0]
    E, vec = solve_dirichlet(0.5 * mass * omega**2 * x**2, dx, mass, 4)
    exact = (np.arange(4) + 0.5) * sc.hbar * omega
    nodes = [count_nodes(vec[:, k]) for k in range(4)]
    return float(np.max(np.abs(E / exact - 1))), nodes


def square_well_oracle(mass: float = 2.2e-25, width: float = 1e-6, n: int = 4000):
    """Relative error of the hard-wall ground state against hbar^2 pi^2 / (2 M L^2)."""
    dx = width / (n + 1)
    E, vec = solve_dirichlet(np.zeros(n), dx, mass, 4)
    exact = sc.hbar**2 * math.pi**2 / (2 * mass * width**2)
    return float(abs(E[0] / exact - 1)), [count_nodes(vec[:, k]) for k in range(4)]


def quad_power(mode) -> float:
    """Independent adaptive-quadrature value of the axial power."""
    f = lambda r: 2 * math.pi * r * mode.poynting_z(r)[0]  # noqa: E731
    inner, _ = quad(f, 0.0, mode.radius * (1 - 1e-15), epsabs=0, epsrel=1e-12, limit=200)
    # finite cut: e^{-2qr} has dropped by e^-120, and quad misses the peak on [a, inf)
    outer, _ = quad(f, mode.radius, mode.radius + 60.0 / mode.q, epsabs=0, epsrel=1e-12, limit=200)
    return inner + outer


def timescale_identities(ts: Timescales) -> float:
    return max(_rel(ts.T_rot / ts.T_osc_sca, 2.0), _rel(ts.T_rev / ts.T_resume_sca, 4.0),
               _rel(ts.T_coll / ts.T_fall_sca, 4 / math.sqrt(math.pi)))


# -- evaluation -----------------------------------------------------------

def evaluate(pipe: Pipeline, determinism: tuple[bool, str] | None = None) -> list[Row]:
    rows: list[Row] = []
    add = lambda *a: rows.append(Row(*a))  # noqa: E731

    # 1
    err_ho, nodes_ho = harmonic_oracle(pipe.atom.mass)
    add(1, "harmonic oscillator lowest 4 levels, max rel. error", err_ho, "(nu-1/2) hbar omega", "<= 1e-5",
        err_ho <= 1e-5)
    err_sw, nodes_sw = square_well_oracle(pipe.atom.mass)
    add(1, "square well ground state, rel. error", err_sw, "hbar^2 pi^2/(2ML^2)", "<= 1e-6", err_sw <= 1e-6)
    nodes = nodes_ho + nodes_sw
    add(1, "node counts nu-1", " ".join(map(str, nodes)), "0 1 2 3 0 1 2 3", "exact", nodes == [0, 1, 2, 3] * 2)

    # 2
    mode = pipe.trap_mode
    res = dispersion_residual(mode)
    add(2, "HE11 dispersion residual", res, "0", "<= 1e-10", res <= 1e-10)
    V = mode.v_number
    add(2, "V-number (single mode)", V, f"{V_TARGET} and < {SINGLE_MODE_CUTOFF:.3f}", "+-0.01",
        abs(V - V_TARGET) <= 0.01 and V < SINGLE_MODE_CUTOFF)
    p_err = _rel(quad_power(mode), mode.power)
    add(2, "power integral / P - 1", p_err, "0", "<= 1e-6", p_err <= 1e-6)

    # 3
    table = pipe.table
    ww = table.well_window
    ok3 = ww is not None and table.well_window_contiguous() and all(
        abs(a - b) <= 15 for a, b in zip(ww, WINDOW_TARGET))
    add(3, "trapping window (contiguous)", f"{ww[0]}-{ww[1]}" if ww else "none",
        f"{WINDOW_TARGET[0]}-{WINDOW_TARGET[1]}", "endpoints +-15", ok3)

    # 4
    bms = np.array(table.bound_ms)
    contiguous = bms.size > 2 and np.all(np.diff(bms) == 1)
    E = table.energies(bms)
    d1, d2 = np.diff(E), np.diff(E, 2)
    add(4, "E_m strictly increasing over bound window", f"{bms[0]}-{bms[-1]}, min dE = {d1.min() / sc.h:.6g} Hz",
        "dE > 0", "all m", bool(contiguous and np.all(d1 > 0)))
    add(4, "second difference negative over bound window", float(d2.max() / sc.h), "< 0 Hz", "all m",
        bool(contiguous and np.all(d2 < 0)))

    # 5
    ts = pipe.timescales
    e1, e2 = ts.E1 / sc.h, abs(ts.E2) / sc.h
    add(5, "E1/h at m0", e1, f"{E1_TARGET_HZ:.0f} Hz", "+-20%", _rel(e1, E1_TARGET_HZ) <= 0.20)
    add(5, "|E2|/h at m0", e2, f"{E2_TARGET_HZ:.0f} Hz", "+-30%", _rel(e2, E2_TARGET_HZ) <= 0.30)

    # 6
    rng = np.random.default_rng(0)
    worst = timescale_identities(ts)
    for _ in range(200):
        E1 = 10 ** rng.uniform(-30, -26)
        E2 = -(10 ** rng.uniform(-33, -29)) * rng.choice([-1, 1])
        worst = max(worst, timescale_identities(timescales(E1, E2, rng.uniform(0.5, 20))))
    add(6, "timescale identities, max rel. error", worst, "exact", "<= 1e-12", worst <= 1e-12)

    # 7
    hbar = sc.hbar
    direct = (2 * math.pi * hbar / ts.E1, 2 * math.sqrt(math.pi) * hbar / (abs(ts.E2) * ts.delta_m),
              4 * math.pi * hbar / abs(ts.E2))
    sc_err = max(_rel(a, b) for a, b in zip((ts.T_rot, ts.T_coll, ts.T_rev), direct))
    add(7, "T_rot/T_coll/T_rev vs formulas", sc_err, "exact", "<= 1e-12", sc_err <= 1e-12)
    for name, value, target, tol in (("T_rot", ts.T_rot, T_ROT_TARGET, (1 / 1.2, 1 / 0.8)),
                                     ("T_coll", ts.T_coll, T_COLL_TARGET, (1 / 1.3, 1 / 0.7)),
                                     ("T_rev", ts.T_rev, T_REV_TARGET, (1 / 1.3, 1 / 0.7))):
        add(7, f"{name} target {target * 1e6:.3g} µs", value * 1e6, f"{target * 1e6:.3g} µs",
            f"ratio in [{tol[0]:.3f}, {tol[1]:.3f}]", tol[0] <= value / target <= tol[1])

    # 8
    wp = pipe.packet
    grid = pipe.polar
    drift = 0.0
    for t in np.linspace(0, ts.T_rev, 50):
        snap = wpm.evolve(wp, t, grid)
        drift = max(drift, abs(snap.norm() - 1), abs(snap.marginal_norm() - 1))
    add(8, "norm drift over [0, T_rev], 50 times", drift, "0", "<= 1e-6", drift <= 1e-6)

    # 9
    thr = pipe.config.numerics.peak_threshold
    for frac, want in PEAK_TARGETS:
        got = wpm.count_azimuthal_peaks(wpm.evolve(wp, frac * ts.T_rev, grid), thr)
        label = "t = 0" if frac == 0 else ("T_rev" if frac == 1 else f"T_rev/{round(1 / frac)}")
        add(9, f"azimuthal peaks at {label}", str(got), str(want), f"exact, threshold {thr}", got == want)

    # 10
    tt = np.linspace(0, ts.T_rev, 20)
    series = probe_mod.trace(pipe.coefficients, tt).values
    brute = probe_mod.trace_direct(wp, pipe.probe_mode, tt, grid=grid).values
    eq = float(np.max(np.abs(series / brute - 1)))
    add(10, "series vs 2D quadrature, 20 times", eq, "0", "<= 1e-3", eq <= 1e-3)

    # 11, 12, 13
    n = pipe.config.numerics
    times = n.probe_dt_s * np.arange(int(math.floor(max(n.probe_t_max_s, 1.1 * ts.T_rev) / n.probe_dt_s)) + 1)
    tr = probe_mod.trace(pipe.coefficients, times)
    an = probe_mod.analyze(tr, ts)
    add(11, "T_osc measured / (T_rot/2)", an.T_osc_measured / ts.T_osc_sca, "1", "+-2%",
        _rel(an.T_osc_measured, ts.T_osc_sca) <= 0.02)
    tf = an.T_fall_measured
    add(11, "falloff time (rolling vis < vis0/e)", tf * 1e6 if tf else "none", f"< 2 T_fall = {2e6 * ts.T_fall_sca:.4g} µs",
        "strict", tf is not None and tf < 2 * ts.T_fall_sca)
    res_t = np.array(an.resumption_times)
    for k in (1, 2, 3, 4):
        want = k * ts.T_rev / 4
        label = "resumption at " + ("T_rev/4", "T_rev/2", "3T_rev/4", "T_rev")[k - 1]
        if res_t.size:
            got = float(res_t[np.argmin(np.abs(res_t - want))])
            add(11, label, got * 1e6, f"{want * 1e6:.4g} µs", "+-5%", _rel(got, want) <= 0.05)
        else:
            add(11, label, "none", f"{want * 1e6:.4g} µs", "+-5%", False)
    v0 = an.visibility_initial
    add(12, "initial visibility", v0, "0.40", "+-0.10", abs(v0 - 0.40) <= 0.10)
    vr = an.visibility_at_rev
    ratio = vr / v0 if vr is not None else float("nan")
    add(12, "revival visibility / initial", ratio if vr is not None else "none", "1/3", "+-0.15",
        vr is not None and abs(ratio - 1 / 3) <= 0.15)
    amp = probe_mod.modulation_amplitude(tr, ts.T_rev / 8, ts.T_osc_sca)
    add(13, "modulation amplitude at T_rev/8 (units of B)", amp, "0", "<= 0.02", amp <= 0.02)

    # 14
    if determinism is not None:
        ok, detail = determinism
        add(14, "reproduce twice, byte-identical outputs", detail, "identical", "exact", ok)
    return rows


# -- reproduce ------------------------------------------------------------

def render_figures(pipe: Pipeline) -> list[Path]:
    fig_dir = pipe.out / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    p = pipe.config.packet
    pots = [pipe.trap.effective(m) for m in (p.m_min, p.m0, p.m_max)]
    states = [pipe.table.entries[pot.m] if pot.m in pipe.table else solve_ground(pot) for pot in pots]
    out = [plotting.effective_potentials(pots, states, pipe.table, fig_dir / "fig2_potentials.png")]
    if pipe.snapshots:
        out.append(plotting.density_snapshots(pipe.snapshots, pipe.fiber.radius, fig_dir / "fig3_density.png"))
    if pipe.scatter is not None:
        out.append(plotting.scattering_trace(pipe.scatter, fig_dir / "fig4_probe.png"))
    return out


def _full_run(config: Config, out: Path, threads: int, use_cache: bool = True) -> tuple[Pipeline, RunManifest]:
    pipe = Pipeline(config, out, threads)
    if not use_cache:
        pipe.compute_table(use_cache=False)
    manifest = pipe.run(STAGES, write_manifest=False)
    figs = render_figures(pipe)
    manifest.outputs["figures"] = [str(f.relative_to(out)) for f in figs]
    write_json(out / "manifest.json", manifest.as_dict())
    return pipe, manifest


def compare_outputs(a: Path, b: Path, manifest: RunManifest) -> tuple[bool, str]:
    files = [f for group in manifest.outputs.values() for f in group]
    differ = [f for f in files if not filecmp.cmp(a / f, b / f, shallow=False)]
    if differ:
        return False, f"{len(differ)} of {len(files)} files differ: {', '.join(differ[:3])}"
    return True, f"{len(files)} files identical"


def reproduce(config: Config | None = None, out: str | Path | None = None, threads: int = 1,
              check_determinism: bool = True) -> Report:
    """Full pipeline, figures, acceptance table; failures are reported, not raised."""
    config = config or Config()
    out = Path(out if out is not None else config.output.directory)
    # recompute rather than trust a cache so the run checks the whole chain
    pipe, manifest = _full_run(config, out, threads, use_cache=False)
    det = None
    if check_determinism:
        with tempfile.TemporaryDirectory(prefix="reproduce-") as tmp:
            _full_run(config, Path(tmp), threads, use_cache=False)
            det = compare_outputs(out, Path(tmp), manifest)
    report = Report(evaluate(pipe, det), manifest)
    report.write(out, config.output.format)
    return report
