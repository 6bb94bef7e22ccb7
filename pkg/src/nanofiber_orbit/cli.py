"""``nanofiber-orbit`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance failures in ``reproduce``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from scipy import constants as sc

from .config import Config
from .errors import ConfigError, NanofiberOrbitError, StageDependencyError
from .pipeline import Pipeline, eigen_states, write_eigen, write_json

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4

log = logging.getLogger("nanofiber_orbit")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # shared by the main parser and every subparser so flags work on either side
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=default, help="flat 'section.key = value' config file")
    p.add_argument("--out", type=Path, default=default, help="output directory (overrides output.directory)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                   help="worker threads for the m sweep")
    p.add_argument("--seed", type=int, default=default, help="reserved; the pipeline is deterministic")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanofiber-orbit", parents=[_global_flags(False)],
                                     description="Orbital dynamics of a trapped atom around an optical nanofiber.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    sub.add_parser("mode", parents=common, help="guided-mode intensity profiles")

    p = sub.add_parser("potential", parents=common, help="effective radial potential for one m")
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("eigen", parents=common, help="radial eigenstates for one m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--count", type=int, default=1)

    p = sub.add_parser("dispersion", parents=common, help="ground-state energies over m and timescales")
    p.add_argument("--m-min", type=int)
    p.add_argument("--m-max", type=int)

    p = sub.add_parser("evolve", parents=common, help="wave-packet density snapshots")
    p.add_argument("--t", type=float, action="append", help="time in s (repeatable)")
    p.add_argument("--t-list", type=Path, help="file with one time (s) per line")

    p = sub.add_parser("probe", parents=common, help="probe scattering trace")
    p.add_argument("--t-max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--axis-angle", type=float, default=0.0, help="quasi-linear axis, rad")

    p = sub.add_parser("reproduce", parents=common, help="full run, figures and acceptance report")
    p.add_argument("--no-determinism-check", action="store_true",
                   help="skip the second run used for the byte-identity check")
    return parser


def load_config(args) -> Config:
    config = Config.from_file(args.config) if args.config else Config()
    if args.out is not None:
        config = config.with_overrides(output__directory=str(args.out))
    return config


def _read_times(path: Path) -> list[float]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read time list: {exc}", "--t-list") from exc
    out = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            try:
                out.append(float(line))
            except ValueError:
                raise ConfigError(f"bad time {line!r}", "--t-list") from None
    return out


def _dispersion_config(config: Config, m_min, m_max) -> Config:
    """Widen the m scan if the requested range reaches outside it."""
    n = config.numerics
    lo = n.m_scan_min if m_min is None else min(m_min, n.m_scan_min)
    hi = n.m_scan_max if m_max is None else max(m_max, n.m_scan_max)
    if (lo, hi) == (n.m_scan_min, n.m_scan_max):
        return config
    return config.with_overrides(numerics__m_scan_min=lo, numerics__m_scan_max=hi)


def _with_dispersion(pipe: Pipeline, stage: str) -> list[str]:
    # the command line resolves the dependency itself; the cache makes this cheap
    return [stage] if pipe.cache_path.exists() else ["dispersion", stage]


def run(args) -> int:
    config = load_config(args)
    cmd = args.command
    if cmd == "reproduce":
        from .acceptance import reproduce

        report = reproduce(config, config.output.directory, args.threads,
                           check_determinism=not args.no_determinism_check)
        for row in report.rows:
            print(row.line())
        print(f"{sum(r.passed for r in report.rows)}/{len(report.rows)} checks passed; "
              f"report in {Path(config.output.directory) / 'report.json'}")
        return EXIT_OK if report.passed else EXIT_ACCEPTANCE

    if cmd == "dispersion":
        if args.m_min is not None and args.m_max is not None and args.m_min > args.m_max:
            raise ConfigError("--m-min must not exceed --m-max", "--m-min")
        config = _dispersion_config(config, args.m_min, args.m_max)
    pipe = Pipeline(config, config.output.directory, args.threads)

    if cmd == "mode":
        manifest = pipe.run(["mode"])
    elif cmd == "potential":
        manifest = pipe.run(["potential"], potential={"ms": [args.m]})
    elif cmd == "eigen":
        if args.count < 1:
            raise ConfigError("--count must be >= 1", "--count")
        states = eigen_states(pipe, args.m, args.count)
        pipe.out.mkdir(parents=True, exist_ok=True)
        paths = write_eigen(pipe.out / f"eigen_m{args.m}", states, config.output.format)
        for st in states:
            print(f"m={st.m} nu={st.nu} E={st.energy:.10e} J E/h={st.energy / sc.h:.6f} Hz bound={st.bound}")
        write_json(pipe.out / "manifest.json", {"config_hash": config.hash(), "stages": ["eigen"],
                                                "outputs": {"eigen": [p.name for p in paths]}})
        return EXIT_OK
    elif cmd == "dispersion":
        lo = args.m_min if args.m_min is not None else config.numerics.m_scan_min
        hi = args.m_max if args.m_max is not None else config.numerics.m_scan_max
        manifest = pipe.run(["dispersion"], dispersion={"m_range": (lo, hi)})
        ts = pipe.timescales
        print(f"E1/h = {ts.E1 / sc.h:.6g} Hz, E2/h = {ts.E2 / sc.h:.6g} Hz")
        for k, v in ts.as_dict().items():
            if k.startswith("T_"):
                print(f"{k[:-2]} = {v * 1e6:.6g} us" if v is not None else f"{k[:-2]} = absent")
    elif cmd == "evolve":
        times = list(args.t or [])
        if args.t_list:
            times += _read_times(args.t_list)
        if any(t < 0 for t in times):
            raise ConfigError("times must be non-negative", "--t")
        stage_args = {"evolve": {"times": sorted(times)}} if times else {}
        manifest = pipe.run(_with_dispersion(pipe, "evolve"), **stage_args)
    elif cmd == "probe":
        stage_args = {"probe": {"t_max": args.t_max, "dt": args.dt, "axis_angle": args.axis_angle}}
        manifest = pipe.run(_with_dispersion(pipe, "probe"), **stage_args)
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {cmd}")
    for files in manifest.outputs.values():
        for f in files:
            print(pipe.out / f)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (ConfigError, StageDependencyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NanofiberOrbitError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
