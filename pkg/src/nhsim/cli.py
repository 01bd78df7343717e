"""Command line front end.

    nhsim run --config run.json [--out DIR]
    nhsim preset NAME [--out DIR] [--seed K]
    nhsim audit --gamma G [--lambda L] [--family power|logarithmic]

Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 usage or
configuration error, 3 runtime abort (non-finite field, boundary guard,
singular time, dilation overflow).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .closedform import DilationError, SingularTimeError
from .config import ConfigError, RunConfig, parse_config
from .experiments import COM_BOUND, DRIFT_BOUNDS, PRESETS, Check, run_preset
from .grid import Grid, GridError, gaussian
from .io import SnapshotError, emit_series, read_snapshot, write_snapshot
from .kernels import KernelError, PotentialSpec, audit_assumptions, audit_kernel_bound
from .observables import mass
from .solver import (EquationSpec, SimulationRun, SolverConfig, SolverError, from_com_frame,
                     run_simulation, to_com_frame)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("nhsim")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nhsim", description="Hartree-type NLS simulator and exact-solution checks")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a simulation described by a JSON config")
    r.add_argument("--config", required=True, help="path to the JSON run configuration")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--preset", help="run this preset instead of the configured simulation")
    r.add_argument("--seed", type=int, help="seed override for randomised presets")

    s = sub.add_parser("preset", help="run a named validation experiment")
    s.add_argument("name", help="preset name; one of: " + ", ".join(PRESETS))
    s.add_argument("--out", help="directory for the report")
    s.add_argument("--seed", type=int, default=0, help="seed for randomised presets")

    a = sub.add_parser("audit", help="kernel bound and assumption audit")
    a.add_argument("--gamma", type=float, required=True)
    a.add_argument("--lambda", dest="lam", type=float, default=1.0)
    a.add_argument("--family", choices=("power", "logarithmic"), default="power")
    return p


def _write_report(out: str | None, name: str, text: str):
    if not out:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{name}.txt").write_text(text)


def _initial_field(cfg: RunConfig):
    if cfg.snapshot:
        return read_snapshot(cfg.snapshot)
    grid = Grid(cfg.dim, cfg.n, cfg.L)
    return gaussian(grid, cfg.center, cfg.wavenumber, cfg.width, cfg.amplitude)


def _potential(cfg: RunConfig) -> PotentialSpec:
    if cfg.family == "harmonic":
        return PotentialSpec(family="harmonic", eta=cfg.eta, zeta=cfg.zeta)
    if cfg.family == "logarithmic":
        return PotentialSpec(family="logarithmic", lam=cfg.lam, use_w=cfg.use_w)
    return PotentialSpec(gamma=cfg.gamma, lam=cfg.lam, use_w=cfg.use_w)


def cmd_run(cfg: RunConfig, out_dir: str) -> int:
    if cfg.preset:
        log.info("config selects preset %s; other run keys are ignored", cfg.preset)
        return cmd_preset(cfg.preset, out_dir, cfg.seed)
    u0 = _initial_field(cfg)
    pot = _potential(cfg)
    frame = None
    if cfg.form == "mgH":
        u0, frame = to_com_frame(u0)
        spec = EquationSpec("mgH", pot, frame, mass(u0))
    else:
        spec = EquationSpec(cfg.form, pot)
    run = SimulationRun(u0, spec, SolverConfig(dt=cfg.dt, T=cfg.T, stride=cfg.stride,
                                               snapshot_stride=cfg.snapshot_stride))
    res = run_simulation(run)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_series(res.series, out / "series.csv")
    for i, snap in enumerate(res.snapshots):
        write_snapshot(snap, out / f"snapshot_{i:05d}.nhsim")
    final = res.final if frame is None else from_com_frame(res.final, frame)
    write_snapshot(final, out / "final.nhsim")
    (out / "config.json").write_text(cfg.dumps())

    checks = [Check("mass_drift", res.drifts["mass"], DRIFT_BOUNDS["mass"]),
              Check("energy_drift", res.drifts["energy"], DRIFT_BOUNDS["energy"])]
    # momentum is only conserved without an external potential
    if not (cfg.form == "harmonic_2H" and cfg.eta != 0.0):
        checks.append(Check("momentum_drift", res.drifts["momentum"], DRIFT_BOUNDS["momentum"]))
    checks.append(Check("com_law", res.com_deviation, COM_BOUND))
    text = "\n".join([f"run form={cfg.form} steps={res.steps}"] + [c.line() for c in checks]) + "\n"
    sys.stdout.write(text)
    (out / "report.txt").write_text(text)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_preset(name: str, out: str | None, seed: int) -> int:
    if name not in PRESETS:
        sys.stderr.write(f"nhsim: unknown preset {name!r}; available presets:\n")
        sys.stderr.write("".join(f"  {p}\n" for p in PRESETS))
        return EXIT_USAGE
    res = run_preset(name, seed=seed)
    text = res.report()
    sys.stdout.write(text)
    _write_report(out, name, text)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_audit(gamma: float, lam: float, family: str) -> int:
    spec = PotentialSpec(family=family, gamma=gamma, lam=lam)
    parts = []
    ok = True
    if family == "power" and 1.0 < gamma <= 2.0:
        kb = audit_kernel_bound(gamma)
        parts.append(kb.to_text())
        ok &= kb.passed
    rep = audit_assumptions(spec)
    parts.append(rep.to_text())
    ok &= rep.passed
    sys.stdout.write("\n".join(parts) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="nhsim: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            if args.out:
                log.info("output directory overridden: %s", args.out)
            if args.preset:
                log.info("preset overridden: %s", args.preset)
                cfg.preset = args.preset
            if args.seed is not None:
                log.info("seed overridden: %d", args.seed)
                cfg.seed = args.seed
            return cmd_run(cfg, args.out or cfg.out)
        if args.command == "preset":
            return cmd_preset(args.name, args.out, args.seed)
        return cmd_audit(args.gamma, args.lam, args.family)
    except (ConfigError, KernelError, GridError, SnapshotError) as exc:
        sys.stderr.write(f"nhsim: {exc}\n")
        return EXIT_USAGE
    except (SolverError, SingularTimeError, DilationError, FloatingPointError) as exc:
        sys.stderr.write(f"nhsim: aborted: {exc}\n")
        return EXIT_ABORT
    except OSError as exc:
        sys.stderr.write(f"nhsim: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
