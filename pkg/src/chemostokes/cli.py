"""Command line entry point: ``chemostokes {run,sweep,validate}``.

Exit codes: 0 success, 2 configuration error, 3 runtime failure. Errors are
written to stderr as a single JSON object.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .config import Config, ConfigError, load_config
from .diagnostics import detect_threshold_time, fit_decay
from .initial import make_initial_state
from .io import save_trajectory
from .limits import SweepSpec, eps_sweep, kappa_sweep

log = logging.getLogger("chemostokes")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

FIT_SERIES = ("sup_c", "l2_n_dev", "l2_u")


class RuntimeFailure(RuntimeError):
    pass


def _emit_error(kind, errors):
    print(json.dumps({"status": "error", "kind": kind, "errors": errors}), file=sys.stderr)


def decay_fits(traj) -> dict:
    """Fits of sup c, ||n - mean||_2 and ||u||_2 over ``[T_detect, T_end]``.

    ``T_detect`` is the first time sup c drops below half its initial value.
    """
    t, sup_c = traj.series("sup_c")
    delta = 0.5 * sup_c[0]
    t_detect = detect_threshold_time(t, sup_c, delta)
    out = {"delta": delta, "threshold_time": t_detect, "t_end": float(t[-1]), "fits": {}}
    for name in FIT_SERIES:
        if t_detect is None:
            out["fits"][name] = {"error": "threshold never crossed"}
            continue
        _, y = traj.series(name)
        try:
            out["fits"][name] = fit_decay(t, y, (t_detect, t[-1])).to_dict()
        except ValueError as exc:
            out["fits"][name] = {"error": str(exc)}
    return out


def _provenance(cfg: Config) -> dict:
    return {"config": cfg.to_dict(), "config_sha256": cfg.digest(), "version": __version__}


def _progress(n_steps, quiet):
    if quiet:
        return None
    every = max(1, n_steps // 10)

    def report(k):
        if k % every == 0 or k == n_steps:
            log.info("step %d/%d", k, n_steps)
    return report


def run_single(cfg: Config, out=None, quiet=True) -> Path:
    """Integrate one configuration and write ``<out>/run/<run_id>/``."""
    from .stepper import integrate_run

    out = Path(out if out is not None else cfg.output.dir)
    grid = cfg.make_grid()
    params = cfg.make_params()
    try:
        initial = make_initial_state(grid, cfg.initial)
        t0 = time.perf_counter()
        traj = integrate_run(initial, params, progress=_progress(params.n_steps, quiet))
    except Exception as exc:  # noqa: BLE001 - surfaced as exit 3
        raise RuntimeFailure(str(exc)) from exc
    traj.provenance = _provenance(cfg)
    run_dir = save_trajectory(traj, out / "run" / cfg.output.run_id)
    (run_dir / "fit.json").write_text(json.dumps(decay_fits(traj), indent=1, sort_keys=True))
    log.info("run finished in %.2f s -> %s", time.perf_counter() - t0, run_dir)
    return run_dir


def run_sweep(cfg: Config, out=None, workers=1, quiet=True) -> Path:
    """Run the configured kappa or eps sweep and write ``sweep.csv`` and ``sweep.json``."""
    if cfg.sweep is None:
        raise ConfigError(["sweep: block is required for the sweep command"])
    out = Path(out if out is not None else cfg.output.dir)
    grid = cfg.make_grid()
    try:
        spec = SweepSpec(cfg.sweep.parameter, list(cfg.sweep.values), cfg.make_params(),
                         make_initial_state(grid, cfg.initial), [tuple(x) for x in cfg.sweep.norms])
    except ValueError as exc:
        raise ConfigError([f"sweep: {exc}"]) from exc
    driver = kappa_sweep if spec.parameter == "kappa" else eps_sweep
    try:
        table = driver(spec, workers=workers)
    except Exception as exc:  # noqa: BLE001 - reference-run or pool failure
        raise RuntimeFailure(str(exc)) from exc
    table.provenance.update(_provenance(cfg))
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / "sweep.csv")
    table.write_json(out / "sweep.json")
    failed = [r for r in table.rows if r.status != "ok"]
    if failed:
        log.warning("%d sweep rows failed", len(failed))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemostokes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "integrate one configuration"),
                        ("sweep", "run a kappa or eps sweep"),
                        ("validate", "check a configuration and print its canonical form")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        p.add_argument("--workers", type=int, default=1, help="parallel sweep members")
        p.add_argument("--quiet", action="store_true", help="suppress progress logging")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.workers < 1:
            raise ConfigError([f"--workers: must be >= 1, got {args.workers}"])
        cfg = load_config(args.config)
        if args.command == "validate":
            print(cfg.dump(), end="")
        elif args.command == "run":
            run_single(cfg, args.out, quiet=args.quiet)
        else:
            run_sweep(cfg, args.out, workers=args.workers, quiet=args.quiet)
    except OSError as exc:
        _emit_error("config" if getattr(exc, "filename", None) == args.config else "runtime", [str(exc)])
        return EXIT_CONFIG if getattr(exc, "filename", None) == args.config else EXIT_RUNTIME
    except ConfigError as exc:
        _emit_error("config", exc.errors)
        return EXIT_CONFIG
    except RuntimeFailure as exc:
        _emit_error("runtime", [str(exc)])
        return EXIT_RUNTIME
    return EXIT_OK
