"""Batch front end: ``hpflow <command> --config <path> [--out <dir>] [--seed <u64>]``.

Each scenario of the config writes ``report.<scenario>.json`` (deterministic
for a given config and seed) and ``timing.<scenario>.json`` (wall-clock per
phase, kept apart so reports stay byte-identical). ``converge`` also writes
``curve.<scenario>.csv`` with header ``dt,error``.

Exit status: 0 all checks pass, 1 some check failed, 2 bad config or usage,
3 capacity refusal.
"""
import argparse
import json
import math
import os
import sys
import tempfile
import time
import warnings
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from hpflow import __version__, checks
from hpflow.config import ConfigError, RunConfig, Scenario, load_config
from hpflow.flow import CapacityError, ToyFockConfig
from hpflow.noise_gns import DEFAULT_TOL_RANK, DegeneracyWarning
from hpflow.equivalence import BATTERY_VERSION, reconstruct

__all__ = ["COMMANDS", "main", "run", "run_scenario"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
U64_MAX = 2**64 - 1


class _Timer:
    def __init__(self):
        self.phases: Dict[str, float] = {}

    def __call__(self, name: str, fn: Callable, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - start


def _caps(params: dict) -> dict:
    return {k: params[k] for k in ("max_slots", "memory_cap") if k in params}


def _preflight(model, n_slots: int, dt: float, params: dict) -> None:
    """Refuse up front when a requested flow exceeds the configured caps."""
    ToyFockConfig(n_slots, dt, None, **_caps(params)).check(model.dim_h, model.d)


def _simulate(sc: Scenario, seed: int, timer: _Timer):
    p = sc.params
    n = p.get("n_slots", 12)
    dts = p.get("dt_list", list(checks.UNITARITY_DTS))
    n_ind = p.get("n_slots", 8)
    dt_ind = p.get("dt", 0.125)
    for dt in dts:
        _preflight(sc.model, n, dt, p)
    _preflight(sc.model, n_ind, dt_ind, p)
    out = timer("unitarity", checks.unitarity_checks, sc.model, dts, n, **_caps(p))
    out += timer("independence", checks.independence_checks, sc.model, n_ind, dt_ind, seed, **_caps(p))
    return out, {}, None


def _converge(sc: Scenario, seed: int, timer: _Timer):
    p = sc.params
    dts = p.get("dt_list", list(checks.CONVERGENCE_DTS))
    out, rows = timer("convergence", checks.convergence_checks, sc.model, dts, p.get("t", 1.0))
    return out, {"rows": [list(r) for r in rows]}, rows


def _props(sc: Scenario, seed: int, timer: _Timer):
    p = sc.params
    samples = p.get("samples", 100)
    out = timer("lindblad", checks.lindblad_checks, sc.model, samples, seed)
    out += timer("kernel", checks.kernel_checks, sc.model, samples, seed)
    out += timer("gram", checks.gram_checks, sc.model, 20, seed)
    out += timer("two_point", checks.two_point_checks, sc.model, p.get("dt", 1e-3))
    out += timer("gaussian", checks.gaussian_checks, sc.model, seed)
    return out, {}, None


def _reconstruct(sc: Scenario, seed: int, timer: _Timer):
    tol_rank = sc.params.get("tol_rank", DEFAULT_TOL_RANK)
    out = timer("reconstruct", checks.reconstruction_checks, sc.model, tol_rank)
    rec = reconstruct(sc.model, tol_rank)
    details = {
        "d_orig": sc.model.d,
        "d_rec": rec.d_rec,
        "coupling_rank": checks.coupling_rank(sc.model),
        "gram_eigenvalues": [float(x) for x in rec.eigenvalues],
        "tol_rank": tol_rank,
    }
    return out, details, None


def _roundtrip(sc: Scenario, seed: int, timer: _Timer):
    p = sc.params
    n, dt = p.get("n_slots", 8), p.get("dt", 0.125)
    _preflight(sc.model, n, dt, p)
    eq_tol = {k: v for k, v in sc.tolerances.items() if k in ("procrustes", "h_match", "semigroup_T", "semigroup_Z", "correlation")}
    out, report, probe = timer(
        "equivalence",
        checks.equivalence_checks,
        sc.model,
        n,
        dt,
        seed,
        p.get("perturbation", 1.01),
        eq_tol,
        p.get("tol_rank", DEFAULT_TOL_RANK),
        **_caps(p),
    )
    details = {"battery_version": BATTERY_VERSION, "report": report.to_dict(), "perturbed": probe.to_dict()}
    return out, details, None


COMMANDS = {
    "simulate": _simulate,
    "converge": _converge,
    "props": _props,
    "reconstruct": _reconstruct,
    "roundtrip": _roundtrip,
}


def _clean(x):
    """JSON-safe copy: non-finite floats become null, tuples become lists."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_scenario(command: str, sc: Scenario, seed: int) -> Tuple[dict, dict, Optional[list]]:
    """Run one scenario; returns ``(report, timing, curve_rows)``."""
    timer = _Timer()
    raw, details, rows = COMMANDS[command](sc, seed, timer)
    results = checks.with_tolerances(raw, sc.tolerances)
    names = [c.name for c in results]
    if len(set(names)) != len(names):
        raise RuntimeError(f"duplicate check names in {command}: {names}")
    report = {
        "artifact": "hpflow",
        "version": __version__,
        "command": command,
        "scenario": sc.name,
        "seed": seed,
        "config": {"model": sc.model_echo, "params": sc.params, "tolerances": sc.tolerances},
        "model": {"dim_h": sc.model.dim_h, "d": sc.model.d},
        "checks": {c.name: c.to_dict() for c in results},
        "details": details,
        "passed": all(c.passed for c in results),
    }
    return _clean(report), {k: round(v, 6) for k, v in timer.phases.items()}, rows


def run(command: str, config: RunConfig, out_dir: Path, seed: Optional[int] = None, echo=print) -> int:
    seed = config.seed if seed is None else seed
    out_dir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for sc in config.scenarios:
        report, timing, rows = run_scenario(command, sc, seed)
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
        _atomic_write(out_dir / f"report.{sc.name}.json", text)
        _atomic_write(out_dir / f"timing.{sc.name}.json", json.dumps(timing, sort_keys=True, indent=2) + "\n")
        if rows is not None:
            csv = "dt,error\n" + "".join(f"{dt!r},{err!r}\n" for dt, err in rows)
            _atomic_write(out_dir / f"curve.{sc.name}.csv", csv)
        for name, c in report["checks"].items():
            echo(f"[{'PASS' if c['pass'] else 'FAIL'}] {sc.name} {name}: {c['value']} {c['op']} {c['tolerance']}")
        if not report["passed"]:
            status = EXIT_FAIL
    return status


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64 - 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpflow", description="Noise semigroup reconstruction and flow simulation checks.")
    parser.add_argument("--version", action="version", version=f"hpflow {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="YAML scenario file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: cwd)")
    parser.add_argument("--seed", type=_seed, default=None, help="overrides the config seed")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"hpflow: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with warnings.catch_warnings():
        warnings.simplefilter("always", DegeneracyWarning)
        try:
            return run(args.command, config, args.out, args.seed)
        except CapacityError as exc:
            print(f"hpflow: refused: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
        except ValueError as exc:
            print(f"hpflow: invalid parameters: {exc}", file=sys.stderr)
            return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
