"""Command-line front end.

Every subcommand writes CSV with the fixed header ``CSV_COLUMNS`` (the
``distance`` subcommand has its own ``DISTANCE_COLUMNS``).  Settings come from
an optional JSON config file, and command-line flags override it.  The
resolved settings and seed are echoed to stderr as one JSON line.

Exit codes: 0 on success, 1 when ``verify`` finds a violation, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, clock, coherent, entangled, finiteset, multiphase, oracle
from .clock import ClockFamily
from .fidelity import protocol_copies
from .finiteset import StateSet
from .multiphase import MultiphaseFamily

CSV_COLUMNS = ["family", "d", "N", "K", "M", "F_econ", "F_mp", "F_naive", "bound", "ratio", "runtime_ms"]
DISTANCE_COLUMNS = ["family", "d", "N", "M", "d_in", "distance", "bound", "claimed_bound", "satisfies_bound"]
FAMILIES = ("finite", "coherent", "multiphase", "clock", "entangled")
DEFAULT_EPSILON = 1 / 3
DEFAULTS = {"epsilon": DEFAULT_EPSILON, "seed": 0, "rule": "mode", "restarts": 8, "worst_case": False, "timing": False}


class UsageError(ValueError):
    """Bad flags, config values or grids; reported with exit code 2."""


# ---------------------------------------------------------------- parsing helpers


def parse_grid(spec) -> list[int]:
    """``"5"``, ``"1,2,8"``, ``"a:b"`` / ``"a:b:linear[:step]"`` or ``"a:b:geometric[:factor]"``.

    Geometric grids start at ``a`` and multiply by ``factor`` (default 2)
    while the value stays at or below ``b``.  Lists from a config file are
    accepted as they are.
    """
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return sorted({int(v) for v in spec})
    text = str(spec).strip()
    try:
        if ":" not in text:
            values = [int(v) for v in text.split(",") if v.strip()]
        else:
            parts = text.split(":")
            lo, hi = int(parts[0]), int(parts[1])
            kind = parts[2] if len(parts) > 2 else "linear"
            if kind == "linear":
                step = int(parts[3]) if len(parts) > 3 else 1
                if step < 1:
                    raise UsageError("linear step must be positive")
                values = list(range(lo, hi + 1, step))
            elif kind == "geometric":
                factor = float(parts[3]) if len(parts) > 3 else 2.0
                if factor <= 1 or lo < 1:
                    raise UsageError("geometric grids need a start >= 1 and a factor > 1")
                values, v = [], float(lo)
                while round(v) <= hi:
                    if not values or round(v) != values[-1]:
                        values.append(round(v))
                    v *= factor
            else:
                raise UsageError(f"unknown grid kind {kind!r}")
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}: {exc}") from None
    if not values:
        raise UsageError(f"grid {spec!r} is empty")
    if min(values) < 1:
        raise UsageError(f"grid {spec!r} has values below 1")
    return sorted(set(values))


def parse_floats(spec) -> list[float] | None:
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    try:
        return [float(v) for v in str(spec).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad number list {spec!r}") from None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def _guard(fn, *args):
    """Value of ``fn(*args)``, or ``None`` where it is undefined for these arguments."""
    try:
        return fn(*args)
    except ValueError:
        return None


# ---------------------------------------------------------------- families


def _multiphase_family(cfg) -> MultiphaseFamily:
    probs = parse_floats(cfg.get("probs"))
    if probs is None:
        d = int(cfg.get("d") or 2)
        probs = [1 / d] * d
    elif cfg.get("d") is not None and int(cfg["d"]) != len(probs):
        raise UsageError(f"--d {cfg['d']} does not match {len(probs)} probabilities")
    return MultiphaseFamily(tuple(probs))


def _clock_family(cfg) -> ClockFamily:
    spectrum = cfg.get("spectrum")
    if spectrum is None:
        raise UsageError("clock needs --spectrum")
    spectrum = [int(v) for v in (spectrum if isinstance(spectrum, (list, tuple)) else str(spectrum).split(","))]
    probs = parse_floats(cfg.get("probs")) or [1 / len(spectrum)] * len(spectrum)
    return ClockFamily(tuple(spectrum), tuple(probs))


def _coherent_family(cfg):
    name = cfg.get("reference")
    if name is not None:
        return coherent.CoherentFamily.reference(name)
    return coherent.CoherentFamily.qudit(int(cfg.get("d") or 2))


def _state_set(cfg) -> StateSet:
    src = cfg.get("states")
    if src is None:
        raise UsageError("finite needs --states (a JSON file) or a 'states' entry in the config")
    if isinstance(src, dict):
        return StateSet.from_dict(src)
    if isinstance(src, list):
        return StateSet.from_dict({"states": src, "priors": cfg.get("priors"), "normalize": cfg.get("normalize", False)})
    try:
        return StateSet.from_json(src)
    except OSError as exc:
        raise UsageError(f"cannot read state set: {exc}") from None


def _ratio(naive, reference):
    if naive is None or not reference:
        return None
    return naive / reference


def _row(family, d, N, K, M, econ=None, mp=None, naive=None, bound=None, reference=None):
    return {
        "family": family,
        "d": d,
        "N": N,
        "K": K,
        "M": M,
        "F_econ": econ,
        "F_mp": mp,
        "F_naive": naive,
        "bound": bound,
        "ratio": _ratio(naive, econ if econ is not None else reference),
    }


def _point_multiphase(fam, cfg, N, K, M):
    return _row(
        "multiphase",
        fam.d,
        N,
        K,
        M,
        econ=_guard(multiphase.economical_fidelity, N, M, fam),
        mp=_guard(multiphase.mp_protocol_fidelity, N, K, M, fam),
        naive=_guard(multiphase.naive_mp_fidelity, N, M, fam),
        bound=_guard(multiphase.upper_bound, N, M, fam),
    )


def _point_clock(fam, cfg, N, K, M):
    rule = cfg["rule"]
    return _row(
        "clock",
        len(fam.spectrum),
        N,
        K,
        M,
        econ=_guard(clock.economical_fidelity, N, M, fam, rule),
        mp=_guard(clock.mp_protocol_fidelity, N, K, M, fam, rule),
        naive=_guard(clock.naive_mp_fidelity, N, M, fam, rule),
        bound=_guard(clock.upper_bound, N, M, fam),
    )


def _point_entangled(fam, cfg, N, K, M):
    K = entangled.matched_k(K, M) if K is not None else None
    if K is not None and K > M:
        K = None
    return _row(
        "entangled",
        4,
        N,
        K,
        M,
        econ=_guard(entangled.economical_fidelity, N, M),
        mp=_guard(entangled.mp_protocol_fidelity, N, K, M) if K is not None else None,
        naive=_guard(entangled.naive_mp_fidelity, N, M) if (M - N) % 2 == 0 else None,
        bound=_guard(entangled.upper_bound, N, M),
    )


def _point_coherent(fam, cfg, N, K, M):
    # the optimal cloner here is the Werner cloner; F_mp is the epsilon-protocol guarantee
    optimum = _guard(coherent.werner_fidelity, fam, N, M) if M >= N else None
    if fam.kind == "reference":
        return _row("coherent:" + fam.name, "", N, None, M, econ=optimum, bound=optimum)
    return _row(
        "coherent",
        fam.d,
        N,
        None,
        M,
        econ=optimum,
        mp=_guard(coherent.mp_epsilon_bound, fam, N, M),
        naive=_guard(coherent.naive_mp_worstcase, fam, N, M),
        bound=optimum,
    )


def _point_finite(states, cfg, N, K, M):
    # no closed-form optimum: the ratio is taken against the cloning bound
    worst = bool(cfg["worst_case"])
    naive = _guard(finiteset.naive_mp_fidelity, states, N, M, worst)
    bound = _guard(finiteset.cloning_upper_bound, states, N, M, worst) if M >= N else None
    econ = None
    if cfg.get("seesaw") and M >= N:
        omega = oracle.finite_set_fidelity_operator(states.states, states.priors, N, M)
        econ = oracle.seesaw_optimal_fidelity(omega, restarts=int(cfg["restarts"]), seed=int(cfg["seed"])).value
    return _row("finite", states.dim, N, None, M, econ=econ, naive=naive, bound=bound, reference=bound)


POINTS = {
    "multiphase": (_multiphase_family, _point_multiphase),
    "clock": (_clock_family, _point_clock),
    "entangled": (lambda cfg: entangled.EntangledFamily(), _point_entangled),
    "coherent": (_coherent_family, _point_coherent),
    "finite": (_state_set, _point_finite),
}


def _thread_count(cfg) -> int:
    limit = os.cpu_count() or 1
    env = os.environ.get("CLONEKIT_THREADS")
    if env:
        try:
            limit = max(1, int(env))
        except ValueError:
            raise UsageError(f"CLONEKIT_THREADS={env!r} is not an integer") from None
    requested = cfg.get("threads")
    return max(1, min(limit, int(requested))) if requested else limit


def run_family(family: str, cfg: dict) -> list[dict]:
    """Evaluate every (N, K, M) grid point; rows come back sorted by (N, M, K)."""
    build, point = POINTS[family]
    try:
        fam = build(cfg)
    except UsageError:
        raise
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid {family} family: {exc}") from None
    if cfg.get("n") is None or cfg.get("m") is None:
        raise UsageError("--n and --m are required")
    Ns, Ms = parse_grid(cfg["n"]), parse_grid(cfg["m"])
    Ks = parse_grid(cfg["k"]) if cfg.get("k") is not None else None
    eps = float(cfg["epsilon"])
    if not 0 <= eps < 1:
        raise UsageError("epsilon must lie in [0, 1)")
    uses_k = family in ("multiphase", "clock", "entangled")
    points = []
    for N in Ns:
        for M in Ms:
            for K in (Ks or [protocol_copies(M, eps)]) if uses_k else [None]:
                if K is None or K <= M:
                    points.append((N, K, M))
    if not points:
        raise UsageError("the grids leave no point with K <= M")

    timing = bool(cfg["timing"])

    def evaluate(p):
        t0 = time.perf_counter()
        row = point(fam, cfg, *p)
        row["runtime_ms"] = (time.perf_counter() - t0) * 1e3 if timing else None
        return row

    with ThreadPoolExecutor(_thread_count(cfg)) as pool:
        rows = list(pool.map(evaluate, points))
    return sorted(rows, key=lambda r: (r["N"], r["M"], -1 if r["K"] is None else r["K"]))


def format_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(rows: list[dict], columns: list[str], path) -> str:
    text = format_csv(rows, columns)
    if path and path != "-":
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------- distance


def _distance_channels(family: str, cfg: dict, N: int, M: int):
    if family == "multiphase":
        fam = _multiphase_family(cfg)
        v = multiphase.economical_isometry(N, M, fam).matrix()
        return fam.d, oracle.DenseChannel.from_isometry(v), oracle.mp_channel(fam, N, M)
    if family == "clock":
        fam = _clock_family(cfg)
        v = oracle.energy_shift_isometry(fam, N, M, clock.shift_e0(N, M, fam, cfg["rule"]))
        return len(fam.spectrum), oracle.DenseChannel.from_isometry(v), oracle.mp_channel(fam, N, M)
    # the bound concerns economical (isometric) cloners, so qudit families are excluded
    raise UsageError(f"distance supports multiphase and clock, not {family!r}")


def run_distance(cfg: dict) -> list[dict]:
    family = cfg.get("family") or "multiphase"
    rows = []
    for N in parse_grid(cfg.get("n") or 1):
        for M in parse_grid(cfg.get("m") or 2):
            if M < N:
                continue
            try:
                d, econ, mp = _distance_channels(family, cfg, N, M)
            except UsageError:
                raise
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            res = oracle.trace_distance_econ_vs_mp(econ, mp, seed=int(cfg["seed"]))
            rows.append(
                {
                    "family": family,
                    "d": d,
                    "N": N,
                    "M": M,
                    "d_in": econ.d_in,
                    "distance": res.distance,
                    "bound": res.bound,
                    "claimed_bound": res.claimed_bound,
                    "satisfies_bound": res.satisfies_bound,
                }
            )
    return rows


# ---------------------------------------------------------------- argparse


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("common")
    g.add_argument("--config", help="JSON file with settings; flags override it")
    g.add_argument("--output", "-o", help="CSV path (default: stdout)")
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int, help="worker threads (capped by CLONEKIT_THREADS)")
    g.add_argument("--timing", action="store_true", default=None, help="fill runtime_ms (makes output non-reproducible)")


def _grids(parser: argparse.ArgumentParser, k: bool) -> None:
    parser.add_argument("--n", help="input copies: 3, 1,2,4, 1:8 or 1:64:geometric")
    parser.add_argument("--m", help="output copies, same grid syntax")
    if k:
        parser.add_argument("--k", help="intermediate copies of the MP protocol (default ceil(M^(1-epsilon)))")
        parser.add_argument("--epsilon", type=float, help=f"protocol exponent (default {DEFAULT_EPSILON:.4g})")


def _family_flags(parser: argparse.ArgumentParser, family: str) -> None:
    if family in ("multiphase", "coherent"):
        parser.add_argument("--d", type=int, help="dimension")
    if family in ("multiphase", "clock"):
        parser.add_argument("--probs", help="comma-separated probabilities")
    if family == "clock":
        parser.add_argument("--spectrum", help="comma-separated integer energies")
        parser.add_argument("--rule", choices=clock.E0_RULES, help="energy shift rule (default mode)")
    if family == "coherent":
        parser.add_argument("--reference", choices=coherent.REFERENCE_FAMILIES, help="closed-form reference family")
    if family == "finite":
        parser.add_argument("--states", help="JSON state set")
        parser.add_argument("--worst-case", dest="worst_case", action="store_true", default=None)
        parser.add_argument("--seesaw", action="store_true", default=None, help="add the see-saw optimum as F_econ")
        parser.add_argument("--restarts", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clonekit", description="Cloning fidelities, bounds and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for family in FAMILIES:
        p = sub.add_parser(family, help=f"evaluate the {family} family on a grid")
        _common(p)
        _grids(p, family in ("multiphase", "clock", "entangled"))
        _family_flags(p, family)

    sweep = sub.add_parser("sweep", help="grid sweep over one family (same flags as the family command)")
    sweep_sub = sweep.add_subparsers(dest="family", required=True)
    for family in FAMILIES:
        p = sweep_sub.add_parser(family)
        _common(p)
        _grids(p, family in ("multiphase", "clock", "entangled"))
        _family_flags(p, family)

    dist = sub.add_parser("distance", help="trace distance between the economical cloner and its naive MP channel")
    _common(dist)
    _grids(dist, False)
    dist.add_argument("--family", choices=("multiphase", "clock"))
    for family in ("multiphase", "clock"):
        _family_flags_once(dist, family)

    ver = sub.add_parser("verify", help="run the invariant suite")
    _common(ver)
    ver.add_argument("--module", action="append", help="restrict to a module (repeatable)")
    return parser


def _family_flags_once(parser, family):
    seen = {a.dest for a in parser._actions}
    tmp = argparse.ArgumentParser(add_help=False)
    _family_flags(tmp, family)
    for action in tmp._actions:
        if action.dest not in seen:
            parser._add_action(action)
            seen.add(action.dest)


def resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    cfg.update(flags)
    for key, value in DEFAULTS.items():
        cfg.setdefault(key, value)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        print(json.dumps({"command": args.command, "config": cfg, "seed": cfg["seed"]}, sort_keys=True, default=str), file=sys.stderr)
        if args.command == "verify":
            from .verify import run_checks

            results = run_checks(cfg.get("module"), seed=int(cfg["seed"]))
            for r in results:
                print(f"{'PASS' if r.ok else 'FAIL'}  {r.module:<10} {r.name}: {r.detail}")
            failed = sum(not r.ok for r in results)
            print(f"{len(results) - failed}/{len(results)} checks passed", file=sys.stderr)
            return 1 if failed else 0
        if args.command == "distance":
            rows = run_distance(cfg)
            write_csv(rows, DISTANCE_COLUMNS, cfg.get("output"))
            return 0 if all(r["satisfies_bound"] for r in rows) else 1
        family = args.family if args.command == "sweep" else args.command
        write_csv(run_family(family, cfg), CSV_COLUMNS, cfg.get("output"))
        return 0
    except UsageError as exc:
        print(f"clonekit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
