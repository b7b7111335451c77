"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .errors import CapabilityError, InputError, NumericalFailure, ZeroProbabilityBranch

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

CONFIG_KEYS = {"n", "mode", "samples", "grid_points", "preset", "seed", "output_path"}

_ANGLE_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*(pi|π)?\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_angle(text: str) -> float:
    """Radians, or a multiple of pi with a ``pi`` suffix (``0.37pi``, ``pi``, ``-0.5pi``)."""
    m = _ANGLE_RE.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise InputError(f"cannot parse angle {text!r}")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    if not math.isfinite(value):
        raise InputError(f"angle must be finite, got {text!r}")
    return value * math.pi if m.group(2) else value


def parse_angles(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    return [parse_angle(p) for p in parts]


def parse_bits(text: str) -> list[int] | None:
    text = text.strip()
    if text == "avg":
        return None
    bits = text.replace(",", "").replace(" ", "")
    if not bits or any(c not in "01" for c in bits):
        raise InputError(f"outcomes must be 'avg' or a bit string, got {text!r}")
    return [int(c) for c in bits]


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config file must contain a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    return data


def _merged(args, file_cfg: dict, key: str, attr: str, default):
    value = getattr(args, attr, None)
    if value is not None:
        return value
    return file_cfg.get(key, default)


def _preset_value(text):
    if text is None or isinstance(text, list):
        return text
    if text in ("example1", "example2"):
        return text
    return parse_angles(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ladderflow", description="Correlations in measured ladder cluster states.")
    p.add_argument("--version", action="version", version=f"ladderflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="random-angle sweep to CSV")
    sw.add_argument("--n", type=int, default=None, help="ladder size (even, ≥ 4)")
    sw.add_argument("--samples", type=int, default=None, help="number of random angle tuples (default: 1000)")
    sw.add_argument("--seed", type=int, default=None, help="64-bit RNG seed (default: 0)")
    sw.add_argument("--out", default=None, help="output CSV path (default: no file)")
    sw.add_argument("--config", default=None, help="JSON file with SweepConfig keys; flags win")
    sw.add_argument("--threads", type=int, default=None, help="worker processes (default: $LADDERFLOW_THREADS or CPU count)")

    fx = sub.add_parser("fixed", help="fixed-angle sweep of the last measurement angle")
    fx.add_argument("--n", type=int, default=None, help="ladder size (even, ≥ 4)")
    fx.add_argument("--preset", default=None, help="example1, example2, or comma list of n-4 angles (required for n > 4)")
    fx.add_argument("--grid", type=int, default=None, help="grid points over [0, 2pi) (default: 256)")
    fx.add_argument("--out", default=None, help="output CSV path (default: no file)")
    fx.add_argument("--config", default=None, help="JSON file with SweepConfig keys; flags win")
    fx.add_argument("--threads", type=int, default=None, help="worker processes (default: $LADDERFLOW_THREADS or CPU count)")

    sg = sub.add_parser("single", help="inspect one angle configuration")
    sg.add_argument("--n", type=int, required=True, help="ladder size (even, ≥ 4)")
    sg.add_argument("--angles", required=True, help="comma list of n-3 angles (radians or e.g. 0.37pi)")
    sg.add_argument("--outcomes", default="avg", help="'avg' or a bit string such as 010 (default: avg)")
    sg.add_argument("--measure-first", type=int, default=None, help="measure only qubits 1..k (default: n-3)")

    vg = sub.add_parser("verify-generators", help="check transformed generators by simulation")
    vg.add_argument("--n", type=int, choices=(4, 6), default=6, help="ladder size (default: 6)")
    vg.add_argument("--trials", type=int, default=100, help="random angle/outcome tuples (default: 100)")
    vg.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    vg.add_argument("--verbatim", action="store_true", help="use the sums without outcome sign corrections")

    cs = sub.add_parser("census", help="stabilizer census of a cluster or post-measurement state")
    cs.add_argument("--n", type=int, required=True, help="ladder size (even, ≥ 4)")
    cs.add_argument("--angles", default=None, help="comma list of angles for qubits 1..k; omit for the bare cluster (default: none)")
    cs.add_argument("--outcomes", default=None, help="bit string for the measured qubits (default: all 0)")
    cs.add_argument("--show-strings", action="store_true", help="list the counted Pauli strings")

    tr = sub.add_parser("trend", help="max-over-grid summary for several ladder sizes")
    tr.add_argument("--preset", choices=("example1", "example2"), default="example1", help="fixed-angle table (default: example1)")
    tr.add_argument("--grid", type=int, default=256, help="grid points over [0, 2pi) (default: 256)")
    tr.add_argument("--ns", default="4,6,8,10", help="comma list of ladder sizes (default: 4,6,8,10)")
    tr.add_argument("--threads", type=int, default=None, help="worker processes (default: $LADDERFLOW_THREADS or CPU count)")
    return p


def _cmd_sweep(args) -> int:
    from .experiments import SweepConfig, random_sweep

    cfg_file = load_config(args.config)
    if cfg_file.get("mode", "random") != "random":
        raise InputError("config mode must be 'random' for the sweep command")
    config = SweepConfig(
        n=_require_n(_merged(args, cfg_file, "n", "n", None)),
        mode="random",
        samples=_merged(args, cfg_file, "samples", "samples", 1000),
        seed=_merged(args, cfg_file, "seed", "seed", 0),
        output_path=_merged(args, cfg_file, "output_path", "out", None),
    )
    records = random_sweep(config, workers=args.threads)
    _summarize(records, config.output_path)
    return EXIT_OK


def _cmd_fixed(args) -> int:
    from .experiments import SweepConfig, fixed_sweep, header_comment

    cfg_file = load_config(args.config)
    if cfg_file.get("mode", "fixed") != "fixed":
        raise InputError("config mode must be 'fixed' for the fixed command")
    config = SweepConfig(
        n=_require_n(_merged(args, cfg_file, "n", "n", None)),
        mode="fixed",
        grid_points=_merged(args, cfg_file, "grid_points", "grid", 256),
        preset=_preset_value(_merged(args, cfg_file, "preset", "preset", None)),
        seed=cfg_file.get("seed", 0),
        output_path=_merged(args, cfg_file, "output_path", "out", None),
    )
    records = fixed_sweep(config, workers=args.threads)
    print(header_comment(config))
    _summarize(records, config.output_path)
    return EXIT_OK


def _require_n(n):
    if n is None:
        raise InputError("--n is required (flag or config file)")
    from .cluster import ladder_edges

    ladder_edges(n)
    return int(n)


def _summarize(records, path) -> None:
    d1 = max(r.d_meas_last for r in records)
    d2 = max(r.d_meas_secondlast for r in records)
    c = max(r.concurrence for r in records)
    where = f" -> {path}" if path else ""
    print(f"{len(records)} records{where}")
    print(f"max D(n-1, n_bar) = {d1:.6f}  max D(n-1_bar, n) = {d2:.6f}  max C = {c:.6f}")


def _format_matrix(m: np.ndarray) -> str:
    rows = []
    for row in m:
        rows.append("  ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
    return "\n".join(rows)


def _cmd_single(args) -> int:
    from .experiments import single_configuration

    _require_n(args.n)
    angles = parse_angles(args.angles)
    outcomes = parse_bits(args.outcomes)
    reports = single_configuration(args.n, angles, outcomes, args.measure_first)
    n = args.n
    explicit = outcomes is not None
    for r in reports:
        bits = "".join(map(str, r.outcomes)) or "-"
        census = "n/a" if r.census is None else f"{r.census[0]} strings, stabilizer={r.census[1]}"
        print(f"branch s={bits}  p={r.probability:.12g}  census: {census}")
        if explicit:
            print(f"rho_{{{n - 1},{n}}} =")
            print(_format_matrix(r.rho))
        print(
            f"  D({n - 1}, {n}_bar) = {r.d_meas_last:.10f}  basis theta={r.basis_last[0]:.6f} alpha={r.basis_last[1]:.6f}"
        )
        print(
            f"  D({n - 1}_bar, {n}) = {r.d_meas_secondlast:.10f}  basis theta={r.basis_secondlast[0]:.6f} alpha={r.basis_secondlast[1]:.6f}"
        )
        print(f"  concurrence = {r.concurrence:.10f}")
    total = sum(r.probability for r in reports)
    avg = [sum(r.probability * getattr(r, k) for r in reports) / total for k in ("d_meas_last", "d_meas_secondlast", "concurrence")]
    if not explicit:
        from .experiments import averaged_pair_state

        rho = averaged_pair_state(n, angles, args.measure_first)
        print(f"average over {len(reports)} branches:")
        print(f"  rho_{{{n - 1},{n}}} =")
        print(_format_matrix(rho.entries))
        print(f"  D({n - 1}, {n}_bar) = {avg[0]:.10f}")
        print(f"  D({n - 1}_bar, {n}) = {avg[1]:.10f}")
        print(f"  concurrence = {avg[2]:.10f}")
        all_stab = all(r.census is not None and r.census[1] for r in reports)
        print(f"  census: stabilizer on every branch = {all_stab}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .cluster import cascade_specs, ladder_edges, measurement_cascade, prepare_cluster
    from .pauli import last_generator, paper_generators, pauli_expectation

    n, m = args.n, args.n - 3
    rng = np.random.Generator(np.random.PCG64(args.seed))
    cluster = prepare_cluster(ladder_edges(n))
    labels = [f"g{n}({k})" for k in range(n - 2, n + 1)]
    worst = [0.0] * 3
    worst_last = 0.0
    for _ in range(args.trials):
        angles = rng.uniform(0, 2 * math.pi, m)
        bits = rng.integers(0, 2, m)
        _, post = measurement_cascade(cluster, cascade_specs(angles, bits))
        gens = paper_generators(n, list(angles), list(bits), verbatim=args.verbatim)
        for i, g in enumerate(gens):
            worst[i] = max(worst[i], abs(pauli_expectation(post, g) - 1.0))
        worst_last = max(worst_last, abs(pauli_expectation(post, last_generator(n)) - 1.0))
    ok = True
    for name, dev in zip(labels, worst):
        status = "PASS" if dev <= 1e-10 else "FAIL"
        ok &= status == "PASS"
        print(f"{status} {name}: max |<g> - 1| = {dev:.3e} over {args.trials} trials")
    print(f"{'PASS' if worst_last <= 1e-10 else 'FAIL'} {last_generator(n).render()}: max |<g> - 1| = {worst_last:.3e}")
    ok &= worst_last <= 1e-10
    return EXIT_OK if ok else EXIT_NUMERIC


def _cmd_census(args) -> int:
    from .cluster import cascade_specs, ladder_edges, measurement_cascade, prepare_cluster
    from .pauli import census_strings, stabilizer_census

    state = prepare_cluster(ladder_edges(args.n))
    if args.angles:
        angles = parse_angles(args.angles)
        bits = parse_bits(args.outcomes) if args.outcomes else [0] * len(angles)
        if bits is None or len(bits) != len(angles):
            raise InputError("census needs one outcome bit per angle")
        if len(angles) > args.n - 1:
            raise InputError(f"at most {args.n - 1} qubits can be measured")
        prob, state = measurement_cascade(state, cascade_specs(angles, bits))
        print(f"branch probability = {prob:.12g}")
    count, is_stab = stabilizer_census(state)
    print(f"qubits {list(state.labels)}: {count} of {2 ** state.num_qubits} expected strings, stabilizer={is_stab}")
    if args.show_strings:
        for s in census_strings(state):
            print("  " + s.render(state.labels))
    return EXIT_OK


def _cmd_trend(args) -> int:
    from .experiments import format_trend, trend_report

    ns = [int(x) for x in args.ns.split(",") if x.strip()]
    for n in ns:
        _require_n(n)
    rows = trend_report(args.preset, grid_points=args.grid, ns=ns, workers=args.threads)
    print(f"preset {args.preset}, grid {args.grid}")
    print(format_trend(rows))
    return EXIT_OK


COMMANDS = {
    "sweep": _cmd_sweep,
    "fixed": _cmd_fixed,
    "single": _cmd_single,
    "verify-generators": _cmd_verify,
    "census": _cmd_census,
    "trend": _cmd_trend,
}


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, ZeroProbabilityBranch) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, CapabilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
