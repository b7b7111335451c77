"""Outcome-branch enumeration and the random / fixed-angle sweeps.

For an n-qubit ladder the first m = n-3 qubits are measured.  Rather than
running 2^m separate cascades, the cluster tensor is contracted once with the
2x2 matrix of measurement bras of every measured qubit, which yields all
branch amplitudes of the three surviving qubits at once.  Branches are
ordered lexicographically by outcome string (s1 most significant), and every
average is a dot product in that order so results do not depend on how work
is split across processes.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import __version__
from .cluster import cascade_specs, ladder_edges, measurement_cascade, prepare_cluster
from .correl import concurrence_batch, discord_batch
from .errors import InputError
from .qstate import DensityMatrix, StateVector, partial_trace, xy_basis_bra

ZERO_BRANCH_TOL = 1e-14
RNG_ID = "numpy-PCG64"
THREADS_ENV = "LADDERFLOW_THREADS"

# Fixed angles phi_1..phi_{n-4} in units of pi, keyed by ladder size.
PRESETS: dict[str, dict[int, tuple[float, ...]]] = {
    "example1": {
        4: (),
        6: (0.37, 0.78),
        8: (1.5, 0.19, 0.37, 0.78),
        10: (0.24, 0.53, 1.5, 0.19, 0.37, 0.78),
    },
    "example2": {
        4: (),
        6: (1.3, 0.67),
        8: (0.95, 1.7, 1.3, 0.67),
        10: (0.59, 1.13, 0.95, 1.7, 1.3, 0.67),
    },
}


@dataclass
class SweepConfig:
    n: int
    mode: str = "random"
    samples: int = 1
    grid_points: int = 256
    preset: str | list[float] | None = None
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        ladder_edges(self.n)
        if self.mode not in ("random", "fixed", "single"):
            raise InputError(f"mode must be random, fixed or single, got {self.mode!r}")
        if int(self.samples) < 1:
            raise InputError("samples must be ≥ 1")
        if int(self.grid_points) < 1:
            raise InputError("grid_points must be ≥ 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.mode == "fixed":
            self.fixed_angles()

    def fixed_angles(self) -> list[float]:
        """phi_1..phi_{n-4} in radians for fixed mode."""
        return resolve_preset(self.preset, self.n)


@dataclass(frozen=True)
class SweepRecord:
    index: int
    angles: tuple[float, ...]
    d_meas_last: float
    d_meas_secondlast: float
    concurrence: float
    branch_count: int


@dataclass
class BranchSet:
    """All outcome branches of one angle configuration."""

    outcomes: np.ndarray  # (B, m) bits
    probabilities: np.ndarray  # (B,)
    states: np.ndarray  # (B, 2**k) normalized amplitudes of the unmeasured qubits
    labels: tuple[int, ...] = field(default=())

    def live(self) -> np.ndarray:
        return self.probabilities >= ZERO_BRANCH_TOL


def resolve_preset(preset, n: int) -> list[float]:
    if preset is None:
        if n == 4:
            return []
        raise InputError(f"fixed mode at n={n} needs a preset or explicit angle list")
    if isinstance(preset, str):
        if preset not in PRESETS:
            raise InputError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        if n not in PRESETS[preset]:
            raise InputError(f"preset {preset!r} has no angles for n={n}")
        return [math.pi * x for x in PRESETS[preset][n]]
    angles = [float(a) for a in preset]
    if len(angles) != n - 4:
        raise InputError(f"need {n - 4} fixed angles for n={n}, got {len(angles)}")
    return angles


@lru_cache(maxsize=None)
def _cluster_tensor(n: int) -> np.ndarray:
    t = prepare_cluster(ladder_edges(n)).tensor()
    t.setflags(write=False)
    return t


def enumerate_branches(n: int, angles: Sequence[float], measured: int | None = None) -> BranchSet:
    """Every outcome string for measuring qubits 1..k at ``angles`` (k = n-3 by default)."""
    ladder_edges(n)
    k = n - 3 if measured is None else int(measured)
    if not 0 <= k <= n - 1:
        raise InputError(f"cannot measure {k} of {n} qubits")
    if len(angles) < k:
        raise InputError(f"need {k} angles, got {len(angles)}")
    t = _cluster_tensor(n)
    for phi in angles[:k]:
        # axis 0 is always the next unmeasured qubit; the new outcome axis goes last
        bras = np.stack([xy_basis_bra(phi, 0), xy_basis_bra(phi, 1)])
        t = np.tensordot(t, bras, axes=([0], [1]))
    # t axes: (unmeasured qubits..., s_1, ..., s_k)
    rest = n - k
    t = np.moveaxis(t.reshape((2**rest,) + (2,) * k), 0, -1).reshape(2**k, 2**rest)
    probs = np.einsum("bi,bi->b", t.conj(), t).real
    safe = np.where(probs >= ZERO_BRANCH_TOL, probs, 1.0)
    states = t / np.sqrt(safe)[:, None]
    outcomes = (np.arange(2**k)[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1
    return BranchSet(outcomes, probs, states, tuple(range(k + 1, n + 1)))


def last_pair_matrices(states: np.ndarray) -> np.ndarray:
    """rho over the last two qubits for a stack of pure states (last two axes traced in)."""
    b, dim = states.shape
    t = states.reshape(b, dim // 4, 4)
    return np.einsum("bri,brj->bij", t, t.conj())


def branch_correlations(n: int, angles: Sequence[float], measured: int | None = None):
    """Per-branch (probabilities, d_meas_last, d_meas_secondlast, concurrence, rhos) of live branches."""
    branches = enumerate_branches(n, angles, measured)
    live = branches.live()
    rhos = last_pair_matrices(branches.states[live])
    d_last, _, _ = discord_batch(rhos, measured=1)
    d_second, _, _ = discord_batch(rhos, measured=0)
    conc = concurrence_batch(rhos)
    return branches.probabilities[live], d_last, d_second, conc, rhos


def averaged_pair_state(n: int, angles: Sequence[float], measured: int | None = None) -> DensityMatrix:
    """Outcome-averaged rho over qubits (n-1, n) after measuring qubits 1..k."""
    branches = enumerate_branches(n, angles, measured)
    live = branches.live()
    rhos = last_pair_matrices(branches.states[live])
    rho = np.einsum("b,bij->ij", branches.probabilities[live], rhos)
    return DensityMatrix((n - 1, n), rho / np.trace(rho).real)


def _averaged(n: int, angles: Sequence[float]) -> tuple[float, float, float, int]:
    p, d_last, d_second, conc, _ = branch_correlations(n, angles)
    w = p / p.sum()
    return float(w @ d_last), float(w @ d_second), float(w @ conc), int(p.size)


def outcome_averaged_correlations(n: int, angles: Sequence[float]) -> tuple[float, float, float]:
    """Probability-weighted averages over all 2^(n-3) branches.

    Returns (D_{n-1, n̄}, D_{\\overline{n-1}, n}, concurrence): the first discord
    measures qubit n, the second measures qubit n-1.
    """
    if len(angles) != n - 3:
        raise InputError(f"need {n - 3} angles for n={n}, got {len(angles)}")
    return _averaged(n, angles)[:3]


def closed_form_rho34(phi1: float, s1: int) -> DensityMatrix:
    sign = -1.0 if s1 else 1.0
    a = sign * math.cos(phi1)
    b = 1j * sign * math.sin(phi1)
    m = np.array(
        [
            [1, a, 0, b],
            [np.conj(a), 1, np.conj(b), 0],
            [0, b, 1, a],
            [np.conj(b), 0, np.conj(a), 1],
        ],
        dtype=complex,
    ) / 4
    return DensityMatrix((3, 4), m)


def simulated_rho34(phi1: float, s1: int) -> DensityMatrix:
    """rho_34 of the 4-qubit ladder after measuring qubit 1, by full simulation."""
    _, post = measurement_cascade(prepare_cluster(ladder_edges(4)), cascade_specs([phi1], [s1]))
    return partial_trace(post, [3, 4])


def _evaluate_row(args) -> tuple[float, float, float, int]:
    n, angles = args
    return _averaged(n, angles)


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def evaluate_rows(n: int, rows: Sequence[Sequence[float]], workers: int | None = None):
    """Averaged correlations for each angle row, in row order."""
    jobs = [(n, [float(a) for a in row]) for row in rows]
    workers = min(worker_count(workers), max(len(jobs), 1))
    if workers == 1:
        return [_evaluate_row(j) for j in jobs]
    chunk = max(1, len(jobs) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_row, jobs, chunksize=chunk))


def _records(rows: np.ndarray, results) -> list[SweepRecord]:
    return [
        SweepRecord(i, tuple(float(a) for a in row), d1, d2, c, bc)
        for i, (row, (d1, d2, c, bc)) in enumerate(zip(rows, results))
    ]


def random_angles(n: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(0.0, 2 * math.pi, size=(samples, n - 3))


def random_sweep(config: SweepConfig, workers: int | None = None) -> list[SweepRecord]:
    if config.mode != "random":
        raise InputError(f"random_sweep needs mode='random', got {config.mode!r}")
    rows = random_angles(config.n, int(config.samples), int(config.seed))
    records = _records(rows, evaluate_rows(config.n, rows, workers))
    if config.output_path:
        write_csv(config.output_path, records, config)
    return records


def fixed_grid(config: SweepConfig) -> np.ndarray:
    fixed = config.fixed_angles()
    last = np.arange(config.grid_points) * (2 * math.pi / config.grid_points)
    rows = np.empty((config.grid_points, config.n - 3))
    rows[:, : config.n - 4] = fixed
    rows[:, -1] = last
    return rows


def fixed_sweep(config: SweepConfig, workers: int | None = None) -> list[SweepRecord]:
    if config.mode != "fixed":
        raise InputError(f"fixed_sweep needs mode='fixed', got {config.mode!r}")
    rows = fixed_grid(config)
    records = _records(rows, evaluate_rows(config.n, rows, workers))
    if config.output_path:
        write_csv(config.output_path, records, config)
    return records


@dataclass(frozen=True)
class TrendRow:
    n: int
    max_d_meas_last: float
    max_d_meas_secondlast: float
    max_concurrence: float


def trend_report(
    preset: str, grid_points: int = 256, ns: Sequence[int] = (4, 6, 8, 10), workers: int | None = None
) -> list[TrendRow]:
    """Per ladder size, the maximum over the last-angle grid of each averaged quantity."""
    out = []
    for n in ns:
        cfg = SweepConfig(n=n, mode="fixed", grid_points=grid_points, preset=preset)
        recs = fixed_sweep(cfg, workers)
        out.append(
            TrendRow(
                n,
                max(r.d_meas_last for r in recs),
                max(r.d_meas_secondlast for r in recs),
                max(r.concurrence for r in recs),
            )
        )
    return out


def format_trend(rows: Sequence[TrendRow]) -> str:
    lines = [f"{'n':>3}  {'max D(n-1, n_bar)':>18}  {'max D(n-1_bar, n)':>18}  {'max C':>12}"]
    for r in rows:
        lines.append(
            f"{r.n:>3}  {r.max_d_meas_last:>18.6f}  {r.max_d_meas_secondlast:>18.6f}  {r.max_concurrence:>12.6f}"
        )
    return "\n".join(lines)


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _pi_units(x: float) -> str:
    return f"{x / math.pi:.17g}pi"


def header_comment(config: SweepConfig) -> str:
    rng = RNG_ID if config.mode == "random" else "none"
    line = f"# ladderflow v{__version__} seed={config.seed} n={config.n} mode={config.mode} rng={rng}"
    if config.mode == "fixed":
        name = config.preset if isinstance(config.preset, str) else "custom"
        fixed = ",".join(
            f"{x:g}pi" for x in PRESETS[config.preset][config.n]
        ) if isinstance(config.preset, str) else ",".join(_pi_units(a) for a in config.fixed_angles())
        line += f" preset={name} fixed_angles={fixed or '-'} grid={config.grid_points}"
    else:
        line += f" samples={config.samples}"
    return line


def csv_text(records: Sequence[SweepRecord], config: SweepConfig) -> str:
    m = config.n - 3
    buf = io.StringIO()
    buf.write(header_comment(config) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["index"] + [f"phi_{i}" for i in range(1, m + 1)]
        + ["d_meas_last", "d_meas_secondlast", "concurrence", "branch_count"]
    )
    for r in records:
        w.writerow(
            [r.index] + [_fmt(a) for a in r.angles]
            + [_fmt(r.d_meas_last), _fmt(r.d_meas_secondlast), _fmt(r.concurrence), r.branch_count]
        )
    return buf.getvalue()


def write_csv(path: str | os.PathLike, records: Sequence[SweepRecord], config: SweepConfig) -> None:
    """Write atomically: a temp file in the target directory is renamed over ``path``."""
    text = csv_text(records, config)
    target = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(target))
    fd, tmp = tempfile.mkstemp(prefix=".ladderflow-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path: str | os.PathLike) -> tuple[str, list[SweepRecord]]:
    """Parse a sweep CSV back into records; returns (header comment, records)."""
    with open(path, encoding="utf-8", newline="") as fh:
        comment = fh.readline().rstrip("\n")
        reader = csv.reader(fh)
        header = next(reader)
        m = len(header) - 5
        records = [
            SweepRecord(
                int(row[0]),
                tuple(float(x) for x in row[1 : 1 + m]),
                float(row[1 + m]),
                float(row[2 + m]),
                float(row[3 + m]),
                int(row[4 + m]),
            )
            for row in reader
        ]
    return comment, records


# -- single configuration ----------------------------------------------------


@dataclass
class BranchReport:
    outcomes: tuple[int, ...]
    probability: float
    rho: np.ndarray
    d_meas_last: float
    d_meas_secondlast: float
    concurrence: float
    census: tuple[int, bool] | None
    basis_last: tuple[float, float]
    basis_secondlast: tuple[float, float]


def single_configuration(
    n: int, angles: Sequence[float], outcomes: Sequence[int] | None = None, measure_first: int | None = None
) -> list[BranchReport]:
    """Detailed per-branch report; ``outcomes=None`` returns every branch."""
    from .pauli import CENSUS_MAX_QUBITS, stabilizer_census

    k = n - 3 if measure_first is None else int(measure_first)
    if not 0 <= k <= n - 3:
        raise InputError(f"measure_first must be between 0 and {n - 3}")
    if len(angles) != n - 3:
        raise InputError(f"need {n - 3} angles for n={n}, got {len(angles)}")
    if outcomes is not None:
        outcomes = [int(b) for b in outcomes]
        if len(outcomes) not in (k, n - 3) or any(b not in (0, 1) for b in outcomes):
            raise InputError(f"need {k} outcome bits, got {outcomes}")
        outcomes = outcomes[:k]

    branches = enumerate_branches(n, angles, k)
    reports = []
    for b in range(branches.probabilities.size):
        bits = tuple(int(x) for x in branches.outcomes[b])
        if outcomes is not None and list(bits) != outcomes:
            continue
        p = float(branches.probabilities[b])
        if p < ZERO_BRANCH_TOL:
            continue
        rho = last_pair_matrices(branches.states[b : b + 1])
        d1, t1, a1 = discord_batch(rho, 1)
        d2, t2, a2 = discord_batch(rho, 0)
        census = None
        if len(branches.labels) <= CENSUS_MAX_QUBITS:
            census = stabilizer_census(StateVector(branches.labels, branches.states[b]))
        reports.append(
            BranchReport(
                bits, p, rho[0], float(d1[0]), float(d2[0]), float(concurrence_batch(rho)[0]),
                census, (float(t1[0]), float(a1[0])), (float(t2[0]), float(a2[0])),
            )
        )
    if outcomes is not None and not reports:
        raise InputError(f"outcome string {outcomes} has zero probability")
    return reports
