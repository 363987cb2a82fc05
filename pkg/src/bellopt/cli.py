"""Command-line driver: single-N runs, sweeps over N, verification, spin-1 case.

Commands write one self-certifying record per optimization: the stored
settings are sufficient to rebuild the probability table, re-solve the
threshold LP and confirm the stored value, which is what ``verify`` does.

Exit status: 0 success, 1 usage error, 2 integrity or verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .lhv import critical_noise_fraction, verify_lhv_model
from .quantum import (
    ObservableParams,
    PhaseSettings,
    SgDirections,
    probability_table_general,
    probability_table_multiport,
    probability_table_sg_spin1,
    unitary_from_params,
)
from .search import (
    AmoebaConfig,
    SearchResult,
    optimize_general,
    optimize_multiport,
    optimize_sg_spin1,
)

MIN_DIM = 2
MAX_DIM = 12  # dense LP columns grow as N**4; 12**4 is still desk scale

_CSV_COLUMNS = [
    "n",
    "model",
    "f_max",
    "separability_bound",
    "evaluations",
    "lp_solves",
    "wall_time_seconds",
    "seed",
    "settings",
]

# splitmix64 increment; per-N sweep seeds are base_seed XOR (N * this), mod 2**64
_SEED_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2


class UsageError(ValueError):
    """Bad flags or malformed input files."""


class IntegrityError(RuntimeError):
    """A produced or stored record failed recertification."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 0
    n_min: int = 0
    n_max: int = 0
    model: str = "multiport"
    restarts: int = 20
    seed: int = 1
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise UsageError("--restarts must be at least 1")
        if self.model not in ("multiport", "general"):
            raise UsageError(f"unknown model {self.model!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")


@dataclass(frozen=True)
class ResultRecord:
    n: int
    model: str
    f_max: float
    separability_bound: float
    evaluations: int
    lp_solves: int
    wall_time_seconds: float
    seed: int
    settings: tuple[float, ...] = field(default_factory=tuple)


def _check_dim(n: int) -> int:
    if not MIN_DIM <= n <= MAX_DIM:
        raise UsageError(f"dimension must lie in {MIN_DIM}..{MAX_DIM}, got {n}")
    return n


def sweep_seed(base_seed: int, n: int) -> int:
    """Independent per-N seed: base XOR the n-th splitmix64 increment."""
    return (base_seed ^ ((n * _SEED_GAMMA) & _MASK64)) & _MASK64


def _flatten_settings(result: SearchResult, model: str) -> tuple[float, ...]:
    s = result.best_settings
    if model == "multiport":
        return tuple(np.concatenate([s.phases_a.ravel(), s.phases_b.ravel()]).tolist())
    if model == "general":
        return tuple(np.concatenate([p.params for p in s]).tolist())
    return tuple(np.concatenate([s.dir_a.ravel(), s.dir_b.ravel()]).tolist())


def rebuild_table(record: ResultRecord):
    """Reconstruct the probability table from a record's stored settings."""
    angles = np.asarray(record.settings, dtype=float)
    n = record.n
    if record.model == "multiport":
        if angles.size != 4 * n:
            raise UsageError(f"multiport record needs {4 * n} angles, found {angles.size}")
        phases = angles.reshape(4, n)
        return probability_table_multiport(PhaseSettings(n, phases[:2], phases[2:]))
    if record.model == "general":
        block = n**2 - 1
        if angles.size != 4 * block:
            raise UsageError(f"general record needs {4 * block} parameters, found {angles.size}")
        mats = [
            unitary_from_params(ObservableParams(n, angles[i * block : (i + 1) * block]))
            for i in range(4)
        ]
        return probability_table_general(*mats)
    if record.model == "stern-gerlach":
        if angles.size != 8:
            raise UsageError(f"stern-gerlach record needs 8 angles, found {angles.size}")
        return probability_table_sg_spin1(SgDirections(angles[:4].reshape(2, 2), angles[4:].reshape(2, 2)))
    raise UsageError(f"unknown model {record.model!r}")


def _certified_record(result: SearchResult, n: int, model: str, wall_time: float) -> ResultRecord:
    record = ResultRecord(
        n=n,
        model=model,
        f_max=result.best_f,
        separability_bound=n / (n + 1),
        evaluations=result.evaluations,
        # one LP solve per objective evaluation, one inside the search's own
        # recertification, one for the record certification below
        lp_solves=result.evaluations + 2,
        wall_time_seconds=wall_time,
        seed=result.seed,
        settings=_flatten_settings(result, model),
    )
    table = rebuild_table(record)
    threshold = critical_noise_fraction(table)
    residual = verify_lhv_model(threshold, table)
    if residual >= 1e-8:
        raise IntegrityError(f"certification residual {residual:.3e} exceeds 1e-8")
    if abs(threshold.f_min - record.f_max) > 1e-9:
        raise IntegrityError(
            f"rebuilt threshold {threshold.f_min!r} does not match optimizer value {record.f_max!r}"
        )
    if not record.f_max < record.separability_bound:
        raise IntegrityError(
            f"threshold {record.f_max} reached the separability bound {record.separability_bound}"
        )
    return record


def cmd_run(cfg: RunConfig) -> ResultRecord:
    """Optimize one dimension with one observable family; certify and record."""
    n = _check_dim(cfg.n)
    amoeba = AmoebaConfig(restarts=cfg.restarts, seed=cfg.seed)
    start = time.perf_counter()
    if cfg.model == "multiport":
        result = optimize_multiport(n, amoeba)
    else:
        result = optimize_general(n, amoeba)
    return _certified_record(result, n, cfg.model, time.perf_counter() - start)


def cmd_sweep(cfg: RunConfig) -> list[ResultRecord]:
    """One record per N over the requested range, seeds split per N."""
    if not MIN_DIM <= cfg.n_min <= cfg.n_max <= MAX_DIM:
        raise UsageError(
            f"sweep range must satisfy {MIN_DIM} <= n-min <= n-max <= {MAX_DIM}, "
            f"got {cfg.n_min}..{cfg.n_max}"
        )
    records = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        run_cfg = RunConfig(
            command="run",
            n=n,
            model=cfg.model,
            restarts=cfg.restarts,
            seed=sweep_seed(cfg.seed, n),
            output_path=None,
            format=cfg.format,
        )
        records.append(cmd_run(run_cfg))
    for earlier, later in zip(records, records[1:]):
        if later.f_max <= earlier.f_max - 1e-4:
            print(
                f"warning: f_max decreased from n={earlier.n} ({earlier.f_max:.6f}) "
                f"to n={later.n} ({later.f_max:.6f}); consider more restarts",
                file=sys.stderr,
            )
    return records


def cmd_sg3(cfg: RunConfig) -> ResultRecord:
    """Optimize the two spin-1 Stern-Gerlach analyzers scenario."""
    amoeba = AmoebaConfig(restarts=cfg.restarts, seed=cfg.seed)
    start = time.perf_counter()
    result = optimize_sg_spin1(amoeba)
    return _certified_record(result, 3, "stern-gerlach", time.perf_counter() - start)


def cmd_verify(path: str) -> list[str]:
    """Recompute every stored record's threshold; returns mismatch reports."""
    records = read_records(path)
    if not records:
        raise UsageError(f"no records found in {path}")
    failures = []
    for index, record in enumerate(records):
        table = rebuild_table(record)
        threshold = critical_noise_fraction(table)
        if abs(threshold.f_min - record.f_max) > 1e-6:
            failures.append(
                f"record {index} (n={record.n}, model={record.model}): "
                f"stored f_max={record.f_max:.9f}, recomputed {threshold.f_min:.9f}"
            )
    return failures


def _format_float(value: float) -> str:
    return format(value, ".17g")


def write_records(records: list[ResultRecord], path_or_stream, fmt: str) -> None:
    close = False
    if isinstance(path_or_stream, str):
        stream = open(path_or_stream, "w", newline="")
        close = True
    else:
        stream = path_or_stream
    try:
        if fmt == "csv":
            writer = csv.writer(stream)
            writer.writerow(_CSV_COLUMNS)
            for r in records:
                writer.writerow(
                    [
                        r.n,
                        r.model,
                        _format_float(r.f_max),
                        _format_float(r.separability_bound),
                        r.evaluations,
                        r.lp_solves,
                        _format_float(r.wall_time_seconds),
                        r.seed,
                        ";".join(_format_float(a) for a in r.settings),
                    ]
                )
        else:
            payload = [
                {
                    "n": r.n,
                    "model": r.model,
                    "f_max": r.f_max,
                    "separability_bound": r.separability_bound,
                    "evaluations": r.evaluations,
                    "lp_solves": r.lp_solves,
                    "wall_time_seconds": r.wall_time_seconds,
                    "seed": r.seed,
                    "settings": list(r.settings),
                }
                for r in records
            ]
            json.dump(payload, stream, indent=2)
            stream.write("\n")
    finally:
        if close:
            stream.close()


def _record_from_fields(fields: dict) -> ResultRecord:
    try:
        settings = fields["settings"]
        if isinstance(settings, str):
            settings = tuple(float(a) for a in settings.split(";") if a) if settings else ()
        else:
            settings = tuple(float(a) for a in settings)
        return ResultRecord(
            n=int(fields["n"]),
            model=str(fields["model"]),
            f_max=float(fields["f_max"]),
            separability_bound=float(fields["separability_bound"]),
            evaluations=int(fields["evaluations"]),
            lp_solves=int(fields["lp_solves"]),
            wall_time_seconds=float(fields["wall_time_seconds"]),
            seed=int(fields["seed"]),
            settings=settings,
        )
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed record: {exc}") from exc


def read_records(path: str) -> list[ResultRecord]:
    """Load records from a CSV or JSON file written by this tool."""
    try:
        with open(path) as stream:
            text = stream.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise UsageError(f"{path} is empty")
    if text.lstrip().startswith("["):
        try:
            payload = json.loads(text)
        except ValueError as exc:
            raise UsageError(f"{path} is not valid JSON: {exc}") from exc
        return [_record_from_fields(f) for f in payload]
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames != _CSV_COLUMNS:
        raise UsageError(f"{path} does not have the expected CSV header")
    return [_record_from_fields(row) for row in reader]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="bellopt",
        description="Critical noise thresholds for local realism with entangled N-level systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_model: bool):
        if with_model:
            p.add_argument("--model", choices=("multiport", "general"), default="multiport")
        p.add_argument("--restarts", type=int, default=20)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", dest="output_path", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    run = sub.add_parser("run", help="optimize a single dimension")
    run.add_argument("--n", type=int, required=True)
    add_common(run, with_model=True)

    sweep = sub.add_parser("sweep", help="optimize a range of dimensions")
    sweep.add_argument("--n-min", type=int, default=2)
    sweep.add_argument("--n-max", type=int, default=9)
    add_common(sweep, with_model=True)

    verify = sub.add_parser("verify", help="recertify a results file")
    verify.add_argument("path")

    sg3 = sub.add_parser("sg3", help="two spin-1 Stern-Gerlach analyzers on a singlet")
    add_common(sg3, with_model=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            failures = cmd_verify(args.path)
            if failures:
                for line in failures:
                    print(line, file=sys.stderr)
                return EXIT_INTEGRITY
            print("all records verified")
            return EXIT_OK

        if args.command == "run":
            cfg = RunConfig(
                command="run",
                n=args.n,
                model=args.model,
                restarts=args.restarts,
                seed=args.seed,
                output_path=args.output_path,
                format=args.format,
            )
            records = [cmd_run(cfg)]
        elif args.command == "sweep":
            cfg = RunConfig(
                command="sweep",
                n_min=args.n_min,
                n_max=args.n_max,
                model=args.model,
                restarts=args.restarts,
                seed=args.seed,
                output_path=args.output_path,
                format=args.format,
            )
            records = cmd_sweep(cfg)
        else:  # sg3
            cfg = RunConfig(
                command="sg3",
                restarts=args.restarts,
                seed=args.seed,
                output_path=args.output_path,
                format=args.format,
            )
            records = [cmd_sg3(cfg)]

        if cfg.output_path:
            write_records(records, cfg.output_path, cfg.format)
        else:
            write_records(records, sys.stdout, cfg.format)
        return EXIT_OK
    except UsageError as exc:
        print(f"bellopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrityError as exc:
        print(f"bellopt: integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
