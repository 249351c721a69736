"""
Command-line entry point

    secure-logreg gen-data --records 1000000 --features 6 --institutions 6 --seed 7
    secure-logreg fit --data data/institution-*.csv --lambda 1 --transcript run.jsonl
    secure-logreg compare --data pooled.csv --partition 5
    secure-logreg bench-scaling --sweep 5 10 25 50 100
    secure-logreg replay --manifest results/manifest.json

Exit codes: 0 ok, 1 unexpected, 2 configuration, 3 data, 4 convergence, 5 parity.
"""
import argparse
import json
import logging
import sys
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from secure_logreg import __version__
from secure_logreg.config import get_settings
from secure_logreg.data import (
    SyntheticSpec,
    TabularSource,
    file_checksum,
    generate_synthetic,
    load_csv,
    partition_horizontal,
    write_institution_csvs,
)
from secure_logreg.errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    FieldOverflowError,
    NotConvergedError,
    RegressionError,
    SecureLogRegError,
)
from secure_logreg.protocol import ProtocolConfig, run_protocol
from secure_logreg.regression import centralized_fit
from secure_logreg.report import (
    DEFAULT_SWEEP,
    parity_report,
    run_scaling_sweep,
    write_deviance_trace,
    write_fit_result,
    write_parity_report,
    write_scaling_csv,
)
from secure_logreg.transcript import Transcript
from secure_logreg.types import LocalDataset

logger = logging.getLogger("secure_logreg.cli")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_PARITY = 5

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """
    Everything needed to re-run a command: argv, resolved config, seeds and
    the checksums of its outputs

    `outputs` holds checksums of deterministic artifacts only; files that embed
    wall-clock fields are listed in `timed_outputs` without a checksum.
    """
    command: str
    argv: list[str]
    config: dict[str, Any]
    seeds: dict[str, int]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    timed_outputs: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add_output(self, path: Path, timed: bool = False) -> None:
        if timed:
            self.timed_outputs.append(str(path))
        else:
            self.outputs[str(path)] = file_checksum(path)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / MANIFEST_NAME
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, ensure_ascii=False)
            f.write("\n")
        return path

    @classmethod
    def read(cls, path: str | Path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as f:
            return cls(**json.load(f))


def _protocol_flags() -> argparse.ArgumentParser:
    """Flags shared by every command that runs the secure protocol; None means 'use Settings'"""
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("protocol")
    g.add_argument("--lambda", dest="lam", type=float, help="ridge penalty λ")
    g.add_argument("--tol", type=float, help="|ΔDev| convergence tolerance (default 1e-10)")
    g.add_argument("--max-iter", type=int)
    g.add_argument("--threshold", type=int, help="t: shares needed to reconstruct")
    g.add_argument("--centers", type=int, help="w: number of computation centers")
    g.add_argument("--scale-bits", dest="scale_exponent", type=int, help="fixed-point scale exponent s")
    g.add_argument("--modulus", type=int, help="prime field modulus p")
    g.add_argument("--share-policy", choices=["gradient-only", "all"])
    g.add_argument("--seed", type=int, help="share randomness seed")
    g.add_argument("--quorum", type=int, nargs="+", help="center ids that finalize (>= t of them)")
    g.add_argument("--workers", type=int, help="threads for institution rounds and center aggregation")
    g.add_argument("--no-penalize-intercept", dest="penalize_intercept", action="store_const", const=False)
    return p


def _data_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("data")
    g.add_argument("--data", type=Path, nargs="+", required=True, help="CSV files, one per institution")
    g.add_argument("--response", default="y")
    g.add_argument("--covariates", nargs="+")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--partition", type=int, help="pool all files, then split into this many institutions")
    g.add_argument("--partition-seed", type=int, default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING (default from SECURE_LOGREG_LOG_LEVEL)")

    parser = argparse.ArgumentParser(
        prog="secure-logreg",
        description="Secure multi-institution L2-regularized logistic regression (Shamir secret sharing)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", parents=[common], help="generate a synthetic consortium")
    gen.add_argument("--records", type=int, required=True)
    gen.add_argument("--features", type=int, required=True, help="d, intercept included")
    gen.add_argument("--institutions", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--mu", type=float, default=0.0)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--beta-range", type=float, nargs=2, default=(-1.0, 1.0), metavar=("LO", "HI"))
    gen.add_argument("--out-dir", type=Path, default=Path("data"))

    fit = sub.add_parser("fit", parents=[common, _data_flags(), _protocol_flags()], help="federated fit")
    fit.add_argument("--transcript", type=Path, help="write the message transcript as JSONL")
    fit.add_argument("--out-dir", type=Path, default=Path("results"))

    cmp_ = sub.add_parser(
        "compare", parents=[common, _data_flags(), _protocol_flags()], help="federated vs centralized parity"
    )
    cmp_.add_argument("--parity-threshold", type=float)
    cmp_.add_argument("--transcript", type=Path)
    cmp_.add_argument("--out-dir", type=Path, default=Path("results"))

    bench = sub.add_parser("bench-scaling", parents=[common, _protocol_flags()], help="institution-count sweep")
    bench.add_argument("--sweep", type=int, nargs="+", default=list(DEFAULT_SWEEP))
    bench.add_argument("--records-per-institution", type=int, default=10_000)
    bench.add_argument("--features", type=int, default=6, help="d, intercept included")
    bench.add_argument("--data-seed", type=int, default=0)
    bench.add_argument("--out-dir", type=Path, default=Path("results"))

    replay = sub.add_parser("replay", parents=[common], help="re-run a command from its manifest")
    replay.add_argument("--manifest", type=Path, required=True)
    return parser


def protocol_config(args: argparse.Namespace) -> ProtocolConfig:
    return ProtocolConfig.from_settings(
        lam=args.lam,
        tol=args.tol,
        max_iter=args.max_iter,
        threshold=args.threshold,
        centers=args.centers,
        scale_exponent=args.scale_exponent,
        modulus=args.modulus,
        share_policy=args.share_policy,
        rng_seed=args.seed,
        quorum=args.quorum,
        workers=args.workers,
        penalize_intercept=args.penalize_intercept,
    )


def load_datasets(args: argparse.Namespace) -> list[LocalDataset]:
    """All input files are read before any output is written"""
    datasets = [
        load_csv(TabularSource(path, args.response, args.covariates, args.delimiter))
        for path in args.data
    ]
    if args.partition is not None:
        return partition_horizontal(LocalDataset.concat(datasets), args.partition, args.partition_seed)
    ids = [ds.institution_id for ds in datasets]
    if len(set(ids)) != len(ids):
        datasets = [LocalDataset(ds.X, ds.y, f"{ds.institution_id}-{j}") for j, ds in enumerate(datasets)]
    return datasets


def _manifest(args: argparse.Namespace, argv: Sequence[str], config: dict[str, Any], seeds: dict[str, int]) -> RunManifest:
    inputs = {str(p): file_checksum(p) for p in getattr(args, "data", None) or []}
    return RunManifest(command=args.command, argv=list(argv), config=config, seeds=seeds, inputs=inputs)


def cmd_gen_data(args: argparse.Namespace, argv: Sequence[str]) -> int:
    spec = SyntheticSpec.even(
        records=args.records,
        d=args.features,
        institutions=args.institutions,
        mu=args.mu,
        sigma=args.sigma,
        beta_range=tuple(args.beta_range),
        seed=args.seed,
    )
    datasets, true_beta = generate_synthetic(spec)
    manifest = _manifest(args, argv, spec.to_dict(), {"data": args.seed})
    for path in write_institution_csvs(datasets, args.out_dir):
        manifest.add_output(path)
    manifest.extra = {"spec": spec.to_dict(), "true_beta": [float(b) for b in true_beta]}
    manifest.write(args.out_dir)
    print(f"✅ {spec.S} file(s), {spec.records} records → {args.out_dir}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, argv: Sequence[str]) -> int:
    cfg = protocol_config(args)
    datasets = load_datasets(args)
    transcript = Transcript()
    result = run_protocol(datasets, cfg, transcript)

    out_dir: Path = args.out_dir
    manifest = _manifest(args, argv, cfg.to_dict(), {"protocol": cfg.rng_seed, "partition": args.partition_seed})
    manifest.add_output(write_fit_result(result, out_dir / "fit.json", {"config": cfg.to_dict()}), timed=True)
    manifest.add_output(write_deviance_trace(result.deviance_trace, out_dir / "deviance.csv"))
    if args.transcript:
        manifest.add_output(transcript.write_jsonl(args.transcript), timed=True)
    manifest.write(out_dir)

    print(json.dumps({k: v for k, v in result.to_dict().items() if k != "deviance_trace"}, indent=2))
    if not result.converged:
        logger.error(f"❌ [CLI] no convergence after {result.iterations} iterations")
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, argv: Sequence[str]) -> int:
    cfg = protocol_config(args)
    threshold = args.parity_threshold if args.parity_threshold is not None else get_settings().parity_threshold
    datasets = load_datasets(args)
    transcript = Transcript()
    federated = run_protocol(datasets, cfg, transcript)
    central = centralized_fit(datasets, cfg.lam, cfg.tol, cfg.max_iter, cfg.penalize_intercept)
    report = parity_report(
        federated.beta, central.beta, threshold,
        federated_iterations=federated.iterations, central_iterations=central.iteration,
    )

    out_dir: Path = args.out_dir
    manifest = _manifest(args, argv, {**cfg.to_dict(), "parity_threshold": threshold},
                         {"protocol": cfg.rng_seed, "partition": args.partition_seed})
    manifest.add_output(write_parity_report(report, out_dir / "parity.json"))
    if args.transcript:
        manifest.add_output(transcript.write_jsonl(args.transcript), timed=True)
    manifest.write(out_dir)

    print(json.dumps({"max_abs_diff": report.max_abs_diff, "r_squared": report.r_squared, "passed": report.passed}))
    if not (federated.converged and central.converged):
        return EXIT_CONVERGENCE
    return EXIT_OK if report.passed else EXIT_PARITY


def cmd_bench_scaling(args: argparse.Namespace, argv: Sequence[str]) -> int:
    cfg = protocol_config(args)
    points = run_scaling_sweep(args.sweep, args.records_per_institution, args.features, cfg, args.data_seed)
    manifest = _manifest(args, argv, cfg.to_dict(), {"protocol": cfg.rng_seed, "data": args.data_seed})
    manifest.add_output(write_scaling_csv(points, args.out_dir / "scaling.csv"), timed=True)
    manifest.write(args.out_dir)
    print(f"✅ {len(points)} sweep point(s) → {args.out_dir / 'scaling.csv'}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Re-run the recorded argv and verify the deterministic outputs byte for byte"""
    manifest = RunManifest.read(args.manifest)
    logger.info(f"🔁 [CLI] replaying '{manifest.command}' recorded at {manifest.created_at}")
    code = main(manifest.argv)
    if code != EXIT_OK:
        return code
    mismatched = [
        path for path, digest in manifest.outputs.items()
        if not Path(path).is_file() or file_checksum(path) != digest
    ]
    for path in mismatched:
        logger.error(f"❌ [CLI] replay output differs: {path}")
    if mismatched:
        return EXIT_UNEXPECTED
    print(f"✅ {len(manifest.outputs)} output(s) reproduced bit-identically")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "bench-scaling": cmd_bench_scaling,
    "replay": cmd_replay,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigError, FieldOverflowError)):
        return EXIT_CONFIG
    if isinstance(error, (DataError, DimensionMismatchError, OSError)):
        return EXIT_DATA
    if isinstance(error, (NotConvergedError, RegressionError)):
        return EXIT_CONVERGENCE
    return EXIT_UNEXPECTED


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or get_settings().log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return COMMANDS[args.command](args, argv)
    except SecureLogRegError as e:
        code = exit_code_for(e)
        logger.error(f"❌ [CLI] {type(e).__name__}: {e}")
        for note in getattr(e, "__notes__", []):
            logger.error(f"   ↳ {note}")
        return code
    except OSError as e:
        logger.error(f"❌ [CLI] {e}")
        return EXIT_DATA
    except Exception:
        logger.exception("❌ [CLI] unexpected error")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
