"""Command line pipeline: analyze, prune, restore, report, count-params.

Every subcommand is deterministic: identical input bytes and flags produce
identical output bytes, including across different ``--partitions`` values
(report timestamps honor SOURCE_DATE_EPOCH). Errors print a single
``CODE: message`` line on stderr; exit codes are a stable contract:

    0  success
    1  internal error
    2  input parse or validation failure
    3  shape or consistency mismatch
    4  output exists (no --force) or is unwritable
    5  missing input file

Set ``DEP_LOG=debug|info|warning|error`` to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import formats
from .analysis import coverage_ratio, find_unused_tokens, fit_heaps, growth_curve
from .embeddings import prune_embeddings, restore_embeddings
from .errors import (
    DegenerateFit,
    DepError,
    InconsistentInputs,
    InsufficientPoints,
    MissingInput,
    OutputExists,
    RemapInconsistent,
    ShapeMismatch,
    UnwritableOutput,
)
from .metrics import count_params, param_breakdown, report_from_counts
from .vocab import RemapOrdering, apply_remap, build_remap, scan_dataset_parallel

log = logging.getLogger("dep")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_SHAPE = 3
EXIT_OUTPUT = 4
EXIT_MISSING = 5

_EXIT_BY_CODE = {
    "BAD_MAGIC": EXIT_PARSE,
    "BAD_FORMAT": EXIT_PARSE,
    "UNSUPPORTED_VERSION": EXIT_PARSE,
    "OUT_OF_RANGE_TOKEN": EXIT_PARSE,
    "UNMAPPED_TOKEN": EXIT_PARSE,
    "KEEP_TOKEN_OUT_OF_RANGE": EXIT_PARSE,
    "INVALID_COUNTS": EXIT_PARSE,
    "INSUFFICIENT_POINTS": EXIT_PARSE,
    "DEGENERATE_FIT": EXIT_PARSE,
    "SHAPE_MISMATCH": EXIT_SHAPE,
    "VOCAB_SIZE_MISMATCH": EXIT_SHAPE,
    "REMAP_INCONSISTENT": EXIT_SHAPE,
    "INCONSISTENT_INPUTS": EXIT_SHAPE,
    "OUTPUT_EXISTS": EXIT_OUTPUT,
    "UNWRITABLE_OUTPUT": EXIT_OUTPUT,
    "MISSING_INPUT": EXIT_MISSING,
}


def _default_partitions() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved inputs for one subcommand invocation."""

    out_dir: Path | None = None
    dataset: Path | None = None
    embeddings: Path | None = None
    learned: Path | None = None
    remap: Path | None = None
    model_config: Path | None = None
    vocab_size: int | None = None
    ordering: RemapOrdering = RemapOrdering.ASCENDING_ID
    keep_tokens: tuple[int, ...] = ()
    partitions: int = field(default_factory=_default_partitions)
    checkpoints: str = "pow2"
    force: bool = False

    def __post_init__(self) -> None:
        if self.partitions < 1:
            raise ValueError("partitions must be >= 1")


def _require_exists(path: Path) -> Path:
    if not Path(path).is_file():
        raise MissingInput(path)
    return Path(path)


def _output_path(cfg: PipelineConfig, name: str) -> Path:
    path = cfg.out_dir / name
    if path.exists() and not cfg.force:
        raise OutputExists(path)
    return path


def _write(writer, payload, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        writer(payload, path)
    except OSError as err:
        raise UnwritableOutput(path, str(err)) from None
    log.info("wrote %s", path)
    return path


def _load_dataset(cfg: PipelineConfig, default_vocab: int | None = None):
    path = _require_exists(cfg.dataset)
    vocab = cfg.vocab_size
    if vocab is None and str(path).endswith(".txt"):
        vocab = default_vocab
    return formats.read_dataset(path, vocab)


def cmd_analyze(cfg: PipelineConfig) -> int:
    dataset = _load_dataset(cfg)
    freqs = scan_dataset_parallel(dataset, cfg.partitions)
    coverage = coverage_ratio(freqs) if freqs.vocab_size >= 1 else 0.0
    curve = growth_curve(dataset, cfg.checkpoints)
    try:
        fit = fit_heaps(curve)
        heaps = {"k": fit.k, "beta": fit.beta, "rmse_log": fit.rmse_log}
    except (InsufficientPoints, DegenerateFit):
        heaps = None
    unused = find_unused_tokens(freqs)
    used = freqs.used_ids
    used_counts = freqs.counts[used].astype("int64")
    top_order = (-used_counts).argsort(kind="stable")[:10]  # ties stay id-ascending
    stats = {
        "dataset": str(cfg.dataset),
        "vocab_size": freqs.vocab_size,
        "num_sequences": dataset.num_sequences,
        "total_tokens": freqs.total_tokens,
        "used_tokens": freqs.used_count,
        "coverage_ratio": coverage,
        "top_tokens": [[int(used[i]), int(used_counts[i])] for i in top_order],
        "heaps_fit": heaps,
        "unused_token_count": int(unused.size),
        "unused_tokens": [int(t) for t in unused],
    }
    stats_path = _output_path(cfg, "stats.json")
    csv_path = _output_path(cfg, "growth.csv")
    _write(formats.write_json, stats, stats_path)
    _write(formats.write_growth_csv, curve, csv_path)
    print(
        f"analyzed {dataset.num_sequences} sequences, {freqs.total_tokens} tokens: "
        f"{freqs.used_count}/{freqs.vocab_size} ids used (coverage {coverage:.4f})"
    )
    return EXIT_OK


def cmd_prune(cfg: PipelineConfig) -> int:
    matrix = formats.read_embeddings(_require_exists(cfg.embeddings))
    dataset = _load_dataset(cfg, default_vocab=matrix.rows)
    if dataset.vocab_size != matrix.rows:
        raise ShapeMismatch(
            f"dataset vocab_size {dataset.vocab_size} does not match "
            f"embedding matrix rows {matrix.rows}"
        )
    freqs = scan_dataset_parallel(dataset, cfg.partitions)
    remap = build_remap(freqs, cfg.ordering, cfg.keep_tokens)
    pruned = prune_embeddings(matrix, remap)
    remapped = apply_remap(dataset, remap)
    dataset_name = "pruned_dataset.txt" if str(cfg.dataset).endswith(".txt") else "pruned_dataset.dept"
    emb_path = _output_path(cfg, "pruned_embeddings.depe")
    remap_path = _output_path(cfg, "remap.json")
    data_path = _output_path(cfg, dataset_name)
    _write(formats.write_embeddings, pruned, emb_path)
    _write(formats.write_remap, remap, remap_path)
    _write(formats.write_dataset, remapped, data_path)
    print(
        f"pruned embeddings {matrix.rows} -> {pruned.rows} rows "
        f"(kept {remap.reduced_size}, ordering {remap.ordering.value})"
    )
    return EXIT_OK


def cmd_restore(cfg: PipelineConfig) -> int:
    original = formats.read_embeddings(_require_exists(cfg.embeddings))
    learned = formats.read_embeddings(_require_exists(cfg.learned))
    remap = formats.read_remap(_require_exists(cfg.remap))
    if remap.original_vocab_size != original.rows:
        raise RemapInconsistent(
            f"remap covers vocab_size {remap.original_vocab_size} but the original "
            f"matrix has {original.rows} rows"
        )
    restored = restore_embeddings(original, learned, remap)
    out_path = _output_path(cfg, "restored_embeddings.depe")
    _write(formats.write_embeddings, restored, out_path)
    print(f"restored {learned.rows} learned rows into {restored.rows}-row matrix")
    return EXIT_OK


def cmd_report(cfg: PipelineConfig) -> int:
    remap = formats.read_remap(_require_exists(cfg.remap))
    config = formats.read_model_config(_require_exists(cfg.model_config))
    if config.vocab_size != remap.original_vocab_size:
        raise InconsistentInputs(
            "model config vocab_size", config.vocab_size,
            "remap original_vocab_size", remap.original_vocab_size,
        )
    report = report_from_counts(remap.original_vocab_size, remap.reduced_size, config)
    out_path = _output_path(cfg, "report.json")
    _write(formats.write_report, report, out_path)
    print(
        f"{report.config_name}: pr_emb {100 * report.pr_emb:.1f}%, "
        f"pr_all {100 * report.pr_all:.1f}%, {report.bytes_saved} bytes saved"
    )
    return EXIT_OK


def cmd_count_params(cfg: PipelineConfig) -> int:
    config = formats.read_model_config(_require_exists(cfg.model_config))
    params = count_params(config)
    payload = {
        "name": config.name,
        "n_total": params.n_total,
        "n_emb": params.n_emb,
        "poep": params.poep,
        "poep_pct": round(100.0 * params.poep, 1),
        "breakdown": param_breakdown(config),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _parse_keep(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(field) for field in text.split(",") if field.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError("--keep expects comma-separated integer ids") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dep",
        description="Prune unused vocabulary rows from embedding matrices and report the savings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p_analyze = sub.add_parser("analyze", help="vocabulary usage statistics and growth curve")
    p_analyze.add_argument("--dataset", required=True, type=Path)
    p_analyze.add_argument("--vocab-size", type=int, default=None,
                           help="vocabulary size for text datasets (default: max id + 1)")
    p_analyze.add_argument("--partitions", type=int, default=_default_partitions())
    p_analyze.add_argument("--checkpoints", choices=("pow2", "all"), default="pow2")
    add_out(p_analyze)

    p_prune = sub.add_parser("prune", help="write reduced embeddings, remap, and remapped dataset")
    p_prune.add_argument("--dataset", required=True, type=Path)
    p_prune.add_argument("--embeddings", required=True, type=Path)
    p_prune.add_argument("--vocab-size", type=int, default=None,
                         help="vocabulary size for text datasets (default: embedding rows)")
    p_prune.add_argument("--ordering", choices=[o.value for o in RemapOrdering],
                         default=RemapOrdering.ASCENDING_ID.value)
    p_prune.add_argument("--keep", type=_parse_keep, default=(),
                         help="comma-separated ids to keep even if unused (e.g. padding)")
    p_prune.add_argument("--partitions", type=int, default=_default_partitions())
    add_out(p_prune)

    p_restore = sub.add_parser("restore", help="scatter learned rows back into the full matrix")
    p_restore.add_argument("--embeddings", required=True, type=Path, help="original full matrix")
    p_restore.add_argument("--learned", required=True, type=Path, help="fine-tuned reduced matrix")
    p_restore.add_argument("--remap", required=True, type=Path)
    add_out(p_restore)

    p_report = sub.add_parser("report", help="savings report from a remap and a model config")
    p_report.add_argument("--remap", required=True, type=Path)
    p_report.add_argument("--model-config", required=True, type=Path)
    add_out(p_report)

    p_count = sub.add_parser("count-params", help="parameter accounting for a model config")
    p_count.add_argument("--model-config", required=True, type=Path)

    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        out_dir=getattr(args, "out", None),
        dataset=getattr(args, "dataset", None),
        embeddings=getattr(args, "embeddings", None),
        learned=getattr(args, "learned", None),
        remap=getattr(args, "remap", None),
        model_config=getattr(args, "model_config", None),
        vocab_size=getattr(args, "vocab_size", None),
        ordering=RemapOrdering(getattr(args, "ordering", RemapOrdering.ASCENDING_ID.value)),
        keep_tokens=getattr(args, "keep", ()),
        partitions=getattr(args, "partitions", 1),
        checkpoints=getattr(args, "checkpoints", "pow2"),
        force=getattr(args, "force", False),
    )


_HANDLERS = {
    "analyze": cmd_analyze,
    "prune": cmd_prune,
    "restore": cmd_restore,
    "report": cmd_report,
    "count-params": cmd_count_params,
}


def _configure_logging() -> None:
    level_name = os.environ.get("DEP_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _HANDLERS[args.command](cfg)
    except DepError as err:
        print(f"{err.code}: {err}", file=sys.stderr)
        return _EXIT_BY_CODE.get(err.code, EXIT_INTERNAL)
    except FileNotFoundError as err:
        print(f"MISSING_INPUT: input file not found: {err.filename}", file=sys.stderr)
        return EXIT_MISSING
    except Exception as err:  # pragma: no cover - defensive catch-all
        log.exception("internal error")
        print(f"INTERNAL_ERROR: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
