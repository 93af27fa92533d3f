"""On-disk formats for datasets, embedding matrices, remaps, and reports.

All binary layouts are little-endian.

Dataset, magic ``DEPT``::

    4s  magic        b"DEPT"
    u32 version      1
    u64 vocab_size
    u64 num_sequences
    per sequence: u32 length, then that many u32 token ids

Embedding matrix, magic ``DEPE``::

    4s  magic        b"DEPE"
    u32 version      1
    u8  dtype code   1 = 32-bit real
    u64 rows
    u64 cols
    row-major payload, rows * cols * 4 bytes

A dataset path ending in ``.txt`` uses the text form instead: one sequence
per line, space-separated decimal ids (an empty line is an empty sequence).
Text is meant for fixtures and debugging, binary for large corpora.

Remaps are JSON objects ``{original_vocab_size, ordering, keep_tokens,
pairs}`` with ``pairs`` as ``[original_id, dense_id]`` sorted by dense id;
JSON keeps them auditable and they hold at most one pair per vocabulary
entry. Writers emit a fixed key order so identical inputs give identical
bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .analysis import GrowthCurve
from .embeddings import EmbeddingMatrix
from .errors import (
    BadMagic,
    FormatError,
    InconsistentInputs,
    RemapInconsistent,
    UnsupportedVersion,
)
from .metrics import ModelConfig, PruneReport
from .vocab import RemapOrdering, RemapTable, TokenizedDataset

DATASET_MAGIC = b"DEPT"
EMBEDDINGS_MAGIC = b"DEPE"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 1

_DATASET_HEADER = struct.Struct("<4sIQQ")
_EMBEDDINGS_HEADER = struct.Struct("<4sIBQQ")
_U32 = struct.Struct("<I")


def _read_exact(handle: BinaryIO, size: int, what: str) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise FormatError(f"unexpected end of file while reading {what}")
    return data


def _check_trailing(handle: BinaryIO) -> None:
    if handle.read(1):
        raise FormatError("trailing data after declared content")


def write_dataset_binary(dataset: TokenizedDataset, path) -> None:
    with open(path, "wb") as handle:
        handle.write(
            _DATASET_HEADER.pack(
                DATASET_MAGIC, FORMAT_VERSION, dataset.vocab_size, dataset.num_sequences
            )
        )
        for seq in dataset.sequences:
            handle.write(_U32.pack(seq.size))
            handle.write(seq.astype("<u4").tobytes())


def read_dataset_binary(path) -> TokenizedDataset:
    with open(path, "rb") as handle:
        header = _read_exact(handle, _DATASET_HEADER.size, "dataset header")
        magic, version, vocab_size, num_sequences = _DATASET_HEADER.unpack(header)
        if magic != DATASET_MAGIC:
            raise BadMagic(DATASET_MAGIC, magic)
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(version, FORMAT_VERSION)
        sequences = []
        for _ in range(num_sequences):
            (length,) = _U32.unpack(_read_exact(handle, _U32.size, "sequence length"))
            payload = _read_exact(handle, 4 * length, "sequence ids")
            sequences.append(np.frombuffer(payload, dtype="<u4"))
        _check_trailing(handle)
    return TokenizedDataset(tuple(sequences), int(vocab_size))


def write_dataset_text(dataset: TokenizedDataset, path) -> None:
    lines = [" ".join(str(int(t)) for t in seq) for seq in dataset.sequences]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_dataset_text(path, vocab_size: int | None = None) -> TokenizedDataset:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    sequences = []
    max_id = -1
    for line_no, line in enumerate(lines, start=1):
        try:
            ids = [int(field) for field in line.split()]
        except ValueError:
            raise FormatError(f"line {line_no}: token ids must be decimal integers") from None
        if ids:
            max_id = max(max_id, max(ids))
        sequences.append(ids)
    if vocab_size is None:
        vocab_size = max_id + 1 if max_id >= 0 else 0
    return TokenizedDataset(tuple(sequences), vocab_size)


def write_dataset(dataset: TokenizedDataset, path) -> None:
    """Text form for ``.txt`` paths, binary otherwise."""
    if str(path).endswith(".txt"):
        write_dataset_text(dataset, path)
    else:
        write_dataset_binary(dataset, path)


def read_dataset(path, vocab_size: int | None = None) -> TokenizedDataset:
    """Read either dataset form, selected by the ``.txt`` suffix.

    For text files ``vocab_size`` defaults to ``max id + 1``. For binary
    files the header value is authoritative; passing a different
    ``vocab_size`` raises :class:`InconsistentInputs`.
    """
    if str(path).endswith(".txt"):
        return read_dataset_text(path, vocab_size)
    dataset = read_dataset_binary(path)
    if vocab_size is not None and vocab_size != dataset.vocab_size:
        raise InconsistentInputs(
            "requested vocab_size", vocab_size, "dataset file vocab_size", dataset.vocab_size
        )
    return dataset


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    with open(path, "wb") as handle:
        handle.write(
            _EMBEDDINGS_HEADER.pack(
                EMBEDDINGS_MAGIC, FORMAT_VERSION, DTYPE_FLOAT32, matrix.rows, matrix.dim
            )
        )
        handle.write(matrix.data.astype("<f4").tobytes())


def read_embeddings(path) -> EmbeddingMatrix:
    with open(path, "rb") as handle:
        header = _read_exact(handle, _EMBEDDINGS_HEADER.size, "embeddings header")
        magic, version, dtype_code, rows, cols = _EMBEDDINGS_HEADER.unpack(header)
        if magic != EMBEDDINGS_MAGIC:
            raise BadMagic(EMBEDDINGS_MAGIC, magic)
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(version, FORMAT_VERSION)
        if dtype_code != DTYPE_FLOAT32:
            raise FormatError(f"unsupported dtype code {dtype_code}")
        payload = _read_exact(handle, 4 * rows * cols, "embedding payload")
        _check_trailing(handle)
    data = np.frombuffer(payload, dtype="<f4").reshape(int(rows), int(cols))
    return EmbeddingMatrix(data)


def remap_to_json(remap: RemapTable) -> str:
    pairs = [[int(orig), dense] for dense, orig in enumerate(remap.inverse.tolist())]
    obj = {
        "original_vocab_size": remap.original_vocab_size,
        "ordering": remap.ordering.value,
        "keep_tokens": list(remap.keep_tokens),
        "pairs": pairs,
    }
    return json.dumps(obj, indent=2) + "\n"


def write_remap(remap: RemapTable, path) -> None:
    Path(path).write_text(remap_to_json(remap), encoding="utf-8")


def read_remap(path) -> RemapTable:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise FormatError(f"remap file is not valid JSON: {err}") from None
    for key in ("original_vocab_size", "ordering", "keep_tokens", "pairs"):
        if key not in obj:
            raise FormatError(f"remap file missing key {key!r}")
    try:
        ordering = RemapOrdering(obj["ordering"])
    except ValueError:
        raise FormatError(f"unknown ordering {obj['ordering']!r}") from None
    original_vocab_size = int(obj["original_vocab_size"])
    pairs = obj["pairs"]
    inverse = np.zeros(len(pairs), dtype=np.int64)
    seen_dense = np.zeros(len(pairs), dtype=bool)
    seen_orig = set()
    for pair in pairs:
        if not isinstance(pair, list) or len(pair) != 2:
            raise FormatError(f"remap pair must be [original, dense], got {pair!r}")
        orig, dense = int(pair[0]), int(pair[1])
        if dense < 0 or dense >= len(pairs) or seen_dense[dense]:
            raise RemapInconsistent(f"dense ids must cover 0..{len(pairs) - 1} exactly once")
        if orig < 0 or orig >= original_vocab_size:
            raise RemapInconsistent(
                f"original id {orig} is outside vocab_size {original_vocab_size}"
            )
        if orig in seen_orig:
            raise RemapInconsistent(f"original id {orig} appears twice")
        seen_dense[dense] = True
        seen_orig.add(orig)
        inverse[dense] = orig
    keep_tokens = tuple(int(t) for t in obj["keep_tokens"])
    return RemapTable(original_vocab_size, inverse, ordering, keep_tokens)


def report_to_json(report: PruneReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2) + "\n"


def write_report(report: PruneReport, path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def read_report(path) -> PruneReport:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise FormatError(f"report file is not valid JSON: {err}") from None
    try:
        return PruneReport.from_json_dict(obj)
    except KeyError as err:
        raise FormatError(f"report file missing key {err}") from None


def write_growth_csv(curve: GrowthCurve, path) -> None:
    lines = ["tokens,unique"] + [f"{n},{u}" for n, u in curve.points]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_growth_csv(path) -> list[tuple[int, int]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "tokens,unique":
        raise FormatError("growth curve CSV must start with header 'tokens,unique'")
    points = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        try:
            points.append((int(fields[0]), int(fields[1])))
        except (IndexError, ValueError):
            raise FormatError(f"line {line_no}: expected 'tokens,unique' integers") from None
    return points


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


_CONFIG_REQUIRED = ("vocab_size", "d_model", "num_layers", "num_heads")
_CONFIG_OPTIONAL = ("ffn_dim", "max_positions", "type_vocab", "has_pooler", "name")


def read_model_config(path) -> ModelConfig:
    """Model configuration JSON; ``name`` defaults to the file stem."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise FormatError(f"model config is not valid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise FormatError("model config must be a JSON object")
    unknown = sorted(set(obj) - set(_CONFIG_REQUIRED) - set(_CONFIG_OPTIONAL))
    if unknown:
        raise FormatError(f"model config has unknown keys: {', '.join(unknown)}")
    missing = sorted(set(_CONFIG_REQUIRED) - set(obj))
    if missing:
        raise FormatError(f"model config missing keys: {', '.join(missing)}")
    kwargs = {key: obj[key] for key in obj}
    kwargs.setdefault("name", Path(path).stem)
    try:
        return ModelConfig(**kwargs)
    except (TypeError, ValueError) as err:
        raise FormatError(f"invalid model config: {err}") from None
