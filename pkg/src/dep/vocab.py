"""Token id datasets, vocabulary usage counting, and dense-id remapping.

The pipeline starts from integer token sequences produced by some external
tokenizer. Scanning them yields per-id occurrence counts, from which the
set of ids actually used is derived. A remap table then assigns each kept
id a dense id in ``0..n_kept-1`` so datasets and embedding rows can be
rewritten compactly and restored later.

All types are immutable after construction (arrays are stored as read-only
views) and safe to share between threads. Scanning may run concurrently
over disjoint sequence partitions because partial counts merge by plain
elementwise addition.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    KeepTokenOutOfRange,
    OutOfRangeToken,
    UnmappedToken,
    VocabSizeMismatch,
)

TOKEN_DTYPE = np.uint32
# 64-bit counts: corpora can exceed 2**32 tokens.
COUNT_DTYPE = np.uint64


def _read_only(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


def _to_token_array(seq, seq_index: int, vocab_size: int) -> np.ndarray:
    arr = np.asarray(seq)
    if arr.size == 0:
        return _read_only(np.empty(0, dtype=TOKEN_DTYPE))
    if arr.ndim != 1:
        raise ValueError(f"sequence {seq_index} is not one-dimensional")
    if arr.dtype.kind not in "iu":
        raise TypeError(f"sequence {seq_index} has non-integer dtype {arr.dtype}")
    if arr.dtype.kind == "i":
        neg = np.flatnonzero(arr < 0)
        if neg.size:
            pos = int(neg[0])
            raise OutOfRangeToken(seq_index, pos, int(arr[pos]), vocab_size)
    bad = np.flatnonzero(arr >= vocab_size)
    if bad.size:
        pos = int(bad[0])
        raise OutOfRangeToken(seq_index, pos, int(arr[pos]), vocab_size)
    return _read_only(np.ascontiguousarray(arr, dtype=TOKEN_DTYPE))


@dataclass(frozen=True, eq=False)
class TokenizedDataset:
    """Ragged token id sequences over a declared vocabulary size.

    ``sequences`` may be any iterable of integer sequences; they are
    normalized to read-only uint32 arrays. Every id must be smaller than
    ``vocab_size``: the first violation raises :class:`OutOfRangeToken`
    carrying its sequence index and position.
    """

    sequences: tuple[np.ndarray, ...]
    vocab_size: int

    def __post_init__(self) -> None:
        if self.vocab_size < 0:
            raise ValueError("vocab_size must be non-negative")
        seqs = tuple(
            _to_token_array(seq, i, self.vocab_size)
            for i, seq in enumerate(self.sequences)
        )
        object.__setattr__(self, "sequences", seqs)

    @property
    def num_sequences(self) -> int:
        return len(self.sequences)

    @cached_property
    def total_tokens(self) -> int:
        return int(sum(seq.size for seq in self.sequences))

    def token_stream(self) -> np.ndarray:
        """All ids concatenated in dataset order (sequence, then position)."""
        if not self.sequences:
            return np.empty(0, dtype=TOKEN_DTYPE)
        return np.concatenate(self.sequences)

    def to_lists(self) -> list[list[int]]:
        return [seq.tolist() for seq in self.sequences]

    def __eq__(self, other: object):
        if not isinstance(other, TokenizedDataset):
            return NotImplemented
        return (
            self.vocab_size == other.vocab_size
            and len(self.sequences) == len(other.sequences)
            and all(np.array_equal(a, b) for a, b in zip(self.sequences, other.sequences))
        )


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Per-id occurrence counts over a corpus.

    ``counts[i]`` is the number of occurrences of id ``i``; the used
    vocabulary is the set of ids with nonzero counts.
    """

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.size == 0:
            arr = np.empty(0, dtype=COUNT_DTYPE)
        if arr.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if arr.dtype.kind == "i" and arr.size and bool((arr < 0).any()):
            raise ValueError("counts must be non-negative")
        if arr.dtype.kind not in "iu":
            raise TypeError(f"counts must be integers, got dtype {arr.dtype}")
        object.__setattr__(self, "counts", _read_only(np.ascontiguousarray(arr, dtype=COUNT_DTYPE)))

    @property
    def vocab_size(self) -> int:
        return int(self.counts.size)

    @cached_property
    def total_tokens(self) -> int:
        return int(self.counts.sum())

    @cached_property
    def used_ids(self) -> np.ndarray:
        """Ids with nonzero counts, ascending (the used vocabulary)."""
        return _read_only(np.flatnonzero(self.counts > 0))

    @property
    def used_count(self) -> int:
        return int(self.used_ids.size)

    def __eq__(self, other: object):
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


class RemapOrdering(str, Enum):
    """Dense id assignment order for the remap bijection."""

    ASCENDING_ID = "ascending_id"
    FREQUENCY_DESCENDING = "frequency_descending"


@dataclass(frozen=True, eq=False)
class RemapTable:
    """Bijection between kept original ids and dense ids ``0..n-1``.

    ``inverse[dense_id]`` is the original id assigned to ``dense_id``;
    :attr:`forward` is the opposite direction. ``ordering`` records how
    dense ids were assigned, ``keep_tokens`` which ids were retained
    regardless of occurrence.
    """

    original_vocab_size: int
    inverse: np.ndarray
    ordering: RemapOrdering = RemapOrdering.ASCENDING_ID
    keep_tokens: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.original_vocab_size < 0:
            raise ValueError("original_vocab_size must be non-negative")
        arr = np.asarray(self.inverse)
        if arr.size == 0:
            arr = np.empty(0, dtype=TOKEN_DTYPE)
        if arr.ndim != 1:
            raise ValueError("inverse must be one-dimensional")
        if arr.size:
            if arr.dtype.kind == "i" and bool((arr < 0).any()):
                raise ValueError("inverse contains negative ids")
            if bool((arr >= self.original_vocab_size).any()):
                raise ValueError("inverse contains ids outside the original vocabulary")
            if np.unique(arr).size != arr.size:
                raise ValueError("inverse contains duplicate ids (mapping must be bijective)")
        object.__setattr__(self, "inverse", _read_only(np.ascontiguousarray(arr, dtype=TOKEN_DTYPE)))
        object.__setattr__(self, "ordering", RemapOrdering(self.ordering))
        object.__setattr__(self, "keep_tokens", tuple(int(t) for t in self.keep_tokens))

    @property
    def reduced_size(self) -> int:
        return int(self.inverse.size)

    @cached_property
    def forward(self) -> dict[int, int]:
        """Original id to dense id mapping (the domain is the kept set)."""
        return {int(orig): dense for dense, orig in enumerate(self.inverse.tolist())}

    @cached_property
    def _forward_lut(self) -> np.ndarray:
        # Dense lookup table over the full original vocab; -1 marks unmapped ids.
        lut = np.full(self.original_vocab_size, -1, dtype=np.int64)
        lut[self.inverse] = np.arange(self.reduced_size, dtype=np.int64)
        return _read_only(lut)

    def __eq__(self, other: object):
        if not isinstance(other, RemapTable):
            return NotImplemented
        return (
            self.original_vocab_size == other.original_vocab_size
            and self.ordering is other.ordering
            and self.keep_tokens == other.keep_tokens
            and np.array_equal(self.inverse, other.inverse)
        )


def _count_ids(sequences: Sequence[np.ndarray], vocab_size: int) -> np.ndarray:
    nonempty = [s for s in sequences if s.size]
    if not nonempty:
        return np.zeros(vocab_size, dtype=COUNT_DTYPE)
    flat = np.concatenate(nonempty)
    return np.bincount(flat, minlength=vocab_size).astype(COUNT_DTYPE)


def scan_dataset(dataset: TokenizedDataset) -> FrequencyTable:
    """Count occurrences of every vocabulary id across the whole dataset."""
    return FrequencyTable(_count_ids(dataset.sequences, dataset.vocab_size))


def scan_dataset_parallel(dataset: TokenizedDataset, partitions: int | None = None) -> FrequencyTable:
    """Scan with the sequence list split into contiguous partitions.

    The result is identical to :func:`scan_dataset` for every partition
    count: partial counts merge by elementwise addition, which is
    associative and commutative.
    """
    if partitions is None:
        partitions = os.cpu_count() or 1
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    if partitions == 1 or dataset.num_sequences <= 1:
        return scan_dataset(dataset)
    chunks = _partition_sequences(dataset.sequences, partitions)
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        partials = list(pool.map(_count_ids, chunks, [dataset.vocab_size] * len(chunks)))
    total = np.zeros(dataset.vocab_size, dtype=COUNT_DTYPE)
    for part in partials:
        total += part
    return FrequencyTable(total)


def _partition_sequences(sequences: tuple[np.ndarray, ...], parts: int) -> list[tuple[np.ndarray, ...]]:
    base, extra = divmod(len(sequences), parts)
    chunks, start = [], 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        chunks.append(sequences[start:start + size])
        start += size
    return chunks


def split_dataset(dataset: TokenizedDataset, parts: int) -> list[TokenizedDataset]:
    """Split into ``parts`` contiguous sub-datasets (some possibly empty)."""
    if parts < 1:
        raise ValueError("parts must be >= 1")
    return [
        TokenizedDataset(chunk, dataset.vocab_size)
        for chunk in _partition_sequences(dataset.sequences, parts)
    ]


def merge_frequency_tables(parts: Sequence[FrequencyTable]) -> FrequencyTable:
    """Elementwise sum of per-partition counts; order never matters."""
    if not parts:
        raise ValueError("nothing to merge")
    vocab_size = parts[0].vocab_size
    for table in parts[1:]:
        if table.vocab_size != vocab_size:
            raise VocabSizeMismatch(vocab_size, table.vocab_size)
    total = np.zeros(vocab_size, dtype=COUNT_DTYPE)
    for table in parts:
        total += table.counts
    return FrequencyTable(total)


def build_remap(
    freqs: FrequencyTable,
    ordering: RemapOrdering = RemapOrdering.ASCENDING_ID,
    keep_tokens: Iterable[int] = (),
) -> RemapTable:
    """Assign dense ids to every used id plus the explicit keep set.

    ``ASCENDING_ID`` preserves the original relative order and is stable
    across corpora with equal used sets. ``FREQUENCY_DESCENDING`` places
    frequent ids first (ties broken by ascending original id; keep tokens
    that never occur sort as count zero), which can improve memory
    locality on skewed corpora.
    """
    ordering = RemapOrdering(ordering)
    keep = sorted({int(t) for t in keep_tokens})
    for token in keep:
        if token < 0 or token >= freqs.vocab_size:
            raise KeepTokenOutOfRange(token, freqs.vocab_size)
    domain = np.union1d(freqs.used_ids, np.asarray(keep, dtype=np.int64))
    if ordering is RemapOrdering.FREQUENCY_DESCENDING and domain.size:
        # Stable sort on a domain already ascending by id gives the id tie-break.
        domain_counts = freqs.counts[domain].astype(np.int64)
        domain = domain[np.argsort(-domain_counts, kind="stable")]
    return RemapTable(freqs.vocab_size, domain, ordering, tuple(keep))


def apply_remap(dataset: TokenizedDataset, remap: RemapTable) -> TokenizedDataset:
    """Rewrite every token id through ``remap.forward``.

    Sequence structure is preserved exactly; the output declares the
    reduced vocabulary size. An id outside the mapping domain raises
    :class:`UnmappedToken`, which signals a remap built from a different
    corpus.
    """
    lut = remap._forward_lut
    out = []
    for i, seq in enumerate(dataset.sequences):
        if seq.size == 0:
            out.append(seq)
            continue
        if int(seq.max()) >= lut.size:
            pos = int(np.flatnonzero(seq >= lut.size)[0])
            raise UnmappedToken(i, pos, int(seq[pos]))
        mapped = lut[seq]
        bad = np.flatnonzero(mapped < 0)
        if bad.size:
            pos = int(bad[0])
            raise UnmappedToken(i, pos, int(seq[pos]))
        out.append(mapped.astype(TOKEN_DTYPE))
    return TokenizedDataset(tuple(out), remap.reduced_size)


def invert_remap(dataset: TokenizedDataset, remap: RemapTable) -> TokenizedDataset:
    """Undo :func:`apply_remap` by substituting ``inverse[id]`` for each id."""
    reduced = remap.reduced_size
    out = []
    for i, seq in enumerate(dataset.sequences):
        if seq.size and int(seq.max()) >= reduced:
            pos = int(np.flatnonzero(seq >= reduced)[0])
            raise OutOfRangeToken(i, pos, int(seq[pos]), reduced)
        out.append(remap.inverse[seq] if seq.size else seq)
    return TokenizedDataset(tuple(out), remap.original_vocab_size)
