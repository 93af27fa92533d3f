"""Exception types shared across the toolkit.

Every error carries a stable machine-readable ``code``. The CLI prints
errors as ``CODE: message`` on stderr and maps codes to exit statuses.
"""

from __future__ import annotations


class DepError(Exception):
    """Base class for all toolkit errors."""

    code = "ERROR"


class OutOfRangeToken(DepError):
    """A token id is not smaller than the declared vocabulary size."""

    code = "OUT_OF_RANGE_TOKEN"

    def __init__(self, sequence_index: int, position: int, token_id: int, vocab_size: int):
        self.sequence_index = sequence_index
        self.position = position
        self.token_id = token_id
        self.vocab_size = vocab_size
        super().__init__(
            f"token id {token_id} at sequence {sequence_index}, position {position} "
            f"is out of range for vocab_size {vocab_size}"
        )


class UnmappedToken(DepError):
    """A token id has no entry in the remap (remap built from another corpus)."""

    code = "UNMAPPED_TOKEN"

    def __init__(self, sequence_index: int, position: int, token_id: int):
        self.sequence_index = sequence_index
        self.position = position
        self.token_id = token_id
        super().__init__(
            f"token id {token_id} at sequence {sequence_index}, position {position} "
            f"is not in the remap domain"
        )


class VocabSizeMismatch(DepError):
    """Frequency tables being merged disagree on vocabulary size."""

    code = "VOCAB_SIZE_MISMATCH"

    def __init__(self, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"cannot merge tables with vocab_size {found} into vocab_size {expected}")


class KeepTokenOutOfRange(DepError):
    """A requested keep token lies outside the vocabulary."""

    code = "KEEP_TOKEN_OUT_OF_RANGE"

    def __init__(self, token_id: int, vocab_size: int):
        self.token_id = token_id
        self.vocab_size = vocab_size
        super().__init__(f"keep token {token_id} is out of range for vocab_size {vocab_size}")


class ShapeMismatch(DepError):
    """Matrix and remap (or matrices) disagree on a dimension."""

    code = "SHAPE_MISMATCH"


class InsufficientPoints(DepError):
    """Too few usable points to fit a power law."""

    code = "INSUFFICIENT_POINTS"

    def __init__(self, usable: int):
        self.usable = usable
        super().__init__(f"need at least 2 points with positive coordinates, got {usable}")


class DegenerateFit(DepError):
    """Zero variance in token counts makes the power-law slope undefined."""

    code = "DEGENERATE_FIT"


class InvalidCounts(DepError):
    """Vocabulary counts violate 0 <= reduced <= original, original >= 1."""

    code = "INVALID_COUNTS"

    def __init__(self, original_vocab: int, reduced_vocab: int):
        self.original_vocab = original_vocab
        self.reduced_vocab = reduced_vocab
        super().__init__(f"invalid vocabulary counts: original {original_vocab}, reduced {reduced_vocab}")


class InconsistentInputs(DepError):
    """Two report inputs disagree on a shared quantity."""

    code = "INCONSISTENT_INPUTS"

    def __init__(self, name_a: str, value_a, name_b: str, value_b):
        self.name_a, self.value_a = name_a, value_a
        self.name_b, self.value_b = name_b, value_b
        super().__init__(f"{name_a} ({value_a}) does not match {name_b} ({value_b})")


class RemapInconsistent(DepError):
    """A remap file is malformed or references ids outside its vocabulary."""

    code = "REMAP_INCONSISTENT"


class BadMagic(DepError):
    """A binary file does not start with the expected magic bytes."""

    code = "BAD_MAGIC"

    def __init__(self, expected: bytes, found: bytes):
        self.expected = expected
        self.found = found
        super().__init__(f"expected magic {expected!r}, found {found!r}")


class UnsupportedVersion(DepError):
    """A binary file declares a format version this build cannot read."""

    code = "UNSUPPORTED_VERSION"

    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(f"unsupported format version {found} (supported: {supported})")


class FormatError(DepError):
    """A file is structurally invalid (truncated, non-numeric, wrong field)."""

    code = "BAD_FORMAT"


class MissingInput(DepError):
    """A required input file does not exist."""

    code = "MISSING_INPUT"

    def __init__(self, path):
        self.path = path
        super().__init__(f"input file not found: {path}")


class OutputExists(DepError):
    """Refusing to overwrite an existing output without --force."""

    code = "OUTPUT_EXISTS"

    def __init__(self, path):
        self.path = path
        super().__init__(f"output already exists (use --force to overwrite): {path}")


class UnwritableOutput(DepError):
    """An output path could not be written."""

    code = "UNWRITABLE_OUTPUT"

    def __init__(self, path, reason: str = ""):
        self.path = path
        msg = f"cannot write output: {path}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
