"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: InputError subclasses map to exit 1,
BackendError subclasses to exit 2, anything else to exit 3.
"""

from __future__ import annotations


class DisfactError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DisfactError):
    """Bad user-supplied input: files, manifests, config, ranges."""


class TreeFormatError(InputError):
    """Malformed canonical tree document."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class TreeValidationError(InputError):
    """Structurally invalid discourse tree; ``span`` names the offending node."""

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message if span is None else f"{message} (node span {list(span)})")
        self.span = span


class ManifestError(InputError):
    """Invalid dataset manifest."""


class AlignmentError(InputError):
    """Sentence/tree texts disagree; ``offset`` is the first mismatch."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (first mismatch at offset {offset})")
        self.offset = offset


class ConfigError(InputError):
    """Invalid run configuration."""


class BackendError(DisfactError):
    """Scorer backend failure."""


class ProtocolError(BackendError):
    """Backend violated the scoring wire protocol."""


class TransportError(BackendError):
    """Backend unreachable, crashed, or timed out after retries."""
