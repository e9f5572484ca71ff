"""Error taxonomy.

Every failure mode raised by this package is an :class:`ExtopoError`
subclass carrying a short machine-readable ``kind`` tag next to the
human-readable message.  The CLI maps exception classes to stable exit
codes (see README).
"""

from __future__ import annotations


class ExtopoError(Exception):
    """Base class; ``kind`` is a short tag naming the failure mode."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class IngestError(ExtopoError):
    """Dataset parsing failures.  Kinds: file, cross_graph_edge, parse."""


class AugmentError(ExtopoError):
    """Augmentation failures.  Kinds: empty."""


class NoiseError(ExtopoError):
    """Feature-noise injection failures.  Kinds: no_features."""


class FiltrationError(ExtopoError):
    """Vertex-function construction failures.  Kinds: too_large, unknown, duplicate."""


class PersistenceError(ExtopoError):
    """Diagram computation failures.  Kinds: shape, too_large."""


class VectorizeError(ExtopoError):
    """Summary construction failures.  Kinds: grid, sigma."""


class MetricError(ExtopoError):
    """Diagram/landscape distance failures.  Kinds: grid, essential_mismatch."""


class LossError(ExtopoError):
    """Contrastive loss failures.  Kinds: degenerate, alignment, shape."""
