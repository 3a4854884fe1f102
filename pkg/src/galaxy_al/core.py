"""Shared domain types and error hierarchy.

Example ids and class ids are plain 0-based ints throughout; the
out-of-distribution "other" class is by convention the last class id K-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class GalaxyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GalaxyError, ValueError):
    """A caller-supplied value violates an operation's precondition."""


class FormatError(GalaxyError, ValueError):
    """A file or matrix does not conform to its declared format."""


class OrderExhaustedError(GalaxyError):
    """Raised when a linear graph cannot grow past order N-1."""


class PoolExhaustedError(GalaxyError):
    """Raised when a selection is requested but no unlabeled examples remain."""


class ProtocolError(GalaxyError):
    """A score provider or config broke the run protocol (e.g. shape mismatch)."""


class ContractViolationError(GalaxyError):
    """An internal invariant that should be unreachable was violated."""


# Provenance tags for queried examples.
PROV_BISECTION = "bisection"
PROV_FALLBACK_RANDOM = "fallback-random"
PROV_FALLBACK_CONFIDENCE = "fallback-confidence"
PROV_SEED_ROUND = "seed-round"


@dataclass
class LabeledSet:
    """Observed labels, in query order.

    ``entries`` maps example id -> class id. Insertion order is the labeling
    order. Labels never change once observed. ``provenance`` records how each
    label was obtained (one of the PROV_* tags) when known.
    """

    entries: dict[int, int] = field(default_factory=dict)
    provenance: dict[int, str] = field(default_factory=dict)

    def add(self, example_id: int, label: int, provenance: str | None = None) -> None:
        if example_id in self.entries:
            if self.entries[example_id] != label:
                raise InputError(
                    f"example {example_id} already labeled "
                    f"{self.entries[example_id]}, got conflicting label {label}"
                )
            return
        self.entries[int(example_id)] = int(label)
        if provenance is not None:
            self.provenance[int(example_id)] = provenance

    def __contains__(self, example_id: int) -> bool:
        return example_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def label_of(self, example_id: int) -> int:
        return self.entries[example_id]

    def distinct_labels(self) -> set[int]:
        return set(self.entries.values())

    def ids(self) -> list[int]:
        return list(self.entries)

    def copy(self) -> "LabeledSet":
        return LabeledSet(dict(self.entries), dict(self.provenance))
