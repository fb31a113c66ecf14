"""Symbolic model of MTE-tagged memory.

Memory is a set of pointees, each split into 16-byte granules addressed as
``GranuleId(pointee, index)``.  Every granule and every reference carries a
4-bit tag; an access faults synchronously when the two disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

from .errors import (
    DeadGranuleError,
    DuplicateAllocationError,
    InvalidAllocationError,
    ReservedTagError,
)

GRANULE_SIZE = 16
UNTAGGED = 0
RESERVED_TAG = 15
MAX_TAG = 15

AccessKind = Literal["read", "write"]


def check_tag(value: int) -> int:
    """Validate a tag that is about to be stored; returns it unchanged."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"tag must be an int, got {type(value).__name__}")
    if not 0 <= value <= MAX_TAG:
        raise ValueError(f"tag {value} outside [0, 15]")
    if value == RESERVED_TAG:
        raise ReservedTagError("tag 15 is reserved")
    return value


def pad_pointee(declared_size: int) -> int:
    """Round an allocation up to the next multiple of the granule size."""
    if declared_size < 1:
        raise InvalidAllocationError(f"declared size must be >= 1, got {declared_size}")
    return -(-declared_size // GRANULE_SIZE) * GRANULE_SIZE


class GranuleId(NamedTuple):
    pointee: str
    index: int

    def __str__(self) -> str:
        return f"{self.pointee}[{self.index}]"


@dataclass(eq=False)
class TaggedRef:
    """A thread-private alias: one instance per (alias, thread) pair."""

    ref_id: str
    owner: int
    target: GranuleId | None = None
    tag: int = UNTAGGED


@dataclass(frozen=True)
class Fault:
    """Synchronous tag-check fault raised by an access."""

    ref_tag: int
    granule_tag: int
    granule: GranuleId
    tid: int
    kind: AccessKind


class TaggedMemory:
    def __init__(self) -> None:
        self.granule_tags: dict[GranuleId, int] = {}
        self.layouts: dict[str, tuple[int, int]] = {}

    def alloc(self, pointee: str, declared_size: int) -> list[GranuleId]:
        if pointee in self.layouts:
            raise DuplicateAllocationError(f"pointee {pointee!r} is already live")
        padded = pad_pointee(declared_size)
        self.layouts[pointee] = (declared_size, padded)
        granules = [GranuleId(pointee, i) for i in range(padded // GRANULE_SIZE)]
        for g in granules:
            self.granule_tags[g] = UNTAGGED
        return granules

    def free(self, pointee: str) -> None:
        if pointee not in self.layouts:
            raise DeadGranuleError(f"pointee {pointee!r} is not live")
        _, padded = self.layouts.pop(pointee)
        for i in range(padded // GRANULE_SIZE):
            del self.granule_tags[GranuleId(pointee, i)]

    def is_live(self, g: GranuleId) -> bool:
        return g in self.granule_tags

    def granules_of(self, pointee: str) -> list[GranuleId]:
        _, padded = self.layouts[pointee]
        return [GranuleId(pointee, i) for i in range(padded // GRANULE_SIZE)]

    def granule_tag(self, g: GranuleId) -> int:
        try:
            return self.granule_tags[g]
        except KeyError:
            raise DeadGranuleError(f"granule {g} is not live") from None

    def set_granule_tag(self, g: GranuleId, tag: int) -> None:
        # STG analogue
        if g not in self.granule_tags:
            raise DeadGranuleError(f"granule {g} is not live")
        self.granule_tags[g] = check_tag(tag)

    def tag_check(self, ref_tag: int, g: GranuleId) -> bool:
        return ref_tag == self.granule_tag(g)

    def access(self, ref: TaggedRef, kind: AccessKind) -> Fault | None:
        """Perform a tag-checked access; returns a Fault on mismatch, else None."""
        if ref.target is None:
            raise DeadGranuleError(f"reference {ref.ref_id!r} has no target")
        granule_tag = self.granule_tag(ref.target)
        if ref.tag == granule_tag:
            return None
        return Fault(ref.tag, granule_tag, ref.target, ref.owner, kind)
