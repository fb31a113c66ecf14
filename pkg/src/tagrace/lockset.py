"""Per-thread locksets and the per-pointee minimal lockset with trimming.

Lockset elements are ``(lock_id, mode)`` pairs where mode is ``"exclusive"``
or ``"reader"``.  When two locksets are intersected the lock id decides
membership and the surviving element keeps the weaker (reader) mode.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable
from contextlib import AbstractContextManager
from dataclasses import dataclass, field

from .errors import RecursiveLockError, UnmatchedReleaseError
from .program import EXCLUSIVE, READER

Lockset = frozenset  # frozenset[tuple[str, str]]
EMPTY: Lockset = frozenset()


class LocksetState(enum.Enum):
    INCONCLUSIVE = "Inconclusive"
    EXCLUSIVE = "Exclusive"
    SHARED = "Shared"

    def __str__(self) -> str:
        return self.value


class _UpdateToken(AbstractContextManager):
    """Stands in for the per-pointee mutex guarding lockset updates.

    Traces are replayed sequentially, so there is nothing to exclude.
    """

    def __exit__(self, *exc):
        return None


@dataclass
class PointeeMeta:
    ls: Lockset = EMPTY
    spa: bool = False
    mu: _UpdateToken = field(default_factory=_UpdateToken, repr=False, compare=False)


def lock_ids(ls: Iterable[tuple[str, str]]) -> frozenset[str]:
    return frozenset(lock for lock, _ in ls)


def intersect(a: Lockset, b: Lockset) -> Lockset:
    """Intersection by lock id; a lock held in reader mode on either side stays reader."""
    modes_b = dict(b)
    out = []
    for lock, mode in a:
        other = modes_b.get(lock)
        if other is not None:
            out.append((lock, READER if READER in (mode, other) else EXCLUSIVE))
    return frozenset(out)


def has_rshared_locks(ls: Lockset) -> bool:
    return any(mode == READER for _, mode in ls)


def mutually_exclusive(a: Lockset, b: Lockset) -> bool:
    """True when some lock in both sets is held exclusively by at least one side.

    Two holders of the same rwlock in reader mode can run concurrently, so a
    shared reader-mode lock does not order their accesses.
    """
    modes_b = dict(b)
    for lock, mode in a:
        other = modes_b.get(lock)
        if other is not None and (mode == EXCLUSIVE or other == EXCLUSIVE):
            return True
    return False


def handle_lock_event(ls: Lockset, lock: str, mode: str = EXCLUSIVE) -> Lockset:
    if lock in lock_ids(ls):
        raise RecursiveLockError(f"lock {lock!r} is already held")
    return ls | {(lock, mode)}


def handle_unlock_event(ls: Lockset, lock: str, segments: Iterable = ()) -> Lockset:
    """Drop ``lock`` from the thread's lockset and close the given segments.

    Closing a segment resets the tag of every reference it updated to 0.
    """
    held = [item for item in ls if item[0] == lock]
    if not held:
        raise UnmatchedReleaseError(f"lock {lock!r} is not held")
    for seg in segments:
        seg.close()
    return ls - set(held)


def update_lockset_pointee(ls_tau: Lockset, meta: PointeeMeta) -> PointeeMeta:
    if not meta.ls:
        if not ls_tau:
            meta.spa = True
        else:
            meta.spa = False
            meta.ls = frozenset(ls_tau)
    else:
        meta.ls = intersect(meta.ls, ls_tau)
    return meta


def handle_lockset_check(ls_tau: Lockset, meta: PointeeMeta, granule=None) -> LocksetState:
    """Tri-state lockset check run once at segment setup.

    ``meta`` is updated in place on the conclusive branches.
    """
    if not meta.ls and meta.spa:
        return LocksetState.INCONCLUSIVE
    if not meta.ls or lock_ids(ls_tau) & lock_ids(meta.ls):
        with meta.mu:
            update_lockset_pointee(ls_tau, meta)
        if has_rshared_locks(intersect(ls_tau, meta.ls)):
            return LocksetState.SHARED
        return LocksetState.EXCLUSIVE
    return LocksetState.INCONCLUSIVE
