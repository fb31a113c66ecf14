"""Exception hierarchy shared by all tagrace modules."""

from __future__ import annotations


class TagRaceError(Exception):
    """Base class for every error raised by this package."""


# tagged memory

class InvalidAllocationError(TagRaceError):
    pass


class DuplicateAllocationError(TagRaceError):
    pass


class DeadGranuleError(TagRaceError):
    """Access to a granule whose pointee is not (or no longer) allocated."""


class ReservedTagError(TagRaceError):
    """Tag 15 is reserved and never stored."""


# program model

class DslSyntaxError(TagRaceError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ProgramValidationError(TagRaceError):
    """The program parsed but references something undeclared or misuses locks."""


class OffsetOutOfRangeError(ProgramValidationError):
    pass


class UnmatchedReleaseError(ProgramValidationError):
    pass


class UnmatchedAcquireError(ProgramValidationError):
    pass


class DeadlockError(TagRaceError):
    pass


class TooLargeError(TagRaceError):
    pass


# lockset / detector

class RecursiveLockError(TagRaceError):
    pass


class ProtocolError(TagRaceError):
    pass


class TraceValidationError(TagRaceError):
    pass


# reporting

class EmptyCountsError(TagRaceError):
    pass


class JoinError(TagRaceError):
    pass


class UnknownCaseError(TagRaceError, KeyError):
    pass
