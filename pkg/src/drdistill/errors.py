"""Exception types shared across the toolkit."""


class DrDistillError(Exception):
    """Base class for all toolkit errors."""


class UnknownLabel(DrDistillError):
    """A sense string could not be resolved against the vocabulary."""


class ParseError(DrDistillError):
    """A data file record is malformed; carries the offending line number."""

    def __init__(self, message, line_no=None, path=None):
        self.line_no = line_no
        self.path = path
        loc = ""
        if path is not None:
            loc += f"{path}:"
        if line_no is not None:
            loc += f"{line_no}: "
        super().__init__(loc + message)


class DanglingVote(DrDistillError):
    """A vote references an item that does not exist in the corpus."""


class DuplicateWorkerVote(DrDistillError):
    """The same worker voted twice on the same item with the same method."""


class AllMinority(DrDistillError):
    """Minority filtering removed every label; the item has no stable label."""


class EmptySet(DrDistillError):
    """An operation requires a non-empty label set."""


class EmptyInput(DrDistillError):
    """An operation requires non-empty text input."""


class NotNormalized(DrDistillError):
    """A probability vector does not sum to 1 within tolerance."""


class DegenerateChance(DrDistillError):
    """Bootstrapped expected agreement is (numerically) 1; kappa undefined."""


class NoReference(DrDistillError):
    """The requested analysis needs reference labels which are absent."""


class MissingMethod(DrDistillError):
    """The corpus lacks votes for a required annotation method."""


class DegenerateMatrix(DrDistillError):
    """Confusion matrix unusable for a chi-squared test (zero expectations)."""


class SessionStateError(DrDistillError):
    """An elicitation step was called out of order."""


class ChoiceNotInList(DrDistillError):
    """The step-2 choice is not among the presented disambiguation options."""


class UnknownPrefix(DrDistillError):
    """A QA question prefix is absent from the inventory."""


class ItemMismatch(DrDistillError):
    """Two vote sets that must describe the same item do not."""


class DivergenceDetected(DrDistillError):
    """Training produced a non-finite loss."""


class UnknownWorker(DrDistillError):
    """Worker id is not in the registry."""


class SessionExpired(DrDistillError):
    """Session token is unknown or no longer valid."""


class BatchComplete(DrDistillError):
    """All assignments in the worker's batch are done."""


class DuplicateVote(DrDistillError):
    """A vote for this (item, worker, method) already exists."""


class Unauthorized(DrDistillError):
    """Admin credential missing or wrong."""
