"""Exception hierarchy shared across the package."""


class CanonimanipError(Exception):
    """Base class for all package errors."""


class DegenerateInput(CanonimanipError):
    """Point set is rank-deficient (coincident or collinear points)."""


class NotUnit(CanonimanipError):
    """A vector required to be unit-length is not, beyond tolerance."""


class UnknownObject(CanonimanipError):
    """Referenced object id is not present in the scene."""


class EmptyCandidates(CanonimanipError):
    """A non-empty candidate list was required."""


class MissingNamedPoint(CanonimanipError):
    """A named point label referenced by a task is absent from the object."""


class ParseError(CanonimanipError):
    """Scenario/task/plan document is malformed; message carries the location."""


class ScriptExhausted(CanonimanipError):
    """A scripted verdict oracle was queried past the end of its script."""


class OracleUnavailable(CanonimanipError):
    """Checker oracle transport failure; distinct from a plan rejection."""


class ActionStageMismatch(CanonimanipError):
    """Action primitive does not match the stage's declared action."""


class HeldObject(CanonimanipError):
    """Operation is not permitted on an object rigidly held by the gripper."""


class NonFiniteLoss(CanonimanipError):
    """Loss evaluation produced NaN or infinity."""


class DegenerateCamera(CanonimanipError):
    """Camera eye coincides with look-at, or up is parallel to the view axis."""


class IndexOutOfRange(CanonimanipError):
    """Stage or candidate index outside the valid range."""
