"""Exception types shared across the package."""


class GBSPError(Exception):
    """Base class for all library errors."""


class ScheduleViolation(GBSPError, ValueError):
    """A scale schedule breaks one of its structural invariants."""


class BudgetOverflow(GBSPError, ValueError):
    """A selection or removal budget exceeds what is available."""


class WindowTooLarge(GBSPError, ValueError):
    """The center window does not fit inside the block."""


class DegenerateBlock(GBSPError, ValueError):
    """A purity operation was asked to score an empty block."""


class DomainError(GBSPError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class ImageReadError(GBSPError, IOError):
    """The input image is missing or cannot be decoded."""


class FormatError(GBSPError, ValueError):
    """A binary artifact file is malformed."""
