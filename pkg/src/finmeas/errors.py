"""Exception hierarchy shared by all modules."""


class FinmeasError(Exception):
    """Base class for all library errors."""


class SizeError(FinmeasError):
    """Dimension mismatch or a dense operation above the size cap."""


class DomainError(FinmeasError, ValueError):
    """Argument outside the domain of a formula (empty spectrum, heating, ...)."""


class RankError(DomainError):
    """Pointer dimension is not an integer multiple of the system dimension."""


class ChannelError(FinmeasError):
    """Invalid channel: incomplete Kraus set, non-unitary block, bad permutation."""


class PartitionError(FinmeasError):
    """Projector blocks overlap or fail to cover the pointer space."""


class UsageError(FinmeasError):
    """Inconsistent arguments, e.g. a construction evaluated at the wrong beta."""
