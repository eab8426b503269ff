"""Exception hierarchy shared by every dlab module."""


class DlabError(Exception):
    """Base class for all dlab errors."""


class InputError(DlabError, ValueError):
    """Malformed or invalid input (CLI exit code 2)."""


class NotABijection(InputError):
    pass


class EmptySystem(InputError):
    pass


class NotInvariant(InputError):
    pass


class NotProbability(InputError):
    pass


class EmptySet(InputError):
    pass


class EmptyWindow(InputError):
    pass


class EmptyShift(InputError):
    pass


class NotMinimal(InputError):
    pass


class NotTransitive(InputError):
    pass


class NotDisjoint(InputError):
    pass


class InfiniteOrder(InputError):
    pass


class BaseMismatch(InputError):
    pass


class NotAJoining(InputError):
    pass


class YNotMinimal(NotMinimal):
    pass


class PreconditionFailed(InputError):
    pass


class UnknownSweep(InputError):
    pass


class CapExceeded(DlabError):
    """A configured size cap was exceeded (CLI exit code 3)."""


# product() raises this name; it is the same condition as any other cap.
OverflowCap = CapExceeded


class InternalInconsistency(DlabError, AssertionError):
    """Independently computed predicates disagreed; indicates a bug."""
