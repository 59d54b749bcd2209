"""Exception hierarchy shared by the library and the CLI."""


class SeclabError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when it escapes."""

    exit_code = 2


class InvalidTableError(SeclabError, ValueError):
    pass


class PreconditionError(SeclabError, ValueError):
    pass


class SizeCapError(SeclabError):
    exit_code = 3


class InternalConsistencyError(SeclabError, RuntimeError):
    """A proven identity or inclusion failed numerically: a bug, not bad input."""

    exit_code = 1
