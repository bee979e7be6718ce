class CvlabError(Exception):
    """Base class for library errors."""


class InvalidInputError(CvlabError, ValueError):
    pass


class InvalidConfigError(CvlabError, ValueError):
    pass


class InvalidRateError(InvalidConfigError):
    pass


class UnsupportedLawError(CvlabError, ValueError):
    pass


class InvalidFoldsError(InvalidInputError):
    pass


class UndefinedOobError(CvlabError):
    """Raised when no sample is ever out of bag."""


class InsufficientDataError(CvlabError):
    pass


class LogDomainError(CvlabError):
    """Raised when a log-log fit meets a nonpositive value."""


class ReplicationError(CvlabError):
    """Wraps a failure inside the Monte Carlo harness with its cell context."""

    def __init__(self, replication, n, learner, cause):
        self.replication = replication
        self.n = n
        self.learner = learner
        self.cause = cause
        super().__init__(
            f"replication={replication} n={n} learner={learner}: "
            f"{type(cause).__name__}: {cause}"
        )

    def __reduce__(self):
        return type(self), (self.replication, self.n, self.learner, self.cause)
