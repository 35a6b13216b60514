"""Exception hierarchy shared by every module."""


class ScoreVotingError(Exception):
    pass


class DomainError(ScoreVotingError, ValueError):
    """An argument lies outside the object universe or has the wrong shape."""


class BallotKindError(ScoreVotingError, TypeError):
    """An operation received a ballot variant it does not support."""


class PreconditionError(ScoreVotingError, ValueError):
    pass


class ResourceLimitError(ScoreVotingError, RuntimeError):
    """A bounded search or enumeration would exceed its configured budget."""

    def __init__(self, message, explored=None):
        super().__init__(message)
        self.explored = explored


class NumericError(ScoreVotingError, ArithmeticError):
    """An iterative numeric routine failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
