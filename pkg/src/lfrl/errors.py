"""Exception types raised across the simulator, controllers and trainer."""


class LfrlError(Exception):
    """Base class for all package errors."""


class NonClosedTrack(LfrlError):
    pass


class BadSegment(LfrlError):
    pass


class BadTimestep(LfrlError):
    pass


class LeaderBehind(LfrlError):
    pass


class ZeroGap(LfrlError):
    pass


class NonFiniteInput(LfrlError):
    pass


class NonFiniteGradient(LfrlError):
    """Raised when a minibatch produces NaN/Inf gradients.

    ``minibatch`` holds the indices of the offending samples.
    """

    def __init__(self, message, minibatch=None):
        super().__init__(message)
        self.minibatch = minibatch


class EmptySeries(LfrlError):
    pass


class ConfigError(LfrlError):
    pass
