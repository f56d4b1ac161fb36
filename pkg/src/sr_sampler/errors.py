"""Exception hierarchy shared by all modules."""


class SamplerError(Exception):
    """Base class for every error raised by sr_sampler."""


class EmptySupport(SamplerError, ValueError):
    """The (restricted) distribution has no set of positive weight."""


class ZeroMass(EmptySupport):
    pass


class InfeasibleK(EmptySupport):
    """Kernel rank is smaller than the requested sample size."""


class Disconnected(EmptySupport):
    """Graph (or edge subset) does not span all vertices."""


DisconnectedError = Disconnected


class CapExceeded(SamplerError):
    pass


class DimensionMismatch(SamplerError, ValueError):
    pass


class NotSymmetric(SamplerError, ValueError):
    pass


AsymmetryError = NotSymmetric


class NotPSD(SamplerError, ValueError):
    pass


class DuplicateOriginal(SamplerError, ValueError):
    """A subdivided sample holds two copies of the same original element."""


class NonpositiveWeight(SamplerError, ValueError):
    pass


class ParseError(SamplerError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
