"""Exception hierarchy shared by every module."""


class SefError(Exception):
    """Base class for all library errors."""


class ConfigError(SefError, ValueError):
    pass


class ParseError(SefError, ValueError):
    pass


class IntegrityError(SefError):
    pass


class EmptyPayload(SefError, ValueError):
    pass


class NoValidChain(SefError):
    pass


class NotFinalizedError(SefError):
    """Raised when sealing an epoch that is not yet tau blocks deep."""


class InsufficientDroplets(SefError):
    """Raised when decoding stalls and no more droplets can be obtained."""
