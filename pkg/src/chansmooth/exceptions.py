"""Exception types raised across the package."""


class ChanSmoothError(Exception):
    """Base class for all package errors."""


class TruncationCapExceeded(ChanSmoothError, ValueError):
    """The Poisson series would need more terms than the configured cap."""


class RemainderNotCertifiable(ChanSmoothError, ValueError):
    """A truncated power series cannot be given a certified remainder."""


class InadmissibleEpsilon(ChanSmoothError, ValueError):
    """An epsilon outside the range where a bound formula is defined."""


class LikelihoodDegenerate(ChanSmoothError, ValueError):
    """Some observation has zero probability under every grid atom."""


class InsufficientGrid(ChanSmoothError, ValueError):
    """Too few distinct sample sizes to fit a rate slope."""


class ConfigError(ChanSmoothError, ValueError):
    """Invalid experiment configuration."""
