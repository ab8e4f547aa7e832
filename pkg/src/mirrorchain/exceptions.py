"""Exception hierarchy shared by every module."""


class MirrorChainError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(MirrorChainError, ValueError):
    pass


class NotPSTError(MirrorChainError):
    """Raised when a chain does not realise perfect state transfer.

    Attributes
    ----------
    site : int
        1-based input site with the worst mirror amplitude.
    deviation : float
        ``|beta_{N-n+1,n}(t_f) - exp(i phi)|`` at that site.
    """

    def __init__(self, message, site, deviation):
        super().__init__(message)
        self.site = site
        self.deviation = deviation


class ResourceLimitError(MirrorChainError):
    pass


class UnsupportedErrorError(MirrorChainError):
    """The requested physical error has no low-rate fermionic description."""


class InsufficientRegionError(MirrorChainError):
    def __init__(self, message, D, null_dim):
        super().__init__(message)
        self.D = D
        self.null_dim = null_dim


class InconsistentPairError(MirrorChainError):
    pass


class DecoderConstructionError(MirrorChainError):
    pass

