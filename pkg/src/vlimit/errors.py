"""Exception types raised across the package."""


class VlimitError(Exception):
    """Base class for all package errors."""


class InvalidConfig(VlimitError):
    pass


class RadiusTooLarge(VlimitError):
    pass


class InsufficientDecay(VlimitError):
    pass


class SignConvention(VlimitError):
    pass


class LayerBlowup(VlimitError):
    pass


class NoContraction(VlimitError):
    pass


class UnderResolvedLayer(VlimitError):
    pass


class NeedMorePoints(VlimitError):
    pass


class CFLViolation(VlimitError):
    pass


class SizeMismatch(VlimitError, ValueError):
    pass
