"""Exception types raised across the package."""


class MerAdcError(ValueError):
    """Base class for all package errors."""


class ZeroMassInterval(MerAdcError):
    pass


class ThresholdOutOfRange(MerAdcError):
    pass


class TooManyBits(MerAdcError):
    pass


class BitsMismatch(MerAdcError):
    pass


class OutOfRange(MerAdcError):
    """Analog input outside the convertible range."""


class InvalidTree(MerAdcError):
    pass


class CodeOutOfRange(MerAdcError):
    pass


class NoSamples(MerAdcError):
    pass


class UnsupportedKind(MerAdcError):
    pass
