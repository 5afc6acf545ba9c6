"""Exception hierarchy shared across the package."""


class ShadowBenchError(Exception):
    """Base class for all errors raised by shadow_bench."""


class DecodeError(ShadowBenchError):
    def __init__(self, path, reason=""):
        self.path = str(path)
        msg = f"cannot decode {self.path}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class DimensionMismatch(ShadowBenchError, ValueError):
    pass


class DegenerateClass(ShadowBenchError, ValueError):
    """BER is undefined because one of the two classes has no pixels."""


class EmptyGroundTruth(ShadowBenchError, ValueError):
    """The weighted F-measure needs at least one foreground pixel."""


class TooLarge(ShadowBenchError, ValueError):
    pass


class EmptyStream(ShadowBenchError, ValueError):
    pass


class DegenerateRegion(ShadowBenchError, ValueError):
    pass


class ParseError(ShadowBenchError, ValueError):
    pass


class MissingPrediction(ShadowBenchError):
    pass
