"""Exception hierarchy shared by all brainsym modules."""


class BrainSymError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(BrainSymError, ValueError):
    """A numeric parameter is outside its documented range."""


class DegenerateInput(BrainSymError):
    """The input is valid but carries too little information to proceed."""


# image_core
class PnmError(BrainSymError, ValueError):
    """Base class for PGM/PPM parsing failures."""


class MalformedHeader(PnmError):
    pass


class TruncatedData(PnmError):
    pass


class ValueOutOfRange(PnmError):
    pass


class DimensionMismatch(BrainSymError, ValueError):
    pass


# edge_detect
class ImageTooSmall(DegenerateInput):
    pass


class InvalidThreshold(InvalidParameter):
    pass


class InvalidParams(InvalidParameter):
    pass


# symmetry
class EmptySeries(DegenerateInput):
    pass


class InsufficientPoints(DegenerateInput):
    pass


class SingularSystem(DegenerateInput):
    pass


# tumor_detect
class EmptyForeground(DegenerateInput):
    pass


class PipelineError(BrainSymError):
    """Wraps a module error with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
