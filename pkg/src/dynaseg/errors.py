"""Exception types shared across the pipeline."""


class DynasegError(Exception):
    """Base class for every error raised by this package."""


class IoError(DynasegError):
    """File missing, unreadable, or unwritable."""


class FormatError(DynasegError):
    """File bytes could not be decoded as an image."""


class DimensionError(DynasegError):
    """Raster is smaller than the operation requires."""


class DimensionMismatchError(DynasegError):
    """Two rasters that must share dimensions do not."""


class EmptyInputError(DynasegError):
    """An operation received an empty collection."""


class TooFewMatchesError(DynasegError):
    """Not enough point matches to factor the motion matrix."""


class TooFewPointsError(DynasegError):
    """Fewer points than clusters requested."""


class TooFewPixelsError(DynasegError):
    """A color-model side has fewer pixels than mixture components."""


class DegenerateHullError(DynasegError):
    """Convex hull has no area; no bounding rectangle exists."""


class EmptyAfterClipError(DynasegError):
    """Bounding box does not intersect the image."""


class EmptyBoxError(DynasegError):
    """Bounding box contains no pixels."""


class SceneSpecError(DynasegError):
    """Synthetic scene description is inconsistent or out of frame."""


class StageError(DynasegError):
    """Pipeline stage failure, carrying the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
