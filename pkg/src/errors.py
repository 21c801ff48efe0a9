"""Exception hierarchy for the texture classification pipeline"""


class TextureError(ValueError):
    """Base class for every error raised by the library"""


class UnsupportedFormatError(TextureError):
    pass


class CorruptImageError(TextureError):
    pass


class OutOfBoundsError(TextureError):
    pass


class ZeroDimensionError(TextureError):
    pass


class BorderViolationError(TextureError):
    """A sampling disk leaves the image"""


class ImageTooSmallError(TextureError):
    pass


class BadLevelsError(TextureError):
    pass


class DegenerateMatrixError(TextureError):
    pass


class BadKError(TextureError):
    pass


class DegenerateSplitError(TextureError):
    pass


class DimensionMismatchError(TextureError):
    pass


class SingleClassError(TextureError):
    pass


class InsufficientDataError(TextureError):
    pass


class TooFewSamplesError(TextureError):
    pass


class ManifestError(TextureError):
    pass


class ModelFormatError(TextureError):
    pass


class DescriptorSyntaxError(TextureError):
    pass


class ExtractionError(TextureError):
    """Feature extraction failed for one image of a batch"""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class FeatureFileError(TextureError):
    """A stored feature table is malformed or missing the requested descriptor"""
