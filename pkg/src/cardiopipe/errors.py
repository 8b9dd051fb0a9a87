"""Exception types shared across the pipeline."""


class CardioPipeError(Exception):
    """Base class for all pipeline errors."""


class MalformedHeader(CardioPipeError):
    """NIfTI-1 header is invalid, inconsistent, or not axis-aligned."""


class UnsupportedDatatype(CardioPipeError):
    """Voxel datatype or value range not supported by this reader."""


class InvalidCode(CardioPipeError):
    """Structure code outside 1..7."""


class InvalidSpacing(CardioPipeError):
    """Non-positive target voxel spacing."""


class EmptyMask(CardioPipeError):
    """Operation requires a nonempty structure mask."""


class GeometryMismatch(CardioPipeError):
    """Inputs do not share dims/spacing/origin."""


class EmptyCohort(CardioPipeError):
    """Atlas construction requires at least one subject."""


class EmptySurface(CardioPipeError):
    """Surface distance requires both masks to be nonempty."""


class InvalidNSvd(CardioPipeError):
    """Number of retained singular values must be 1, 2 or 3."""


class ColumnMismatch(CardioPipeError):
    """Feature tables do not share the same columns."""


class DimensionMismatch(CardioPipeError):
    """Feature row dimension does not match the model input size."""


class LengthMismatch(CardioPipeError):
    """Prediction and truth label vectors differ in length."""


class NonFiniteLoss(CardioPipeError):
    """Training loss became NaN or infinite."""


class InsufficientData(CardioPipeError):
    """Not enough subjects per class for the requested fold count."""


class ConfigError(CardioPipeError):
    """Bad pipeline configuration (CLI exit code 2)."""


class StageError(CardioPipeError):
    """Pipeline stage failure, tagged with stage name and subject id."""

    def __init__(self, stage: str, subject: str | None, message: str):
        self.stage = stage
        self.subject = subject
        prefix = f"[{stage}]" if subject is None else f"[{stage}] subject={subject}"
        super().__init__(f"{prefix} {message}")


class DegenerateShapeWarning(UserWarning):
    """Mask is a single voxel or (co)planar; shape features use conventions."""
