"""Exception hierarchy shared by all pipeline stages."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateFit(PipelineError):
    """Plane fit is ill-conditioned (collinear or coincident points)."""


class ParallelAxes(PipelineError):
    """Frame construction hint axis is (near-)parallel to the primary axis."""


class ParseError(PipelineError):
    """Malformed input record. Carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyTrack(PipelineError):
    """A track ended up with zero usable frames."""


class NonMonotonicTime(PipelineError):
    """Timestamps are not strictly increasing."""


class DegenerateCalibration(PipelineError):
    """Gripper calibration collapsed (d_min >= d_max)."""


class TooManyGaps(PipelineError):
    """Fraction of retargetable frames fell below the configured floor."""


class InvalidMatrix(PipelineError):
    """A matrix that must be rigid is not, beyond repairable tolerance."""


class BehindCamera(PipelineError):
    """Point has non-positive depth and cannot be projected."""


class EmptyMesh(PipelineError):
    """No renderable faces remain after filtering."""


class MissingTopology(PipelineError):
    """Mesh augmentation was requested without face/part topology."""


class ViewMismatch(PipelineError):
    """Camera frame resolution differs from its declared shape."""


class VersionMismatch(PipelineError):
    """On-disk format version is not supported by this reader."""


class ChecksumMismatch(PipelineError):
    """A payload file does not match its recorded integrity hash."""


class EmptyEmbodiment(PipelineError):
    """A required embodiment has zero samples in the index."""


class EmptySet(PipelineError):
    """Statistics requested over an empty episode collection."""


class ConfigError(PipelineError):
    """Pipeline configuration is invalid or references missing files."""
