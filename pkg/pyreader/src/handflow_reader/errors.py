class ReaderError(Exception):
    """Base class for loader failures."""


class FormatError(ReaderError):
    """File does not follow the documented dataset schema."""


class VersionError(ReaderError):
    """On-disk format version not supported by this reader."""


class ChecksumError(ReaderError):
    """Payload bytes do not match the hash recorded at write time."""


class MissingEpisodeError(ReaderError):
    """A schedule or manifest references an episode that is not on disk."""
