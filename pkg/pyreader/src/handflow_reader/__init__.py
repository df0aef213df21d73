"""Training-side loader for handflow datasets.

Reads episode directories, dataset manifests, and materialized batch
schedules into numpy structures for ML training stacks. This package never
re-samples: it replays schedules exactly as the pipeline emitted them, so
the pipeline stays the single source of sampling determinism.
"""

from .batches import LoadedBatch, iterate_batches, load_schedule
from .episodes import LoadedEpisode, load_episode, load_manifest
from .errors import ChecksumError, FormatError, MissingEpisodeError, VersionError

__all__ = [
    "ChecksumError",
    "FormatError",
    "LoadedBatch",
    "LoadedEpisode",
    "MissingEpisodeError",
    "VersionError",
    "iterate_batches",
    "load_episode",
    "load_manifest",
    "load_schedule",
]

__version__ = "0.1.0"
