"""Exception hierarchy shared across the package."""


class LatentSeqError(Exception):
    """Base class for all latentseq errors."""


class InputError(LatentSeqError, ValueError):
    """A caller supplied an out-of-range or malformed value."""


class FormatError(LatentSeqError, ValueError):
    """A file or packet does not conform to its expected format."""


class CorpusError(LatentSeqError):
    """A dataset operation could not produce any usable records."""
