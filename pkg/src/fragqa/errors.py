"""Exception taxonomy shared across the pipeline.

Plain ``ValueError`` is used for invalid arguments; everything that names a
pipeline stage gets its own class so the CLI can map failures to exit codes.
"""


class FragqaError(Exception):
    """Base class for all pipeline errors."""


class IngestError(FragqaError):
    """A frame file or decoder invocation failed."""


class ManifestError(FragqaError):
    """A video manifest disagrees with what is on disk."""


class AnnotationError(FragqaError):
    """A presence sidecar is inconsistent with its sequence."""


class GenerationError(FragqaError):
    """A task generator cannot satisfy its contract (e.g. distractor pool exhausted)."""


class EmitError(FragqaError):
    """Dataset serialization failed (duplicate ids, unwritable target)."""


class ValidationError(FragqaError):
    """A dataset file violates the record or manifest schema."""


class ScoringError(FragqaError):
    """A response file cannot be scored against the dataset."""


class SkipVideo(FragqaError):
    """Raised to drop a whole video from generation; the message is the skip reason."""


class SkipInstance(FragqaError):
    """Raised to drop a single task instance; the message is the skip reason."""
