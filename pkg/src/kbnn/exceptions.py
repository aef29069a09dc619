"""Exception types raised by the kbnn package."""


class KBNNError(Exception):
    """Base class for kbnn-specific errors."""


class SingularMatrixError(KBNNError):
    """A symmetric solve failed even after maximum jitter escalation.

    Carries the largest jitter that was attempted in ``max_jitter``.
    """

    def __init__(self, message, max_jitter):
        super().__init__(message)
        self.max_jitter = max_jitter


class ModelFormatError(KBNNError):
    """A model document could not be loaded (version, structure, or values)."""


class UpdateFailedError(KBNNError):
    """A weight update produced non-finite values; the previous state is kept.

    ``layer_index`` identifies the layer (0-based) where the failure occurred.
    """

    def __init__(self, message, layer_index):
        super().__init__(message)
        self.layer_index = layer_index
