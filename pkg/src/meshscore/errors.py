"""Exception hierarchy.

Exit-code mapping used by the CLI: 1 for validation problems, 2 for
backend/transport problems, 3 for anything else.
"""


class MeshScoreError(Exception):
    exit_code = 3


class ValidationError(MeshScoreError):
    exit_code = 1


class BoundedInputError(ValidationError):
    """An input exceeded a documented cap (e.g. subdivision level)."""


class PoleError(ValidationError):
    """Viewpoint parallel to the vertical axis; the pose formula is undefined there."""


class MeshParseError(ValidationError):
    pass


class EmptyMeshError(ValidationError):
    pass


class MissingTextureError(ValidationError):
    def __init__(self, path):
        super().__init__(f"texture image not found: {path}")
        self.path = path


class DegenerateGeometryError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class InfeasibleDedupError(ValidationError):
    """Dedup cannot reach the target size without violating the threshold."""

    def __init__(self, message, floor_similarity):
        super().__init__(message)
        self.floor_similarity = floor_similarity


class UndefinedCorrelationError(ValidationError):
    """Correlation undefined (zero variance or all-tied data)."""


class TransportError(MeshScoreError):
    """Backend unreachable after retries."""

    exit_code = 2

    def __init__(self, message, attempts=None, last_error=None):
        super().__init__(message)
        self.attempts = attempts
        self.last_error = last_error


class ProtocolError(MeshScoreError):
    """Backend reachable but the reply violated the protocol."""

    exit_code = 2

    def __init__(self, message, raw=None):
        super().__init__(message)
        self.raw = raw
