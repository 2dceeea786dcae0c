"""Exception types shared across the engine."""


class AgriRagError(Exception):
    """Base class for all engine-specific errors."""


class ConfigurationError(AgriRagError):
    """Invalid configuration: bad values, missing files, malformed templates."""


class RulebookError(ConfigurationError):
    """Keyword rulebook failed validation."""


class TransportError(AgriRagError):
    """A remote model backend could not be reached or returned a failure.

    Always carries the endpoint identity so operators can tell which
    backend misbehaved.
    """

    def __init__(self, message: str, endpoint: str):
        super().__init__(f"{message} (endpoint: {endpoint})")
        self.endpoint = endpoint


class CorruptIndexError(AgriRagError):
    """Index file failed structural validation.

    ``offset`` is the byte offset at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
