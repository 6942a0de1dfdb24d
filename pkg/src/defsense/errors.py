"""Exception hierarchy shared by all defsense modules."""


class DefsenseError(Exception):
    """Base class for all toolkit errors."""


class MalformedRow(DefsenseError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateId(DefsenseError):
    pass


class UnknownUsage(DefsenseError):
    pass


class EmptyDefinition(DefsenseError):
    pass


class MalformedLine(DefsenseError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TransportError(DefsenseError):
    def __init__(self, message, retries=0):
        self.retries = retries
        super().__init__(f"{message} (after {retries} retries)")


class GeneratorError(DefsenseError):
    pass


class MissingKey(DefsenseError):
    pass


class DimensionMismatch(DefsenseError):
    pass


class ZeroVector(DefsenseError):
    pass


class MissingPayload(DefsenseError):
    pass


class DegenerateInput(DefsenseError):
    pass


class ClusterTooSmall(DefsenseError):
    pass


class MissingDefinition(DefsenseError):
    pass


class MissingEmbedding(DefsenseError):
    pass


class MissingLabel(DefsenseError):
    pass


class TooFewPoints(DefsenseError):
    pass


class SingleCluster(DefsenseError):
    pass


class RankDeficient(DefsenseError):
    pass


class ConfigError(DefsenseError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
