"""Exception taxonomy shared across the toolkit."""


class ToolError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ToolError):
    """Invalid or inconsistent configuration."""


class IngestionError(ToolError):
    """Corpus or output data could not be ingested."""


class MetricError(ToolError):
    """A metric's preconditions were violated."""


class ValidationError(ToolError):
    """A data structure failed its integrity checks."""


class ScorerError(ToolError):
    """A scorer request failed."""


class TransportError(ScorerError):
    """The scorer transport broke down (process death, malformed frames)."""


class FixtureMiss(ScorerError):
    """A request id was not present in the fixture file."""

    def __init__(self, request_id: str):
        super().__init__(f"no fixture entry for request id {request_id}")
        self.request_id = request_id


class SamplingError(ToolError):
    """The sampling pool cannot satisfy the requested quotas."""


class ReportError(ToolError):
    """Report construction or combination failed."""
