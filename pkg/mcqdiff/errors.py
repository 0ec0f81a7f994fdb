# -*- coding: utf-8 -*-
"""Exception hierarchy. Every error carries the CLI exit code it maps to."""


class McqdiffError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1

    def __init__(self, message, **details):
        super(McqdiffError, self).__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        return self.message


class UsageError(McqdiffError):
    """Bad arguments, bad config values, or a locked output directory."""

    exit_code = 1


class DataError(McqdiffError):
    """Input data does not satisfy what a stage needs."""

    exit_code = 2


class SchemaError(DataError):
    """A JSONL line does not conform to its schema."""

    def __init__(self, path, line, field, reason):
        super(SchemaError, self).__init__(
            "{}:{}: field '{}': {}".format(path, line, field, reason),
            path=path, line=line, field=field)
        self.path = path
        self.line = line
        self.field = field
        self.reason = reason


class ReferentialError(DataError):
    """A record references a question missing from the item bank."""


class EmptyResultError(DataError):
    """Filtering or partitioning left nothing to work with."""


class MissingArtifactError(DataError):
    """A stage was run before the stage that produces its inputs."""

    def __init__(self, path, producer):
        super(MissingArtifactError, self).__init__(
            "Missing '{}'. Run `mcqdiff {}` first.".format(path, producer),
            path=path, producer=producer)
        self.path = path
        self.producer = producer


class IncompleteMatrixError(DataError):
    """A simulation matrix or feature row lacks a persona."""


class DegenerateResponseError(DataError):
    """A provider returned an option distribution that sums to zero."""


class FitError(McqdiffError):
    """A model could not be fitted."""

    exit_code = 2


class DegenerateError(FitError):
    """Zero variance where a scale is needed."""


class SingularSystemError(FitError):
    """Normal equations have no unique solution."""


class ProviderError(McqdiffError):
    """The language model provider could not deliver a usable answer."""

    exit_code = 3


class TransportError(ProviderError):
    """Network failure, timeout, rate limit or 5xx. Retryable."""


class ResponseParseError(ProviderError):
    """The provider answered, but not in the requested format."""

    def __init__(self, message, raw):
        super(ResponseParseError, self).__init__(message, raw=raw)
        self.raw = raw
