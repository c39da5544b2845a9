"""Exception hierarchy shared by the engine, the CLI, and the HTTP service.

Every error carries a stable machine-readable ``code`` so transports can
surface it without string matching.
"""

from __future__ import annotations


class WhatIfError(Exception):
    """Base class for all domain errors."""

    code = "ERROR"

    def __init__(self, message: str, *, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class SchemaMismatchError(WhatIfError):
    code = "SCHEMA_MISMATCH"


class UnknownDimensionError(WhatIfError):
    code = "UNKNOWN_DIMENSION"


class UnknownMeasureError(WhatIfError):
    code = "UNKNOWN_MEASURE"


class UnknownValueError(WhatIfError):
    """A dimension value is neither a real value nor a registered scenario."""

    code = "UNKNOWN_VALUE"


class UnknownScenarioError(WhatIfError):
    code = "UNKNOWN_SCENARIO"


class NameCollisionError(WhatIfError):
    code = "NAME_COLLISION"


class SelfReferenceError(WhatIfError):
    """A query associated with a scenario names that same scenario."""

    code = "SELF_REFERENCE"


class EmptyResolutionError(WhatIfError):
    """A scenario-bearing part of a query resolved to no stored queries."""

    code = "EMPTY_RESOLUTION"


class MissingEntryError(WhatIfError):
    code = "MISSING_ENTRY"


class BadIndexError(WhatIfError):
    code = "BAD_INDEX"


class BadFactorError(WhatIfError):
    """A multiplicative factor is NaN or infinite."""

    code = "BAD_FACTOR"


class BadQueryError(WhatIfError):
    """A query is structurally unusable (empty selection, bad text, ...)."""

    code = "BAD_QUERY"


class BadAggregationError(WhatIfError):
    code = "BAD_AGGREGATION"


class MissingColumnError(WhatIfError):
    code = "MISSING_COLUMN"


class MeasureParseError(WhatIfError):
    code = "MEASURE_PARSE"


class DuplicateValueError(WhatIfError):
    """One value string appears under two different dimension columns."""

    code = "DUPLICATE_VALUE"


class MalformedDocumentError(WhatIfError):
    code = "MALFORMED_DOCUMENT"


class NoCubeError(WhatIfError):
    code = "NO_CUBE"
