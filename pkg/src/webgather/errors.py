"""Exception types shared across the package.

Every error raised by library code is a subclass of :class:`WebGatherError`
so callers can catch one root type. Parse failures carry the raw model
output that could not be interpreted.
"""

from __future__ import annotations


class WebGatherError(Exception):
    """Root of the package exception hierarchy."""


class ConfigError(WebGatherError):
    """A run configuration field is missing, mistyped, or out of range."""


class FixtureError(WebGatherError):
    """A fixture document violates the FixtureWeb schema or invariants."""


class BackendUnavailable(WebGatherError):
    """A backend cannot serve the request (missing credentials, unknown
    fingerprint, transport failure, or an optional dependency is absent)."""


class ScriptExhausted(BackendUnavailable):
    """A scripted model backend ran out of canned turns."""


class SearchFailure(WebGatherError):
    """The search provider failed at the transport or quota level."""


class FetchFailure(WebGatherError):
    """A page could not be fetched; fixture-mode fetches never raise this."""


class StaleElement(WebGatherError):
    """A browser action referenced an element that is gone or unusable."""


class NavigationTimeout(WebGatherError):
    """A browser navigation did not settle in time."""


class ExtractionParseFailure(WebGatherError):
    """Extractor model output stayed unparseable after one corrective retry."""


class MalformedDecision(WebGatherError):
    """Aggregator model output had no parseable decision object."""


class NavigationParseFailure(WebGatherError):
    """Navigator model output had no usable tool call."""


class GroundingFailure(WebGatherError):
    """An action description could not be grounded to a page element."""


class JudgeParseFailure(WebGatherError):
    """Judge model output stayed unparseable after one corrective retry."""


class FatalBackendError(WebGatherError):
    """A backend failure that ends the run; the partial stack is preserved."""


class SkippedFile(WebGatherError):
    """A trace file could not be parsed and was skipped by trace statistics."""
