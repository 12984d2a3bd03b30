"""Backends: model completion, search, page fetching, and browser control.

Every backend has a deterministic fixture implementation used by tests
and demos, and a credential-gated live implementation. Nothing here
imports the navigator or aggregator layers.
"""

from .browser import (
    BrowserDriver,
    CANDIDATE_CAP,
    ElementCandidate,
    FixtureBrowser,
    PageElement,
    PlaywrightBrowser,
    Screenshot,
    ScreenshotCapture,
    browser_act,
    capture_page_screenshots,
    extract_candidates,
)
from .fixtures import (
    EXTERNAL_PREFIX,
    FixturePage,
    FixtureWeb,
    fixture_web_from_dict,
    load_fixture_web,
    tokenize,
    validate_fixture_web,
)
from .model import (
    FingerprintModelBackend,
    LiveModelBackend,
    ModelBackend,
    RecordedCall,
    ScriptedModelBackend,
    prompt_fingerprint,
    prompt_text,
)
from .scrape import (
    FixtureScraper,
    LiveScraper,
    PageScraper,
    PageText,
    html_to_text,
)
from .search import (
    DEFAULT_RESULT_LIMIT,
    FixtureSearchProvider,
    LiveSearchProvider,
    SearchProvider,
    SearchResult,
    domain_matches,
)

__all__ = [
    "BrowserDriver",
    "CANDIDATE_CAP",
    "DEFAULT_RESULT_LIMIT",
    "EXTERNAL_PREFIX",
    "ElementCandidate",
    "FingerprintModelBackend",
    "FixtureBrowser",
    "FixturePage",
    "FixtureScraper",
    "FixtureSearchProvider",
    "FixtureWeb",
    "LiveModelBackend",
    "LiveScraper",
    "LiveSearchProvider",
    "ModelBackend",
    "PageElement",
    "PageScraper",
    "PageText",
    "PlaywrightBrowser",
    "RecordedCall",
    "Screenshot",
    "ScreenshotCapture",
    "ScriptedModelBackend",
    "SearchProvider",
    "SearchResult",
    "browser_act",
    "capture_page_screenshots",
    "domain_matches",
    "extract_candidates",
    "fixture_web_from_dict",
    "html_to_text",
    "load_fixture_web",
    "prompt_fingerprint",
    "prompt_text",
    "tokenize",
    "validate_fixture_web",
]
