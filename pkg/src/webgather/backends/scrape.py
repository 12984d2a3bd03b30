"""Page fetching and visible-text extraction.

``html_to_text`` is the single place HTML becomes text: boilerplate
containers (script, style, nav, footer, aside, and similar) are dropped
wholesale, whitespace collapses within a block, and block elements are
joined with single newlines. Fetching never raises on HTTP failure; a
failed fetch is a PageText with ``fetched_ok=False`` and empty text.
"""

from __future__ import annotations

from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Protocol

from .fixtures import FixtureWeb

# Containers whose entire subtree is boilerplate, not page content.
SKIP_TAGS = frozenset(
    {"script", "style", "nav", "footer", "aside", "noscript", "template", "head",
     "title", "svg", "iframe"}
)

# Elements that open or close a text block; blocks join with one newline.
BLOCK_TAGS = frozenset(
    {"p", "div", "h1", "h2", "h3", "h4", "h5", "h6", "li", "ul", "ol", "dl", "dt",
     "dd", "section", "article", "header", "main", "table", "thead", "tbody", "tr",
     "td", "th", "blockquote", "pre", "figure", "figcaption", "form", "fieldset",
     "details", "summary", "address"}
)

# Void elements that force a block boundary where they appear.
BREAK_TAGS = frozenset({"br", "hr"})


@dataclass(frozen=True)
class PageText:
    """Fetched page content; ``fetched_ok=False`` implies empty text."""

    url: str
    text: str
    fetched_ok: bool
    error: str | None = None


class _VisibleTextParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._blocks: list[str] = []
        self._buffer: list[str] = []

    def _flush(self) -> None:
        collapsed = " ".join("".join(self._buffer).split())
        if collapsed:
            self._blocks.append(collapsed)
        self._buffer = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in SKIP_TAGS:
            self._skip_depth += 1
            return
        if self._skip_depth:
            return
        if tag in BLOCK_TAGS or tag in BREAK_TAGS:
            self._flush()

    def handle_endtag(self, tag: str) -> None:
        if tag in SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if self._skip_depth:
            return
        if tag in BLOCK_TAGS:
            self._flush()

    def handle_data(self, data: str) -> None:
        if not self._skip_depth:
            self._buffer.append(data)

    def text(self) -> str:
        self._flush()
        return "\n".join(self._blocks)


def html_to_text(html: str) -> str:
    """Visible page text: boilerplate stripped, one newline per block."""
    parser = _VisibleTextParser()
    parser.feed(html)
    parser.close()
    return parser.text()


class PageScraper(Protocol):
    def fetch(self, url: str) -> PageText: ...


class FixtureScraper:
    """Serves FixtureWeb body text verbatim; unknown urls fail softly."""

    def __init__(self, web: FixtureWeb) -> None:
        self._web = web

    def fetch(self, url: str) -> PageText:
        page = self._web.pages.get(url)
        if page is None:
            return PageText(
                url=url, text="", fetched_ok=False, error="page not in fixture web"
            )
        return PageText(url=url, text=page.body_text, fetched_ok=True)


class LiveScraper:
    """HTTP fetch plus html_to_text; never raises, failures are soft."""

    USER_AGENT = "webgather/0.1 (+information aggregation research client)"

    def __init__(self, timeout_seconds: float = 20.0) -> None:
        self.timeout_seconds = timeout_seconds

    def fetch(self, url: str) -> PageText:
        import requests

        try:
            response = requests.get(
                url,
                timeout=self.timeout_seconds,
                headers={"User-Agent": self.USER_AGENT},
            )
        except Exception as exc:
            return PageText(url=url, text="", fetched_ok=False, error=str(exc))
        if response.status_code >= 400:
            return PageText(
                url=url,
                text="",
                fetched_ok=False,
                error=f"HTTP {response.status_code}",
            )
        return PageText(url=url, text=html_to_text(response.text), fetched_ok=True)
