"""The FixtureWeb document: a frozen miniature web for deterministic runs.

One JSON file holds both the pages and the search index::

    {
      "pages": {
        "https://wiki.example/titan": {
          "title": "Titan (moon)",
          "body_text": "...",
          "links": ["https://wiki.example/huygens", "external:https://elsewhere.example/x"]
        }
      },
      "search_index": {
        "titan moon discoverer": ["https://wiki.example/titan"]
      }
    }

Link targets either resolve inside ``pages`` or carry an ``external:``
prefix marking them as pointing outside the fixture; the validator
rejects anything else. Search index keys are free-text queries whose
token sets drive ranking; every listed url must be a known page.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..core import is_absolute_url
from ..errors import FixtureError

EXTERNAL_PREFIX = "external:"

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> frozenset[str]:
    """Lowercase alphanumeric token set used for search-index matching."""
    return frozenset(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class FixturePage:
    url: str
    title: str
    body_text: str
    links: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not is_absolute_url(self.url):
            raise FixtureError(f"page url must be absolute: {self.url!r}")


@dataclass(frozen=True)
class FixtureWeb:
    """Immutable page map plus a tokenized search index."""

    pages: dict[str, FixturePage]
    search_index: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def indexed_queries(self) -> list[tuple[frozenset[str], tuple[str, ...]]]:
        return [(tokenize(query), urls) for query, urls in self.search_index.items()]


def fixture_web_from_dict(doc: dict[str, Any]) -> FixtureWeb:
    if not isinstance(doc, dict) or "pages" not in doc:
        raise FixtureError("fixture document must be an object with a 'pages' field")
    raw_pages = doc["pages"]
    if not isinstance(raw_pages, dict):
        raise FixtureError("'pages' must map url to page objects")
    pages: dict[str, FixturePage] = {}
    for url, raw in raw_pages.items():
        if not isinstance(raw, dict):
            raise FixtureError(f"page entry for {url!r} must be an object")
        try:
            pages[url] = FixturePage(
                url=url,
                title=str(raw.get("title", "")),
                body_text=str(raw.get("body_text", "")),
                links=tuple(raw.get("links", ())),
            )
        except FixtureError:
            raise
        except Exception as exc:
            raise FixtureError(f"bad page entry for {url!r}: {exc}") from exc
    raw_index = doc.get("search_index", {})
    if not isinstance(raw_index, dict):
        raise FixtureError("'search_index' must map query text to url lists")
    search_index = {
        str(query): tuple(str(u) for u in urls) for query, urls in raw_index.items()
    }
    return FixtureWeb(pages=pages, search_index=search_index)


def load_fixture_web(path: str | Path) -> FixtureWeb:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FixtureError(f"cannot read fixture file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture file {path} is not valid JSON: {exc}") from exc
    return fixture_web_from_dict(doc)


def validate_fixture_web(web: FixtureWeb) -> list[str]:
    """Every invariant violation as a human-readable problem string.

    An empty list means the fixture is valid. Used by the
    ``fixtures-validate`` CLI command and by tests that author fixtures.
    """
    problems: list[str] = []
    for url, page in web.pages.items():
        if not is_absolute_url(url):
            problems.append(f"page url is not absolute: {url!r}")
        if not page.title.strip():
            problems.append(f"page {url} has an empty title")
        for link in page.links:
            if link.startswith(EXTERNAL_PREFIX):
                target = link[len(EXTERNAL_PREFIX) :]
                if not is_absolute_url(target):
                    problems.append(
                        f"page {url} has external link with non-absolute target: {link!r}"
                    )
            elif link not in web.pages:
                problems.append(
                    f"page {url} links to {link!r}, which is neither a fixture page "
                    "nor flagged external:"
                )
    for query, urls in web.search_index.items():
        if not tokenize(query):
            problems.append(f"search index query {query!r} has no tokens")
        if not urls:
            problems.append(f"search index query {query!r} lists no urls")
        for url in urls:
            if url not in web.pages:
                problems.append(
                    f"search index query {query!r} lists unknown page {url!r}"
                )
    return problems
