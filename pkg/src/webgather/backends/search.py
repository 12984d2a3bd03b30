"""Search providers: deterministic fixture ranking and a live client.

The fixture provider is a pure function of (index, query, filter, limit):
index entries are scored by token overlap with the query, a url inherits
its best (overlap, rank-position) across entries, and ties fall back to
url lexicographic order. No randomness, no state.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Protocol
from urllib.parse import urlparse

from ..errors import BackendUnavailable, SearchFailure
from .fixtures import FixtureWeb, tokenize

DEFAULT_RESULT_LIMIT = 5
SNIPPET_CHARS = 160


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str
    snippet: str


class SearchProvider(Protocol):
    def search(
        self, query: str, *, domain_filter: str | None = None, limit: int = DEFAULT_RESULT_LIMIT
    ) -> list[SearchResult]: ...


def domain_matches(url: str, suffix: str) -> bool:
    """Hostname-suffix match: 'en.wikipedia.org' matches 'wikipedia.org'."""
    host = urlparse(url).hostname or ""
    suffix = suffix.lower().lstrip(".")
    host = host.lower()
    return host == suffix or host.endswith("." + suffix)


class FixtureSearchProvider:
    """Ranks fixture pages by query-token overlap with the search index."""

    def __init__(self, web: FixtureWeb) -> None:
        self._web = web
        self._entries = web.indexed_queries()

    def search(
        self, query: str, *, domain_filter: str | None = None, limit: int = DEFAULT_RESULT_LIMIT
    ) -> list[SearchResult]:
        if limit <= 0:
            return []
        query_tokens = tokenize(query)
        # best score per url: highest overlap, then earliest rank position
        best: dict[str, tuple[int, int]] = {}
        for entry_tokens, urls in self._entries:
            overlap = len(query_tokens & entry_tokens)
            if overlap == 0:
                continue
            for position, url in enumerate(urls):
                candidate = (overlap, position)
                current = best.get(url)
                if (
                    current is None
                    or candidate[0] > current[0]
                    or (candidate[0] == current[0] and candidate[1] < current[1])
                ):
                    best[url] = candidate
        ranked = sorted(
            best.items(), key=lambda item: (-item[1][0], item[1][1], item[0])
        )
        results = []
        for url, _score in ranked:
            if domain_filter is not None and not domain_matches(url, domain_filter):
                continue
            page = self._web.pages.get(url)
            title = page.title if page is not None else url
            snippet = page.body_text[:SNIPPET_CHARS] if page is not None else ""
            results.append(SearchResult(url=url, title=title, snippet=snippet))
            if len(results) >= limit:
                break
        return results


class LiveSearchProvider:
    """Web search over a serper.dev-style JSON endpoint.

    Needs SEARCH_API_KEY; the endpoint can be overridden with
    SEARCH_API_BASE. Only constructed in live mode.
    """

    def __init__(self, api_key: str, api_base: str = "https://google.serper.dev") -> None:
        self.api_key = api_key
        self.api_base = api_base.rstrip("/")

    @classmethod
    def from_env(cls) -> "LiveSearchProvider":
        api_key = os.environ.get("SEARCH_API_KEY", "")
        if not api_key:
            raise BackendUnavailable("SEARCH_API_KEY is not set; live search needs it")
        api_base = os.environ.get("SEARCH_API_BASE", "https://google.serper.dev")
        return cls(api_key=api_key, api_base=api_base)

    def search(
        self, query: str, *, domain_filter: str | None = None, limit: int = DEFAULT_RESULT_LIMIT
    ) -> list[SearchResult]:
        import requests

        effective_query = query
        if domain_filter:
            effective_query = f"{query} site:{domain_filter}"
        try:
            response = requests.post(
                f"{self.api_base}/search",
                json={"q": effective_query, "num": max(limit, 1)},
                headers={"X-API-KEY": self.api_key, "Content-Type": "application/json"},
                timeout=30,
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:
            raise SearchFailure(f"live search failed: {exc}") from exc
        results = []
        for item in payload.get("organic", []):
            url = item.get("link", "")
            if not url:
                continue
            if domain_filter is not None and not domain_matches(url, domain_filter):
                continue
            results.append(
                SearchResult(
                    url=url,
                    title=item.get("title", url),
                    snippet=item.get("snippet", ""),
                )
            )
            if len(results) >= limit:
                break
        return results
