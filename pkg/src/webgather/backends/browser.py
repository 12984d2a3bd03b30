"""Browser drivers for the interactive visual setting.

The abstraction surface is exactly five primitives (CLICK, SELECT, TYPE,
PRESS_ENTER, GO_BACK) plus screenshot and candidate capture. AGGREGATE
and TERMINATE are navigator-level decisions and never reach a driver.

FixtureBrowser walks a FixtureWeb deterministically: a search homepage
with a query box, synthetic results pages listing the top fixture hits,
and ordinary pages whose links come straight from the fixture document.
Page height derives from body-text length so screenshot counts are
stable. The live driver wraps Playwright behind a lazy import and is
only constructed in live mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from io import BytesIO
from typing import Protocol
from urllib.parse import quote_plus

from ..core import VisualNavAction
from ..errors import BackendUnavailable, FixtureError, NavigationTimeout, StaleElement
from .fixtures import EXTERNAL_PREFIX, FixtureWeb
from .search import FixtureSearchProvider, SearchResult

DEFAULT_VIEWPORT = (1280, 720)
CANDIDATE_CAP = 50


@dataclass(frozen=True)
class Screenshot:
    """One viewport capture; offsets grow strictly within a sequence."""

    image: bytes
    scroll_offset_px: int
    viewport: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.image:
            raise ValueError("screenshot image bytes must be non-empty")
        if self.scroll_offset_px < 0:
            raise ValueError("scroll_offset_px must be >= 0")


@dataclass(frozen=True)
class ElementCandidate:
    """An interactable element handle offered to the grounding step."""

    index: int
    role: str
    label: str
    in_viewport: bool = True


@dataclass(frozen=True)
class ScreenshotCapture:
    shots: tuple[Screenshot, ...]
    truncated: bool


@dataclass(frozen=True)
class PageElement:
    """Raw element description; fixtures use it for scripted forms."""

    role: str
    label: str
    target: str | None = None
    options: tuple[str, ...] = ()
    enabled: bool = True
    hidden: bool = False


class BrowserDriver(Protocol):
    @property
    def current_url(self) -> str: ...

    def goto(self, url: str) -> None: ...

    def act(self, action: VisualNavAction) -> str: ...

    def candidates(self) -> list[ElementCandidate]: ...

    def capture_screenshots(self, max_screenshots: int) -> ScreenshotCapture: ...


def browser_act(driver: BrowserDriver, action: VisualNavAction) -> str:
    """Execute one primitive; returns the (possibly unchanged) url."""
    return driver.act(action)


def extract_candidates(driver: BrowserDriver) -> list[ElementCandidate]:
    return driver.candidates()


def capture_page_screenshots(
    driver: BrowserDriver, max_screenshots: int = 10
) -> ScreenshotCapture:
    return driver.capture_screenshots(max_screenshots)


@lru_cache(maxsize=64)
def _fixture_png(shade: int) -> bytes:
    from PIL import Image

    image = Image.new("L", (16, 9), color=shade % 256)
    buffer = BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


class FixtureBrowser:
    """Deterministic driver over a FixtureWeb.

    The home page and every synthetic results page expose a search box
    and a Search button; results pages add one link per hit. Ordinary
    pages expose their fixture links plus any scripted form elements
    passed via ``forms``. The first ``viewport_elements`` visible
    elements count as in-viewport.
    """

    def __init__(
        self,
        web: FixtureWeb,
        home_url: str,
        *,
        results_per_page: int = 5,
        viewport_elements: int = 12,
        forms: dict[str, list[PageElement]] | None = None,
        viewport: tuple[int, int] = DEFAULT_VIEWPORT,
        chars_per_viewport: int = 2000,
    ) -> None:
        if home_url not in web.pages:
            raise FixtureError(f"home url {home_url!r} is not a fixture page")
        self._web = web
        self._search = FixtureSearchProvider(web)
        self.home_url = home_url
        self.results_per_page = results_per_page
        self.viewport_elements = viewport_elements
        self.viewport = viewport
        self.chars_per_viewport = chars_per_viewport
        self._forms = dict(forms or {})
        self._current = home_url
        self._history: list[str] = []
        self._typed = ""
        self._selected: dict[str, str] = {}
        self._results_by_url: dict[str, tuple[str, list[SearchResult]]] = {}
        self._listing: list[PageElement] = []

    @property
    def current_url(self) -> str:
        return self._current

    def goto(self, url: str) -> None:
        if url not in self._web.pages and url not in self._results_by_url:
            raise NavigationTimeout(f"page failed to load: {url}")
        self._current = url
        self._history.clear()
        self._reset_page_state()

    # -- page model -------------------------------------------------------

    def _results_url(self, query: str) -> str:
        base = self.home_url if self.home_url.endswith("/") else self.home_url + "/"
        return f"{base}search?q={quote_plus(query)}"

    def _is_results_page(self) -> bool:
        return self._current in self._results_by_url

    def _current_body(self) -> str:
        if self._is_results_page():
            query, results = self._results_by_url[self._current]
            lines = [f"Search results for: {query}"]
            for result in results:
                lines.append(result.title)
                lines.append(result.snippet)
            return "\n".join(lines)
        page = self._web.pages[self._current]
        return page.body_text

    def _link_label(self, target: str) -> str:
        if target.startswith(EXTERNAL_PREFIX):
            return target[len(EXTERNAL_PREFIX) :]
        page = self._web.pages.get(target)
        return page.title if page is not None and page.title else target

    def _elements_for_current(self) -> list[PageElement]:
        search_box = [
            PageElement(role="input", label="Search query"),
            PageElement(role="button", label="Search", target="__submit__"),
        ]
        if self._is_results_page():
            _query, results = self._results_by_url[self._current]
            links = [
                PageElement(role="link", label=result.title, target=result.url)
                for result in results
            ]
            return search_box + links
        page = self._web.pages[self._current]
        elements: list[PageElement] = []
        if self._current == self.home_url:
            elements.extend(search_box)
        elements.extend(self._forms.get(self._current, []))
        elements.extend(
            PageElement(role="link", label=self._link_label(target), target=target)
            for target in page.links
        )
        return elements

    def _reset_page_state(self) -> None:
        self._typed = ""
        self._selected = {}
        self._listing = []

    # -- protocol ----------------------------------------------------------

    def candidates(self) -> list[ElementCandidate]:
        visible = [
            e for e in self._elements_for_current() if e.enabled and not e.hidden
        ]
        ordered = (
            visible[: self.viewport_elements] + visible[self.viewport_elements :]
        )[:CANDIDATE_CAP]
        self._listing = ordered
        return [
            ElementCandidate(
                index=i,
                role=element.role,
                label=element.label,
                in_viewport=i < self.viewport_elements,
            )
            for i, element in enumerate(ordered)
        ]

    def _resolve(self, index: int | None) -> PageElement:
        if index is None:
            raise StaleElement("action requires an element index")
        if not self._listing:
            self.candidates()
        if not 0 <= index < len(self._listing):
            raise StaleElement(f"no element with index {index} on this page")
        return self._listing[index]

    def _navigate(self, url: str | None) -> None:
        if url is None:
            raise StaleElement("link has no target")
        if url.startswith(EXTERNAL_PREFIX):
            raise NavigationTimeout(
                f"external page did not load in fixture mode: {url[len(EXTERNAL_PREFIX):]}"
            )
        if url not in self._web.pages and url not in self._results_by_url:
            raise NavigationTimeout(f"page failed to load: {url}")
        self._history.append(self._current)
        self._current = url
        self._reset_page_state()

    def _submit_search(self, query: str) -> None:
        results = self._search.search(query, limit=self.results_per_page)
        url = self._results_url(query)
        self._results_by_url[url] = (query, results)
        self._history.append(self._current)
        self._current = url
        self._reset_page_state()

    def act(self, action: VisualNavAction) -> str:
        kind = action.kind
        if kind == "GO_BACK":
            if self._history:
                self._current = self._history.pop()
                self._reset_page_state()
            return self._current
        if kind == "PRESS_ENTER":
            if self._typed.strip():
                self._submit_search(self._typed)
            return self._current
        if kind == "TYPE":
            element = self._resolve(action.element_index)
            if element.role != "input":
                raise StaleElement(f"TYPE target is a {element.role}, not an input")
            self._typed = action.text or ""
            return self._current
        if kind == "SELECT":
            element = self._resolve(action.element_index)
            if element.role != "select":
                raise StaleElement(f"SELECT target is a {element.role}, not a select")
            if action.option is None or action.option not in element.options:
                raise StaleElement(
                    f"option {action.option!r} is not available on {element.label!r}"
                )
            self._selected[element.label] = action.option
            return self._current
        if kind == "CLICK":
            element = self._resolve(action.element_index)
            if element.role == "link":
                self._navigate(element.target)
            elif element.role == "button" and element.target == "__submit__":
                if self._typed.strip():
                    self._submit_search(self._typed)
            return self._current
        raise ValueError(f"{kind} is not a browser primitive")

    def capture_screenshots(self, max_screenshots: int) -> ScreenshotCapture:
        body = self._current_body()
        viewports = max(1, math.ceil(max(len(body), 1) / self.chars_per_viewport))
        count = min(viewports, max_screenshots)
        height = self.viewport[1]
        shots = tuple(
            Screenshot(
                image=_fixture_png(40 + 23 * i),
                scroll_offset_px=i * height,
                viewport=self.viewport,
            )
            for i in range(count)
        )
        return ScreenshotCapture(shots=shots, truncated=viewports > max_screenshots)


class PlaywrightBrowser:
    """Live driver over Playwright's sync API; needs a browser install.

    Import and launch happen lazily so fixture-only environments never
    pay for it. Every Playwright error is translated into the package's
    StaleElement / NavigationTimeout vocabulary.
    """

    CANDIDATE_SELECTOR = "a[href], button, input, select"

    def __init__(
        self,
        start_url: str,
        *,
        viewport: tuple[int, int] = DEFAULT_VIEWPORT,
        headless: bool = True,
        timeout_seconds: float = 30.0,
    ) -> None:
        try:
            from playwright.sync_api import sync_playwright
        except ImportError as exc:
            raise BackendUnavailable(
                "playwright is not installed; the live browser driver requires it"
            ) from exc
        self.viewport = viewport
        self._timeout_ms = timeout_seconds * 1000
        self._pw = sync_playwright().start()
        self._browser = self._pw.chromium.launch(headless=headless)
        self._page = self._browser.new_page(
            viewport={"width": viewport[0], "height": viewport[1]}
        )
        self._handles: list[object] = []
        self.goto(start_url)

    @property
    def current_url(self) -> str:
        return self._page.url

    def goto(self, url: str) -> None:
        try:
            self._page.goto(url, timeout=self._timeout_ms)
        except Exception as exc:
            raise NavigationTimeout(f"navigation to {url} failed: {exc}") from exc
        self._handles = []

    def candidates(self) -> list[ElementCandidate]:
        viewport_height = self.viewport[1]
        rows: list[tuple[bool, object, str, str]] = []
        for handle in self._page.query_selector_all(self.CANDIDATE_SELECTOR):
            try:
                if not handle.is_visible() or not handle.is_enabled():
                    continue
                box = handle.bounding_box()
            except Exception:
                continue
            if box is None:
                continue
            role = (handle.evaluate("el => el.tagName") or "").lower()
            role = {"a": "link"}.get(role, role)
            label = (handle.inner_text() or "").strip()
            if not label:
                label = (handle.get_attribute("aria-label") or "").strip()
            if not label:
                label = (handle.get_attribute("name") or handle.get_attribute("href") or "")
            in_viewport = 0 <= box["y"] < viewport_height
            rows.append((in_viewport, handle, role, " ".join(label.split())[:120]))
        rows.sort(key=lambda row: not row[0])
        rows = rows[:CANDIDATE_CAP]
        self._handles = [row[1] for row in rows]
        return [
            ElementCandidate(index=i, role=row[2], label=row[3], in_viewport=row[0])
            for i, row in enumerate(rows)
        ]

    def _resolve(self, index: int | None) -> object:
        if index is None:
            raise StaleElement("action requires an element index")
        if not self._handles:
            self.candidates()
        if not 0 <= index < len(self._handles):
            raise StaleElement(f"no element with index {index} on this page")
        return self._handles[index]

    def act(self, action: VisualNavAction) -> str:
        try:
            if action.kind == "CLICK":
                self._resolve(action.element_index).click(timeout=self._timeout_ms)
            elif action.kind == "TYPE":
                self._resolve(action.element_index).fill(
                    action.text or "", timeout=self._timeout_ms
                )
            elif action.kind == "SELECT":
                self._resolve(action.element_index).select_option(
                    label=action.option, timeout=self._timeout_ms
                )
            elif action.kind == "PRESS_ENTER":
                self._page.keyboard.press("Enter")
                self._page.wait_for_load_state(timeout=self._timeout_ms)
            elif action.kind == "GO_BACK":
                self._page.go_back(timeout=self._timeout_ms)
            else:
                raise ValueError(f"{action.kind} is not a browser primitive")
        except (StaleElement, ValueError):
            raise
        except Exception as exc:
            raise StaleElement(f"{action.kind} failed: {exc}") from exc
        self._handles = []
        return self._page.url

    def capture_screenshots(self, max_screenshots: int) -> ScreenshotCapture:
        height = self.viewport[1]
        total = int(self._page.evaluate("document.body.scrollHeight") or height)
        viewports = max(1, math.ceil(total / height))
        count = min(viewports, max_screenshots)
        shots = []
        for i in range(count):
            offset = i * height
            self._page.evaluate(f"window.scrollTo(0, {offset})")
            shots.append(
                Screenshot(
                    image=self._page.screenshot(),
                    scroll_offset_px=offset,
                    viewport=self.viewport,
                )
            )
        self._page.evaluate("window.scrollTo(0, 0)")
        return ScreenshotCapture(shots=tuple(shots), truncated=viewports > max_screenshots)

    def close(self) -> None:
        self._browser.close()
        self._pw.stop()
