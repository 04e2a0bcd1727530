"""Page manifests: the ordered list of HTTP components that make up a page.

Manifests are read from a HAR 1.2 document (only the handful of fields the
model needs) or from a worksheet CSV with measured first-byte and
content-download times per component.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple
from urllib.parse import urlparse

from .exceptions import EmptyManifest, ParseError

KB = 1024
WORKSHEET_HEADER = ("url", "mime", "size_bytes", "cd_ms", "fb_ms")
DEFAULT_JS_MARKERS = ("javascript",)


class ComponentClass(str, enum.Enum):
    BASE_PAGE = "BasePage"
    JAVASCRIPT = "JavaScript"
    OTHER_STATIC = "OtherStatic"


@dataclass(frozen=True)
class HttpComponent:
    url: str
    mime: str
    size_bytes: int
    cls: ComponentClass
    doc_order: int
    measured_fb_ms: Optional[float] = None
    measured_cd_ms: Optional[float] = None

    @property
    def domain_key(self) -> str:
        return domain_of(self.url)

    @property
    def is_static(self) -> bool:
        return self.cls is not ComponentClass.BASE_PAGE

    @property
    def has_measurements(self) -> bool:
        return self.measured_fb_ms is not None and self.measured_cd_ms is not None


@dataclass(frozen=True)
class PageAggregates:
    n_static: int
    m_domains: int
    o_js: int
    p_other: int
    total_bytes: int

    @property
    def total_kb(self) -> float:
        return self.total_bytes / KB

    @property
    def avg_kb_per_request(self) -> float:
        """Average KB per HTTP request (page complexity used for rendering)."""
        return self.total_kb / (self.n_static + 1)


@dataclass(frozen=True)
class PageManifest:
    components: Tuple[HttpComponent, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.components:
            raise EmptyManifest("manifest has no components")
        orders = [c.doc_order for c in self.components]
        if orders != list(range(1, len(orders) + 1)):
            raise ParseError(f"doc_order must run 1..{len(orders)} in sequence")
        bases = [c for c in self.components if c.cls is ComponentClass.BASE_PAGE]
        if len(bases) != 1 or bases[0].doc_order != 1:
            raise ParseError("exactly one base page is required and it must come first")

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def base_page(self) -> HttpComponent:
        return self.components[0]

    @property
    def statics(self) -> Tuple[HttpComponent, ...]:
        return self.components[1:]

    @property
    def aggregates(self) -> PageAggregates:
        return aggregates(self)


def domain_of(url: str) -> str:
    return (urlparse(url).hostname or "").lower()


def classify(mime: str, first: bool, js_markers: Sequence[str] = DEFAULT_JS_MARKERS) -> ComponentClass:
    if first:
        return ComponentClass.BASE_PAGE
    mime = (mime or "").lower()
    if any(marker in mime for marker in js_markers):
        return ComponentClass.JAVASCRIPT
    return ComponentClass.OTHER_STATIC


def build_manifest(rows: Iterable[tuple], js_markers: Sequence[str] = DEFAULT_JS_MARKERS, name: str = "") -> PageManifest:
    """Build a manifest from ``(url, mime, size_bytes, fb_ms, cd_ms)`` tuples in document order."""
    components = []
    for i, (url, mime, size, fb, cd) in enumerate(rows):
        if size < 0:
            raise ParseError(f"negative size for {url!r}", row=i + 1)
        components.append(
            HttpComponent(
                url=url,
                mime=mime,
                size_bytes=int(size),
                cls=classify(mime, i == 0, js_markers),
                doc_order=i + 1,
                measured_fb_ms=fb,
                measured_cd_ms=cd,
            )
        )
    if not components:
        raise EmptyManifest("manifest has no components")
    return PageManifest(tuple(components), name=name)


def aggregates(manifest: PageManifest) -> PageAggregates:
    comps = manifest.components
    o_js = sum(1 for c in comps if c.cls is ComponentClass.JAVASCRIPT)
    p_other = sum(1 for c in comps if c.cls is ComponentClass.OTHER_STATIC)
    return PageAggregates(
        n_static=o_js + p_other,
        m_domains=len({c.domain_key for c in comps}),
        o_js=o_js,
        p_other=p_other,
        total_bytes=sum(c.size_bytes for c in comps),
    )


# -- HAR -------------------------------------------------------------------


def _har_timing(timings, key):
    value = timings.get(key)
    if value is None or value < 0:
        return None
    return float(value)


def parse_har(data: bytes, js_markers: Sequence[str] = DEFAULT_JS_MARKERS) -> PageManifest:
    """Read a manifest from a HAR 1.2 document.

    Only ``request.url``, ``response.content.mimeType``,
    ``response.content.size`` and the ``wait``/``receive`` timings are used.
    The first entry is taken to be the base page.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("HAR is not valid UTF-8", offset=exc.start) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed HAR: {exc.msg}", offset=offset) from exc

    try:
        entries = doc["log"]["entries"]
    except (KeyError, TypeError) as exc:
        raise ParseError("HAR has no log.entries array") from exc
    if not isinstance(entries, list):
        raise ParseError("log.entries is not an array")
    if not entries:
        raise EmptyManifest("HAR has no entries")

    rows = []
    for i, entry in enumerate(entries):
        try:
            url = entry["request"]["url"]
            content = entry["response"]["content"]
            size = content["size"]
            mime = content.get("mimeType", "")
        except (KeyError, TypeError) as exc:
            raise ParseError(f"entry {i} lacks {exc}") from exc
        if not isinstance(size, int) or isinstance(size, bool):
            raise ParseError(f"entry {i} has non-integer content.size")
        timings = entry.get("timings") or {}
        rows.append((url, mime, size, _har_timing(timings, "wait"), _har_timing(timings, "receive")))
    return build_manifest(rows, js_markers)


# -- worksheet CSV ---------------------------------------------------------


def _optional_float(text, row, column):
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {column} {text!r}", row=row) from None
    if value < 0:
        raise ParseError(f"negative {column}", row=row)
    return value


def parse_worksheet_csv(data: bytes, js_markers: Sequence[str] = DEFAULT_JS_MARKERS) -> PageManifest:
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data))
    header = next(reader, None)
    if header is None:
        raise EmptyManifest("worksheet is empty")
    header = tuple(h.strip() for h in header)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column in header", row=1)
    if header != WORKSHEET_HEADER:
        raise ParseError(f"expected header {','.join(WORKSHEET_HEADER)}", row=1)

    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        record = [cell.strip() for cell in record]
        if tuple(record) == WORKSHEET_HEADER:
            raise ParseError("duplicate header", row=lineno)
        if len(record) != len(WORKSHEET_HEADER):
            raise ParseError(f"expected {len(WORKSHEET_HEADER)} columns, got {len(record)}", row=lineno)
        url, mime, size, cd, fb = record
        try:
            size_bytes = int(size)
        except ValueError:
            raise ParseError(f"non-numeric size_bytes {size!r}", row=lineno) from None
        if size_bytes < 0:
            raise ParseError("negative size_bytes", row=lineno)
        rows.append(
            (
                url,
                mime,
                size_bytes,
                _optional_float(fb, lineno, "fb_ms"),
                _optional_float(cd, lineno, "cd_ms"),
            )
        )
    return build_manifest(rows, js_markers)


def _fmt_optional(value):
    return "" if value is None else repr(value)


def to_worksheet_csv(manifest: PageManifest) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(WORKSHEET_HEADER)
    for c in manifest:
        writer.writerow(
            [c.url, c.mime, c.size_bytes, _fmt_optional(c.measured_cd_ms), _fmt_optional(c.measured_fb_ms)]
        )
    return buf.getvalue().encode("utf-8")


def read_manifest(path) -> PageManifest:
    """Load a manifest from disk, picking the parser from the file contents."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.lstrip()[:1] == b"{":
        return parse_har(data)
    return parse_worksheet_csv(data)
