"""Browser behaviour: parallel-download efficiency, parallel rules, rendering."""

from __future__ import annotations

import enum
import math

from .exceptions import DomainError
from .manifest import ComponentClass, HttpComponent, PageAggregates, PageManifest
from .profile import AffineModel, LogModel, eval_model

# rule 3: a component this much larger than every other static is not overlapped
DOMINANCE_BYTES = 25 * 1024


class Rounding(str, enum.Enum):
    RAW = "raw"
    NEAREST_INT = "nearest"


def bpe(first_byte_ms: float, avg_cd_ms: float, rounding: Rounding = Rounding.RAW) -> float:
    """Browser parallel efficiency, ``1 + first_byte / avg_content_download``.

    The leading 1 is the request in flight; the ratio is how many further
    downloads fit into its first-byte wait. ``NEAREST_INT`` rounds half up.
    """
    if not avg_cd_ms > 0:
        raise DomainError(f"average content download time must be positive, got {avg_cd_ms}")
    if first_byte_ms < 0:
        raise DomainError(f"first byte time must be non-negative, got {first_byte_ms}")
    value = 1.0 + first_byte_ms / avg_cd_ms
    if Rounding(rounding) is Rounding.NEAREST_INT:
        value = float(math.floor(value + 0.5))
    return max(1.0, value)


def classify_parallel(component: HttpComponent, manifest: PageManifest) -> bool:
    """Whether ``component`` overlaps with other downloads.

    The base page and JavaScript never do. Any other static does unless it
    is at least 25 KB larger than every other static on the page.
    """
    if component.cls is ComponentClass.BASE_PAGE:
        return False
    if component.cls is ComponentClass.JAVASCRIPT:
        return False
    others = [c.size_bytes for c in manifest.statics if c.doc_order != component.doc_order]
    if not others:
        return True
    return component.size_bytes < max(others) + DOMINANCE_BYTES


class RenderClass(str, enum.Enum):
    SIMPLE = "Simple"
    MEDIUM = "Medium"
    COMPLEX = "Complex"


# x = total page weight in KB, y = seconds
RENDER_MODELS = {
    RenderClass.SIMPLE: AffineModel(0.0008, -0.0271),
    RenderClass.MEDIUM: LogModel(0.4323, -2.0771),
    RenderClass.COMPLEX: LogModel(0.55, -2.6079),
}


def render_class(avg_kb_per_request: float) -> RenderClass:
    if avg_kb_per_request > 16:
        return RenderClass.SIMPLE
    if avg_kb_per_request >= 11:
        return RenderClass.MEDIUM
    return RenderClass.COMPLEX


def render_seconds(total_kb: float, avg_kb_per_request: float) -> float:
    model = RENDER_MODELS[render_class(avg_kb_per_request)]
    if isinstance(model, LogModel) and total_kb < 1:
        # ln(x) < 0 with a negative intercept: always clamps to zero
        return 0.0
    return eval_model(model, total_kb)


def render_time(aggregates: PageAggregates) -> float:
    """Rendering time in milliseconds for a page of the given composition."""
    if aggregates.total_bytes <= 0:
        raise DomainError("render time needs a page with non-zero weight")
    return 1000.0 * render_seconds(aggregates.total_kb, aggregates.avg_kb_per_request)
