"""Discrete-event simulation of parallel HTTP downloads.

Components are scheduled greedily in document order onto ``k`` browser
connections. A barrier component (JavaScript, or the base page) waits for
every earlier download to finish, and nothing after it starts until it is
done. Bandwidth is not shared between connections.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .exceptions import DomainError, EmptyManifest, IncompleteManifest
from .manifest import ComponentClass, PageManifest


@dataclass(frozen=True)
class SimComponent:
    doc_order: int
    fb_ms: float
    cd_ms: float
    is_js: bool = False

    @property
    def duration(self) -> float:
        return self.fb_ms + self.cd_ms


@dataclass(frozen=True)
class SimResult:
    makespan_ms: float
    per_component: Tuple[Tuple[float, float], ...]
    connection_index: Tuple[int, ...]
    doc_order: Tuple[int, ...]

    @property
    def connections_used(self) -> int:
        return len(set(self.connection_index))


def components_from_manifest(manifest: PageManifest) -> List[SimComponent]:
    out = []
    for c in manifest:
        if not c.has_measurements:
            raise IncompleteManifest(c.doc_order)
        out.append(
            SimComponent(
                doc_order=c.doc_order,
                fb_ms=c.measured_fb_ms,
                cd_ms=c.measured_cd_ms,
                is_js=c.cls in (ComponentClass.JAVASCRIPT, ComponentClass.BASE_PAGE),
            )
        )
    return out


def simulate(components: Sequence[SimComponent], k_connections: int) -> SimResult:
    if k_connections < 1:
        raise DomainError(f"need at least one connection, got {k_connections}")
    if not components:
        raise EmptyManifest("nothing to simulate")
    ordered = sorted(components, key=lambda c: c.doc_order)
    orders = [c.doc_order for c in ordered]
    if len(set(orders)) != len(orders):
        raise DomainError("doc_order values must be unique")

    free_at = [0.0] * k_connections
    gate = 0.0
    spans = []
    conns = []
    for comp in ordered:
        if comp.is_js:
            # waits for everything before it; all connections are idle then
            start = max(gate, max(free_at))
        else:
            start = max(gate, min(free_at))
        conn = next(i for i, t in enumerate(free_at) if t <= start)
        end = start + comp.duration
        free_at[conn] = end
        spans.append((start, end))
        conns.append(conn)
        if comp.is_js:
            gate = end
    return SimResult(
        makespan_ms=max(end for _, end in spans),
        per_component=tuple(spans),
        connection_index=tuple(conns),
        doc_order=tuple(orders),
    )


def sweep(components: Sequence[SimComponent], k_max: int) -> List[Tuple[int, float]]:
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    return [(k, simulate(components, k).makespan_ms) for k in range(1, k_max + 1)]


def effective_parallelism(components: Sequence[SimComponent], k: int) -> float:
    """Serial download time divided by the simulated makespan."""
    result = simulate(components, k)
    if result.makespan_ms <= 0:
        raise DomainError("makespan is zero; parallelism is undefined")
    return sum(c.duration for c in components) / result.makespan_ms


def schedule_csv(result: SimResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("doc_order", "start_ms", "end_ms", "connection_index"))
    for order, (start, end), conn in zip(result.doc_order, result.per_component, result.connection_index):
        writer.writerow((order, f"{start:.2f}", f"{end:.2f}", conn))
    return buf.getvalue()
