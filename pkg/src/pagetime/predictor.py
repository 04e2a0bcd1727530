"""End-to-end response-time prediction.

The prediction is the base-page transmission time plus DNS and connect
costs, plus every static component, with overlappable statics divided by
the browser parallel efficiency, plus server time and optionally rendering.
"""

from __future__ import annotations

import csv
import enum
import io
import statistics
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .browser import bpe, classify_parallel, render_time
from .exceptions import DomainError, IncompleteManifest, ProfileIncomplete
from .manifest import ComponentClass, PageManifest
from .profile import NetworkProfile, eval_model


class DnsConnectMode(str, enum.Enum):
    # one CDN DNS lookup and one connect, added once (worksheet practice)
    SINGLE_CDN = "single-cdn"
    # one DNS lookup per static domain plus one connect per connection, over BPE
    PER_DOMAIN_OVER_BPE = "per-domain"


@dataclass(frozen=True)
class PredictionConfig:
    """How a prediction is assembled.

    ``bpe`` set to a number uses it as given; None computes it from the
    profile. ``connections`` is only used in per-domain mode and defaults
    to one connection per static domain.
    """

    bpe: Optional[float] = None
    dns_connect_mode: DnsConnectMode = DnsConnectMode.SINGLE_CDN
    include_render: bool = False
    include_server: bool = True
    connections: Optional[int] = None

    def __post_init__(self):
        if self.bpe is not None and not self.bpe >= 1:
            raise DomainError(f"explicit BPE must be >= 1, got {self.bpe}")
        if self.connections is not None and self.connections < 0:
            raise DomainError("connections must be non-negative")
        object.__setattr__(self, "dns_connect_mode", DnsConnectMode(self.dns_connect_mode))


@dataclass(frozen=True)
class BreakdownRow:
    doc_order: int
    url: str
    mime: str
    size_bytes: int
    cls: ComponentClass
    parallelizable: bool
    fb_ms: float
    cd_ms: float
    sum_ms: float


@dataclass(frozen=True)
class PredictionBreakdown:
    rows: Tuple[BreakdownRow, ...]
    t_dnsbp: float
    t_cbp: float
    t_dnssc: float
    t_csc: float
    t_sr: float
    render_ms: float
    bpe_used: float
    total_ms: float
    render_included: bool = False

    @property
    def base_row(self) -> BreakdownRow:
        return self.rows[0]

    @property
    def static_rows(self) -> Tuple[BreakdownRow, ...]:
        return self.rows[1:]

    @property
    def static_sum_ms(self) -> float:
        return sum(r.sum_ms for r in self.static_rows)


def _assemble(manifest, timings, profile, config, bpe_used) -> PredictionBreakdown:
    rows = []
    for comp, (fb, cd) in zip(manifest, timings):
        parallel = classify_parallel(comp, manifest)
        total = fb + cd
        rows.append(
            BreakdownRow(
                doc_order=comp.doc_order,
                url=comp.url,
                mime=comp.mime,
                size_bytes=comp.size_bytes,
                cls=comp.cls,
                parallelizable=parallel,
                fb_ms=fb,
                cd_ms=cd,
                sum_ms=total / bpe_used if parallel else total,
            )
        )

    if config.dns_connect_mode is DnsConnectMode.SINGLE_CDN:
        t_dnssc = profile.t_dnssc_ms
        t_csc = profile.t_csc_ms
    else:
        domains = {c.domain_key for c in manifest.statics}
        n_conn = len(domains) if config.connections is None else config.connections
        t_dnssc = len(domains) * profile.t_dnssc_ms / bpe_used
        t_csc = n_conn * profile.t_csc_ms / bpe_used

    t_sr = profile.t_sr_ms if config.include_server else 0.0
    render_ms = 0.0
    if config.include_render:
        agg = manifest.aggregates
        render_ms = render_time(agg) if agg.total_bytes > 0 else 0.0

    total = (
        profile.t_dnsbp_ms
        + profile.t_cbp_ms
        + rows[0].sum_ms
        + t_dnssc
        + t_csc
        + t_sr
        + sum(r.sum_ms for r in rows[1:])
        + render_ms
    )
    return PredictionBreakdown(
        rows=tuple(rows),
        t_dnsbp=profile.t_dnsbp_ms,
        t_cbp=profile.t_cbp_ms,
        t_dnssc=t_dnssc,
        t_csc=t_csc,
        t_sr=t_sr,
        render_ms=render_ms,
        bpe_used=bpe_used,
        total_ms=total,
        render_included=config.include_render,
    )


def predict_worksheet(
    manifest: PageManifest, profile: NetworkProfile, config: PredictionConfig = PredictionConfig()
) -> PredictionBreakdown:
    """Predict from measured per-component first-byte and download times."""
    for comp in manifest:
        if not comp.has_measurements:
            raise IncompleteManifest(comp.doc_order)
    timings = [(c.measured_fb_ms, c.measured_cd_ms) for c in manifest]
    if config.bpe is not None:
        bpe_used = config.bpe
    else:
        bpe_used = _computed_bpe([t for c, t in zip(manifest, timings) if c.is_static])
    return _assemble(manifest, timings, profile, config, bpe_used)


def _computed_bpe(static_timings) -> float:
    # no statics or no download time: nothing to overlap
    if not static_timings:
        return 1.0
    avg_fb = statistics.fmean(fb for fb, _ in static_timings)
    avg_cd = statistics.fmean(cd for _, cd in static_timings)
    if avg_cd <= 0:
        return 1.0
    return bpe(avg_fb, avg_cd)


def _require(profile, name):
    model = getattr(profile, name)
    if model is None:
        raise ProfileIncomplete(name)
    return model


def predict_from_sizes(
    manifest: PageManifest, profile: NetworkProfile, config: PredictionConfig = PredictionConfig()
) -> PredictionBreakdown:
    """Predict from component sizes alone, using the profile's size models."""
    fbbp = _require(profile, "fbbp_model")
    cdbp = _require(profile, "cdbp_model")
    statics = manifest.statics
    if statics:
        fbsc = _require(profile, "fbsc_model")
        cdsc = _require(profile, "cdsc_model")

    base = manifest.base_page
    timings = [(eval_model(fbbp, base.size_bytes), eval_model(cdbp, base.size_bytes))]
    timings += [(eval_model(fbsc, c.size_bytes), eval_model(cdsc, c.size_bytes)) for c in statics]

    if config.bpe is not None:
        bpe_used = config.bpe
    elif not statics:
        bpe_used = 1.0
    else:
        mean_size = statistics.fmean(c.size_bytes for c in statics)
        avg_cd = statistics.fmean(cd for _, cd in timings[1:])
        bpe_used = bpe(eval_model(fbsc, mean_size), avg_cd) if avg_cd > 0 else 1.0
    return _assemble(manifest, timings, profile, config, bpe_used)


def predict(manifest: PageManifest, profile: NetworkProfile, config: PredictionConfig = PredictionConfig()):
    """Worksheet prediction when every component is measured, size-model prediction otherwise."""
    if all(c.has_measurements for c in manifest):
        return predict_worksheet(manifest, profile, config)
    return predict_from_sizes(manifest, profile, config)


def compare(prediction, measured_ms: float) -> float:
    """Absolute percentage error of a prediction against a measured time."""
    if measured_ms <= 0:
        raise DomainError(f"measured time must be positive, got {measured_ms}")
    total = prediction.total_ms if isinstance(prediction, PredictionBreakdown) else float(prediction)
    return abs(total - measured_ms) / measured_ms * 100.0


# -- rendering ---------------------------------------------------------------

TOTAL_LABEL = "Total Response Time (predicted)"
CSV_COLUMNS = ("url", "type", "size", "cd_ms", "fb_ms", "sum_ms")


def _constant_lines(b: PredictionBreakdown) -> List[Tuple[str, float]]:
    lines = [
        ("Browser parallel efficiency", b.bpe_used),
        ("Base page DNS", b.t_dnsbp),
        ("Base page connect", b.t_cbp),
        ("Base page FB + CD", b.base_row.sum_ms),
        ("Static DNS", b.t_dnssc),
        ("Static connect", b.t_csc),
        (f"Static components ({len(b.static_rows)})", b.static_sum_ms),
        ("Server time", b.t_sr),
    ]
    if b.render_included:
        lines.append(("Render time", b.render_ms))
    return lines


def format_table(b: PredictionBreakdown, measured_ms: Optional[float] = None) -> str:
    header = ("#", "url", "type", "size", "cd_ms", "fb_ms", "sum_ms", "par")
    body = [
        (
            str(r.doc_order),
            r.url,
            r.mime,
            str(r.size_bytes),
            f"{r.cd_ms:.2f}",
            f"{r.fb_ms:.2f}",
            f"{r.sum_ms:.2f}",
            "y" if r.parallelizable else "n",
        )
        for r in b.rows
    ]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    right = {0, 3, 4, 5, 6}

    def line(cells):
        return "  ".join(c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths))).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    out += [line(row) for row in body]
    out.append("")
    summary = _constant_lines(b) + [(TOTAL_LABEL, b.total_ms)]
    label_w = max(len(label) for label, _ in summary)
    out += [f"{label.ljust(label_w)} {value:.2f}" for label, value in summary]
    if measured_ms is not None:
        out.append(f"{'Measured Response Time'.ljust(label_w)} {measured_ms:.2f}")
        out.append(f"{'Predicted vs Actual'.ljust(label_w)} {compare(b, measured_ms):.2f}%")
    return "\n".join(out) + "\n"


def format_csv(b: PredictionBreakdown, measured_ms: Optional[float] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in b.rows:
        writer.writerow([r.url, r.mime, r.size_bytes, f"{r.cd_ms:.2f}", f"{r.fb_ms:.2f}", f"{r.sum_ms:.2f}"])
    for label, value in _constant_lines(b) + [(TOTAL_LABEL, b.total_ms)]:
        writer.writerow([label, "", "", "", "", f"{value:.2f}"])
    if measured_ms is not None:
        writer.writerow(["Measured Response Time", "", "", "", "", f"{measured_ms:.2f}"])
        writer.writerow(["Predicted vs Actual (%)", "", "", "", "", f"{compare(b, measured_ms):.2f}"])
    return buf.getvalue()


# -- estimator ---------------------------------------------------------------


class ResponseTimePredictor(BaseEstimator):
    """Predict page response times in milliseconds from manifests.

    ``fit`` only validates the configuration; the profile carries the
    fitted network parameters (see ``NetworkProfileEstimator``).
    """

    def __init__(
        self,
        profile=None,
        bpe=None,
        dns_connect_mode="single-cdn",
        include_render=False,
        include_server=True,
        connections=None,
    ):
        self.profile = profile
        self.bpe = bpe
        self.dns_connect_mode = dns_connect_mode
        self.include_render = include_render
        self.include_server = include_server
        self.connections = connections

    def fit(self, X=None, y=None):
        if not isinstance(self.profile, NetworkProfile):
            raise ValueError("profile must be a NetworkProfile")
        self.config_ = PredictionConfig(
            bpe=self.bpe,
            dns_connect_mode=self.dns_connect_mode,
            include_render=self.include_render,
            include_server=self.include_server,
            connections=self.connections,
        )
        return self

    def _config(self):
        if not hasattr(self, "config_"):
            self.fit()
        return self.config_

    def predict_breakdown(self, manifest: PageManifest) -> PredictionBreakdown:
        return predict(manifest, self.profile, self._config())

    def predict(self, X: Sequence[PageManifest]) -> np.ndarray:
        if isinstance(X, PageManifest):
            X = [X]
        return np.array([self.predict_breakdown(m).total_ms for m in X])

    def score(self, X, y):
        """Negative mean absolute percentage error (higher is better)."""
        from .fitting import validate

        return -validate(zip(self.predict(X), y)).mean_error_pct
