"""Descriptive modeling: derive network profiles from last-mile measurements.

Means and least-squares fits are computed with streaming, mergeable
accumulators so that very large measurement files are processed in constant
memory and partial results from separate shards can be combined.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
import statistics
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_size_vector, check_xy
from .exceptions import DegenerateFit, DomainError, EmptyColumn, ParseError, ValidationError
from .profile import DEFAULT_SERVER_MS, AffineModel, ConstantModel, LogModel, NetworkProfile, SizeTimeModel

logger = logging.getLogger(__name__)

MEASUREMENT_HEADER = ("url", "domain", "kind", "size_bytes", "dns_ms", "connect_ms", "fb_ms", "cd_ms")
TIMING_COLUMNS = ("dns_ms", "connect_ms", "fb_ms", "cd_ms")


class RecordKind(str, enum.Enum):
    BASE_PAGE = "BasePage"
    STATIC = "Static"

    @classmethod
    def parse(cls, text: str) -> "RecordKind":
        key = text.strip().lower().replace("_", "").replace(" ", "")
        if key in ("basepage", "base", "bp"):
            return cls.BASE_PAGE
        if key in ("static", "sc"):
            return cls.STATIC
        raise ValueError(f"unknown record kind {text!r}")


@dataclass(frozen=True)
class MeasurementRecord:
    url: str
    domain: str
    kind: RecordKind
    size_bytes: int
    dns_ms: Optional[float] = None
    connect_ms: Optional[float] = None
    fb_ms: Optional[float] = None
    cd_ms: Optional[float] = None

    def __post_init__(self):
        if all(getattr(self, col) is None for col in TIMING_COLUMNS):
            raise ValidationError(f"record for {self.url!r} has no timing field")


@dataclass(frozen=True)
class FitResult:
    model: SizeTimeModel
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class ValidationStats:
    per_row_error_pct: Tuple[float, ...]
    mean_error_pct: float
    stddev_error_pct: float

    @property
    def n(self) -> int:
        return len(self.per_row_error_pct)

    @property
    def single(self) -> bool:
        """True when the stddev is reported as 0 only because n == 1."""
        return self.n == 1


# -- accumulators ------------------------------------------------------------


class RunningMean:
    """Welford mean over present values; mergeable."""

    __slots__ = ("n", "mean")

    def __init__(self):
        self.n = 0
        self.mean = 0.0

    def push(self, x: float) -> None:
        self.n += 1
        self.mean += (x - self.mean) / self.n

    def merge(self, other: "RunningMean") -> "RunningMean":
        out = RunningMean()
        out.n = self.n + other.n
        if out.n:
            out.mean = self.mean + (other.mean - self.mean) * other.n / out.n
        return out

    __add__ = merge


class RunningRegression:
    """Streaming co-moments of (x, y) for ordinary least squares.

    Keeps centered sums rather than raw sums of squares, which avoids
    cancellation when x is large (byte sizes) and n is in the millions.
    """

    __slots__ = ("n", "mean_x", "mean_y", "sxx", "syy", "sxy")

    def __init__(self):
        self.n = 0
        self.mean_x = 0.0
        self.mean_y = 0.0
        self.sxx = 0.0
        self.syy = 0.0
        self.sxy = 0.0

    def push(self, x: float, y: float) -> None:
        self.n += 1
        dx = x - self.mean_x
        dy = y - self.mean_y
        self.mean_x += dx / self.n
        self.mean_y += dy / self.n
        self.sxx += dx * (x - self.mean_x)
        self.syy += dy * (y - self.mean_y)
        self.sxy += dx * (y - self.mean_y)

    def merge(self, other: "RunningRegression") -> "RunningRegression":
        out = RunningRegression()
        n = self.n + other.n
        out.n = n
        if n == 0:
            return out
        dx = other.mean_x - self.mean_x
        dy = other.mean_y - self.mean_y
        w = self.n * other.n / n
        out.mean_x = self.mean_x + dx * other.n / n
        out.mean_y = self.mean_y + dy * other.n / n
        out.sxx = self.sxx + other.sxx + dx * dx * w
        out.syy = self.syy + other.syy + dy * dy * w
        out.sxy = self.sxy + other.sxy + dx * dy * w
        return out

    __add__ = merge

    def line(self, parameter: str = "fit") -> Tuple[float, float, float]:
        """Return ``(slope, intercept, r_squared)``."""
        if self.n == 0:
            raise EmptyColumn(parameter)
        if self.n < 2 or self.sxx <= 0.0:
            raise DegenerateFit(parameter)
        slope = self.sxy / self.sxx
        intercept = self.mean_y - slope * self.mean_x
        ss_res = max(0.0, self.syy - slope * self.sxy)
        if self.syy <= 0.0:
            r2 = 1.0 if ss_res <= 0.0 else 0.0
        else:
            r2 = min(1.0, max(0.0, 1.0 - ss_res / self.syy))
        return slope, intercept, r2


# -- direct operations -------------------------------------------------------


def _regress(xs, ys, parameter) -> Tuple[float, float, float, int]:
    acc = RunningRegression()
    for x, y in zip(xs, ys):
        acc.push(float(x), float(y))
    slope, intercept, r2 = acc.line(parameter)
    return slope, intercept, r2, acc.n


def fit_affine(points: Iterable[Tuple[float, float]], parameter: str = "affine fit") -> FitResult:
    """Ordinary least-squares line through ``(x, y)`` points."""
    points = list(points)
    slope, intercept, r2, n = _regress((p[0] for p in points), (p[1] for p in points), parameter)
    return FitResult(AffineModel(slope, intercept), r2, n)


def fit_log(points: Iterable[Tuple[float, float]], parameter: str = "log fit") -> FitResult:
    """Least-squares fit of ``y = a ln(x) + b``."""
    points = list(points)
    for x, _ in points:
        if x < 1:
            raise DomainError(f"log fit needs x >= 1, got {x}")
    a, b, r2, n = _regress((math.log(p[0]) for p in points), (p[1] for p in points), parameter)
    return FitResult(LogModel(a, b), r2, n)


def mean_of(column: str, records: Iterable) -> float:
    """Arithmetic mean of ``column`` over the records where it is present."""
    acc = RunningMean()
    for rec in records:
        value = rec.get(column) if isinstance(rec, Mapping) else getattr(rec, column)
        if value is not None:
            acc.push(float(value))
    if acc.n == 0:
        raise EmptyColumn(column)
    return acc.mean


def derive_first_byte(fb_by_property: Iterable[Tuple[float, float]]) -> float:
    """Mean network first-byte latency: first byte minus server processing.

    Negative differences are kept as-is.
    """
    diffs = []
    for fb, sp in fb_by_property:
        if fb < 0 or sp < 0:
            raise DomainError("first-byte and server times must be non-negative")
        diffs.append(fb - sp)
    if not diffs:
        raise EmptyColumn("fbbp")
    return statistics.fmean(diffs)


def validate(pairs: Iterable[Tuple[float, float]]) -> ValidationStats:
    """Percentage error of predictions against measured values.

    The measured value is the denominator and the spread is the sample
    (n - 1) standard deviation; a single pair reports a spread of 0.
    """
    errors = []
    for predicted, measured in pairs:
        if measured <= 0:
            raise DomainError(f"measured time must be positive, got {measured}")
        errors.append(abs(predicted - measured) / measured * 100.0)
    if not errors:
        raise EmptyColumn("pairs")
    stddev = statistics.stdev(errors) if len(errors) > 1 else 0.0
    return ValidationStats(tuple(errors), statistics.fmean(errors), stddev)


# -- profile building --------------------------------------------------------


class ProfileAccumulator:
    """Single-pass, mergeable accumulation of everything ``build_profile`` needs.

    Memory is constant in the number of records; it grows only with the
    number of distinct base-page properties.
    """

    def __init__(self):
        self.bp_dns = RunningMean()
        self.bp_connect = RunningMean()
        self.bp_cd = RunningRegression()
        self.bp_fb: Dict[str, RunningMean] = {}
        self.sc_dns = RunningMean()
        self.sc_connect = RunningMean()
        self.sc_fb = RunningRegression()
        self.sc_cd = RunningRegression()
        self.n_records = 0

    def push(self, rec: MeasurementRecord) -> None:
        self.n_records += 1
        if rec.kind is RecordKind.BASE_PAGE:
            if rec.dns_ms is not None:
                self.bp_dns.push(rec.dns_ms)
            if rec.connect_ms is not None:
                self.bp_connect.push(rec.connect_ms)
            if rec.cd_ms is not None:
                self.bp_cd.push(rec.size_bytes, rec.cd_ms)
            if rec.fb_ms is not None:
                self.bp_fb.setdefault(rec.url, RunningMean()).push(rec.fb_ms)
        else:
            if rec.dns_ms is not None:
                self.sc_dns.push(rec.dns_ms)
            if rec.connect_ms is not None:
                self.sc_connect.push(rec.connect_ms)
            if rec.fb_ms is not None:
                self.sc_fb.push(rec.size_bytes, rec.fb_ms)
            if rec.cd_ms is not None:
                self.sc_cd.push(rec.size_bytes, rec.cd_ms)

    def update(self, records: Iterable[MeasurementRecord]) -> "ProfileAccumulator":
        for rec in records:
            self.push(rec)
        return self

    def merge(self, other: "ProfileAccumulator") -> "ProfileAccumulator":
        out = ProfileAccumulator()
        for name in ("bp_dns", "bp_connect", "bp_cd", "sc_dns", "sc_connect", "sc_fb", "sc_cd"):
            setattr(out, name, getattr(self, name).merge(getattr(other, name)))
        for url in set(self.bp_fb) | set(other.bp_fb):
            out.bp_fb[url] = self.bp_fb.get(url, RunningMean()).merge(other.bp_fb.get(url, RunningMean()))
        out.n_records = self.n_records + other.n_records
        return out

    __add__ = merge

    @staticmethod
    def _mean(acc: RunningMean, parameter: str) -> float:
        if acc.n == 0:
            raise EmptyColumn(parameter)
        return acc.mean

    def _server_time(self, url: str, server_times: Optional[Mapping[str, float]]) -> float:
        if server_times is None:
            return 0.0
        if url in server_times:
            return float(server_times[url])
        from .manifest import domain_of

        host = domain_of(url)
        if host in server_times:
            return float(server_times[host])
        raise ValidationError(f"no server time for base-page property {url!r}")

    def result(
        self,
        country: str,
        server_times: Optional[Mapping[str, float]] = None,
        t_sr_ms: float = DEFAULT_SERVER_MS,
    ) -> NetworkProfile:
        t_dnsbp = self._mean(self.bp_dns, "t_dnsbp")
        t_cbp = self._mean(self.bp_connect, "t_cbp")
        if not self.bp_fb:
            raise EmptyColumn("fbbp_model")
        fbbp = derive_first_byte(
            (self.bp_fb[url].mean, self._server_time(url, server_times)) for url in sorted(self.bp_fb)
        )
        cdbp_slope, cdbp_icpt, _ = self.bp_cd.line("cdbp_model")
        t_dnssc = self._mean(self.sc_dns, "t_dnssc")
        t_csc = self._mean(self.sc_connect, "t_csc")
        fbsc_slope, fbsc_icpt, _ = self.sc_fb.line("fbsc_model")
        cdsc_slope, cdsc_icpt, _ = self.sc_cd.line("cdsc_model")
        return NetworkProfile(
            country=country,
            t_dnsbp_ms=t_dnsbp,
            t_cbp_ms=t_cbp,
            t_dnssc_ms=t_dnssc,
            t_csc_ms=t_csc,
            fbbp_model=ConstantModel(fbbp),
            cdbp_model=AffineModel(cdbp_slope, cdbp_icpt),
            fbsc_model=AffineModel(fbsc_slope, fbsc_icpt),
            cdsc_model=AffineModel(cdsc_slope, cdsc_icpt),
            t_sr_ms=t_sr_ms,
        )


def build_profile(
    records: Iterable[MeasurementRecord],
    server_times: Optional[Mapping[str, float]],
    country: str,
    t_sr_ms: float = DEFAULT_SERVER_MS,
) -> NetworkProfile:
    """Fit a full network profile from a stream of measurement records.

    ``server_times`` maps each base-page url (or its host) to the server
    processing time that is subtracted from its first-byte time. None
    treats the measured first byte as pure network latency.
    """
    return ProfileAccumulator().update(records).result(country, server_times, t_sr_ms)


# -- measurement CSV ---------------------------------------------------------


def _cell_float(text, lineno, column):
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {column} {text!r}", row=lineno) from None
    if value < 0 or not math.isfinite(value):
        raise ParseError(f"{column} must be a non-negative number", row=lineno)
    return value


def iter_measurements(stream) -> Iterator[MeasurementRecord]:
    """Stream records from a measurement CSV (text file object or bytes)."""
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode("utf-8-sig"))
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != MEASUREMENT_HEADER:
        raise ParseError(f"expected header {','.join(MEASUREMENT_HEADER)}", row=1)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(MEASUREMENT_HEADER):
            raise ParseError(f"expected {len(MEASUREMENT_HEADER)} columns", row=lineno)
        url, domain, kind, size, dns, conn, fb, cd = row
        try:
            kind = RecordKind.parse(kind)
            size_bytes = int(size)
        except ValueError as exc:
            raise ParseError(str(exc), row=lineno) from None
        try:
            yield MeasurementRecord(
                url=url.strip(),
                domain=domain.strip(),
                kind=kind,
                size_bytes=size_bytes,
                dns_ms=_cell_float(dns, lineno, "dns_ms"),
                connect_ms=_cell_float(conn, lineno, "connect_ms"),
                fb_ms=_cell_float(fb, lineno, "fb_ms"),
                cd_ms=_cell_float(cd, lineno, "cd_ms"),
            )
        except ValidationError as exc:
            raise ParseError(str(exc), row=lineno) from None


def read_server_times(stream) -> Dict[str, float]:
    """Read a two-column ``property,server_ms`` CSV."""
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode("utf-8-sig"))
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["property", "server_ms"]:
        raise ParseError("expected header property,server_ms", row=1)
    out = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        value = _cell_float(row[1], lineno, "server_ms")
        if value is None:
            raise ParseError("blank server_ms", row=lineno)
        out[row[0].strip()] = value
    return out


# -- estimators --------------------------------------------------------------


class AffineSizeRegressor(RegressorMixin, BaseEstimator):
    """Least-squares ``time = slope * size + intercept`` as a scikit-learn regressor."""

    def fit(self, X, y):
        x, y = check_xy(X, y)
        result = fit_affine(zip(x, y))
        self.model_ = result.model
        self.coef_ = np.array([result.model.slope])
        self.intercept_ = result.model.intercept
        self.r_squared_ = result.r_squared
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        x = check_size_vector(X)
        return self.coef_[0] * x + self.intercept_


class LogSizeRegressor(RegressorMixin, BaseEstimator):
    """Least-squares ``time = a * ln(size) + b``; sizes must be >= 1."""

    def fit(self, X, y):
        x, y = check_xy(X, y)
        result = fit_log(zip(x, y))
        self.model_ = result.model
        self.coef_ = np.array([result.model.a])
        self.intercept_ = result.model.b
        self.r_squared_ = result.r_squared
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        x = check_size_vector(X)
        if np.any(x < 1):
            raise DomainError("log model needs size >= 1")
        return self.coef_[0] * np.log(x) + self.intercept_


class NetworkProfileEstimator(BaseEstimator):
    """Fit a :class:`NetworkProfile` from measurement records.

    ``partial_fit`` may be called repeatedly on chunks of a stream; the
    profile is refreshed after every call once enough data is present.
    """

    def __init__(self, country="XX", server_times=None, t_sr_ms=DEFAULT_SERVER_MS):
        self.country = country
        self.server_times = server_times
        self.t_sr_ms = t_sr_ms

    def fit(self, records, y=None):
        self.accumulator_ = ProfileAccumulator().update(records)
        self.profile_ = self.accumulator_.result(self.country, self.server_times, self.t_sr_ms)
        return self

    def partial_fit(self, records, y=None):
        if not hasattr(self, "accumulator_"):
            self.accumulator_ = ProfileAccumulator()
        self.accumulator_.update(records)
        try:
            self.profile_ = self.accumulator_.result(self.country, self.server_times, self.t_sr_ms)
        except (EmptyColumn, DegenerateFit) as exc:
            logger.debug("profile not yet identifiable: %s", exc)
        return self
