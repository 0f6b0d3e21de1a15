"""Workload generators and the access-trace format.

A workload is three counts: operations, deterministic element accesses and
stochastic samples; the probabilistic data ratio and arithmetic intensity
fall out as ratios.  Generators are pure; traces round-trip through CSV
with header ``op,row,col,count`` (compute rows leave row/col empty).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import DegenerateWorkloadError, DomainError, TraceParseError

TRACE_OPS = ("compute", "read", "write", "sample")
TRACE_CSV_HEADER = ("op", "row", "col", "count")


@dataclass(frozen=True)
class WorkloadSpec:
    """Operation and access counts of one workload."""

    name: str
    n_ops: int
    det_accesses: int
    stoch_accesses: int

    def __post_init__(self) -> None:
        for f in ("n_ops", "det_accesses", "stoch_accesses"):
            if getattr(self, f) < 0:
                raise DomainError(f"{f} must be >= 0, got {getattr(self, f)!r}")

    @property
    def total_accesses(self) -> int:
        return self.det_accesses + self.stoch_accesses

    def alpha(self) -> float:
        """Stochastic fraction of all accesses."""
        if self.total_accesses == 0:
            raise DegenerateWorkloadError(f"workload {self.name!r} has no accesses")
        return self.stoch_accesses / self.total_accesses

    def ai(self) -> float:
        """Operations per access (deterministic + stochastic)."""
        if self.total_accesses == 0:
            raise DegenerateWorkloadError(f"workload {self.name!r} has no accesses")
        return self.n_ops / self.total_accesses


@dataclass(frozen=True)
class TraceRecord:
    op: str
    row: Optional[int]
    col: Optional[int]
    count: int

    def __post_init__(self) -> None:
        if self.op not in TRACE_OPS:
            raise DomainError(f"unknown trace op {self.op!r}")
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count!r}")
        if self.op != "compute" and (self.row is None or self.col is None):
            raise DomainError(f"{self.op!r} records need an address")


# ------------------------------------------------------------------------
# Generators
# ------------------------------------------------------------------------


def bnn_layer(n_in: int, n_out: int, batch: int = 1) -> WorkloadSpec:
    """Fully-connected layer with per-use weight sampling.

    Every weight is sampled for every use (one sample per MAC input), so
    stochastic accesses are n_in*n_out*batch while the deterministic side is
    just the activations in and out; alpha approaches 1 as the layer grows.
    """
    _check_positive(n_in=n_in, n_out=n_out, batch=batch)
    return WorkloadSpec(
        name=f"bnn_{n_in}x{n_out}_b{batch}",
        n_ops=2 * n_in * n_out * batch,
        det_accesses=(n_in + n_out) * batch,
        stoch_accesses=n_in * n_out * batch,
    )


def conv_layer(
    c_in: int,
    c_out: int,
    k: int,
    h: int,
    w: int,
    batch: int = 1,
    stochastic_weights: bool = False,
) -> WorkloadSpec:
    """Convolution with full weight reuse (weights fetched once).

    The deterministic variant has alpha = 0 and high arithmetic intensity.
    With ``stochastic_weights`` each weight is additionally sampled once per
    batch element, adding c_in*c_out*k^2*batch stochastic accesses on top of
    the unchanged deterministic traffic.
    """
    _check_positive(c_in=c_in, c_out=c_out, k=k, h=h, w=w, batch=batch)
    weights = c_in * c_out * k * k
    det = weights + c_in * h * w * batch + c_out * h * w * batch
    stoch = weights * batch if stochastic_weights else 0
    tag = "stoch" if stochastic_weights else "det"
    return WorkloadSpec(
        name=f"conv_{c_in}x{c_out}_k{k}_{h}x{w}_b{batch}_{tag}",
        n_ops=2 * c_in * c_out * k * k * h * w * batch,
        det_accesses=det,
        stoch_accesses=stoch,
    )


def mc_estimator(n_samples: int, ops_per_sample: int) -> WorkloadSpec:
    """Monte Carlo estimator: n draws, register-resident accumulation,
    a single result writeback."""
    _check_positive(n_samples=n_samples, ops_per_sample=ops_per_sample)
    return WorkloadSpec(
        name=f"mc_{n_samples}x{ops_per_sample}",
        n_ops=n_samples * ops_per_sample,
        det_accesses=1,
        stoch_accesses=n_samples,
    )


def _check_positive(**kw: int) -> None:
    for name, value in kw.items():
        if value < 1:
            raise DomainError(f"{name} must be >= 1, got {value!r}")


# ------------------------------------------------------------------------
# Trace expansion (aggregates match the generators exactly)
# ------------------------------------------------------------------------


def bnn_trace(n_in: int, n_out: int, batch: int = 1) -> List[TraceRecord]:
    spec = bnn_layer(n_in, n_out, batch)
    records = [TraceRecord("compute", None, None, spec.n_ops)]
    records.append(TraceRecord("read", 0, 0, n_in * batch))
    records.append(TraceRecord("write", 0, 0, n_out * batch))
    for i in range(n_in):
        for j in range(n_out):
            records.append(TraceRecord("sample", i, j, batch))
    return records


def conv_trace(c_in: int, c_out: int, k: int, h: int, w: int, batch: int = 1,
               stochastic_weights: bool = False) -> List[TraceRecord]:
    spec = conv_layer(c_in, c_out, k, h, w, batch, stochastic_weights)
    weights = c_in * c_out * k * k
    records = [
        TraceRecord("compute", None, None, spec.n_ops),
        TraceRecord("read", 0, 0, weights),
        TraceRecord("read", 0, 1, c_in * h * w * batch),
        TraceRecord("write", 0, 2, c_out * h * w * batch),
    ]
    if stochastic_weights:
        records.append(TraceRecord("sample", 0, 0, weights * batch))
    return records


def mc_trace(n_samples: int, ops_per_sample: int) -> List[TraceRecord]:
    spec = mc_estimator(n_samples, ops_per_sample)
    records = [TraceRecord("compute", None, None, spec.n_ops)]
    records.extend(TraceRecord("sample", 0, 0, 1) for _ in range(n_samples))
    records.append(TraceRecord("write", 0, 1, 1))
    return records


def aggregate(records: List[TraceRecord], name: str = "trace") -> WorkloadSpec:
    """Column sums of a record list as a WorkloadSpec."""
    n_ops = det = stoch = 0
    for rec in records:
        if rec.op == "compute":
            n_ops += rec.count
        elif rec.op == "sample":
            stoch += rec.count
        else:
            det += rec.count
    return WorkloadSpec(name=name, n_ops=n_ops, det_accesses=det, stoch_accesses=stoch)


# ------------------------------------------------------------------------
# Trace CSV I/O
# ------------------------------------------------------------------------


def save_trace(records: List[TraceRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_HEADER)
        for rec in records:
            writer.writerow([
                rec.op,
                "" if rec.row is None else rec.row,
                "" if rec.col is None else rec.col,
                rec.count,
            ])


def load_trace(path: str) -> Tuple[List[TraceRecord], WorkloadSpec]:
    """Parse a trace CSV; malformed lines report their 1-based line number."""
    records: List[TraceRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_CSV_HEADER:
            raise TraceParseError(1, f"expected header {','.join(TRACE_CSV_HEADER)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # blank line
            if len(row) != 4:
                raise TraceParseError(line_no, f"expected 4 fields, got {len(row)}")
            op, row_s, col_s, count_s = (f.strip() for f in row)
            try:
                count = int(count_s)
                addr_row = int(row_s) if row_s else None
                addr_col = int(col_s) if col_s else None
                records.append(TraceRecord(op, addr_row, addr_col, count))
            except (ValueError, DomainError) as exc:
                raise TraceParseError(line_no, str(exc)) from exc
    return records, aggregate(records, name=path)
