"""Loading EEG segments and generic channel matrices.

The Bonn epilepsy archive ships one text file per single-channel segment,
one integer sample per line (4097 lines), recorded at 173.61 Hz.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import ValidationError, check_positive_int

BONN_RATE_HZ = 173.61

__all__ = [
    "BONN_RATE_HZ",
    "TimeSeries",
    "ChannelSet",
    "load_bonn_segment",
    "load_csv_matrix",
    "select_channels",
    "write_csv_matrix",
]


@dataclass(frozen=True)
class TimeSeries:
    """A single channel of samples (µV) with its sampling rate in Hz."""

    samples: np.ndarray
    rate: float = BONN_RATE_HZ
    label: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise ValidationError("time series has zero samples")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("time series contains non-finite samples")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValidationError(f"sampling rate must be > 0, got {self.rate!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class ChannelSet:
    """Channels sharing one sampling rate, e.g. one of the Bonn sets A..E."""

    channels: tuple = field(default_factory=tuple)
    set_label: str = ""

    def __post_init__(self):
        channels = tuple(self.channels)
        if channels:
            rates = {ch.rate for ch in channels}
            if len(rates) > 1:
                raise ValidationError(f"channels have mixed sampling rates {sorted(rates)}")
            labels = [ch.label for ch in channels]
            if len(set(labels)) != len(labels):
                raise ValidationError("channel labels must be unique within a set")
        object.__setattr__(self, "channels", channels)

    def __len__(self):
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def __getitem__(self, item):
        return self.channels[item]

    @property
    def labels(self):
        return [ch.label for ch in self.channels]

    @property
    def rate(self):
        return self.channels[0].rate if self.channels else None


def load_bonn_segment(path, rate=BONN_RATE_HZ, label=None):
    """Read a Bonn segment file: one numeric sample per line.

    Blank lines are skipped. The label defaults to the file stem
    (e.g. ``Z001`` for ``Z001.txt``).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read Bonn segment {path}: {exc}") from exc

    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        token = line.strip()
        if not token:
            continue
        try:
            value = float(token)
        except ValueError:
            raise ValidationError(f"{path}: line {lineno} is not numeric: {token!r}") from None
        if not math.isfinite(value):
            raise ValidationError(f"{path}: line {lineno} is not finite: {token!r}")
        samples.append(value)
    if not samples:
        raise ValidationError(f"{path}: zero samples")
    return TimeSeries(np.array(samples), rate=rate, label=label or path.stem)


def _parse_cell(cell, row_no, col_no):
    try:
        value = float(cell)
    except ValueError:
        raise ValidationError(
            f"non-numeric cell {cell!r} at row {row_no}, column {col_no}") from None
    if not math.isfinite(value):
        raise ValidationError(f"non-finite cell {cell!r} at row {row_no}, column {col_no}")
    return value


def _looks_like_header(row):
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def load_csv_matrix(path, orientation="columns", rate=1.0, set_label=""):
    """Load a rectangular numeric CSV into a :class:`ChannelSet`.

    Parameters
    ----------
    path : path-like
        Comma-separated file, UTF-8, optional single header row.
    orientation : {"columns", "rows"}
        ``"columns"`` when each column is a channel, ``"rows"`` when each row is.
        In ``"rows"`` mode a header is not recognised; labels are positional.
    rate : float
        Sampling rate in Hz; CSV carries none.
    """
    if orientation not in ("columns", "rows"):
        raise ValidationError(f"orientation must be 'columns' or 'rows', got {orientation!r}")
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{path}: empty matrix")

    header = None
    if orientation == "columns" and _looks_like_header(rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValidationError(f"{path}: empty matrix (header only)")

    width = len(header) if header is not None else len(rows[0])
    data = []
    for offset, row in enumerate(rows):
        row_no = offset + (2 if header is not None else 1)
        if len(row) != width:
            raise ValidationError(f"ragged row {row_no}: expected {width} cells, got {len(row)}")
        data.append([_parse_cell(c.strip(), row_no, j + 1) for j, c in enumerate(row)])
    matrix = np.array(data, dtype=np.float64)
    if orientation == "rows":
        matrix = matrix.T
    labels = header if header is not None else [f"ch{j}" for j in range(matrix.shape[1])]
    channels = tuple(TimeSeries(matrix[:, j].copy(), rate=rate, label=labels[j])
                     for j in range(matrix.shape[1]))
    return ChannelSet(channels, set_label=set_label)


def write_csv_matrix(channels, path=None):
    """Serialise ``channels`` as a columns-are-channels CSV with a header.

    Channels of unequal length are rejected. Values use ``repr`` so that
    re-reading reproduces every float64 bit for bit. Returns the text when
    ``path`` is None.
    """
    lengths = {len(ch) for ch in channels}
    if len(lengths) != 1:
        raise ValidationError(f"channels have unequal lengths {sorted(lengths)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([ch.label for ch in channels])
    for row in zip(*(ch.samples for ch in channels)):
        writer.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text, encoding="utf-8")
    return text


def select_channels(channel_set, count, seed):
    """Draw ``count`` channels without replacement, reproducibly.

    Uses numpy's PCG64 generator seeded with ``seed``. The chosen channels
    are returned in their original (canonical) order, so drawing every
    channel returns the set unchanged.
    """
    count = check_positive_int(count, "count")
    n = len(channel_set)
    if count > n:
        raise ValidationError(f"cannot select {count} channels from a set of {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = np.sort(rng.choice(n, size=count, replace=False))
    return ChannelSet(tuple(channel_set.channels[i] for i in picked),
                      set_label=channel_set.set_label)
