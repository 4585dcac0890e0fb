"""Dataset readers (IDX, CIFAR-10 binary, CSV) and the one-shot statistics pipeline."""
from __future__ import annotations

import csv
import gzip
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import estimators
from .estimators import LabeledDataset

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD = 1 + 32 * 32 * 3
EXACT_PAIR_LIMIT = 10 ** 8
SCALES = ("unit", "raw")


class FormatError(ValueError):
    """A file does not follow its declared format."""


class BadMagic(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class CountMismatch(FormatError):
    pass


def _read_bytes(path) -> bytes:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _scale(pixels: np.ndarray, scale: str) -> np.ndarray:
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    out = pixels.astype(np.float64)
    return out / 255.0 if scale == "unit" else out


def _idx_header(buf: bytes, magic: int, what: str) -> tuple:
    if len(buf) < 4:
        raise TruncatedPayload(f"{what}: file shorter than the IDX magic number")
    got = int.from_bytes(buf[:4], "big")
    if got != magic:
        raise BadMagic(f"{what}: expected IDX magic 0x{magic:08x}, found 0x{got:08x}")
    ndim = magic & 0xFF
    end = 4 + 4 * ndim
    if len(buf) < end:
        raise TruncatedPayload(f"{what}: header truncated")
    dims = tuple(int.from_bytes(buf[4 + 4 * i:8 + 4 * i], "big") for i in range(ndim))
    return dims, end


def read_idx(images_path, labels_path, scale: str = "unit") -> LabeledDataset:
    """Read an IDX image/label pair (plain or gzipped) into flattened row vectors."""
    img = _read_bytes(images_path)
    lab = _read_bytes(labels_path)
    (count, rows, cols), off = _idx_header(img, IDX_IMAGES_MAGIC, "images")
    (n_labels,), loff = _idx_header(lab, IDX_LABELS_MAGIC, "labels")
    if count != n_labels:
        raise CountMismatch(f"{count} images but {n_labels} labels")
    need = count * rows * cols
    if len(img) - off < need:
        raise TruncatedPayload(f"images: expected {need} pixel bytes, found {len(img) - off}")
    if len(lab) - loff < n_labels:
        raise TruncatedPayload(f"labels: expected {n_labels} bytes, found {len(lab) - loff}")
    pixels = np.frombuffer(img, dtype=np.uint8, count=need, offset=off).reshape(count, rows * cols)
    labels = np.frombuffer(lab, dtype=np.uint8, count=n_labels, offset=loff).astype(np.int64)
    return LabeledDataset(_scale(pixels, scale), labels, int(labels.max()) + 1 if count else None)


def read_cifar10_bin(paths, scale: str = "unit") -> LabeledDataset:
    """Concatenate CIFAR-10 binary batches (1 label byte + 3072 pixel bytes per record)."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    vecs, labs = [], []
    for p in paths:
        buf = _read_bytes(p)
        if len(buf) % CIFAR_RECORD:
            raise FormatError(f"{p}: size {len(buf)} is not a multiple of {CIFAR_RECORD}")
        rec = np.frombuffer(buf, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        labs.append(rec[:, 0].astype(np.int64))
        vecs.append(rec[:, 1:])
    if not vecs:
        raise FormatError("no CIFAR-10 batch files given")
    return LabeledDataset(_scale(np.concatenate(vecs), scale), np.concatenate(labs), 10)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_matrix(path, label_column: Union[int, str, None] = None) -> LabeledDataset:
    """Numeric CSV to a dataset; a non-numeric first row is taken as a header.

    ``label_column`` is a column index or, with a header, a column name.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = rows[0], rows[1:]
        first_data_row = 2
    else:
        first_data_row = 1
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + first_data_row
        if len(row) != width:
            raise FormatError(f"row {line}: expected {width} columns, found {len(row)}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise FormatError(f"row {line}, column {j + 1}: non-numeric cell {cell!r}") from None

    if label_column is None:
        return LabeledDataset(data)
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise FormatError(f"label column {label_column!r} not found in header")
        col = header.index(label_column)
    else:
        col = int(label_column)
    if not -width <= col < width:
        raise FormatError(f"label column {col} out of range for {width} columns")
    col %= width
    labels = data[:, col]
    if not np.all(labels == np.round(labels)) or labels.min() < 0:
        raise FormatError("labels must be nonnegative integers")
    vectors = np.delete(data, col, axis=1)
    return LabeledDataset(vectors, labels.astype(np.int64))


# -- statistics ----------------------------------------------------------------------

@dataclass
class DatasetStats:
    n: int
    ambient_dim: int
    r: float
    m_hat: Optional[float]
    delta_hat: Optional[float]
    delta_method: Optional[str]
    scaling: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def cross_class_pairs(labels: np.ndarray) -> int:
    """Number of unordered pairs with different labels."""
    _, counts = np.unique(labels, return_counts=True)
    n = int(labels.size)
    return (n * n - int(np.sum(counts.astype(np.int64) ** 2))) // 2


def dataset_stats(data: LabeledDataset, delta_mode: str = "auto", dim_k: int = 5,
                  anchors: Optional[int] = None, seed=0, scaling: Optional[dict] = None,
                  evt_options: Optional[dict] = None) -> DatasetStats:
    """Radius, intrinsic dimension and (for labeled data) margin of a dataset."""
    if delta_mode not in ("auto", "exact", "evt"):
        raise ValueError("delta_mode must be auto, exact or evt")
    flags = []
    r = estimators.max_norm_r(data)
    if r == 0.0:
        flags.append("zero_radius")
    m_hat = estimators.intrinsic_dim_mle(data, k=dim_k, anchors=anchors, seed=seed)
    diagnostics = {"dim_k": dim_k, "anchors": anchors,
                   "dim_estimator": "Levina-Bickel MLE, inverse-of-mean aggregation"}

    delta = method = None
    if not data.labeled:
        flags.append("unlabeled_no_delta")
    elif data.classes_present() < 2:
        flags.append("single_class_no_delta")
    else:
        pairs = cross_class_pairs(data.labels)
        diagnostics["cross_class_pairs"] = pairs
        method = delta_mode
        if method == "auto":
            method = "exact" if pairs <= EXACT_PAIR_LIMIT else "evt"
        if method == "exact":
            delta = estimators.margin_exact(data)
            if delta == 0.0:
                flags.append("zero_margin")
        else:
            res = estimators.evt_margin(data, seed=seed, **(evt_options or {}))
            delta = res.delta
            flags.extend(res.flags)
            diagnostics["evt"] = res.to_json()
    return DatasetStats(
        n=len(data),
        ambient_dim=data.ambient_dim,
        r=r,
        m_hat=m_hat if math.isfinite(m_hat) else None,
        delta_hat=delta,
        delta_method=method,
        scaling=dict(scaling or {}),
        flags=flags,
        diagnostics=diagnostics,
    )
