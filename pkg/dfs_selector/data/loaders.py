from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.errors import InputError, MissingLabelColumn, NonAscendingIndex, NonNumericValue, ParseError
from ..core.models import LabeledDataset


@dataclass(frozen=True)
class LoadedData:
    dataset: LabeledDataset
    label_mapping: dict[str, int] = field(default_factory=dict)
    label_column: str = ""
    path: str = ""
    format: str = ""

    @property
    def class_names(self) -> list[str]:
        return [name for name, _ in sorted(self.label_mapping.items(), key=lambda item: item[1])]


def _map_label(raw: str, mapping: dict[str, int]) -> int:
    key = raw.strip()
    if key not in mapping:
        mapping[key] = len(mapping)
    return mapping[key]


def _parse_cell(raw: str, *, line: int, column: str) -> float:
    try:
        value = float(raw.strip())
    except ValueError as exc:
        raise NonNumericValue(f"non-numeric value {raw!r}", line=line, column=column) from exc
    if not math.isfinite(value):
        raise NonNumericValue(f"non-finite value {raw!r}", line=line, column=column)
    return value


def _resolve_label_column(header: list[str], label_column: str | int) -> int:
    if isinstance(label_column, int):
        index = label_column
    else:
        text = str(label_column).strip()
        if text in header:
            return header.index(text)
        if not text.lstrip("-").isdigit():
            raise MissingLabelColumn(f"label column {text!r} not found in header {header}")
        index = int(text)
    if index < 0:
        index += len(header)
    if not 0 <= index < len(header):
        raise MissingLabelColumn(f"label column index {label_column} out of range for {len(header)} columns")
    return index


def _read_utf8(source: Path) -> str:
    raw = source.read_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        raise ParseError(f"{source} is not valid UTF-8 ({exc.reason})", line=line) from exc


def load_dense_csv(path: str | Path, label_column: str | int) -> LoadedData:
    """Comma-separated file with a header row; one sample per row.

    Labels are mapped to 0..c-1 in order of first appearance. Blank lines are skipped.
    """
    source = Path(path)
    if not source.exists():
        raise InputError(f"input file not found: {source}")

    mapping: dict[str, int] = {}
    rows: list[list[float]] = []
    labels: list[int] = []
    with io.StringIO(_read_utf8(source), newline="") as handle:
        reader = csv.reader(handle)
        header: list[str] | None = None
        label_idx = 0
        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if header is None:
                header = [cell.strip() for cell in record]
                label_idx = _resolve_label_column(header, label_column)
                continue
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(record)}", line=line)
            values: list[float] = []
            for idx, cell in enumerate(record):
                if idx == label_idx:
                    continue
                values.append(_parse_cell(cell, line=line, column=header[idx]))
            labels.append(_map_label(record[label_idx], mapping))
            rows.append(values)

    if header is None:
        raise ParseError(f"{source} has no header row")
    if len(header) < 2:
        raise ParseError(f"{source} needs at least one feature column besides the label")
    names = tuple(name for idx, name in enumerate(header) if idx != label_idx)
    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    logging.info("Loaded %s: n=%d d=%d c=%d", source, features.shape[0], features.shape[1], len(mapping))
    dataset = LabeledDataset(features=features, labels=np.asarray(labels, dtype=np.int64), feature_names=names)
    return LoadedData(
        dataset=dataset,
        label_mapping=mapping,
        label_column=header[label_idx],
        path=str(source),
        format="csv",
    )


def load_sparse_libsvm_format(path: str | Path) -> LoadedData:
    """``label index:value ...`` lines with 1-based, strictly ascending indices."""
    source = Path(path)
    if not source.exists():
        raise InputError(f"input file not found: {source}")

    mapping: dict[str, int] = {}
    labels: list[int] = []
    entries: list[list[tuple[int, float]]] = []
    max_index = 0
    for line_no, raw in enumerate(_read_utf8(source).splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        row: list[tuple[int, float]] = []
        previous = 0
        for token in tokens[1:]:
            if ":" not in token:
                raise ParseError(f"entry {token!r} is not index:value", line=line_no)
            raw_index, raw_value = token.split(":", 1)
            try:
                index = int(raw_index)
            except ValueError as exc:
                raise ParseError(f"feature index {raw_index!r} is not an integer", line=line_no) from exc
            if index < 1:
                raise ParseError(f"feature index {index} is not 1-based", line=line_no, column=index)
            if index <= previous:
                raise NonAscendingIndex(f"feature index {index} follows {previous}", line=line_no, column=index)
            row.append((index, _parse_cell(raw_value, line=line_no, column=str(index))))
            previous = index
        max_index = max(max_index, previous)
        labels.append(_map_label(tokens[0], mapping))
        entries.append(row)

    if not entries:
        raise ParseError(f"{source} contains no samples")
    features = np.zeros((len(entries), max(max_index, 1)))
    for row_idx, row in enumerate(entries):
        for index, value in row:
            features[row_idx, index - 1] = value
    logging.info("Loaded %s: n=%d d=%d c=%d", source, features.shape[0], features.shape[1], len(mapping))
    dataset = LabeledDataset(features=features, labels=np.asarray(labels, dtype=np.int64))
    return LoadedData(dataset=dataset, label_mapping=mapping, label_column="0", path=str(source), format="sparse")


def load_dataset(path: str | Path, *, fmt: str = "csv", label_column: str | int = -1) -> LoadedData:
    if fmt == "csv":
        return load_dense_csv(path, label_column)
    if fmt == "sparse":
        return load_sparse_libsvm_format(path)
    raise ParseError(f"unknown input format {fmt!r}")


def write_dense_csv(
    dataset: LabeledDataset,
    path: str | Path,
    *,
    label_name: str = "label",
    class_names: list[str] | None = None,
) -> Path:
    """Write a dataset that ``load_dense_csv`` reads back value-identically."""
    target = Path(path)
    if target.parent != Path("."):
        target.parent.mkdir(parents=True, exist_ok=True)
    names = list(dataset.feature_names or [f"f{j}" for j in range(dataset.n_features)])
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names + [label_name])
        for row, label in zip(dataset.features, dataset.labels):
            tag = class_names[int(label)] if class_names is not None else str(int(label))
            writer.writerow([repr(float(value)) for value in row] + [tag])
    return target
