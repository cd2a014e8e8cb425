"""CSV ingest: parse delimited text, infer column types and build typed datasets."""

import csv
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from src.errors import (
    ColumnNotFoundError,
    DatasetFileNotFoundError,
    DatasetIOError,
    DuplicateColumnNameError,
    EmptyDatasetError,
    ParseError,
    SchemaError,
)
from src.models.dataset import (
    LABEL_TYPES,
    Cell,
    Column,
    ColumnRole,
    ColumnType,
    Dataset,
    IngestConfig,
)

logger = logging.getLogger(__name__)

INT64_MIN = -2 ** 63
INT64_MAX = 2 ** 63 - 1

_INTEGER = re.compile(r'[+-]?[0-9]+')
_REAL = re.compile(r'[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?')
_NON_FINITE = re.compile(r'[+-]?(?:inf|infinity|nan)', re.IGNORECASE)
_BOOLEANS = {'true': True, 'false': False}

# Most specific first; ties in dominance resolve to the earlier entry
_SPECIFICITY = (ColumnType.BOOLEAN, ColumnType.INTEGER, ColumnType.REAL)

CATEGORICAL_MIN_DISTINCT = 20
CATEGORICAL_ROW_FRACTION = 0.05


def parse_boolean(token: str) -> Optional[bool]:
    return _BOOLEANS.get(token.lower())


def parse_integer(token: str) -> Optional[int]:
    if not _INTEGER.fullmatch(token):
        return None
    value = int(token)
    if value < INT64_MIN or value > INT64_MAX:
        return None
    return value


def parse_real(token: str) -> Optional[float]:
    """Parse a decimal token; NaN and infinities parse but are returned as such"""
    if _REAL.fullmatch(token) or _NON_FINITE.fullmatch(token):
        return float(token)
    return None


_PARSERS = {
    ColumnType.BOOLEAN: parse_boolean,
    ColumnType.INTEGER: parse_integer,
    ColumnType.REAL: parse_real,
}


def token_parses_as(token: str, base_type: ColumnType) -> bool:
    if base_type in _PARSERS:
        return _PARSERS[base_type](token) is not None
    return True


def to_cell(token: str, base_type: ColumnType) -> Tuple[Cell, bool]:
    """Typed cell for a non-missing token plus a flag for NaN/infinite Real tokens.

    Tokens that do not parse as the base type are kept verbatim as text (type violations).
    """
    if base_type == ColumnType.REAL:
        value = parse_real(token)
        if value is None:
            return token, False
        if not math.isfinite(value):
            return None, True
        return value, False
    if base_type in _PARSERS:
        value = _PARSERS[base_type](token)
        return (token if value is None else value), False
    return token, False


@dataclass(frozen=True)
class TypeInference:
    declared_type: ColumnType
    base_type: ColumnType
    type_violation_count: int
    dominant_type: ColumnType
    dominance: float


def dominant_type(tokens: Sequence[str]) -> Tuple[ColumnType, float]:
    """Most specific type parsed by the largest fraction of the (non-missing) tokens"""
    if not tokens:
        return ColumnType.TEXT, 1.0
    best_type, best_count = ColumnType.TEXT, 0
    for candidate in _SPECIFICITY:
        parser = _PARSERS[candidate]
        count = sum(1 for token in tokens if parser(token) is not None)
        if count > best_count:
            best_type, best_count = candidate, count
    if best_count == 0:
        return ColumnType.TEXT, 1.0
    return best_type, best_count / len(tokens)


def infer_column_types(raw_tokens: Mapping[str, Sequence[str]],
                       config: Optional[IngestConfig] = None) -> Dict[str, TypeInference]:
    """Resolve declared type, base type and violation count for every column"""
    config = config or IngestConfig()
    inferred = {}
    for name, tokens in raw_tokens.items():
        present = [token for token in tokens if token not in config.missing_tokens]
        dominant, dominance = dominant_type(present)
        base = dominant if dominance >= config.type_dominance_threshold else ColumnType.TEXT
        override = config.type_overrides.get(name)
        if override is not None and override != ColumnType.CATEGORICAL:
            base = override
        violations = sum(1 for token in present if not token_parses_as(token, base))

        declared = base
        if override == ColumnType.CATEGORICAL:
            declared = ColumnType.CATEGORICAL
        elif override is None and present and base in (ColumnType.TEXT, ColumnType.INTEGER, ColumnType.BOOLEAN):
            limit = max(CATEGORICAL_MIN_DISTINCT, CATEGORICAL_ROW_FRACTION * len(tokens))
            if len(set(present)) <= limit:
                declared = ColumnType.CATEGORICAL

        inferred[name] = TypeInference(declared, base, violations, dominant, dominance)
    return inferred


def _read_records(path: Path, delimiter: str) -> List[List[str]]:
    records = []
    try:
        with path.open('r', encoding='utf-8-sig', newline='') as handle:
            reader = csv.reader(handle, delimiter=delimiter, strict=True)
            while True:
                try:
                    record = next(reader)
                except StopIteration:
                    break
                except csv.Error as e:
                    raise ParseError(f"malformed quoting: {e}", row=len(records) + 1)
                records.append(record)
    except UnicodeDecodeError as e:
        raise ParseError(f"file is not valid UTF-8: {e}")
    except OSError as e:
        raise DatasetIOError(f"cannot read {path}: {e}")
    return records


def load_dataset(path: Union[str, Path], config: Optional[IngestConfig] = None) -> Dataset:
    """Load a delimited text file into a typed, fingerprinted Dataset"""
    path = Path(path)
    config = (config or IngestConfig()).validate()
    if not path.is_file():
        raise DatasetFileNotFoundError(f"dataset file not found: {path}")

    records = _read_records(path, config.delimiter)
    if not records:
        raise EmptyDatasetError(f"{path} is empty")

    if config.has_header:
        header, body, first_row = records[0], records[1:], 2
        if not header:
            raise ParseError("header row is empty", row=1)
        for position, name in enumerate(header):
            if not name:
                raise ParseError(f"empty column name at position {position + 1}", row=1)
        seen = set()
        for name in header:
            if name in seen:
                raise DuplicateColumnNameError(f"duplicate column name '{name}' in header")
            seen.add(name)
    else:
        header = [f'column_{i + 1}' for i in range(len(records[0]))]
        body, first_row = records, 1

    width = len(header)
    rows = []
    for offset, record in enumerate(body):
        if not record:
            if width > 1:
                # blank line between records
                continue
            record = ['']
        if len(record) != width:
            raise ParseError(f"expected {width} fields, found {len(record)}", row=first_row + offset)
        rows.append(record)
    if not rows:
        raise EmptyDatasetError(f"{path} has no data rows")

    for name in list(config.roles) + list(config.type_overrides):
        if name not in header:
            raise ColumnNotFoundError(f"configured column '{name}' is not in {path.name}")

    raw = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    inferred = infer_column_types(raw, config)

    columns = []
    warnings = []
    for name in header:
        info = inferred[name]
        role = config.roles.get(name, ColumnRole.FEATURE)
        declared = info.declared_type
        if role in (ColumnRole.TARGET, ColumnRole.PROTECTED) and declared not in LABEL_TYPES:
            if info.base_type == ColumnType.REAL:
                raise SchemaError(f"column '{name}' is real-valued and cannot have role {role.value}")
            declared = ColumnType.CATEGORICAL
            warnings.append(f"column '{name}': tagged categorical because of role {role.value}")

        cells = []
        non_finite = 0
        for token in raw[name]:
            if token in config.missing_tokens:
                cells.append(None)
                continue
            cell, dropped = to_cell(token, info.base_type)
            non_finite += dropped
            cells.append(cell)
        if non_finite:
            warnings.append(f"column '{name}': {non_finite} NaN/infinite token(s) read as Missing")
        columns.append(Column(name=name, declared_type=declared, base_type=info.base_type,
                              role=role, cells=tuple(cells)))

    for warning in warnings:
        logger.warning(warning)

    dataset = Dataset(columns=tuple(columns), row_count=len(rows), source_path=str(path),
                      ingest_warnings=tuple(warnings))
    logger.info(f"Loaded {path}: {dataset.row_count} rows x {dataset.column_count} columns "
                f"(digest {dataset.digest[:12]})")
    return dataset
