import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import (
    ColumnNotFoundError,
    DuplicateColumnNameError,
    InvalidParameterValueError,
    SchemaError,
)

# Missing is None; the other cell kinds map onto the Python scalar of the same name.
Cell = Union[None, bool, int, float, str]


class ColumnType(str, Enum):
    INTEGER = 'integer'
    REAL = 'real'
    BOOLEAN = 'boolean'
    TEXT = 'text'
    CATEGORICAL = 'categorical'


class ColumnRole(str, Enum):
    FEATURE = 'feature'
    TARGET = 'target'
    PROTECTED = 'protected'
    IDENTIFIER = 'identifier'
    IGNORE = 'ignore'


NUMERIC_TYPES = (ColumnType.INTEGER, ColumnType.REAL)
LABEL_TYPES = (ColumnType.CATEGORICAL, ColumnType.BOOLEAN)
DEFAULT_MISSING_TOKENS = frozenset({'', 'NA', 'N/A', 'null', 'NaN', '?'})


def cell_token(cell: Cell) -> str:
    """Canonical text form of a cell (Missing renders as the empty field)"""
    if cell is None:
        return ''
    if isinstance(cell, bool):
        return 'true' if cell else 'false'
    if isinstance(cell, float):
        return repr(cell)
    if isinstance(cell, int):
        return str(cell)
    return cell


def conforms(cell: Cell, base_type: ColumnType) -> bool:
    """Check whether a non-missing cell holds a value of the column's base type"""
    if base_type == ColumnType.BOOLEAN:
        return isinstance(cell, bool)
    if base_type == ColumnType.INTEGER:
        return isinstance(cell, int) and not isinstance(cell, bool)
    if base_type == ColumnType.REAL:
        return isinstance(cell, float)
    return isinstance(cell, str)


def _quote(token: str) -> str:
    if ',' in token or '"' in token or '\n' in token or '\r' in token:
        return '"' + token.replace('"', '""') + '"'
    return token


@dataclass(frozen=True)
class IngestConfig:
    missing_tokens: FrozenSet[str] = DEFAULT_MISSING_TOKENS
    delimiter: str = ','
    has_header: bool = True
    type_dominance_threshold: float = 0.95
    roles: Dict[str, ColumnRole] = field(default_factory=dict)
    type_overrides: Dict[str, ColumnType] = field(default_factory=dict)

    def validate(self) -> 'IngestConfig':
        if len(self.delimiter) != 1:
            raise InvalidParameterValueError(f'delimiter must be a single character, got {self.delimiter!r}')
        if self.delimiter in ('"', '\n', '\r'):
            raise InvalidParameterValueError(f'delimiter {self.delimiter!r} is not allowed')
        if not 0.5 < self.type_dominance_threshold <= 1:
            raise InvalidParameterValueError(
                f'type_dominance_threshold must be in (0.5, 1], got {self.type_dominance_threshold}')
        return self

    def to_dict(self):
        return {
            'missing_tokens': sorted(self.missing_tokens),
            'delimiter': self.delimiter,
            'has_header': self.has_header,
            'type_dominance_threshold': self.type_dominance_threshold,
            'roles': {name: role.value for name, role in sorted(self.roles.items())},
            'types': {name: kind.value for name, kind in sorted(self.type_overrides.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'IngestConfig':
        known = {'missing_tokens', 'delimiter', 'has_header', 'type_dominance_threshold', 'roles', 'types'}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterValueError(f'unknown ingest settings: {sorted(unknown)}')
        try:
            roles = {str(name): ColumnRole(value) for name, value in (data.get('roles') or {}).items()}
            types = {str(name): ColumnType(value) for name, value in (data.get('types') or {}).items()}
        except ValueError as e:
            raise InvalidParameterValueError(f'invalid ingest setting: {e}')
        tokens = data.get('missing_tokens')
        config = cls(
            missing_tokens=frozenset(str(t) for t in tokens) if tokens is not None else DEFAULT_MISSING_TOKENS,
            delimiter=str(data.get('delimiter', ',')),
            has_header=bool(data.get('has_header', True)),
            type_dominance_threshold=float(data.get('type_dominance_threshold', 0.95)),
            roles=roles,
            type_overrides=types,
        )
        return config.validate()


@dataclass(frozen=True)
class Column:
    name: str
    declared_type: ColumnType
    base_type: ColumnType
    role: ColumnRole
    cells: Tuple[Cell, ...]

    @property
    def is_numeric(self) -> bool:
        return self.base_type in NUMERIC_TYPES

    @property
    def is_categorical(self) -> bool:
        return self.declared_type in LABEL_TYPES

    @cached_property
    def tokens(self) -> Tuple[Optional[str], ...]:
        """Canonical token per cell, None for Missing"""
        return tuple(None if cell is None else cell_token(cell) for cell in self.cells)

    @cached_property
    def present_mask(self) -> np.ndarray:
        return np.array([cell is not None for cell in self.cells], dtype=bool)

    @cached_property
    def numeric_array(self) -> np.ndarray:
        """Float view of the column; NaN wherever the cell is Missing or not numeric"""
        values = np.full(len(self.cells), np.nan, dtype=np.float64)
        if self.is_numeric:
            for i, cell in enumerate(self.cells):
                if cell is not None and conforms(cell, self.base_type):
                    values[i] = float(cell)
        return values

    @cached_property
    def numeric_mask(self) -> np.ndarray:
        return ~np.isnan(self.numeric_array)

    @cached_property
    def missing_count(self) -> int:
        return sum(1 for cell in self.cells if cell is None)

    @property
    def non_missing_count(self) -> int:
        return len(self.cells) - self.missing_count

    @cached_property
    def type_violation_count(self) -> int:
        return sum(1 for cell in self.cells if cell is not None and not conforms(cell, self.base_type))

    def numeric_values(self) -> List[Union[int, float]]:
        """Typed numeric cells in row order (Missing and violating tokens skipped)"""
        if not self.is_numeric:
            return []
        return [cell for cell in self.cells if cell is not None and conforms(cell, self.base_type)]

    def with_cells(self, cells: Sequence[Cell]) -> 'Column':
        return replace(self, cells=tuple(cells))


@dataclass(frozen=True)
class Dataset:
    columns: Tuple[Column, ...]
    row_count: int
    source_path: str = ''
    version_label: str = 'baseline'
    ingest_warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        names = set()
        targets = 0
        for column in self.columns:
            if not column.name:
                raise SchemaError('column names must be non-empty')
            if column.name in names:
                raise DuplicateColumnNameError(f"duplicate column name '{column.name}'")
            names.add(column.name)
            if len(column.cells) != self.row_count:
                raise SchemaError(
                    f"column '{column.name}' has {len(column.cells)} cells, expected {self.row_count}")
            if column.role in (ColumnRole.TARGET, ColumnRole.PROTECTED) and not column.is_categorical:
                raise SchemaError(
                    f"column '{column.name}' has role {column.role.value} but type {column.declared_type.value}; "
                    'target and protected columns must be categorical or boolean')
            if column.role == ColumnRole.TARGET:
                targets += 1
        if targets > 1:
            raise SchemaError('at most one column may have role target')

    @property
    def column_names(self) -> List[str]:
        return [column.name for column in self.columns]

    @property
    def column_count(self) -> int:
        return len(self.columns)

    def has_column(self, name: str) -> bool:
        return any(column.name == name for column in self.columns)

    def column(self, name: str) -> Column:
        for column in self.columns:
            if column.name == name:
                return column
        raise ColumnNotFoundError(f"column '{name}' not found")

    def column_index(self, name: str) -> int:
        for index, column in enumerate(self.columns):
            if column.name == name:
                return index
        raise ColumnNotFoundError(f"column '{name}' not found")

    @property
    def target_column(self) -> Optional[Column]:
        for column in self.columns:
            if column.role == ColumnRole.TARGET:
                return column
        return None

    @property
    def protected_columns(self) -> List[Column]:
        return [column for column in self.columns if column.role == ColumnRole.PROTECTED]

    def columns_with_roles(self, *roles: ColumnRole) -> List[Column]:
        return [column for column in self.columns if column.role in roles]

    def row_keys(self) -> List[Tuple[str, ...]]:
        """Per-row tuple of canonical tokens; Missing compares equal to Missing"""
        token_columns = [tuple(cell_token(cell) if cell is not None else '\x00' for cell in column.cells)
                         for column in self.columns]
        return list(zip(*token_columns))

    # Transformations return new datasets

    def select_rows(self, indices: Iterable[int]) -> 'Dataset':
        indices = list(indices)
        columns = tuple(column.with_cells([column.cells[i] for i in indices]) for column in self.columns)
        return replace(self, columns=columns, row_count=len(indices), ingest_warnings=())

    def replace_column(self, new_column: Column) -> 'Dataset':
        index = self.column_index(new_column.name)
        columns = self.columns[:index] + (new_column,) + self.columns[index + 1:]
        return replace(self, columns=columns, ingest_warnings=())

    def drop_column(self, name: str) -> 'Dataset':
        index = self.column_index(name)
        return replace(self, columns=self.columns[:index] + self.columns[index + 1:], ingest_warnings=())

    def with_version_label(self, label: str) -> 'Dataset':
        return replace(self, version_label=label)

    # Canonical form

    @cached_property
    def canonical_bytes(self) -> bytes:
        """UTF-8 CSV: header, minimal quoting, Missing as empty field, LF endings, trailing newline"""
        lines = [','.join(_quote(name) for name in self.column_names)]
        token_columns = [[_quote(cell_token(cell)) for cell in column.cells] for column in self.columns]
        for row in zip(*token_columns):
            lines.append(','.join(row))
        if not self.columns:
            lines.extend('' for _ in range(self.row_count))
        return ('\n'.join(lines) + '\n').encode('utf-8')

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes).hexdigest()

    def __repr__(self):
        return f'<Dataset {self.row_count}x{self.column_count} {self.digest[:12]}>'
