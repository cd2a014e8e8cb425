"""Exception hierarchy shared by every layer of the readiness toolkit.

Each error carries a stable ``code`` (printed by the CLI as ``<code>: <message>``)
and the process ``exit_status`` the CLI maps it to.
"""

from typing import Optional


class ReadinessError(Exception):
    """Base class for all expected failures"""

    code = 'ReadinessError'
    exit_status = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.step_index: Optional[int] = None

    def at_step(self, step_index: int) -> 'ReadinessError':
        """Annotate the error with the plan step that raised it"""
        self.step_index = step_index
        self.message = f'step {step_index}: {self.message}'
        self.args = (self.message,)
        return self

    def in_stage(self, stage: str) -> 'ReadinessError':
        """Prefix the message with the pipeline stage that failed"""
        self.message = f'{stage}: {self.message}'
        self.args = (self.message,)
        return self

    def __str__(self):
        return self.message


# Ingest and dataset model

class DatasetFileNotFoundError(ReadinessError):
    code = 'FileNotFound'


class ParseError(ReadinessError):
    code = 'ParseError'

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f'row {row}: {message}'
        super().__init__(message)
        self.row = row


class EmptyDatasetError(ReadinessError):
    code = 'EmptyDataset'


class DuplicateColumnNameError(ReadinessError):
    code = 'DuplicateColumnName'


class SchemaError(ReadinessError):
    code = 'SchemaError'


class DatasetIOError(ReadinessError):
    code = 'IoError'


class ColumnNotFoundError(ReadinessError):
    code = 'ColumnNotFound'


class TypeMismatchError(ReadinessError):
    code = 'TypeMismatch'


class NotApplicableError(ReadinessError):
    code = 'NotApplicable'


# Configuration and plans

class ConfigSyntaxError(ReadinessError):
    code = 'ConfigSyntaxError'


class PlanSyntaxError(ReadinessError):
    code = 'PlanSyntaxError'

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f'line {line}, column {column}: {message}'
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownStepKindError(ReadinessError):
    code = 'UnknownStepKind'


class MissingParameterError(ReadinessError):
    code = 'MissingParameter'


class InvalidParameterValueError(ReadinessError):
    code = 'InvalidParameterValue'


class MissingActorError(ReadinessError):
    code = 'MissingActor'


# Assessment and reports

class ProfileMismatchError(ReadinessError):
    code = 'ProfileMismatch'


class DigestMismatchError(ReadinessError):
    code = 'DigestMismatch'


class SidecarNotFoundError(ReadinessError):
    code = 'SidecarNotFound'


class SidecarSyntaxError(ReadinessError):
    code = 'SidecarSyntaxError'


class UnsupportedDataTypeError(SidecarSyntaxError):
    code = 'UnsupportedDataType'


class GateFailedError(ReadinessError):
    """Overall score below the --fail-below threshold"""

    code = 'GateFailed'
    exit_status = 2


# Lineage integrity

class IntegrityError(ReadinessError):
    exit_status = 3


class ChainBrokenError(IntegrityError):
    code = 'ChainBroken'

    def __init__(self, message: str, entry_id: Optional[int] = None):
        super().__init__(message)
        self.entry_id = entry_id


class LedgerParseError(IntegrityError):
    code = 'ParseError'

    def __init__(self, message: str, line: int):
        super().__init__(f'ledger line {line}: {message}')
        self.line = line


class BaselineMismatchError(IntegrityError):
    code = 'BaselineMismatch'


class ReplayDivergenceError(IntegrityError):
    code = 'ReplayDivergence'

    def __init__(self, message: str, entry_id: Optional[int] = None):
        super().__init__(message)
        self.entry_id = entry_id
