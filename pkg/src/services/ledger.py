"""Append-only, hash-chained lineage ledger stored as canonical JSON Lines.

Each line is one entry; ``entry_hash`` is SHA-256 over the canonical JSON of
every other field, and ``prev_entry_hash`` links to the preceding entry (64
zeros for the first). Appends re-verify the whole file under an exclusive lock.
"""

import fcntl
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from src.errors import (
    BaselineMismatchError,
    ChainBrokenError,
    DatasetIOError,
    InvalidParameterValueError,
    LedgerParseError,
    ReadinessError,
    ReplayDivergenceError,
)
from src.models.dataset import Dataset
from src.models.lineage import GENESIS_HASH, LineageEntry, Operation
from src.models.remediation import Actor, RemediationStep
from src.services.canonical import canonical_json, sha256_hex
from src.services.clock import utc_now
from src.services.remediation import apply_step

logger = logging.getLogger(__name__)

ENTRY_KEYS = frozenset({'entry_id', 'timestamp', 'actor', 'operation', 'detail', 'input_digest',
                        'output_digest', 'prev_entry_hash', 'entry_hash'})


def entry_hash(payload: Dict[str, Any]) -> str:
    """Hash of an entry's fields, excluding entry_hash itself"""
    return sha256_hex(canonical_json({key: value for key, value in payload.items() if key != 'entry_hash'}))


@dataclass
class VerifyResult:
    ok: bool
    entry_count: int
    broken_entry_id: Optional[int] = None
    reason: str = ''

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {'ok': self.ok, 'entry_count': self.entry_count,
                'broken_entry_id': self.broken_entry_id, 'reason': self.reason}


def _split_lines(data: bytes) -> List[bytes]:
    lines = data.split(b'\n')
    if lines and lines[-1] == b'':
        lines.pop()
    return lines


def _parse_line(raw: bytes, line_number: int) -> dict:
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise LedgerParseError(f"invalid UTF-8: {e}", line=line_number)
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise LedgerParseError(f"invalid JSON: {e.msg} at column {e.colno}", line=line_number)
    if not isinstance(document, dict):
        raise LedgerParseError("entry is not a JSON object", line=line_number)
    return document


def _check_entry(document: dict, raw: bytes, position: int, prev_hash: str,
                 last_timestamp: Optional[str]) -> Tuple[Optional[LineageEntry], str]:
    """(entry, '') when the line is intact, else (None, reason)"""
    try:
        canonical = canonical_json(document).encode('utf-8')
    except ValueError:
        return None, "entry holds non-finite numbers"
    if canonical != raw:
        return None, "entry is not in canonical form"
    if set(document) != ENTRY_KEYS:
        return None, f"entry fields differ from {sorted(ENTRY_KEYS)}"
    try:
        entry = LineageEntry.from_dict(document)
    except (KeyError, TypeError, ValueError, AttributeError, ReadinessError) as e:
        return None, f"malformed entry: {e}"
    if entry.entry_id != position:
        return None, f"entry id {entry.entry_id} out of sequence (expected {position})"
    if entry.prev_entry_hash != prev_hash:
        return None, "prev_entry_hash does not match the preceding entry"
    if entry.entry_hash != entry_hash(document):
        return None, "entry_hash does not match the entry content"
    if last_timestamp is not None and entry.timestamp < last_timestamp:
        return None, "timestamp earlier than the preceding entry"
    if entry.is_mutating:
        change = entry.detail.get('change') if isinstance(entry.detail, dict) else None
        if not isinstance(change, dict) or not isinstance(entry.detail.get('step'), dict):
            return None, "remediation entry without step and change detail"
        unchanged = (change.get('cells_modified') == 0 and change.get('rows_before') == change.get('rows_after')
                     and change.get('columns_before') == change.get('columns_after'))
        if entry.input_digest == entry.output_digest and not unchanged:
            return None, "remediation entry reports changes but equal digests"
    elif entry.input_digest != entry.output_digest:
        return None, f"{entry.operation.value} entry must not change the dataset digest"
    return entry, ''


def verify_bytes(data: bytes) -> Tuple[VerifyResult, List[LineageEntry]]:
    """Verify ledger content; returns the result and the entries of the intact prefix"""
    entries: List[LineageEntry] = []
    prev_hash = GENESIS_HASH
    last_timestamp = None
    for position, raw in enumerate(_split_lines(data), start=1):
        try:
            document = _parse_line(raw, position)
        except LedgerParseError as e:
            return VerifyResult(False, len(entries), position, str(e)), entries
        entry, reason = _check_entry(document, raw, position, prev_hash, last_timestamp)
        if entry is None:
            return VerifyResult(False, len(entries), position, reason), entries
        entries.append(entry)
        prev_hash = entry.entry_hash
        last_timestamp = entry.timestamp
    return VerifyResult(True, len(entries)), entries


class LineageLedger:
    """Hash-chained record of operations on one dataset lineage"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    @property
    def exists(self) -> bool:
        return self.path.is_file()

    def _read(self) -> bytes:
        if not self.exists:
            return b''
        try:
            return self.path.read_bytes()
        except OSError as e:
            raise DatasetIOError(f"cannot read ledger {self.path}: {e}")

    def verify(self) -> VerifyResult:
        """Check the whole chain without raising"""
        result, _ = verify_bytes(self._read())
        if result.ok:
            logger.debug(f"Ledger {self.path} verified: {result.entry_count} entries")
        else:
            logger.warning(f"Ledger {self.path} broken at entry {result.broken_entry_id}: {result.reason}")
        return result

    def entries(self) -> List[LineageEntry]:
        """All entries of a verified ledger; ChainBroken otherwise"""
        result, entries = verify_bytes(self._read())
        if not result.ok:
            raise ChainBrokenError(f"ledger broken at entry {result.broken_entry_id}: {result.reason}",
                                   entry_id=result.broken_entry_id)
        return entries

    def filter(self, actor: Optional[str] = None, since: Optional[str] = None) -> List[LineageEntry]:
        """Entries of a verified ledger, optionally by actor name and earliest timestamp"""
        selected = self.entries()
        if actor:
            selected = [entry for entry in selected if entry.actor.name == actor]
        if since:
            selected = [entry for entry in selected if entry.timestamp >= since]
        return selected

    def append(self, actor: Actor, operation: Operation, input_digest: str, output_digest: str,
               detail: Optional[Dict[str, Any]] = None) -> LineageEntry:
        """Verify the chain, then durably append one entry"""
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open('a+b') as handle:
                fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
                try:
                    handle.seek(0)
                    result, entries = verify_bytes(handle.read())
                    if not result.ok:
                        raise ChainBrokenError(
                            f"refusing to append: ledger broken at entry {result.broken_entry_id}: {result.reason}",
                            entry_id=result.broken_entry_id)
                    previous = entries[-1] if entries else None
                    timestamp = utc_now()
                    if previous is not None and timestamp < previous.timestamp:
                        timestamp = previous.timestamp
                    entry = LineageEntry(
                        entry_id=len(entries) + 1,
                        timestamp=timestamp,
                        actor=actor,
                        operation=Operation(operation),
                        input_digest=input_digest,
                        output_digest=output_digest,
                        prev_entry_hash=previous.entry_hash if previous else GENESIS_HASH,
                        detail=detail or {},
                    )
                    entry.entry_hash = entry_hash(entry.hash_payload())
                    handle.seek(0, os.SEEK_END)
                    handle.write((canonical_json(entry.to_dict()) + '\n').encode('utf-8'))
                    handle.flush()
                    os.fsync(handle.fileno())
                finally:
                    fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
        except OSError as e:
            raise DatasetIOError(f"cannot append to ledger {self.path}: {e}")
        logger.info(f"Ledger entry {entry.entry_id}: {entry.operation.value} by {entry.actor}")
        return entry

    def replay(self, baseline: Dataset, upto: Optional[int] = None) -> Dataset:
        """Re-apply recorded remediation steps to the baseline, checking every output digest"""
        if upto is not None and upto < 1:
            raise InvalidParameterValueError(f"upto must be an entry id >= 1, got {upto}")
        entries = self.entries()
        if not entries:
            return baseline
        if baseline.digest != entries[0].input_digest:
            raise BaselineMismatchError(
                f"baseline digest {baseline.digest[:12]} differs from the first entry's input "
                f"{entries[0].input_digest[:12]}")

        current = baseline
        for entry in entries:
            if upto is not None and entry.entry_id > upto:
                break
            if not entry.is_mutating:
                continue
            if entry.input_digest != current.digest:
                if entry.input_digest != baseline.digest:
                    raise ReplayDivergenceError(
                        f"entry {entry.entry_id} starts from {entry.input_digest[:12]}, "
                        f"replayed data is {current.digest[:12]}", entry_id=entry.entry_id)
                # a later run restarted from the baseline
                current = baseline
            step = RemediationStep.from_dict(entry.detail['step'])
            try:
                current, _ = apply_step(current, step, entry.detail['change']['step_index'])
            except ReadinessError as e:
                raise ReplayDivergenceError(f"entry {entry.entry_id} could not be re-applied: {e}",
                                            entry_id=entry.entry_id)
            if current.digest != entry.output_digest:
                raise ReplayDivergenceError(
                    f"entry {entry.entry_id} replayed to {current.digest[:12]}, recorded {entry.output_digest[:12]}",
                    entry_id=entry.entry_id)
            logger.debug(f"Replayed entry {entry.entry_id} ({step.kind.value})")
        return current

    def __repr__(self):
        return f'<LineageLedger {self.path}>'


def append_entry(ledger: LineageLedger, actor: Actor, operation: Operation, input_digest: str,
                 output_digest: str, detail: Optional[Dict[str, Any]] = None) -> LineageEntry:
    return ledger.append(actor, operation, input_digest, output_digest, detail)


def verify(ledger: LineageLedger) -> VerifyResult:
    return ledger.verify()


def replay(baseline: Dataset, ledger: LineageLedger, upto: Optional[int] = None) -> Dataset:
    return ledger.replay(baseline, upto)
