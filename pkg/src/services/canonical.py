"""Canonical serialization of datasets and JSON documents.

Dataset digests are SHA-256 over ``Dataset.canonical_bytes``; JSON documents
(ledger entries, reports) use sorted keys and compact separators so hashes are
reproducible byte for byte.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Union

from src.errors import DatasetIOError
from src.models.dataset import Dataset

logger = logging.getLogger(__name__)


def canonical_hash(dataset: Dataset) -> str:
    """Lowercase hex SHA-256 of the dataset's canonical CSV"""
    return hashlib.sha256(dataset.canonical_bytes).hexdigest()


def canonical_json(document: Any) -> str:
    """Compact, key-sorted JSON used for hashing ledger entries"""
    return json.dumps(document, sort_keys=True, separators=(',', ':'), ensure_ascii=False, allow_nan=False)


def sha256_hex(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode('utf-8')
    return hashlib.sha256(data).hexdigest()


def write_bytes(path: Union[str, Path], payload: bytes) -> Path:
    """Write through a sibling temp file so readers never see a half-written file"""
    path = Path(path)
    temp = path.with_name(f'.{path.name}.tmp')
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with temp.open('wb') as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(temp, path)
    except OSError as e:
        temp.unlink(missing_ok=True)
        raise DatasetIOError(f"cannot write {path}: {e}")
    return path


def write_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    written = write_bytes(path, dataset.canonical_bytes)
    logger.info(f"Wrote {dataset.row_count} rows to {written} (digest {dataset.digest[:12]})")
    return written


def pretty_json(document: Any) -> bytes:
    """Indented, key-sorted JSON with a trailing newline for files meant to be read"""
    return (json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + '\n').encode('utf-8')


def write_json(path: Union[str, Path], document: Any) -> Path:
    return write_bytes(path, pretty_json(document))
