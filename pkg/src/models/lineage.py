from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict

from src.models.remediation import Actor

GENESIS_HASH = '0' * 64


class Operation(str, Enum):
    INGEST = 'ingest'
    PROFILE = 'profile'
    ASSESS = 'assess'
    REMEDIATION_STEP = 'remediation_step'
    REPORT_RENDER = 'report_render'


@dataclass
class LineageEntry:
    entry_id: int
    timestamp: str
    actor: Actor
    operation: Operation
    input_digest: str
    output_digest: str
    prev_entry_hash: str
    detail: Dict[str, Any] = field(default_factory=dict)
    entry_hash: str = ''

    @property
    def is_mutating(self) -> bool:
        return self.operation == Operation.REMEDIATION_STEP

    def hash_payload(self) -> dict:
        """Every field except entry_hash, the input to the entry hash"""
        return {
            'entry_id': self.entry_id,
            'timestamp': self.timestamp,
            'actor': self.actor.to_dict(),
            'operation': self.operation.value,
            'detail': self.detail,
            'input_digest': self.input_digest,
            'output_digest': self.output_digest,
            'prev_entry_hash': self.prev_entry_hash,
        }

    def to_dict(self):
        payload = self.hash_payload()
        payload['entry_hash'] = self.entry_hash
        return payload

    @classmethod
    def from_dict(cls, data):
        return cls(
            entry_id=data['entry_id'],
            timestamp=data['timestamp'],
            actor=Actor.from_dict(data['actor']),
            operation=Operation(data['operation']),
            input_digest=data['input_digest'],
            output_digest=data['output_digest'],
            prev_entry_hash=data['prev_entry_hash'],
            detail=data['detail'],
            entry_hash=data['entry_hash'],
        )

    def __repr__(self):
        return f'<LineageEntry {self.entry_id}:{self.operation.value} by {self.actor.name}>'
