from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from src.models.remediation import Actor

DEFAULT_OUT = Path('out')
LEDGER_FILENAME = 'lineage.jsonl'

OUTPUT_FILES = {
    'profile.baseline': 'profile.baseline.json',
    'assessment.baseline': 'assessment.baseline.json',
    'profile.updated': 'profile.updated.json',
    'assessment.updated': 'assessment.updated.json',
    'data.updated': 'data.updated.csv',
    'data.replayed': 'data.replayed.csv',
    'report.diff': 'report.diff.json',
}


@dataclass
class RunConfig:
    """Resolved inputs of one command invocation"""

    data: Optional[Path] = None
    sidecar: Optional[Path] = None
    config: Optional[Path] = None
    plan: Optional[Path] = None
    ledger: Optional[Path] = None
    out: Path = DEFAULT_OUT
    actor: Optional[Actor] = None
    formats: Tuple[str, ...] = ('json',)
    seed: Optional[int] = None
    fail_below: Optional[float] = None
    use_ledger: bool = True
    record_render: bool = False

    def __post_init__(self):
        for name in ('data', 'sidecar', 'config', 'plan', 'ledger'):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value).expanduser().resolve())
        self.out = Path(self.out).expanduser().resolve()
        if self.ledger is None:
            self.ledger = self.out / LEDGER_FILENAME

    def output(self, key: str) -> Path:
        return self.out / OUTPUT_FILES[key]

    def to_dict(self):
        return {
            'data': str(self.data) if self.data else None,
            'sidecar': str(self.sidecar) if self.sidecar else None,
            'config': str(self.config) if self.config else None,
            'plan': str(self.plan) if self.plan else None,
            'ledger': str(self.ledger) if self.use_ledger else None,
            'out': str(self.out),
            'actor': self.actor.to_dict() if self.actor else None,
            'formats': list(self.formats),
            'seed': self.seed,
            'fail_below': self.fail_below,
        }

    def __repr__(self):
        return f'<RunConfig data={self.data} out={self.out}>'
