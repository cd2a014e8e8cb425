import logging
from pathlib import Path

import numpy as np
import pytest

from src.models.dataset import ColumnRole, IngestConfig
from src.models.remediation import Actor, Persona
from src.services.ingest import load_dataset

FIXTURES = Path(__file__).parent / 'fixtures'

READINESS_ROLES = {
    'id': ColumnRole.IDENTIFIER,
    'income': ColumnRole.TARGET,
    'sex': ColumnRole.PROTECTED,
}


def write_csv(path: Path, text: str) -> Path:
    path.write_text(text, encoding='utf-8')
    return path


def readiness_rows(rows: int = 500, seed: int = 7, extra_columns: int = 0) -> str:
    """Deterministic adult-style table with every quality issue the assessment looks for.

    ``extra_columns`` appends alternating numeric and categorical feature columns
    drawn from a second generator, leaving the first seven columns unchanged.
    """
    rng = np.random.default_rng(seed)
    extra_rng = np.random.default_rng(seed + 1)
    extra_names = [f'{"score" if j % 2 == 0 else "region"}_{j + 1}' for j in range(extra_columns)]
    lines = [','.join(['id,age,hours,capital,education,sex,income'] + extra_names)]
    educations = ['bachelors', 'hs-grad', 'masters', 'some-college']
    for i in range(rows):
        age = int(rng.integers(18, 70))
        hours = int(rng.integers(20, 60))
        capital = round(float(rng.normal(1000, 150)), 2)
        education = educations[int(rng.integers(0, len(educations)))]
        sex = 'male' if rng.random() < 0.6 else 'female'
        favourable = rng.random() < (0.45 if sex == 'male' else 0.2)
        income = '>50K' if favourable else '<=50K'
        if i % 25 == 3:
            age = '?'
        if i % 40 == 5:
            hours = ''
        if i % 97 == 11:
            capital = 25000.0
        if i % 61 == 7:
            education = ' Masters '
        if i % 83 == 13:
            hours = 'forty'
        extras = [str(round(float(extra_rng.normal(50, 10)), 3)) if j % 2 == 0
                  else f'r{int(extra_rng.integers(0, 6))}' for j in range(extra_columns)]
        lines.append(','.join([f"{i + 1},{age},{hours},{capital},{education},{sex},{income}"] + extras))
    # exact duplicates of earlier rows with a reused id
    lines.extend(lines[1:6])
    return '\n'.join(lines) + '\n'


@pytest.fixture
def csv_file(tmp_path):
    def _write(text: str, name: str = 'data.csv') -> Path:
        return write_csv(tmp_path / name, text)
    return _write


@pytest.fixture
def load(csv_file):
    def _load(text: str, **config):
        return load_dataset(csv_file(text), IngestConfig(**config))
    return _load


@pytest.fixture
def readiness_csv(tmp_path) -> Path:
    return write_csv(tmp_path / 'adult.csv', readiness_rows())


@pytest.fixture
def readiness_config() -> IngestConfig:
    return IngestConfig(roles=dict(READINESS_ROLES))


@pytest.fixture
def readiness_dataset(readiness_csv, readiness_config):
    return load_dataset(readiness_csv, readiness_config)


@pytest.fixture
def actor() -> Actor:
    return Actor(name='dana', persona=Persona.DATA_SCIENTIST)


@pytest.fixture
def plan_file() -> Path:
    return FIXTURES / 'plan.yaml'


@pytest.fixture
def sidecar_file() -> Path:
    return FIXTURES / 'sidecar.yaml'


@pytest.fixture
def config_file() -> Path:
    return FIXTURES / 'config.yaml'


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv('SOURCE_DATE_EPOCH', '1700000000')
    for name in ('READINESS_ACTOR', 'READINESS_PERSONA', 'READINESS_LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
