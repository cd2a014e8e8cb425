"""Load the YAML run configuration: ingest, assess and profile settings."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from src.errors import ConfigSyntaxError, DatasetFileNotFoundError, DatasetIOError, InvalidParameterValueError
from src.models.dataset import IngestConfig
from src.models.profile import ProfileConfig
from src.models.quality import AssessConfig

logger = logging.getLogger(__name__)

SETTINGS_BLOCKS = ('ingest', 'assess', 'profile')


@dataclass(frozen=True)
class Settings:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    assess: AssessConfig = field(default_factory=AssessConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)

    def to_dict(self):
        return {
            'ingest': self.ingest.to_dict(),
            'assess': self.assess.to_dict(),
            'profile': self.profile.to_dict(),
        }


def _block(document: dict, name: str) -> dict:
    block = document.get(name)
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise InvalidParameterValueError(f"config block '{name}' must be a mapping")
    return block


def parse_settings(document: Any) -> Settings:
    if document is None:
        return Settings()
    if not isinstance(document, dict):
        raise ConfigSyntaxError("config document must be a mapping")
    unknown = sorted(set(document) - set(SETTINGS_BLOCKS))
    if unknown:
        raise InvalidParameterValueError(f"unknown config block(s) {unknown}; expected {list(SETTINGS_BLOCKS)}")
    return Settings(
        ingest=IngestConfig.from_dict(_block(document, 'ingest')),
        assess=AssessConfig.from_dict(_block(document, 'assess')),
        profile=ProfileConfig.from_dict(_block(document, 'profile')),
    )


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Settings from a YAML file, defaults when no path is given"""
    if path is None:
        return Settings()
    path = Path(path)
    if not path.is_file():
        raise DatasetFileNotFoundError(f"config file not found: {path}")
    try:
        document = yaml.safe_load(path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ''
        raise ConfigSyntaxError(f"{path.name}{where}: {getattr(e, 'problem', None) or e}")
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetIOError(f"cannot read config {path}: {e}")
    settings = parse_settings(document)
    logger.debug(f"Loaded settings from {path}")
    return settings
