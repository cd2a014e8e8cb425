"""Pipeline stages shared by the commands, each recorded in the lineage ledger."""

import dataclasses
import getpass
import logging
from typing import Optional

from src.errors import MissingActorError
from src.models.dataset import Dataset
from src.models.lineage import Operation
from src.models.profile import DataProfile
from src.models.quality import QualityAssessment
from src.models.remediation import Actor, Persona, RemediationPlan
from src.models.run_config import RunConfig
from src.services.ingest import load_dataset
from src.services.ledger import LineageLedger
from src.services.profiler import profile_dataset
from src.services.quality import assess
from src.services.remediation import apply_plan, load_plan
from src.services.settings import Settings, load_settings

logger = logging.getLogger(__name__)


def local_actor() -> Actor:
    """Declared identity for read-only entries recorded without --actor"""
    try:
        name = getpass.getuser()
    except (KeyError, OSError):
        name = ''
    return Actor(name=name.strip() or 'unknown', persona=Persona.OTHER)


class Pipeline:
    """Runs ingest, profile, assess and remediate for one command invocation"""

    def __init__(self, run: RunConfig, settings: Optional[Settings] = None):
        self.run = run
        settings = settings or load_settings(run.config)
        if run.seed is not None:
            settings = dataclasses.replace(settings, assess=dataclasses.replace(settings.assess, seed=run.seed))
        self.settings = settings
        self.ledger = LineageLedger(run.ledger) if run.use_ledger else None
        self._recorder: Optional[Actor] = None

    @property
    def actor(self) -> Optional[Actor]:
        return self.run.actor

    @property
    def recorder(self) -> Actor:
        """Actor for read-only entries: the declared one, else the local user"""
        if self.run.actor is not None:
            return self.run.actor
        if self._recorder is None:
            self._recorder = local_actor()
            logger.warning(f"No actor declared; recording read-only entries as {self._recorder}")
        return self._recorder

    def _record(self, operation: Operation, dataset: Dataset, detail: dict):
        if self.ledger is not None:
            self.ledger.append(self.recorder, operation, dataset.digest, dataset.digest, detail)

    def ingest(self) -> Dataset:
        """Load the run's dataset and record an ingest entry"""
        dataset = load_dataset(self.run.data, self.settings.ingest)
        self._record(Operation.INGEST, dataset, {
            'source': self.run.data.name,
            'rows': dataset.row_count,
            'columns': dataset.column_count,
            'config': self.settings.ingest.to_dict(),
            'warnings': list(dataset.ingest_warnings),
        })
        return dataset

    def profile(self, dataset: Dataset, stage: str = 'baseline', record: bool = True) -> DataProfile:
        profile = profile_dataset(dataset, self.settings.profile)
        if record:
            self._record(Operation.PROFILE, dataset, {
                'stage': stage,
                'rows': profile.row_count,
                'columns': profile.column_count,
                'missing_cells': profile.missing_cells,
                'config': self.settings.profile.to_dict(),
            })
        return profile

    def assess(self, dataset: Dataset, profile: DataProfile, stage: str = 'baseline',
               record: bool = True) -> QualityAssessment:
        assessment = assess(dataset, profile, self.settings.assess)
        if record:
            recommended = []
            for finding in assessment.findings:
                for step in finding.recommendations:
                    if step.kind.value not in recommended:
                        recommended.append(step.kind.value)
            self._record(Operation.ASSESS, dataset, {
                'stage': stage,
                'overall_score': assessment.overall_score,
                'scores': assessment.scores(),
                'flagged': [finding.dimension.value for finding in assessment.findings if finding.flagged],
                'recommendations': recommended,
                'config': self.settings.assess.to_dict(),
            })
        return assessment

    def load_plan(self) -> RemediationPlan:
        """Load the plan and check every step can be attributed before anything is recorded"""
        plan = load_plan(self.run.plan)
        if self.run.seed is not None:
            plan = plan.with_seed(self.run.seed)
        if self.ledger is not None and self.actor is None and plan.actor is None:
            for index, step in enumerate(plan.steps):
                if step.actor is None:
                    raise MissingActorError(
                        "remediation steps need an actor (plan actor, --actor or READINESS_ACTOR)").at_step(index)
        return plan

    def remediate(self, dataset: Dataset, plan: RemediationPlan) -> Dataset:
        """Apply the plan step by step, one ledger entry per step"""
        return apply_plan(dataset, plan, ledger=self.ledger, actor=self.actor)
