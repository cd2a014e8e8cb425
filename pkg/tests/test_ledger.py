import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from src.errors import (
    BaselineMismatchError,
    ChainBrokenError,
    InvalidParameterValueError,
    ReplayDivergenceError,
)
from src.models.lineage import GENESIS_HASH, Operation
from src.models.remediation import RemediationPlan, RemediationStep, StepKind
from src.services.canonical import canonical_json
from src.services.ledger import LineageLedger, entry_hash, verify_bytes
from src.services.remediation import apply_plan, apply_step

PLAN = RemediationPlan('p1', [
    RemediationStep(StepKind.IMPUTE, {'column': 'x', 'strategy': 'median'}),
    RemediationStep(StepKind.DEDUPE, {}),
])


@pytest.fixture
def ledger(tmp_path):
    return LineageLedger(tmp_path / 'lineage.jsonl')


@pytest.fixture
def dataset(load):
    return load("x,y\n1,a\n?,b\n1,a\n5,c\n")


@pytest.fixture
def recorded(ledger, dataset, actor):
    """Ledger holding an ingest entry and a two-step remediation"""
    ledger.append(actor, Operation.INGEST, dataset.digest, dataset.digest, {'source': 'data.csv'})
    result = apply_plan(dataset, PLAN, ledger, actor)
    return ledger, result


def rewrite_line(ledger, index, change):
    lines = ledger.path.read_bytes().decode('utf-8').splitlines()
    document = json.loads(lines[index])
    change(document)
    lines[index] = canonical_json(document)
    ledger.path.write_bytes(('\n'.join(lines) + '\n').encode('utf-8'))


def test_first_entry_links_to_genesis(ledger, dataset, actor):
    entry = ledger.append(actor, Operation.INGEST, dataset.digest, dataset.digest)
    assert entry.entry_id == 1
    assert entry.prev_entry_hash == GENESIS_HASH
    assert entry.entry_hash == entry_hash(entry.to_dict())
    assert entry.timestamp == '2023-11-14T22:13:20Z'


def test_entries_are_chained(recorded):
    ledger, _ = recorded
    entries = ledger.entries()
    assert [e.entry_id for e in entries] == [1, 2, 3]
    for previous, entry in zip(entries, entries[1:]):
        assert entry.prev_entry_hash == previous.entry_hash


def test_lines_are_canonical_json(recorded):
    ledger, _ = recorded
    for line in ledger.path.read_text(encoding='utf-8').splitlines():
        assert canonical_json(json.loads(line)) == line


def test_missing_ledger_verifies_empty(ledger):
    result = ledger.verify()
    assert result.ok
    assert result.entry_count == 0


def test_intact_ledger_verifies(recorded):
    ledger, _ = recorded
    result = ledger.verify()
    assert result
    assert result.entry_count == 3


def test_edited_detail_breaks_the_chain(recorded):
    ledger, _ = recorded

    def edit(document):
        document['detail']['step']['params']['strategy'] = 'mean'

    rewrite_line(ledger, 1, edit)
    result = ledger.verify()
    assert not result.ok
    assert result.broken_entry_id == 2
    with pytest.raises(ChainBrokenError):
        ledger.entries()


def test_rehashed_entry_still_breaks_the_link(recorded):
    ledger, _ = recorded

    def edit(document):
        document['actor']['name'] = 'mallory'
        document['entry_hash'] = entry_hash(document)

    rewrite_line(ledger, 0, edit)
    assert ledger.verify().broken_entry_id == 2


def test_removed_entry_is_detected(recorded):
    ledger, _ = recorded
    lines = ledger.path.read_bytes().splitlines(keepends=True)
    ledger.path.write_bytes(lines[0] + lines[2])
    result = ledger.verify()
    assert result.broken_entry_id == 2


def test_append_refuses_a_broken_ledger(recorded, actor, dataset):
    ledger, _ = recorded
    rewrite_line(ledger, 2, lambda document: document.update(timestamp='2000-01-01T00:00:00Z'))
    with pytest.raises(ChainBrokenError):
        ledger.append(actor, Operation.PROFILE, dataset.digest, dataset.digest)


def test_unparseable_line_is_reported_as_the_broken_entry(recorded):
    ledger, _ = recorded
    lines = ledger.path.read_bytes().splitlines(keepends=True)
    ledger.path.write_bytes(lines[0] + b'{"entry_id": 2,\n' + lines[2])
    result = ledger.verify()
    assert not result.ok
    assert result.broken_entry_id == 2
    assert result.entry_count == 1
    assert result.reason.startswith('ledger line 2: invalid JSON')


def test_entries_of_an_unparseable_ledger(ledger):
    ledger.path.write_bytes(b'not json\n')
    with pytest.raises(ChainBrokenError) as raised:
        ledger.entries()
    assert raised.value.entry_id == 1
    assert raised.value.exit_status == 3


def test_read_only_entry_must_keep_the_digest(ledger, actor):
    ledger.append(actor, Operation.PROFILE, 'a' * 64, 'b' * 64)
    assert not ledger.verify().ok


def test_filter_by_actor_and_time(recorded, actor):
    ledger, _ = recorded
    assert len(ledger.filter(actor=actor.name)) == 3
    assert ledger.filter(actor='nobody') == []
    assert len(ledger.filter(since='2023-11-14T22:13:20Z')) == 3
    assert ledger.filter(since='2030-01-01T00:00:00Z') == []


def test_replay_reproduces_the_result(recorded, dataset):
    ledger, result = recorded
    assert ledger.replay(dataset).digest == result.digest


def test_replay_up_to_an_entry(recorded, dataset):
    ledger, _ = recorded
    first, _ = apply_step(dataset, PLAN.steps[0])
    assert ledger.replay(dataset, upto=2).digest == first.digest
    assert ledger.replay(dataset, upto=1).digest == dataset.digest


def test_replay_rejects_another_baseline(recorded, load):
    ledger, _ = recorded
    with pytest.raises(BaselineMismatchError):
        ledger.replay(load("x,y\n9,z\n"))


def test_replay_of_an_empty_ledger_is_the_baseline(ledger, dataset):
    assert ledger.replay(dataset) is dataset


def test_replay_upto_must_be_positive(recorded, dataset):
    ledger, _ = recorded
    with pytest.raises(InvalidParameterValueError):
        ledger.replay(dataset, upto=0)


def test_replay_detects_a_wrong_recorded_output(ledger, dataset, actor):
    step = RemediationStep(StepKind.IMPUTE, {'column': 'x', 'strategy': 'median'})
    _, summary = apply_step(dataset, step)
    ledger.append(actor, Operation.REMEDIATION_STEP, dataset.digest, 'f' * 64,
                  {'plan_id': 'p1', 'step': step.to_dict(), 'change': summary.to_dict()})
    with pytest.raises(ReplayDivergenceError):
        ledger.replay(dataset)


def test_second_run_from_the_baseline_replays(recorded, dataset, actor):
    ledger, result = recorded
    again = apply_plan(dataset, PLAN, ledger, actor)
    assert ledger.replay(dataset).digest == again.digest == result.digest


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.data())
def test_any_flipped_byte_is_detected(recorded, data):
    ledger, _ = recorded
    original = ledger.path.read_bytes()
    position = data.draw(st.integers(min_value=0, max_value=len(original) - 1))
    mask = data.draw(st.integers(min_value=1, max_value=255))
    tampered = bytearray(original)
    tampered[position] ^= mask
    result, _ = verify_bytes(bytes(tampered))
    assert not result.ok
    assert 1 <= result.broken_entry_id <= original.count(b'\n') + 1
