from __future__ import annotations

import random

import pytest

from socsim.errors import ForbiddenError, InvalidError, NotFoundError, PreconditionError
from socsim.export import replay_events
from socsim.model import event_record

from tests.conftest import join_student, join_teacher, make_exercise


def test_generator_tick_emits_and_counts():
    ex = make_exercise()
    teacher = join_teacher(ex)
    ex.set_pacing(teacher, running=True, rate_per_minute=60, now=0.0, at=1)
    items = ex.generator_tick(now=3.0, at=2)
    kinds = [i.kind for i in items]
    assert kinds == ["event.new", "counters", "event.new", "counters", "event.new", "counters"]
    assert ex.store.counters.total_events == 3
    assert ex.store.counters == ex.store.recount()


def test_pause_stops_emission():
    ex = make_exercise()
    teacher = join_teacher(ex)
    ex.set_pacing(teacher, running=True, rate_per_minute=600, now=0.0, at=1)
    assert ex.generator_tick(now=1.0, at=2)
    ex.set_pacing(teacher, running=False, now=1.0, at=3)
    assert ex.generator_tick(now=100.0, at=4) == []


def test_teacher_ops_reject_students_exhaustively():
    ex = make_exercise()
    teacher = join_teacher(ex)
    student = join_student(ex, region="Europe")
    ex.set_pacing(teacher, running=True, now=0.0, at=1)
    ex.generator_tick(now=10.0, at=2)
    event_id = ex.store.live_events()[0].id

    teacher_ops = [
        lambda actor: ex.set_pacing(actor, running=False, now=20.0, at=10),
        lambda actor: ex.inject_event(actor, {}, at=10),
        lambda actor: ex.set_colour(actor, event_id, "red", at=10),
        lambda actor: ex.delete_event(actor, event_id, at=10),
        lambda actor: ex.confirm_escalation(actor, event_id, at=10),
        lambda actor: ex.assign_region(actor, student.client_id, "Europe", at=10),
        lambda actor: ex.fire_endgame(actor, at=10),
    ]
    for op in teacher_ops:
        with pytest.raises(ForbiddenError):
            op(student)
    # The same ops as teacher fail only for domain reasons, never authorization.
    for op in teacher_ops:
        try:
            op(teacher)
        except ForbiddenError:
            pytest.fail("teacher was refused a teacher op")
        except (PreconditionError, NotFoundError):
            pass


def test_inject_validates_names():
    ex = make_exercise()
    teacher = join_teacher(ex)
    with pytest.raises(InvalidError):
        ex.inject_event(teacher, {"region": "Atlantis"}, at=1)
    with pytest.raises(InvalidError):
        ex.inject_event(teacher, {"deviceType": "toaster"}, at=1)
    with pytest.raises(InvalidError):
        ex.inject_event(teacher, {"severity": "apocalyptic"}, at=1)
    with pytest.raises(InvalidError):
        ex.inject_event(teacher, {"status": "maybe"}, at=1)
    items = ex.inject_event(teacher, {"region": "Europe"}, at=1)
    assert items[0].kind == "event.new"
    assert items[0].event.injected is True


def test_endgame_freezes_and_is_single_shot():
    ex = make_exercise()
    teacher = join_teacher(ex)
    ex.set_pacing(teacher, running=True, rate_per_minute=600, now=0.0, at=1)
    ex.generator_tick(now=1.0, at=2)
    items = ex.fire_endgame(teacher, at=3)
    assert [i.kind for i in items] == ["endgame.report", "generator.state"]
    assert ex.endgame_fired
    assert not ex.generator.running
    assert ex.generator_tick(now=100.0, at=4) == []
    with pytest.raises(PreconditionError):
        ex.inject_event(teacher, {}, at=5)
    with pytest.raises(PreconditionError):
        ex.set_pacing(teacher, running=True, now=100.0, at=5)
    with pytest.raises(PreconditionError):
        ex.fire_endgame(teacher, at=6)


def test_chat_message_ids_share_audit_seq_space():
    ex = make_exercise()
    student = join_student(ex, region="Europe")
    items = ex.post_message(student, "Europe", "hi", at=5)
    message = items[0].message
    assert message.id == ex.audit.entries[-1].seq
    ids = [message.id]
    items = ex.post_message(student, "instructor", "question", at=6)
    ids.append(items[0].message.id)
    assert ids == sorted(ids)


def test_reassignment_is_audited_and_changes_routing():
    ex = make_exercise()
    teacher = join_teacher(ex)
    student = join_student(ex, region="Europe")
    items = ex.assign_region(teacher, student.client_id, "Asia-Pacific", at=9)
    kinds = [i.kind for i in items]
    assert "snapshot" in kinds and "presence" in kinds
    entry = ex.audit.entries[-1]
    assert entry.action == "assign"
    assert entry.actor == teacher.client_id
    # Region chat now routes to the new team.
    ex.post_message(student, "Asia-Pacific", "hello new team", at=10)
    with pytest.raises(ForbiddenError):
        ex.post_message(student, "Europe", "old team", at=11)


def random_mutation_run(seed: int, rounds: int):
    """Drive the exercise through a random mutation sequence; returns it."""
    rng = random.Random(seed)
    ex = make_exercise(seed=seed)
    teacher = join_teacher(ex)
    students = {
        region: join_student(ex, region=region, name=f"s-{region}")
        for region in ex.config.regions
    }
    ex.set_pacing(teacher, running=True, rate_per_minute=600, now=0.0, at=1)
    clock = 1.0
    for step in range(rounds):
        clock += 0.2
        at = int(clock * 1000)
        op = rng.randrange(7)
        live = ex.store.live_events()
        try:
            if op == 0:
                ex.generator_tick(now=clock, at=at)
            elif op == 1:
                ex.inject_event(teacher, {}, at=at)
            elif op == 2 and live:
                event = rng.choice(live)
                ex.triage_event(students[event.region], event.id,
                                rng.choice(("escalated", "monitoring", "dismissed")), at=at)
            elif op == 3 and live:
                event = rng.choice(live)
                ex.annotate_event(students[event.region], event.id,
                                  rng.choice(("", "suspicious", "looks benign")), at=at)
            elif op == 4 and live:
                ex.set_colour(teacher, rng.choice(live).id,
                              rng.choice(("red", "amber", "green", "blue", "none")), at=at)
            elif op == 5 and live:
                ex.delete_event(teacher, rng.choice(live).id, at=at)
            elif op == 6 and live:
                event = rng.choice(live)
                if event.triage_state == "escalated" and event.verdict == "pending":
                    ex.confirm_escalation(teacher, event.id, at=at)
        except PreconditionError:
            pass
    return ex


def test_counters_match_recount_after_random_mutations():
    ex = random_mutation_run(seed=11, rounds=300)
    assert ex.store.counters == ex.store.recount()


def test_audit_replay_reproduces_the_store():
    ex = random_mutation_run(seed=12, rounds=300)
    replayed = replay_events(ex.audit.to_records(), ex.config.regions, ex.config.devices)
    original = [event_record(e) for e in ex.store.all_events()]
    assert [event_record(e) for e in replayed.all_events()] == original
    assert replayed.counters == ex.store.counters


def test_audit_log_length_counts_committed_mutations():
    ex = make_exercise()
    teacher = join_teacher(ex)
    student = join_student(ex, region="Europe")
    before = len(ex.audit)
    ex.heartbeat(student.client_id, at=2)  # presence metadata, not a mutation
    assert len(ex.audit) == before
    with pytest.raises(InvalidError):
        ex.inject_event(teacher, {"region": "Atlantis"}, at=3)
    assert len(ex.audit) == before  # failed commands leave no audit trace
    ex.inject_event(teacher, {}, at=4)
    assert len(ex.audit) == before + 1
