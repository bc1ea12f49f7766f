from __future__ import annotations

import random

import pytest

from socsim import triage
from socsim.errors import ForbiddenError, InvalidError, NotFoundError, PreconditionError
from socsim.eventgen import draw_event
from socsim.model import DEFAULT_DEVICES, DEFAULT_REGIONS, EventStore, default_template_catalog
from socsim.session import SessionRegistry

from tests.test_model import make_event

TOKEN = "secret"
CATALOG = default_template_catalog()


def setup():
    store = EventStore(DEFAULT_REGIONS, DEFAULT_DEVICES)
    reg = SessionRegistry(DEFAULT_REGIONS, TOKEN)
    teacher = reg.join("Teach", "teacher", now=0, teacher_token=TOKEN)
    eu = reg.join("eu", "student", now=0, region="Europe")
    ap = reg.join("ap", "student", now=0, region="Asia-Pacific")
    return store, teacher, eu, ap


# -- triage_event ------------------------------------------------------------

def test_student_escalates_own_region_event():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    event = triage.triage_event(store, eu, 1, "escalated", at=500)
    assert event.triage_state == "escalated"
    assert event.triaged_by == eu.client_id
    assert event.triaged_at == 500


def test_latest_triage_decision_wins():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    triage.triage_event(store, eu, 1, "escalated", at=1)
    event = triage.triage_event(store, eu, 1, "dismissed", at=2)
    assert event.triage_state == "dismissed"


def test_cross_region_triage_is_forbidden():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Asia-Pacific"))
    with pytest.raises(ForbiddenError):
        triage.triage_event(store, eu, 1, "escalated", at=1)


def test_teacher_triages_anywhere():
    store, teacher, _, _ = setup()
    store.add(make_event(eid=1, region="Asia-Pacific"))
    assert triage.triage_event(store, teacher, 1, "monitoring", at=1).triage_state == "monitoring"


def test_triage_unknown_or_deleted_event():
    store, teacher, eu, _ = setup()
    with pytest.raises(NotFoundError):
        triage.triage_event(store, eu, 99, "escalated", at=1)
    store.add(make_event(eid=1, region="Europe"))
    triage.delete_event(store, teacher, 1)
    with pytest.raises(NotFoundError):
        triage.triage_event(store, eu, 1, "escalated", at=1)


def test_unknown_decision_rejected():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    with pytest.raises(InvalidError):
        triage.triage_event(store, eu, 1, "ignored", at=1)


# -- annotate ---------------------------------------------------------------

def test_annotate_and_clear():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    event = triage.annotate_event(store, eu, 1, "repeated failed logins - escalating")
    assert event.annotation == "repeated failed logins - escalating"
    event = triage.annotate_event(store, eu, 1, "")
    assert event.annotation is None


def test_annotation_size_limit():
    store, _, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    with pytest.raises(InvalidError):
        triage.annotate_event(store, eu, 1, "x" * 2001)
    triage.annotate_event(store, eu, 1, "x" * 2000)


# -- colour / delete -----------------------------------------------------------

def test_colour_is_teacher_only():
    store, teacher, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    with pytest.raises(ForbiddenError):
        triage.set_colour(store, eu, 1, "red")
    assert triage.set_colour(store, teacher, 1, "red").colour_tag == "red"
    with pytest.raises(InvalidError):
        triage.set_colour(store, teacher, 1, "purple")


def test_delete_decrements_counters_and_matches_recount():
    store, teacher, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    store.add(make_event(eid=2, region="Europe"))
    triage.delete_event(store, teacher, 1)
    assert store.counters.by_region["Europe"] == 1
    assert store.counters == store.recount()
    with pytest.raises(ForbiddenError):
        triage.delete_event(store, eu, 2)
    with pytest.raises(NotFoundError):
        triage.delete_event(store, teacher, 1)  # double delete


# -- confirm ------------------------------------------------------------------

def test_confirm_reveals_matching_verdict():
    store, teacher, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe", status="genuine"))
    store.add(make_event(eid=2, region="Europe", status="false_positive"))
    triage.triage_event(store, eu, 1, "escalated", at=1)
    triage.triage_event(store, eu, 2, "escalated", at=1)
    assert triage.confirm_escalation(store, teacher, 1).verdict == "confirmed_genuine"
    assert triage.confirm_escalation(store, teacher, 2).verdict == "confirmed_false_positive"


def test_confirm_requires_escalation_and_pending():
    store, teacher, eu, _ = setup()
    store.add(make_event(eid=1, region="Europe"))
    triage.triage_event(store, eu, 1, "monitoring", at=1)
    with pytest.raises(PreconditionError):
        triage.confirm_escalation(store, teacher, 1)
    triage.triage_event(store, eu, 1, "escalated", at=2)
    triage.confirm_escalation(store, teacher, 1)
    with pytest.raises(PreconditionError):
        triage.confirm_escalation(store, teacher, 1)
    with pytest.raises(ForbiddenError):
        triage.confirm_escalation(store, eu, 1)


def test_confirm_never_contradicts_status():
    for status in ("genuine", "false_positive"):
        store, teacher, eu, _ = setup()
        store.add(make_event(eid=1, region="Europe", status=status))
        triage.triage_event(store, eu, 1, "escalated", at=1)
        event = triage.confirm_escalation(store, teacher, 1)
        expected = "confirmed_genuine" if status == "genuine" else "confirmed_false_positive"
        assert event.verdict == expected


# -- endgame report --------------------------------------------------------------

def brute_force_report(events, regions, generated_at):
    """Independent bucketing oracle: no shared code with the implementation."""
    def cell_name(state, status):
        return state + ("Genuine" if status == "genuine" else "FalsePositive")

    def empty():
        return {cell_name(s, st): 0
                for s in ("escalated", "dismissed", "monitoring", "untriaged")
                for st in ("genuine", "false_positive")}

    per_region = {r: empty() for r in regions}
    overall = empty()
    for e in events:
        if e.deleted:
            continue
        name = cell_name(e.triage_state, e.status)
        per_region[e.region][name] += 1
        overall[name] += 1

    def ratios(cells):
        esc = cells["escalatedGenuine"] + cells["escalatedFalsePositive"]
        gen = sum(cells[cell_name(s, "genuine")] for s in
                  ("escalated", "dismissed", "monitoring", "untriaged"))
        cells["precision"] = cells["escalatedGenuine"] / esc if esc else None
        cells["recall"] = cells["escalatedGenuine"] / gen if gen else None
        return cells

    return {
        "perRegion": {r: ratios(c) for r, c in per_region.items()},
        "overall": ratios(overall),
        "generatedAt": generated_at,
    }


def test_endgame_report_empty_store():
    report = triage.compute_endgame_report([], DEFAULT_REGIONS, generated_at=9)
    assert report["overall"]["precision"] is None
    assert report["overall"]["recall"] is None
    for cells in report["perRegion"].values():
        assert all(cells[k] == 0 for k in cells if isinstance(cells[k], int))
    assert report["generatedAt"] == 9


def test_endgame_report_hand_example():
    # escalated: 3 genuine + 1 fp, dismissed: 1 genuine, untriaged: 2 fp
    events = []
    eid = 0
    for status, state, count in (
        ("genuine", "escalated", 3),
        ("false_positive", "escalated", 1),
        ("genuine", "dismissed", 1),
        ("false_positive", "untriaged", 2),
    ):
        for _ in range(count):
            eid += 1
            events.append(make_event(eid=eid, region="Europe", status=status,
                                     triage_state=state))
    report = triage.compute_endgame_report(events, DEFAULT_REGIONS, generated_at=0)
    cells = report["perRegion"]["Europe"]
    assert cells["precision"] == 0.75
    assert cells["recall"] == 0.75
    assert report == brute_force_report(events, DEFAULT_REGIONS, 0)


def test_endgame_report_matches_oracle_on_random_stores():
    rng = random.Random(4242)
    for round_ in range(50):
        events = []
        for i in range(rng.randrange(0, 120)):
            event = draw_event(
                seed=round_, fp_ratio=rng.random(), regions=DEFAULT_REGIONS,
                devices=DEFAULT_DEVICES, catalog=CATALOG, index=i,
                event_id=i + 1, created_at=0,
            )
            event.triage_state = rng.choice(("untriaged", "escalated", "monitoring", "dismissed"))
            event.deleted = rng.random() < 0.1
            events.append(event)
        expected = brute_force_report(events, DEFAULT_REGIONS, 7)
        assert triage.compute_endgame_report(events, DEFAULT_REGIONS, 7) == expected


def test_endgame_cell_sums_match_live_counts():
    rng = random.Random(5)
    events = []
    for i in range(200):
        event = draw_event(seed=9, fp_ratio=0.5, regions=DEFAULT_REGIONS,
                           devices=DEFAULT_DEVICES, catalog=CATALOG, index=i,
                           event_id=i + 1, created_at=0)
        event.triage_state = rng.choice(("untriaged", "escalated", "monitoring", "dismissed"))
        event.deleted = rng.random() < 0.15
        events.append(event)
    report = triage.compute_endgame_report(events, DEFAULT_REGIONS, 0)
    live = [e for e in events if not e.deleted]
    for region in DEFAULT_REGIONS:
        cells = report["perRegion"][region]
        cell_sum = sum(v for k, v in cells.items() if k not in ("precision", "recall"))
        assert cell_sum == sum(1 for e in live if e.region == region)
    overall_sum = sum(v for k, v in report["overall"].items()
                      if k not in ("precision", "recall"))
    assert overall_sum == len(live)
