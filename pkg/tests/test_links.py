import json

import pytest

from toric_sarkisov.classify import wps
from toric_sarkisov.fan import is_fano
from toric_sarkisov.links import (
    BAD_ANTIFLIP,
    BAD_ENDPOINT,
    COMPLETE,
    LinkRecord,
    WebRunConfig,
    collect_web,
    enumerate_links,
    midpoint_report,
    pair_inverses,
    replay_inverse,
    reverse_signature,
    run_link,
    run_web,
    signature,
)

P3 = wps((1, 1, 1, 1))
P1112 = wps((1, 1, 1, 2))


def test_classical_links_from_p3():
    recs = {r.extraction["notation"]: r for r in enumerate_links(P3, 3, dedup_symmetry=True) if r.is_complete}
    # blowing up a point with weights (1,1,2) contracts to P(1,1,1,2)
    assert recs["(1,1,2)"].end["target"]["label"] == "P(1,1,1,2)"
    assert [s["kind"] for s in recs["(1,1,2)"].steps] == ["blowdown"]
    # a line gives the P^2-bundle over P^1; a point gives the P^1-bundle over P^2
    assert recs["(1,1,0)"].end["label"] == "P^2/P^1"
    assert recs["(1,1,1)"].end["label"] == "P^1/P^2"


def test_links_from_p1112():
    got = sorted(r.summary() for r in enumerate_links(P1112, 3, dedup_symmetry=True) if r.is_complete)
    assert got == sorted(
        [
            "P(1,1,1,2)  (1,1,2)  Mfs  P^1/P(1,1,2)",
            "P(1,1,1,2)  (1,1,0)  blowdown (1,1,2)  P^3",
            "P(1,1,1,2)  (1,1,1)  flip (2,1,-1,-1)  Mfs  P^2/P^1",
            "P(1,1,1,2)  (1,1,2)  antiflip (2,1,-1,-3)  blowdown (1,1,1)  P(1,1,2,3)",
            "P(1,1,1,2)  1/2(1,1,1)  Mfs  P^1/P^2",
        ]
    )


def test_models_follow_the_steps():
    for rec in enumerate_links(P1112, 3):
        small = len(rec.small_steps)
        if rec.status == COMPLETE and rec.link_type == "I":
            assert len(rec.models) == small + 3
            assert rec.models[-1].label() == rec.end["target"]["label"]
        elif rec.status == COMPLETE:
            assert len(rec.models) == small + 2
        assert rec.models[0] is not None and rec.models[0].label() == "P(1,1,1,2)"


def test_json_round_trip():
    for rec in enumerate_links(P1112, 3):
        back = LinkRecord.from_json(rec.to_json())
        assert back == rec
        assert back.to_json() == rec.to_json()


def test_inverse_pairing_and_replay():
    recs = enumerate_links(P3, 5, dedup_symmetry=True) + enumerate_links(P1112, 5, dedup_symmetry=True)
    pair_inverses(recs)
    (a,) = [i for i, r in enumerate(recs) if r.start["label"] == "P^3" and r.extraction["notation"] == "(1,1,2)" and r.is_complete]
    j = recs[a].inverse_of
    assert j is not None and recs[j].start["label"] == "P(1,1,1,2)"
    assert recs[j].inverse_of == a
    for r in recs:
        if r.is_complete and r.link_type == "I":
            assert signature(replay_inverse(r)) == reverse_signature(r)


def test_replay_needs_type_one():
    rec = next(r for r in enumerate_links(P3, 2) if r.is_complete and r.link_type == "II")
    with pytest.raises(ValueError):
        replay_inverse(rec)
    with pytest.raises(ValueError):
        reverse_signature(rec)


def test_bad_links_carry_witnesses():
    statuses = {}
    for r in enumerate_links(wps((1, 1, 2, 3)), 5, dedup_symmetry=True):
        statuses.setdefault(r.status, []).append(r)
    assert COMPLETE in statuses
    for r in statuses.get(BAD_ANTIFLIP, []) + statuses.get(BAD_ENDPOINT, []):
        assert r.end is None and r.bad["witness"]


def test_midpoint_report():
    rec = run_link(P1112, (0, 0, -1))
    ys = rec.models[1:-1] if rec.link_type == "I" else rec.models[1:]
    assert rec.midpoints["fano"] == [is_fano(Y) for Y in ys]
    rep = midpoint_report(rec)
    assert rep["fano_models"] == [i + 1 for i, Y in enumerate(ys) if is_fano(Y)]


def test_web_is_ordered_and_identical_across_jobs():
    data = [("a", P3.rays), ("b", P1112.rays), ("c", wps((1, 1, 2, 3)).rays)]
    one = list(run_web(data, WebRunConfig(dmax=2, jobs=1)))
    two = list(run_web(data, WebRunConfig(dmax=2, jobs=2)))
    assert one == two
    assert [x[1] for x in one] == ["a", "b", "c"]
    part = list(run_web(data, WebRunConfig(dmax=2, offset=1, limit=1)))
    assert part == one[1:2]


def test_web_records_failures():
    data = [("ok", P3.rays), ("broken", ((1, 0), (0, 1), (1, 1)))]
    recs, diags = collect_web(data, WebRunConfig(dmax=2))
    assert recs and all(r.start_name == "ok" for r in recs)
    (d,) = diags
    assert json.loads(d)["name"] == "broken"
