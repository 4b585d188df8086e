import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from ondr.errors import KindMismatch, NotMaster, UnknownEpc
from ondr.harness import connector_epc, fiber_epc
from ondr.inventory import ProtocolConfig
from ondr.link import LinkParams
from ondr.model import ConnectionDb, Epc, Registry, SpiMode, TagKind, TagRecord
from ondr.pairing import (
    Verdict, report_to_csv, spi_exchange, verify_all, verify_all_baseline, verify_pair,
)

from conftest import make_panel

F1, C1, C2 = Epc(0xF1), Epc(0xC1), Epc(0xC2)
NO_MISS = LinkParams(p_base=0.0)
UNLIMITED = ProtocolConfig(time_budget=math.inf)


@pytest.fixture
def reg():
    return Registry([
        TagRecord(F1, TagKind.FIBER, SpiMode.MASTER),
        TagRecord(C1, TagKind.CONNECTOR, SpiMode.SLAVE),
        TagRecord(C2, TagKind.CONNECTOR, SpiMode.SLAVE),
    ])


def test_spi_exchange(reg):
    assert spi_exchange(reg.get(F1), reg) is None
    reg.attach(F1, C1)
    assert spi_exchange(reg.get(F1), reg) == C1
    reg.update(replace(reg.get(C1), spi_mode=SpiMode.IDLE))
    assert spi_exchange(reg.get(F1), reg) is None


def test_spi_exchange_requires_master(reg):
    with pytest.raises(NotMaster):
        spi_exchange(reg.get(C1), reg)
    reg.update(replace(reg.get(F1), spi_mode=SpiMode.IDLE))
    with pytest.raises(NotMaster):
        spi_exchange(reg.get(F1), reg)


def test_verify_pair(reg):
    db = ConnectionDb(reg)
    assert verify_pair(db, F1, C1).verdict is Verdict.NOT_IN_DATABASE
    db.record_connection(F1, C1)
    assert verify_pair(db, F1, C1).verdict is Verdict.MATCH
    out = verify_pair(db, F1, C2)
    assert (out.verdict, out.expected_connector, out.observed_connector) == (Verdict.MISMATCH, C1, C2)
    assert verify_pair(db, F1, None).verdict is Verdict.SLAVE_ABSENT
    with pytest.raises(UnknownEpc):
        verify_pair(db, Epc(0x99), C1)
    with pytest.raises(KindMismatch):
        verify_pair(db, C1, None)


def test_thirty_pairs_all_match(panel30):
    rep = verify_all(panel30.db, panel30.population, LinkParams(), ProtocolConfig(rng_seed=4))
    assert rep.count(Verdict.MATCH) == 30
    assert rep.reader_identifications == 30
    assert rep.elapsed == rep.log.elapsed


def test_thirty_pairs_timing(panel30):
    fast = sum(verify_all(panel30.db, panel30.population, LinkParams(), ProtocolConfig(rng_seed=s)).elapsed < 0.6
               for s in range(100))
    assert fast >= 80


def test_baseline_reads_both_sides(panel30):
    spi = verify_all(panel30.db, panel30.population, NO_MISS, UNLIMITED)
    base = verify_all_baseline(panel30.db, panel30.population, NO_MISS, UNLIMITED)
    assert (spi.reader_identifications, base.reader_identifications) == (30, 60)
    assert base.count(Verdict.MATCH) == 30


def test_baseline_empty():
    p = make_panel(0)
    assert verify_all_baseline(p.db, p.population, LinkParams(), ProtocolConfig()).reader_identifications == 0


def test_baseline_time_ratio(panel30):
    ratios = []
    for s in range(100):
        cfg = ProtocolConfig(rng_seed=s, time_budget=math.inf)
        a = verify_all(panel30.db, panel30.population, NO_MISS, cfg).elapsed
        b = verify_all_baseline(panel30.db, panel30.population, NO_MISS, cfg).elapsed
        ratios.append(b / a)
    assert 1.5 <= sum(ratios) / len(ratios) <= 2.5


def test_exchange_cost_added(panel30):
    cfg = ProtocolConfig(rng_seed=2)
    a = verify_all(panel30.db, panel30.population, LinkParams(), cfg)
    b = verify_all(panel30.db, panel30.population, LinkParams(), cfg, exchange_cost=0.001)
    assert b.elapsed == pytest.approx(a.elapsed + 0.001 * a.reader_identifications)


def _spare(panel):
    spare = Epc(0xC0FFEE)
    panel.registry.register(TagRecord(spare, TagKind.CONNECTOR, SpiMode.SLAVE))
    return spare


def test_single_miswire_detected():
    p = make_panel(30)
    spare = _spare(p)
    p.registry.attach(fiber_epc(0), spare)
    rep = verify_all(p.db, p.population, NO_MISS, UNLIMITED)
    bad = rep.problems()
    assert len(bad) == 1 and rep.count(Verdict.MATCH) == 29
    assert (bad[0].fiber, bad[0].verdict, bad[0].expected_connector, bad[0].observed_connector) == (
        fiber_epc(0), Verdict.MISMATCH, connector_epc(0), spare)


def test_swapped_pair_flags_both_fibers():
    p = make_panel(30)
    p.registry.attach(fiber_epc(0), connector_epc(1))
    p.registry.attach(fiber_epc(1), connector_epc(0))
    rep = verify_all(p.db, p.population, NO_MISS, UNLIMITED)
    assert {o.fiber for o in rep.problems()} == {fiber_epc(0), fiber_epc(1)}


def test_csv_report(panel30):
    rep = verify_all(panel30.db, panel30.population, NO_MISS, UNLIMITED)
    lines = report_to_csv(rep).splitlines()
    assert lines[0] == "fiber,expected,observed,verdict"
    assert len(lines) == 32
    assert lines[-1].startswith("# reader_identifications=30")


faults = st.lists(st.tuples(st.integers(0, 9), st.sampled_from(["miswire", "detach", "idle", "forget"])),
                  max_size=6)


@settings(max_examples=60, deadline=None)
@given(faults, st.integers(0, 1000))
def test_verdict_soundness(injected, seed):
    p = make_panel(10)
    spare = _spare(p)
    forgotten = set()
    for i, fault in injected:
        f = fiber_epc(i)
        if fault == "miswire":
            p.registry.attach(f, spare)
        elif fault == "detach":
            p.registry.detach(f)
        elif fault == "idle":
            c = connector_epc(i)
            p.registry.update(replace(p.registry.get(c), spi_mode=SpiMode.IDLE))
        else:
            forgotten.add(f)
    db = ConnectionDb(p.registry)
    for r in p.db.records():
        if r.fiber not in forgotten:
            db.record_connection(r.fiber, r.connector)
    rep = verify_all(db, p.population, NO_MISS, ProtocolConfig(rng_seed=seed, time_budget=math.inf))
    assert len(rep.outcomes) == 10
    for o in rep.outcomes:
        tag = p.registry.get(o.fiber)
        target = db.lookup_target(o.fiber)
        expect_match = (target is not None and tag.attached_to == target
                        and p.registry.get(target).spi_mode is SpiMode.SLAVE)
        assert (o.verdict is Verdict.MATCH) == expect_match
    # report consistency: one identification per fiber singulation in the log
    assert rep.reader_identifications == rep.log.successes


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32))
def test_halving_exact(n, seed):
    p = make_panel(n)
    cfg = ProtocolConfig(rng_seed=seed, time_budget=math.inf)
    assert verify_all(p.db, p.population, NO_MISS, cfg).reader_identifications == n
    assert verify_all_baseline(p.db, p.population, NO_MISS, cfg).reader_identifications == 2 * n
