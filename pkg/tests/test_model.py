import pytest
from hypothesis import given, strategies as st
from hypothesis.stateful import RuleBasedStateMachine, invariant, rule, initialize

from ondr.errors import (
    AlreadyConnected, DuplicateEpc, InvalidModeForKind, KindMismatch, MalformedEpc, UnknownEpc, ZeroArea,
)
from ondr.model import (
    ConnectionDb, Epc, Led, PanelLayout, Registry, SpiMode, TagKind, TagRecord, panel_density, parse_epc,
)

F1, F2, C1, C2 = Epc(0xF1), Epc(0xF2), Epc(0xC1), Epc(0xC2)


def fiber(epc, mode=SpiMode.MASTER, **kw):
    return TagRecord(epc, TagKind.FIBER, mode, **kw)


def connector(epc, mode=SpiMode.SLAVE, **kw):
    return TagRecord(epc, TagKind.CONNECTOR, mode, **kw)


def test_parse_epc_zero_and_max():
    assert parse_epc("0" * 24) == Epc(0)
    assert parse_epc("f" * 24) == Epc(2**96 - 1)


def test_parse_epc_mixed_case():
    e = parse_epc("00A1b2C3d4E5f60708090a0b")
    assert e.value == int("00a1b2c3d4e5f60708090a0b", 16)
    assert str(e) == "00a1b2c3d4e5f60708090a0b"


@pytest.mark.parametrize("text", ["", "0" * 23, "0" * 25, "g" * 24, " " + "0" * 23, "0x" + "0" * 22, None])
def test_parse_epc_rejects(text):
    with pytest.raises(MalformedEpc):
        parse_epc(text)


def test_epc_range_checked():
    with pytest.raises(MalformedEpc):
        Epc(2**96)
    with pytest.raises(MalformedEpc):
        Epc(-1)


@given(st.integers(0, 2**96 - 1))
def test_epc_text_round_trip(v):
    e = Epc(v)
    assert parse_epc(str(e)) == e
    assert parse_epc(str(e).upper()) == e
    assert len(str(e)) == 24


def test_register_and_lookup():
    reg = Registry()
    reg.register(fiber(F1))
    assert len(reg) == 1
    assert reg.get(F1) == fiber(F1)
    with pytest.raises(DuplicateEpc):
        reg.register(fiber(F1))


@pytest.mark.parametrize("tag", [
    connector(C1, SpiMode.MASTER),
    fiber(F1, SpiMode.SLAVE),
    fiber(F1, led=Led.ON),
])
def test_register_rejects_role_violations(tag):
    with pytest.raises(InvalidModeForKind):
        Registry().register(tag)


def test_idle_allowed_for_both_kinds():
    reg = Registry([fiber(F1, SpiMode.IDLE), connector(C1, SpiMode.IDLE)])
    assert len(reg) == 2


@pytest.fixture
def db():
    reg = Registry([fiber(F1), fiber(F2), connector(C1), connector(C2)])
    return ConnectionDb(reg)


def test_record_connection(db):
    rec = db.record_connection(F1, C1)
    assert (rec.fiber, rec.connector) == (F1, C1)
    assert db.lookup_target(F1) == C1
    assert db.lookup_fiber(C1) == F1


def test_record_connection_errors(db):
    db.record_connection(F1, C1)
    with pytest.raises(AlreadyConnected):
        db.record_connection(F1, C2)
    with pytest.raises(AlreadyConnected):
        db.record_connection(F2, C1)
    with pytest.raises(KindMismatch):
        db.record_connection(F1, F2)
    with pytest.raises(KindMismatch):
        db.record_connection(C2, F2)
    with pytest.raises(UnknownEpc):
        db.record_connection(Epc(0xDEAD), C2)


def test_attach_requires_opposite_kinds(db):
    db.registry.attach(F1, C1)
    assert db.registry.get(F1).attached_to == C1
    assert db.registry.get(C1).attached_to == F1
    with pytest.raises(KindMismatch):
        db.registry.attach(F1, F2)
    # re-plugging F1 elsewhere frees C1
    db.registry.attach(F1, C2)
    assert db.registry.get(C1).attached_to is None


def test_panel_density():
    # 60 / 5.1 = 11.7647 sq in; a 4.2 x 2.8 panel is 11.76 sq in
    layout = PanelLayout.grid(4.2, 2.8, 10, 6)
    assert len(layout.slots) == 60
    assert panel_density(layout) == pytest.approx(60 / 11.76)
    assert panel_density(layout) == pytest.approx(5.102, abs=5e-4)
    assert panel_density(PanelLayout(3.0, 2.0)) == 0.0
    assert panel_density(PanelLayout.grid(10, 1, 30, 1)) == 3.0


def test_panel_density_zero_area():
    with pytest.raises(ZeroArea):
        panel_density(PanelLayout(0.0, 5.0))


def test_grid_slots_inside_panel():
    layout = PanelLayout.grid(4.2, 2.8, 10, 6)
    assert all(0 <= x <= 4.2 and 0 <= y <= 2.8 for x, y in layout.slots)
    assert len(set(layout.slots)) == 60


class RegistryMachine(RuleBasedStateMachine):
    """Random register/attach/connect sequences keep uniqueness, bijectivity and integrity."""

    @initialize()
    def setup(self):
        self.reg = Registry()
        self.db = ConnectionDb(self.reg)

    @rule(v=st.integers(0, 40), kind=st.sampled_from(TagKind), idle=st.booleans())
    def register(self, v, kind, idle):
        mode = SpiMode.IDLE if idle else (SpiMode.MASTER if kind is TagKind.FIBER else SpiMode.SLAVE)
        try:
            self.reg.register(TagRecord(Epc(v), kind, mode))
        except DuplicateEpc:
            assert Epc(v) in self.reg

    @rule(a=st.integers(0, 40), b=st.integers(0, 40))
    def attach(self, a, b):
        try:
            self.reg.attach(Epc(a), Epc(b))
        except (UnknownEpc, KindMismatch):
            pass

    @rule(a=st.integers(0, 40), b=st.integers(0, 40))
    def connect(self, a, b):
        try:
            self.db.record_connection(Epc(a), Epc(b))
        except (UnknownEpc, KindMismatch, AlreadyConnected):
            pass

    @invariant()
    def unique(self):
        epcs = [t.epc for t in self.reg]
        assert len(epcs) == len(set(epcs))

    @invariant()
    def bijective(self):
        recs = self.db.records()
        assert len({r.fiber for r in recs}) == len(recs) == len({r.connector for r in recs})

    @invariant()
    def referential_integrity(self):
        self.reg.validate()
        for r in self.db.records():
            assert self.reg.get(r.fiber).kind is TagKind.FIBER
            assert self.reg.get(r.connector).kind is TagKind.CONNECTOR
        for t in self.reg:
            if t.attached_to is not None:
                assert self.reg.get(t.attached_to).attached_to == t.epc


TestRegistryMachine = RegistryMachine.TestCase
