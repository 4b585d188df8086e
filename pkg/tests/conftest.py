from pathlib import Path

import pytest

from ondr.harness import build_panel
from ondr.model import Epc, Led, PanelLayout, SpiMode, TagKind, TagRecord
from ondr.navigation import AuditEvent
from ondr.store import Store

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "ondr" / "data"
SCENARIOS = ROOT / "scenarios"

_acceptance_lines = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        _acceptance_lines.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def make_panel(pairs, distance=30.0):
    cols = 10
    rows = max(1, -(-2 * pairs // cols))
    layout = PanelLayout.grid(4.2, 2.8 * rows / 6, cols, rows, count=2 * pairs)
    return build_panel(pairs, layout, distance)


@pytest.fixture
def panel30():
    return make_panel(30)


def random_store(rng, path):
    s = Store(path)
    n = rng.randint(0, 12)
    fibers, conns = [], []
    used = set()
    for i in range(n):
        for kind, bucket in ((TagKind.FIBER, fibers), (TagKind.CONNECTOR, conns)):
            v = rng.getrandbits(96)
            while v in used:
                v = rng.getrandbits(96)
            used.add(v)
            mode = SpiMode.IDLE if rng.random() < 0.2 else (SpiMode.MASTER if kind is TagKind.FIBER else SpiMode.SLAVE)
            led = Led.ON if kind is TagKind.CONNECTOR and rng.random() < 0.1 else Led.OFF
            s.registry.register(TagRecord(Epc(v), kind, mode, led, (rng.uniform(0, 5), rng.uniform(0, 3))))
            bucket.append(Epc(v))
    for f, c in zip(fibers, conns):
        if rng.random() < 0.7:
            s.registry.attach(f, c)
        if rng.random() < 0.8:
            s.db.record_connection(f, c)
    for k in range(rng.randint(0, 4)):
        s.audit.append(AuditEvent(rng.random() * 100, f"nav-{k}", "led_on", rng.choice(conns) if conns else None))
    return s
