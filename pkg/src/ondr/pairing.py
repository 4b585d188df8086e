"""Patch verification by master/slave EPC exchange between co-located tags.

A fiber tag in master mode pulls the EPC of the connector tag it is plugged
into over the wired inter-tag link, so one radio singulation of the fiber is
enough to check the pair against the connection database. The baseline
comparator singulates both tags of every pair instead.
"""

from __future__ import annotations

import csv
import enum
import io
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import KindMismatch, NotMaster
from .inventory import InventoryLog, ProtocolConfig, SlotKind, run_inventory
from .link import LinkParams
from .model import ConnectionDb, Epc, Registry, SpiMode, TagKind, TagRecord


class Verdict(enum.Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    SLAVE_ABSENT = "slave_absent"
    NOT_IN_DATABASE = "not_in_database"


@dataclass(frozen=True)
class VerificationOutcome:
    fiber: Epc
    expected_connector: Optional[Epc]
    observed_connector: Optional[Epc]
    verdict: Verdict


@dataclass
class VerificationReport:
    outcomes: list[VerificationOutcome] = field(default_factory=list)
    reader_identifications: int = 0
    elapsed: float = 0.0
    complete: bool = True
    log: Optional[InventoryLog] = None

    def count(self, verdict: Verdict) -> int:
        return sum(1 for o in self.outcomes if o.verdict is verdict)

    def problems(self) -> list[VerificationOutcome]:
        return [o for o in self.outcomes if o.verdict is not Verdict.MATCH]

    def summary(self) -> dict:
        return {
            "reader_identifications": self.reader_identifications,
            "elapsed": self.elapsed,
            "complete": self.complete,
            "verified": len(self.outcomes),
            **{v.value: self.count(v) for v in Verdict},
        }


def spi_exchange(master: TagRecord, registry: Registry) -> Optional[Epc]:
    """EPC returned by the slave wired to ``master``, or None if nobody answers."""
    if master.kind is not TagKind.FIBER or master.spi_mode is not SpiMode.MASTER:
        raise NotMaster(f"{master.epc} is {master.kind.value}/{master.spi_mode.value}")
    if master.attached_to is None or master.attached_to not in registry:
        return None
    slave = registry.get(master.attached_to)
    if slave.spi_mode is not SpiMode.SLAVE:
        return None
    return slave.epc


def verify_pair(db: ConnectionDb, fiber: Epc, observed: Optional[Epc]) -> VerificationOutcome:
    tag = db.registry.get(fiber)
    if tag.kind is not TagKind.FIBER:
        raise KindMismatch(f"{fiber} is not a fiber tag")
    expected = db.lookup_target(fiber)
    if expected is None:
        verdict = Verdict.NOT_IN_DATABASE
    elif observed is None:
        verdict = Verdict.SLAVE_ABSENT
    elif observed == expected:
        verdict = Verdict.MATCH
    else:
        verdict = Verdict.MISMATCH
    return VerificationOutcome(fiber, expected, observed, verdict)


def _kind_of(registry, epc):
    return registry.get(epc).kind if epc in registry else None


def _singulated(log, registry, kind):
    return [s.epc for s in log.slots
            if s.kind is SlotKind.SUCCESS and _kind_of(registry, s.epc) is kind]


def verify_all(db: ConnectionDb, population: Sequence[tuple[Epc, float]], link: LinkParams,
               config: ProtocolConfig, rng: Optional[random.Random] = None,
               exchange_cost: float = 0.0) -> VerificationReport:
    """Inventory the fiber tags only and verify each singulated fiber over SPI."""
    registry = db.registry
    fibers = [(e, d) for e, d in population if _kind_of(registry, e) is TagKind.FIBER]
    log = run_inventory(fibers, link, config, rng)
    report = VerificationReport(log=log, complete=log.complete)
    for epc in _singulated(log, registry, TagKind.FIBER):
        master = registry.get(epc)
        observed = spi_exchange(master, registry) if master.spi_mode is SpiMode.MASTER else None
        report.outcomes.append(verify_pair(db, epc, observed))
    report.reader_identifications = len(report.outcomes)
    report.elapsed = log.elapsed + exchange_cost * len(report.outcomes)
    return report


def verify_all_baseline(db: ConnectionDb, population: Sequence[tuple[Epc, float]], link: LinkParams,
                        config: ProtocolConfig, rng: Optional[random.Random] = None) -> VerificationReport:
    """Dual-side scan: singulate fibers and connectors, then pair them up by attachment."""
    registry = db.registry
    tags = [(e, d) for e, d in population if e in registry]
    log = run_inventory(tags, link, config, rng)
    seen = set(log.identified)
    report = VerificationReport(log=log, complete=log.complete)
    for epc in _singulated(log, registry, TagKind.FIBER):
        partner = registry.get(epc).attached_to
        observed = partner if partner in seen else None
        report.outcomes.append(verify_pair(db, epc, observed))
    report.reader_identifications = log.successes
    report.elapsed = log.elapsed
    return report


def report_to_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fiber", "expected", "observed", "verdict"])
    for o in report.outcomes:
        w.writerow([o.fiber, o.expected_connector or "", o.observed_connector or "", o.verdict.value])
    s = report.summary()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in s.items()) + "\n")
    return buf.getvalue()
