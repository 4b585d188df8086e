"""Technician workflow: scan a fiber, look up its port, light the port's LED.

Every call on a session appends exactly one audit event, including calls
rejected because the session is in the wrong state.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    NotInDatabase,
    OndrError,
    OutOfRange,
    SessionStateError,
    TargetNotFound,
    WrongKind,
)
from .inventory import ProtocolConfig, run_inventory
from .link import LinkParams, is_readable
from .model import ConnectionDb, Epc, Registry, TagKind


class NavState(enum.Enum):
    IDLE = "idle"
    FIBER_SCANNED = "fiber_scanned"
    TARGET_KNOWN = "target_known"
    NAVIGATING = "navigating"
    LED_LIT = "led_lit"
    FAILED = "failed"


@dataclass(frozen=True)
class AuditEvent:
    timestamp: float
    session: str
    event: str
    epc: Optional[Epc] = None

    def to_json(self) -> str:
        return json.dumps({"timestamp": self.timestamp, "session": self.session,
                           "event": self.event, "epc": None if self.epc is None else str(self.epc)})


_ids = itertools.count(1)


@dataclass
class NavigationSession:
    session_id: str = field(default_factory=lambda: f"nav-{next(_ids)}")
    state: NavState = NavState.IDLE
    fiber: Optional[Epc] = None
    target: Optional[Epc] = None
    reason: Optional[str] = None
    audit: list[AuditEvent] = field(default_factory=list)

    def _log(self, event, epc=None):
        now = time.monotonic()
        if self.audit and now <= self.audit[-1].timestamp:
            now = self.audit[-1].timestamp + 1e-6
        self.audit.append(AuditEvent(now, self.session_id, event, epc))

    def _require(self, op, state):
        if self.state is not state:
            self._log(f"rejected:{op}")
            raise SessionStateError(f"{op} needs state {state.value}, session is {self.state.value}")

    def _fail(self, err: OndrError, epc=None):
        self.state = NavState.FAILED
        self.reason = err.code
        self._log(f"failed:{err.code}", epc)
        raise err

    @property
    def lit(self) -> Optional[Epc]:
        return self.target if self.state is NavState.LED_LIT else None


def scan_fiber(session: NavigationSession, registry: Registry, link: LinkParams,
               epc: Epc, distance: float) -> Epc:
    """Single-scan read of the tag held at ``distance`` cm from the antenna."""
    session._require("scan_fiber", NavState.IDLE)
    try:
        tag = registry.get(epc)
    except OndrError as err:
        session._fail(err, epc)
    if not is_readable(link, distance):
        session._fail(OutOfRange(f"{epc} at {distance} cm is beyond read range"), epc)
    if tag.kind is not TagKind.FIBER:
        session._fail(WrongKind(f"{epc} is a {tag.kind.value} tag"), epc)
    session.state = NavState.FIBER_SCANNED
    session.fiber = epc
    session._log("fiber_scanned", epc)
    return epc


def lookup_target(session: NavigationSession, db: ConnectionDb) -> Epc:
    session._require("lookup_target", NavState.FIBER_SCANNED)
    target = db.lookup_target(session.fiber)
    if target is None:
        session._fail(NotInDatabase(f"fiber {session.fiber} has no connection record"), session.fiber)
    session.state = NavState.TARGET_KNOWN
    session.target = target
    session._log("target_known", target)
    return target


def navigate_to_target(session: NavigationSession, registry: Registry,
                       panel: Sequence[tuple[Epc, float]], link: LinkParams,
                       config: ProtocolConfig, rng: Optional[random.Random] = None) -> tuple[float, float]:
    """Multi-scan inventory of the panel's connector tags; light the target when it answers.

    ``panel`` lists (epc, distance) for the tags currently on the panel; only
    connector tags take part. Any LED left on by an earlier session is turned
    off first so a single port is lit at a time.
    """
    session._require("navigate_to_target", NavState.TARGET_KNOWN)
    session.state = NavState.NAVIGATING
    connectors = [(e, d) for e, d in panel
                  if e in registry and registry.get(e).kind is TagKind.CONNECTOR]
    log = run_inventory(connectors, link, config, rng)
    if session.target not in log.identified:
        session._fail(TargetNotFound(f"{session.target} not identified on the panel"), session.target)
    for other in registry.lit():
        registry.set_led(other, False)
    registry.set_led(session.target, True)
    session.state = NavState.LED_LIT
    session._log("led_on", session.target)
    return registry.get(session.target).position


def end_session(session: NavigationSession, registry: Registry) -> list[AuditEvent]:
    """Switch every LED off and return the session to Idle; returns the full audit."""
    for epc in registry.lit():
        registry.set_led(epc, False)
    session.state = NavState.IDLE
    session.fiber = session.target = session.reason = None
    session._log("end")
    return list(session.audit)
