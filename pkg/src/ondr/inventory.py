"""Framed slotted-ALOHA inventory with Gen2-style Q adaptation.

Each round opens a frame of ``2**q`` slots and every tag still waiting to be
inventoried picks one slot uniformly. A slot holding exactly one reply is a
singulation unless the reply is lost (per the link's miss probability), in
which case the reader hears nothing and the tag retries in a later round.

With ``QAdapt.ADAPTIVE`` the reader keeps a floating ``qfp``: each empty slot
lowers it by ``c``, each collision raises it by ``c``. When ``round(qfp)``
moves away from the current ``q`` the frame is abandoned and a new round
starts (the QueryAdjust behaviour of EPC Gen2 readers).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .errors import InvalidProtocolConfig, NonPositiveDistance
from .link import LinkParams, is_readable, miss_probability
from .model import Epc

Q_MAX = 15


class QAdapt(enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


class SlotKind(enum.Enum):
    EMPTY = "empty"
    SUCCESS = "success"
    COLLISION = "collision"


@dataclass(frozen=True)
class SlotOutcome:
    index: int
    kind: SlotKind
    duration: float
    epc: Optional[Epc] = None
    count: int = 0


@dataclass(frozen=True)
class ProtocolConfig:
    initial_q: int = 4
    q_adapt: QAdapt = QAdapt.ADAPTIVE
    c: float = 0.3
    t_success: float = 1.0 / 119.0
    t_collision: float = 4.8e-3
    t_empty: float = 1.2e-3
    time_budget: float = 1.0
    rng_seed: int = 0
    # hard stop for pathological populations under an unlimited budget
    max_slots: int = 1_000_000

    def __post_init__(self):
        problems = []
        if not (isinstance(self.initial_q, int) and 0 <= self.initial_q <= Q_MAX):
            problems.append(f"initial_q must be an integer in 0..{Q_MAX}")
        if not 0 < self.c <= 1:
            problems.append("c must be in (0, 1]")
        if not 0 < self.t_empty <= self.t_collision <= self.t_success:
            problems.append("need 0 < t_empty <= t_collision <= t_success")
        if not self.time_budget > 0:
            problems.append("time_budget must be positive")
        if self.max_slots < 1:
            problems.append("max_slots must be positive")
        if problems:
            raise InvalidProtocolConfig("; ".join(problems))


@dataclass
class InventoryLog:
    slots: list[SlotOutcome] = field(default_factory=list)
    identified: dict[Epc, float] = field(default_factory=dict)
    elapsed: float = 0.0
    rounds: int = 0
    # tags the reader could have decoded; the run is complete once all are identified
    expected: frozenset = frozenset()
    budget_exhausted: bool = False

    @property
    def complete(self) -> bool:
        return self.expected <= self.identified.keys()

    @property
    def successes(self) -> int:
        return sum(1 for s in self.slots if s.kind is SlotKind.SUCCESS)

    def _append(self, outcome: SlotOutcome) -> None:
        self.slots.append(outcome)
        self.elapsed += outcome.duration
        if outcome.kind is SlotKind.SUCCESS:
            self.identified[outcome.epc] = self.elapsed


def elapsed_time(log: InventoryLog) -> float:
    total = 0.0
    for s in log.slots:
        total += s.duration
    return total


def _validate_population(population):
    for epc, d in population:
        if not d > 0:
            raise NonPositiveDistance(f"tag {epc} at distance {d}")


def _frame(waiting, q, config, rng, start) -> Iterator[SlotOutcome]:
    """Lazily play one frame; ``waiting`` is a list of (epc, p_miss)."""
    n = 1 << q
    occupants: list[list] = [[] for _ in range(n)]
    for tag in waiting:
        occupants[rng.randrange(n)].append(tag)
    for i, occ in enumerate(occupants):
        if not occ:
            yield SlotOutcome(start + i, SlotKind.EMPTY, config.t_empty)
        elif len(occ) == 1:
            epc, p_miss = occ[0]
            if p_miss > 0 and rng.random() < p_miss:
                yield SlotOutcome(start + i, SlotKind.EMPTY, config.t_empty)
            else:
                yield SlotOutcome(start + i, SlotKind.SUCCESS, config.t_success, epc, 1)
        else:
            yield SlotOutcome(start + i, SlotKind.COLLISION, config.t_collision, None, len(occ))


def _contenders(population, link):
    return [(epc, miss_probability(link, d)) for epc, d in population if is_readable(link, d)]


def run_round(population: Sequence[tuple[Epc, float]], link: LinkParams, q: int,
              config: ProtocolConfig, rng: random.Random) -> list[SlotOutcome]:
    """Play a full frame of ``2**q`` slots over the readable part of ``population``."""
    if not (isinstance(q, int) and 0 <= q <= Q_MAX):
        raise InvalidProtocolConfig(f"q must be an integer in 0..{Q_MAX}, got {q!r}")
    _validate_population(population)
    return list(_frame(_contenders(population, link), q, config, rng, 0))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def run_inventory(population: Sequence[tuple[Epc, float]], link: LinkParams,
                  config: ProtocolConfig, rng: Optional[random.Random] = None) -> InventoryLog:
    """Inventory ``population`` until every decodable tag is read or the budget runs out."""
    _validate_population(population)
    if len({epc for epc, _ in population}) != len(population):
        raise ValueError("population EPCs must be distinct")
    rng = random.Random(config.rng_seed) if rng is None else rng
    contenders = _contenders(population, link)
    expected = frozenset(epc for epc, p in contenders if p < 1.0)
    log = InventoryLog(expected=expected)
    q = config.initial_q

    if not expected:
        # nothing will answer: the reader still spends one silent frame finding that out
        for outcome in _frame(contenders, q, config, rng, 0):
            log._append(outcome)
        log.rounds = 1
        return log

    qfp = float(q)
    adaptive = config.q_adapt is QAdapt.ADAPTIVE
    while not log.complete:
        if log.elapsed >= config.time_budget or len(log.slots) >= config.max_slots:
            log.budget_exhausted = True
            break
        waiting = [t for t in contenders if t[0] not in log.identified]
        log.rounds += 1
        for outcome in _frame(waiting, q, config, rng, len(log.slots)):
            log._append(outcome)
            if log.complete or log.elapsed >= config.time_budget or len(log.slots) >= config.max_slots:
                break
            if not adaptive:
                continue
            if outcome.kind is SlotKind.EMPTY:
                qfp = max(0.0, qfp - config.c)
            elif outcome.kind is SlotKind.COLLISION:
                qfp = min(float(Q_MAX), qfp + config.c)
            if _round_half_up(qfp) != q:
                q = _round_half_up(qfp)
                break
    return log


def log_to_csv(log: InventoryLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slot_index", "kind", "epc", "duration", "cumulative_time"])
    t = 0.0
    for s in log.slots:
        t += s.duration
        w.writerow([s.index, s.kind.value, "" if s.epc is None else str(s.epc), repr(s.duration), repr(t)])
    return buf.getvalue()
