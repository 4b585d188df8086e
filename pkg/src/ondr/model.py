"""Tags, panels and the fiber/connector connection database."""

from __future__ import annotations

import enum
import itertools
import re
import time
from dataclasses import dataclass, replace
from typing import Iterator, Optional

from .errors import (
    AlreadyConnected,
    DuplicateEpc,
    InvalidLayout,
    InvalidModeForKind,
    KindMismatch,
    MalformedEpc,
    UnknownEpc,
    ZeroArea,
)

EPC_BITS = 96
EPC_MAX = (1 << EPC_BITS) - 1
_HEX24 = re.compile(r"[0-9a-fA-F]{24}")


@dataclass(frozen=True, order=True)
class Epc:
    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or not 0 <= self.value <= EPC_MAX:
            raise MalformedEpc(f"EPC value out of 96-bit range: {self.value!r}")

    def __str__(self):
        return f"{self.value:024x}"

    def __repr__(self):
        return f"Epc({self})"

    @classmethod
    def parse(cls, text: str) -> "Epc":
        return parse_epc(text)


def parse_epc(text: str) -> Epc:
    if not isinstance(text, str) or not _HEX24.fullmatch(text):
        raise MalformedEpc(f"expected 24 hex digits, got {text!r}")
    return Epc(int(text, 16))


def render_epc(epc: Epc) -> str:
    return str(epc)


class TagKind(enum.Enum):
    FIBER = "fiber"
    CONNECTOR = "connector"

    @property
    def opposite(self) -> "TagKind":
        return TagKind.CONNECTOR if self is TagKind.FIBER else TagKind.FIBER


class SpiMode(enum.Enum):
    MASTER = "master"
    SLAVE = "slave"
    IDLE = "idle"


class Led(enum.Enum):
    OFF = "off"
    ON = "on"


_ALLOWED_MODES = {
    TagKind.FIBER: {SpiMode.MASTER, SpiMode.IDLE},
    TagKind.CONNECTOR: {SpiMode.SLAVE, SpiMode.IDLE},
}


@dataclass(frozen=True)
class TagRecord:
    epc: Epc
    kind: TagKind
    spi_mode: SpiMode = SpiMode.IDLE
    led: Led = Led.OFF
    position: tuple[float, float] = (0.0, 0.0)
    attached_to: Optional[Epc] = None

    def check(self) -> None:
        """Raise InvalidModeForKind if the record breaks the master/slave role rule."""
        if self.spi_mode not in _ALLOWED_MODES[self.kind]:
            raise InvalidModeForKind(
                f"{self.kind.value} tag {self.epc} cannot be in {self.spi_mode.value} mode"
            )
        if self.led is Led.ON and self.kind is not TagKind.CONNECTOR:
            raise InvalidModeForKind(f"only connector tags carry a LED ({self.epc})")


class Registry:
    """EPC-keyed collection of tags. Mutations must be serialized by the caller."""

    def __init__(self, tags=()):
        self._tags: dict[Epc, TagRecord] = {}
        for tag in tags:
            self.register(tag)

    def register(self, tag: TagRecord) -> Epc:
        if tag.epc in self._tags:
            raise DuplicateEpc(f"EPC {tag.epc} already registered")
        tag.check()
        if tag.attached_to is not None:
            partner = self._tags.get(tag.attached_to)
            # a partner registered later is validated by validate()
            if partner is not None and partner.kind is tag.kind:
                raise KindMismatch(f"{tag.epc} attached to a tag of the same kind")
        self._tags[tag.epc] = tag
        return tag.epc

    def get(self, epc: Epc) -> TagRecord:
        try:
            return self._tags[epc]
        except KeyError:
            raise UnknownEpc(f"EPC {epc} not registered") from None

    def update(self, tag: TagRecord) -> None:
        if tag.epc not in self._tags:
            raise UnknownEpc(f"EPC {tag.epc} not registered")
        tag.check()
        self._tags[tag.epc] = tag

    def attach(self, a: Epc, b: Epc) -> None:
        """Physically co-locate two tags of opposite kinds (plugging a fiber into a port)."""
        ta, tb = self.get(a), self.get(b)
        if ta.kind is tb.kind:
            raise KindMismatch(f"cannot attach two {ta.kind.value} tags")
        for t in (ta, tb):
            if t.attached_to is not None and t.attached_to not in (a, b):
                old = self._tags.get(t.attached_to)
                if old is not None and old.attached_to == t.epc:
                    self._tags[old.epc] = replace(old, attached_to=None)
        self._tags[a] = replace(ta, attached_to=b)
        self._tags[b] = replace(tb, attached_to=a)

    def detach(self, epc: Epc) -> None:
        tag = self.get(epc)
        if tag.attached_to is not None:
            partner = self._tags.get(tag.attached_to)
            if partner is not None and partner.attached_to == epc:
                self._tags[partner.epc] = replace(partner, attached_to=None)
        self._tags[epc] = replace(tag, attached_to=None)

    def remove(self, epc: Epc) -> TagRecord:
        self.detach(epc)
        return self._tags.pop(epc)

    def set_led(self, epc: Epc, on: bool) -> None:
        self.update(replace(self.get(epc), led=Led.ON if on else Led.OFF))

    def lit(self) -> list[Epc]:
        return [t.epc for t in self._tags.values() if t.led is Led.ON]

    def of_kind(self, kind: TagKind) -> list[TagRecord]:
        return [t for t in self._tags.values() if t.kind is kind]

    def validate(self) -> None:
        for tag in self._tags.values():
            tag.check()
            if tag.attached_to is not None:
                partner = self._tags.get(tag.attached_to)
                if partner is None:
                    raise UnknownEpc(f"{tag.epc} attached to unregistered {tag.attached_to}")
                if partner.kind is tag.kind:
                    raise KindMismatch(f"{tag.epc} attached to a tag of the same kind")

    def __contains__(self, epc):
        return epc in self._tags

    def __iter__(self) -> Iterator[TagRecord]:
        return iter(self._tags.values())

    def __len__(self):
        return len(self._tags)

    def __eq__(self, other):
        if not isinstance(other, Registry):
            return NotImplemented
        return self._tags == other._tags

    def __repr__(self):
        return f"Registry({len(self)} tags)"


@dataclass(frozen=True)
class ConnectionRecord:
    fiber: Epc
    connector: Epc
    created_at: int


class ConnectionDb:
    """The intended one-to-one fiber -> connector patching plan.

    ``created_at`` stamps are monotonic nanoseconds; they only order records
    within one process and are preserved verbatim by the store.
    """

    def __init__(self, registry: Registry):
        self.registry = registry
        self._by_fiber: dict[Epc, ConnectionRecord] = {}
        self._by_connector: dict[Epc, ConnectionRecord] = {}

    def record_connection(self, fiber: Epc, connector: Epc, created_at: Optional[int] = None) -> ConnectionRecord:
        f, c = self.registry.get(fiber), self.registry.get(connector)
        if f.kind is not TagKind.FIBER or c.kind is not TagKind.CONNECTOR:
            raise KindMismatch(
                f"expected fiber/connector, got {f.kind.value}/{c.kind.value}"
            )
        if fiber in self._by_fiber:
            raise AlreadyConnected(f"fiber {fiber} already connected")
        if connector in self._by_connector:
            raise AlreadyConnected(f"connector {connector} already connected")
        rec = ConnectionRecord(fiber, connector, time.monotonic_ns() if created_at is None else created_at)
        self._by_fiber[fiber] = rec
        self._by_connector[connector] = rec
        return rec

    def lookup_target(self, fiber: Epc) -> Optional[Epc]:
        rec = self._by_fiber.get(fiber)
        return None if rec is None else rec.connector

    def lookup_fiber(self, connector: Epc) -> Optional[Epc]:
        rec = self._by_connector.get(connector)
        return None if rec is None else rec.fiber

    def records(self) -> list[ConnectionRecord]:
        return list(self._by_fiber.values())

    def __len__(self):
        return len(self._by_fiber)

    def __eq__(self, other):
        if not isinstance(other, ConnectionDb):
            return NotImplemented
        return self._by_fiber == other._by_fiber


@dataclass(frozen=True)
class PanelLayout:
    width: float
    height: float
    slots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple((float(x), float(y)) for x, y in self.slots))
        for x, y in self.slots:
            if not (0 <= x <= self.width and 0 <= y <= self.height):
                raise InvalidLayout(f"slot ({x}, {y}) outside {self.width}x{self.height} panel")

    @classmethod
    def grid(cls, width: float, height: float, cols: int, rows: int, count: Optional[int] = None) -> "PanelLayout":
        """Cell-centred grid, filled row by row, truncated to ``count`` slots."""
        if cols < 1 or rows < 1:
            raise InvalidLayout("grid needs at least one column and row")
        cells = [((i + 0.5) * width / cols, (j + 0.5) * height / rows)
                 for j, i in itertools.product(range(rows), range(cols))]
        if count is not None:
            if count > len(cells):
                raise InvalidLayout(f"{count} slots do not fit a {cols}x{rows} grid")
            cells = cells[:count]
        return cls(width, height, tuple(cells))

    @property
    def center(self) -> tuple[float, float]:
        return (self.width / 2, self.height / 2)


def panel_density(layout: PanelLayout) -> float:
    """Tags per square inch."""
    area = layout.width * layout.height
    if area <= 0:
        raise ZeroArea(f"panel area {area} is not positive")
    return len(layout.slots) / area
