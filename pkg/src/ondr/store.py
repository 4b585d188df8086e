"""Line-delimited JSON persistence for the registry, connection database and audit.

File layout: a header line, then one record per line::

    {"format": "ondr-store", "version": 1, "generation": 3, "records": 5}
    {"type": "tag", "epc": "...", ...}
    {"type": "connection", "fiber": "...", "connector": "...", "created_at": ...}
    {"type": "audit", "timestamp": ..., "session": "...", "event": "...", "epc": ...}

Saves write a sibling temp file and rename it over the target, so a crash
at any point leaves either the old or the new generation on disk.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import CorruptStore, IoFailure, MissingFile, OndrError
from .model import ConnectionDb, Led, Registry, SpiMode, TagKind, TagRecord, parse_epc
from .navigation import AuditEvent

FORMAT = "ondr-store"
VERSION = 1
DEFAULT_STORE = "ondr-store.jsonl"


def resolve_store_path(flag: Optional[str] = None) -> Path:
    """CLI flag, then ``$ONDR_STORE``, then ``./ondr-store.jsonl``."""
    return Path(flag or os.environ.get("ONDR_STORE") or DEFAULT_STORE)


@dataclass
class Store:
    path: Path
    registry: Registry = field(default_factory=Registry)
    db: ConnectionDb = None
    audit: list[AuditEvent] = field(default_factory=list)
    generation: int = 0

    def __post_init__(self):
        self.path = Path(self.path)
        if self.db is None:
            self.db = ConnectionDb(self.registry)

    @classmethod
    def open(cls, path) -> "Store":
        """Load ``path`` if it exists, otherwise start an empty store there."""
        return load_store(path) if Path(path).exists() else cls(Path(path))

    def same_content(self, other: "Store") -> bool:
        return (self.registry == other.registry and self.db == other.db
                and self.audit == other.audit)


def _tag_record(t: TagRecord) -> dict:
    return {
        "type": "tag",
        "epc": str(t.epc),
        "kind": t.kind.value,
        "spi_mode": t.spi_mode.value,
        "led": t.led.value,
        "x": t.position[0],
        "y": t.position[1],
        "attached_to": None if t.attached_to is None else str(t.attached_to),
    }


def _lines(store: Store) -> list[str]:
    records = [_tag_record(t) for t in store.registry]
    records += [{"type": "connection", "fiber": str(r.fiber), "connector": str(r.connector),
                 "created_at": r.created_at} for r in store.db.records()]
    records += [{"type": "audit", "timestamp": a.timestamp, "session": a.session, "event": a.event,
                 "epc": None if a.epc is None else str(a.epc)} for a in store.audit]
    return [json.dumps(r, sort_keys=True) for r in records]


def save_store(store: Store) -> int:
    """Atomically write ``store`` to its path and bump its generation."""
    gen = store.generation + 1
    body = _lines(store)
    header = json.dumps({"format": FORMAT, "version": VERSION, "generation": gen, "records": len(body)})
    text = "\n".join([header, *body]) + "\n"
    directory = store.path.parent if str(store.path.parent) else Path(".")
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=store.path.name + ".", suffix=".tmp", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, store.path)
    except OSError as err:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoFailure(f"saving {store.path}: {err}") from err
    store.generation = gen
    return gen


def _opt_epc(v):
    return None if v is None else parse_epc(v)


def load_store(path) -> Store:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingFile(f"no store at {path}") from None
    except (OSError, UnicodeDecodeError) as err:
        raise CorruptStore(f"{path}: unreadable ({err})") from err
    if not text.endswith("\n"):
        raise CorruptStore(f"{path}: truncated (no final newline)")
    lines = text.split("\n")[:-1]
    try:
        header = json.loads(lines[0])
        if header.get("format") != FORMAT or header.get("version") != VERSION:
            raise CorruptStore(f"{path}: not an {FORMAT} v{VERSION} file", line=1)
        generation = int(header["generation"])
        expected = int(header["records"])
    except (ValueError, KeyError, TypeError, AttributeError, IndexError):
        raise CorruptStore(f"{path}: bad header", line=1) from None
    if len(lines) - 1 != expected:
        raise CorruptStore(f"{path}: header promises {expected} records, found {len(lines) - 1}")

    store = Store(path, generation=generation)
    tags, conns = [], []
    for lineno, line in enumerate(lines[1:], 2):
        try:
            rec = json.loads(line)
            kind = rec["type"]
            if kind == "tag":
                tags.append((lineno, TagRecord(
                    epc=parse_epc(rec["epc"]),
                    kind=TagKind(rec["kind"]),
                    spi_mode=SpiMode(rec["spi_mode"]),
                    led=Led(rec["led"]),
                    position=(float(rec["x"]), float(rec["y"])),
                    attached_to=_opt_epc(rec["attached_to"]),
                )))
            elif kind == "connection":
                conns.append((lineno, parse_epc(rec["fiber"]), parse_epc(rec["connector"]),
                              int(rec["created_at"])))
            elif kind == "audit":
                store.audit.append(AuditEvent(float(rec["timestamp"]), str(rec["session"]),
                                              str(rec["event"]), _opt_epc(rec["epc"])))
            else:
                raise CorruptStore(f"{path}:{lineno}: unknown record type {kind!r}", line=lineno)
        except CorruptStore:
            raise
        except (ValueError, KeyError, TypeError, OndrError) as err:
            raise CorruptStore(f"{path}:{lineno}: bad record ({err})", line=lineno) from None

    for lineno, tag in tags:
        if tag.epc in store.registry:
            raise CorruptStore(f"{path}:{lineno}: duplicate EPC {tag.epc}", line=lineno, epc=tag.epc)
        try:
            tag.check()
            # attachments are checked once every tag is in
            store.registry.register(tag)
        except OndrError as err:
            raise CorruptStore(f"{path}:{lineno}: {err}", line=lineno, epc=tag.epc) from None
    try:
        store.registry.validate()
    except OndrError as err:
        raise CorruptStore(f"{path}: {err}") from None
    for lineno, fiber, connector, created in conns:
        try:
            store.db.record_connection(fiber, connector, created_at=created)
        except OndrError as err:
            raise CorruptStore(f"{path}:{lineno}: {err}", line=lineno, epc=fiber) from None
    return store
