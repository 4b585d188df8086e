"""Newline-delimited JSON management service over TCP.

One JSON object per request line, one JSON object per response line. Every
response carries ``"status": "OK"`` or ``"status": "ERR"`` plus a stable
``"code"`` on errors; a request ``"id"`` is echoed back when present.
"""

from __future__ import annotations

import copy
import json
import logging
import random
import socketserver
import threading
from typing import Optional

from .errors import BadRequest, NotInDatabase, OndrError
from .harness import distance_cm, emit_report, run_scenario, scenario_from_dict, summary_dict
from .inventory import ProtocolConfig, run_inventory
from .link import LinkParams
from .model import Led, SpiMode, TagKind, TagRecord, parse_epc
from .navigation import NavigationSession, lookup_target, navigate_to_target, scan_fiber
from .pairing import verify_all, verify_all_baseline
from .store import Store, save_store

log = logging.getLogger(__name__)

MUTATING = {"REGISTER", "CONNECT", "NAVIGATE"}
VERBS = MUTATING | {"LOOKUP", "VERIFY", "INVENTORY", "METRICS"}
DEFAULT_READER_CM = 30.0
DEFAULT_SCAN_CM = 10.0


def _field(req, name, default=..., kind=None):
    if name not in req:
        if default is ...:
            raise BadRequest(f"missing field {name!r}")
        return default
    value = req[name]
    if kind is not None and not isinstance(value, kind):
        raise BadRequest(f"field {name!r} has the wrong type")
    return value


def _epc(req, name):
    return parse_epc(_field(req, name, kind=str))


def population(store: Store, reader_distance: float, kind: Optional[TagKind] = None):
    """(epc, distance) for stored tags, antenna centred on the tags' bounding box."""
    tags = [t for t in store.registry if kind is None or t.kind is kind]
    every = list(store.registry)
    if not every:
        return []
    xs = [t.position[0] for t in every]
    ys = [t.position[1] for t in every]
    center = ((min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2)
    return [(t.epc, distance_cm(reader_distance, t.position, center)) for t in tags]


def _protocol(req):
    return ProtocolConfig(rng_seed=int(_field(req, "seed", 0, int)),
                          time_budget=float(_field(req, "budget", 1.0, (int, float))))


def _do_register(store, req):
    tag = TagRecord(
        epc=_epc(req, "epc"),
        kind=TagKind(_field(req, "kind", kind=str)),
        spi_mode=SpiMode(_field(req, "spi_mode", "idle", str)),
        led=Led.OFF,
        position=(float(_field(req, "x", 0.0, (int, float))), float(_field(req, "y", 0.0, (int, float)))),
    )
    partner = req.get("attached_to")
    store.registry.register(tag)
    if partner is not None:
        store.registry.attach(tag.epc, parse_epc(partner))
    return {"epc": str(tag.epc)}


def _do_connect(store, req):
    rec = store.db.record_connection(_epc(req, "fiber"), _epc(req, "connector"))
    return {"fiber": str(rec.fiber), "connector": str(rec.connector)}


def _do_lookup(store, req):
    fiber = _epc(req, "fiber")
    store.registry.get(fiber)
    target = store.db.lookup_target(fiber)
    if target is None:
        raise NotInDatabase(f"fiber {fiber} has no connection record")
    return {"connector": str(target)}


def _do_verify(store, req):
    dist = float(_field(req, "distance", DEFAULT_READER_CM, (int, float)))
    pop = population(store, dist)
    link = LinkParams()
    if _field(req, "baseline", False, bool):
        rep = verify_all_baseline(store.db, pop, link, _protocol(req))
    else:
        rep = verify_all(store.db, pop, link, _protocol(req))
    out = rep.summary()
    out["outcomes"] = [
        {"fiber": str(o.fiber),
         "expected": None if o.expected_connector is None else str(o.expected_connector),
         "observed": None if o.observed_connector is None else str(o.observed_connector),
         "verdict": o.verdict.value}
        for o in rep.outcomes
    ]
    return out


def _do_inventory(store, req):
    which = _field(req, "kind", "all", str)
    kind = None if which == "all" else TagKind(which)
    dist = float(_field(req, "distance", DEFAULT_READER_CM, (int, float)))
    inv = run_inventory(population(store, dist, kind), LinkParams(), _protocol(req))
    return {"identified": [str(e) for e in inv.identified], "elapsed": inv.elapsed,
            "slots": len(inv.slots), "rounds": inv.rounds, "complete": inv.complete}


def _do_navigate(store, req, session: NavigationSession):
    fiber = _epc(req, "fiber")
    link = LinkParams()
    scan = float(_field(req, "scan_distance", DEFAULT_SCAN_CM, (int, float)))
    dist = float(_field(req, "distance", DEFAULT_READER_CM, (int, float)))
    rng = random.Random(int(_field(req, "seed", 0, int)))
    try:
        scan_fiber(session, store.registry, link, fiber, scan)
        target = lookup_target(session, store.db)
        x, y = navigate_to_target(session, store.registry, population(store, dist, TagKind.CONNECTOR),
                                  link, _protocol(req), rng)
    finally:
        store.audit.extend(session.audit)
    return {"connector": str(target), "x": x, "y": y}


def _do_metrics(store, req):
    cfg = scenario_from_dict({"version": 1, **_field(req, "scenario", {}, dict)})
    report = run_scenario(cfg)
    out = summary_dict(report)
    if _field(req, "text", False, bool):
        out["text"] = emit_report(report)
    return out


def handle_request(store: Store, request) -> dict:
    """Dispatch one decoded request. Mutating verbs persist before returning OK.

    Mutations run on a copy that replaces the live store only after a
    successful save, so a failed save leaves memory and disk unchanged.
    """
    rid = request.get("id") if isinstance(request, dict) else None
    try:
        if not isinstance(request, dict):
            raise BadRequest("request must be a JSON object")
        verb = request.get("verb")
        if verb not in VERBS:
            resp = {"status": "ERR", "code": "unknown_verb", "message": f"unknown verb {verb!r}"}
        elif verb in MUTATING:
            work = copy.deepcopy(store)
            if verb == "REGISTER":
                payload = _do_register(work, request)
            elif verb == "CONNECT":
                payload = _do_connect(work, request)
            else:
                payload = _do_navigate(work, request, NavigationSession())
            save_store(work)
            store.registry, store.db, store.audit, store.generation = (
                work.registry, work.db, work.audit, work.generation)
            resp = {"status": "OK", **payload}
        else:
            handler = {"LOOKUP": _do_lookup, "VERIFY": _do_verify,
                       "INVENTORY": _do_inventory, "METRICS": _do_metrics}[verb]
            resp = {"status": "OK", **handler(store, request)}
    except OndrError as err:
        resp = {"status": "ERR", "code": err.code, "message": str(err)}
    except (ValueError, TypeError) as err:
        resp = {"status": "ERR", "code": "bad_request", "message": str(err)}
    if rid is not None:
        resp["id"] = rid
    return resp


class StoreService:
    """Single-writer wrapper: mutations are serialized, reads see a snapshot."""

    def __init__(self, store: Store):
        self.store = store
        self._lock = threading.Lock()

    def handle(self, request) -> dict:
        verb = request.get("verb") if isinstance(request, dict) else None
        if verb in MUTATING:
            with self._lock:
                return handle_request(self.store, request)
        with self._lock:
            snapshot = copy.deepcopy(self.store)
        return handle_request(snapshot, request)

    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
        except json.JSONDecodeError as err:
            resp = {"status": "ERR", "code": "bad_request", "message": f"invalid JSON: {err}"}
        else:
            resp = self.handle(request)
        return json.dumps(resp)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            self.wfile.write((self.server.service.handle_line(line) + "\n").encode("utf-8"))
            self.wfile.flush()


class WireServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, service: StoreService, host="127.0.0.1", port=0):
        self.service = service
        super().__init__((host, port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(store: Store, host="127.0.0.1", port=7878) -> None:
    with WireServer(StoreService(store), host, port) as server:
        log.info("serving %s on %s:%d", store.path, host, server.port)
        server.serve_forever()
