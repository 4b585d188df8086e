"""Scenario-driven Monte-Carlo runs and their reports.

A scenario describes one patch panel of ``pairs`` fiber/connector tag pairs
read from ``tag_distance`` cm, and a protocol/link configuration. Trial ``i``
reuses the same panel with seed ``seed + i``.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidScenario, OndrError
from .inventory import ProtocolConfig, QAdapt, run_inventory
from .link import LinkParams, reader_profile
from .model import ConnectionDb, Epc, PanelLayout, Registry, SpiMode, TagKind, TagRecord, panel_density
from .pairing import verify_all, verify_all_baseline

SCENARIO_VERSION = 1
CM_PER_INCH = 2.54
FIBER_PREFIX = 0xF1B << 84
CONNECTOR_PREFIX = 0xC0E << 84


class Mode(enum.Enum):
    SPI_VERIFY = "spi_verify"
    BASELINE = "baseline"
    INVENTORY_ONLY = "inventory_only"


@dataclass(frozen=True)
class PanelConfig:
    # 60 tag positions on 11.76 sq in gives 5.1 tags per square inch
    width: float = 4.2
    height: float = 2.8
    cols: int = 10
    rows: int = 6


@dataclass(frozen=True)
class LinkConfig:
    tx_power: float = 30.0
    frequency: float = 915.0
    path_loss_exponent: float = 2.0
    fixed_loss: Optional[float] = None
    rssi_floor: float = -60.0
    reference_distance: float = 10.0
    saturation_margin: float = 6.0
    peak_rate: float = 119.0
    p_base: float = 0.01

    def build(self) -> LinkParams:
        kw = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        if kw["fixed_loss"] is None:
            del kw["fixed_loss"]
        return reader_profile(**kw)


@dataclass(frozen=True)
class ProtocolSettings:
    initial_q: int = 4
    q_adapt: str = "adaptive"
    c: float = 0.3
    t_success: float = 1.0 / 119.0
    t_collision: float = 4.8e-3
    t_empty: float = 1.2e-3
    time_budget: float = 1.0

    def build(self, seed: int) -> ProtocolConfig:
        kw = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        kw["q_adapt"] = QAdapt(kw["q_adapt"])
        return ProtocolConfig(rng_seed=seed, **kw)


@dataclass(frozen=True)
class ScenarioConfig:
    version: int = SCENARIO_VERSION
    pairs: int = 30
    mode: str = "spi_verify"
    trials: int = 100
    seed: int = 1
    tag_distance: float = 30.0
    thresholds: tuple[float, ...] = (0.6, 1.0)
    histogram_bin: float = 0.05
    exchange_cost: float = 0.0
    panel: PanelConfig = field(default_factory=PanelConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    protocol: ProtocolSettings = field(default_factory=ProtocolSettings)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["thresholds"] = list(self.thresholds)
        return d


_NESTED = {"panel": PanelConfig, "link": LinkConfig, "protocol": ProtocolSettings}


def _coerce(name, value, default, problems):
    if isinstance(default, bool) or isinstance(value, bool):
        problems.append(f"{name}: booleans are not accepted")
        return default
    if isinstance(default, int) and default is not None and not isinstance(default, float):
        if isinstance(value, int):
            return value
        problems.append(f"{name}: expected an integer, got {value!r}")
        return default
    if isinstance(default, float) or default is None:
        if isinstance(value, (int, float)) or (default is None and value is None):
            return None if value is None else float(value)
        problems.append(f"{name}: expected a number, got {value!r}")
        return default
    if isinstance(default, str):
        if isinstance(value, str):
            return value
        problems.append(f"{name}: expected a string, got {value!r}")
        return default
    if isinstance(default, tuple):
        if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return tuple(float(v) for v in value)
        problems.append(f"{name}: expected a list of numbers, got {value!r}")
        return default
    return value


def _build(cls, data, prefix, problems):
    if not isinstance(data, dict):
        problems.append(f"{prefix or 'scenario'}: expected an object")
        return cls()
    known = {f.name: f for f in dataclasses.fields(cls)}
    defaults = cls()
    kw = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if key not in known:
            problems.append(f"{name}: unknown field")
            continue
        if key in _NESTED and cls is ScenarioConfig:
            kw[key] = _build(_NESTED[key], value, f"{key}.", problems)
        else:
            kw[key] = _coerce(name, value, getattr(defaults, key), problems)
    return cls(**kw)


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    problems = []
    if cfg.version != SCENARIO_VERSION:
        problems.append(f"version: unsupported scenario version {cfg.version}")
    if cfg.pairs < 0:
        problems.append("pairs: must be >= 0")
    if cfg.trials < 1:
        problems.append("trials: must be >= 1")
    if cfg.mode not in {m.value for m in Mode}:
        problems.append(f"mode: expected one of {[m.value for m in Mode]}, got {cfg.mode!r}")
    if not cfg.tag_distance > 0:
        problems.append("tag_distance: must be > 0 cm")
    if not cfg.histogram_bin > 0:
        problems.append("histogram_bin: must be > 0")
    if cfg.exchange_cost < 0:
        problems.append("exchange_cost: must be >= 0")
    p = cfg.panel
    if not (p.width > 0 and p.height > 0):
        problems.append("panel: width and height must be > 0 in")
    if p.cols < 1 or p.rows < 1:
        problems.append("panel: cols and rows must be >= 1")
    elif 2 * cfg.pairs > p.cols * p.rows:
        problems.append(f"panel: {2 * cfg.pairs} tags do not fit a {p.cols}x{p.rows} grid")
    for sub, build in (("link", lambda: cfg.link.build()), ("protocol", lambda: cfg.protocol.build(cfg.seed))):
        try:
            build()
        except (OndrError, ValueError) as err:
            problems.append(f"{sub}: {err}")
    return problems


def scenario_from_dict(data: dict) -> ScenarioConfig:
    problems: list[str] = []
    cfg = _build(ScenarioConfig, data, "", problems)
    if isinstance(data, dict) and "version" not in data:
        problems.append("version: required")
    if not problems:
        problems = validate_scenario(cfg)
    if problems:
        raise InvalidScenario(problems)
    return cfg


def load_scenario(path) -> ScenarioConfig:
    """Read a scenario JSON file. Raises FileNotFoundError or InvalidScenario."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InvalidScenario(f"{path}: invalid JSON ({err})") from None
    return scenario_from_dict(data)


def fiber_epc(i: int) -> Epc:
    return Epc(FIBER_PREFIX | i)


def connector_epc(i: int) -> Epc:
    return Epc(CONNECTOR_PREFIX | i)


def distance_cm(reader_distance: float, position, center) -> float:
    """Straight-line distance from an antenna ``reader_distance`` cm in front of ``center``."""
    dx = (position[0] - center[0]) * CM_PER_INCH
    dy = (position[1] - center[1]) * CM_PER_INCH
    return math.sqrt(reader_distance ** 2 + dx * dx + dy * dy)


@dataclass
class Panel:
    layout: PanelLayout
    registry: Registry
    db: ConnectionDb
    population: list[tuple[Epc, float]]


def build_panel(pairs: int, layout: PanelLayout, reader_distance: float) -> Panel:
    """Correctly patched panel: fiber i sits in slot 2i, its connector in slot 2i+1."""
    registry = Registry()
    for i in range(pairs):
        f, c = fiber_epc(i), connector_epc(i)
        registry.register(TagRecord(f, TagKind.FIBER, SpiMode.MASTER, position=layout.slots[2 * i]))
        registry.register(TagRecord(c, TagKind.CONNECTOR, SpiMode.SLAVE, position=layout.slots[2 * i + 1]))
        registry.attach(f, c)
    db = ConnectionDb(registry)
    for i in range(pairs):
        db.record_connection(fiber_epc(i), connector_epc(i), created_at=i)
    center = layout.center
    population = [(t.epc, distance_cm(reader_distance, t.position, center)) for t in registry]
    return Panel(layout, registry, db, population)


def panel_for(cfg: ScenarioConfig) -> Panel:
    p = cfg.panel
    layout = PanelLayout.grid(p.width, p.height, p.cols, p.rows, count=2 * cfg.pairs)
    return build_panel(cfg.pairs, layout, cfg.tag_distance)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    elapsed: float
    identifications: int
    complete: bool
    problems: int = 0


@dataclass
class MetricsReport:
    config: ScenarioConfig
    trials: list[TrialResult]
    density: float

    @property
    def elapsed(self) -> np.ndarray:
        return np.array([t.elapsed for t in self.trials], dtype=float)

    def fraction_within(self, seconds: float) -> float:
        return sum(1 for t in self.trials if t.complete and t.elapsed <= seconds) / len(self.trials)

    @property
    def efficiency(self) -> float:
        return sum(1 for t in self.trials if t.complete) / len(self.trials)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.elapsed, q))

    @property
    def identification_counts(self) -> list[int]:
        return [t.identifications for t in self.trials]

    def histogram(self) -> list[tuple[float, float, int]]:
        """(lo, hi, count) bins of width ``histogram_bin`` covering every trial."""
        w = self.config.histogram_bin
        top = max(1, int(math.floor(self.elapsed.max() / w)) + 1)
        counts = [0] * top
        for e in self.elapsed:
            counts[min(int(e // w), top - 1)] += 1
        return [(i * w, (i + 1) * w, n) for i, n in enumerate(counts)]


def run_trial(cfg: ScenarioConfig, panel: Panel, trial: int) -> TrialResult:
    seed = cfg.seed + trial
    link = cfg.link.build()
    proto = cfg.protocol.build(seed)
    mode = Mode(cfg.mode)
    if mode is Mode.INVENTORY_ONLY:
        log = run_inventory(panel.population, link, proto)
        elapsed, ids, complete, problems = log.elapsed, log.successes, log.complete, 0
    else:
        if mode is Mode.SPI_VERIFY:
            rep = verify_all(panel.db, panel.population, link, proto, exchange_cost=cfg.exchange_cost)
        else:
            rep = verify_all_baseline(panel.db, panel.population, link, proto)
        elapsed, ids, complete, problems = rep.elapsed, rep.reader_identifications, rep.complete, len(rep.problems())
    complete = complete and elapsed <= proto.time_budget
    return TrialResult(trial, seed, elapsed, ids, complete, problems)


def run_scenario(cfg: ScenarioConfig) -> MetricsReport:
    problems = validate_scenario(cfg)
    if problems:
        raise InvalidScenario(problems)
    panel = panel_for(cfg)
    results = [run_trial(cfg, panel, i) for i in range(cfg.trials)]
    return MetricsReport(cfg, results, panel_density(panel.layout))


def emit_report(report: MetricsReport, fmt: str = "summary-text") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "elapsed_s", "identifications", "complete"])
        for t in report.trials:
            w.writerow([t.trial, repr(t.elapsed), t.identifications, int(t.complete)])
        return buf.getvalue()
    if fmt != "summary-text":
        raise ValueError(f"unknown report format {fmt!r}")
    cfg = report.config
    lines = [
        f"mode            {cfg.mode}",
        f"pairs           {cfg.pairs}",
        f"trials          {len(report.trials)}",
        f"density         {report.density:.4f} tags/sq in",
        f"efficiency      {report.efficiency:.4f}",
        f"mean            {float(report.elapsed.mean()):.6f} s",
    ]
    for name, q in (("p50", 0.5), ("p80", 0.8), ("p95", 0.95)):
        lines.append(f"{name:<16}{report.quantile(q):.6f} s")
    for t in cfg.thresholds:
        lines.append(f"within {t:<9g}{report.fraction_within(t):.4f}")
    ids = report.identification_counts
    lines.append(f"identifications min {min(ids)} max {max(ids)}")
    lines.append("histogram")
    for lo, hi, n in report.histogram():
        lines.append(f"  {lo:6.3f}-{hi:6.3f} s {n:5d} {'#' * n}")
    return "\n".join(lines) + "\n"


def summary_dict(report: MetricsReport) -> dict:
    return {
        "mode": report.config.mode,
        "pairs": report.config.pairs,
        "trials": len(report.trials),
        "density": report.density,
        "efficiency": report.efficiency,
        "p50": report.quantile(0.5),
        "p80": report.quantile(0.8),
        "p95": report.quantile(0.95),
        "fraction_within": {repr(t): report.fraction_within(t) for t in report.config.thresholds},
        "identifications": report.identification_counts,
    }
