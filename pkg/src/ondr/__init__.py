"""Desk-scale simulator and management store for RFID-tagged fiber patch panels."""

from .model import ConnectionDb, Epc, PanelLayout, Registry, TagRecord, panel_density, parse_epc
from .link import LinkParams, is_readable, miss_probability, read_rate, rssi_at
from .inventory import InventoryLog, ProtocolConfig, run_inventory, run_round
from .pairing import verify_all, verify_all_baseline
from .harness import ScenarioConfig, run_scenario

__all__ = [
    "ConnectionDb", "Epc", "PanelLayout", "Registry", "TagRecord", "panel_density", "parse_epc",
    "LinkParams", "is_readable", "miss_probability", "read_rate", "rssi_at",
    "InventoryLog", "ProtocolConfig", "run_inventory", "run_round",
    "verify_all", "verify_all_baseline", "ScenarioConfig", "run_scenario",
]
__version__ = "0.1.0"
