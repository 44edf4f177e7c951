"""Traffic-scenario catalog and event risk labeling."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import RiskClass


class CatalogError(ValueError):
    """Raised for malformed catalogs or unknown event ids."""


@dataclass(frozen=True)
class ScenarioEntry:
    event_id: int
    description: str
    count: int
    risk: RiskClass
    spec: dict


@dataclass(frozen=True)
class ScenarioCatalog:
    """The 14 scenario definitions keyed by event id."""

    entries: tuple[ScenarioEntry, ...]

    def __post_init__(self):
        if len(self.entries) != 14:
            raise CatalogError(f"expected 14 catalog entries, got {len(self.entries)}")
        ids = sorted(e.event_id for e in self.entries)
        if ids != list(range(1, 15)):
            raise CatalogError(f"catalog ids must be 1..14, got {ids}")
        for e in self.entries:
            if e.risk not in (RiskClass.LOW_RISK, RiskClass.HIGH_RISK):
                raise CatalogError(f"event {e.event_id} has scenario risk {e.risk}")
            if e.count <= 0:
                raise CatalogError(f"event {e.event_id} has non-positive count")

    def __getitem__(self, event_id: int) -> ScenarioEntry:
        for e in self.entries:
            if e.event_id == event_id:
                return e
        raise CatalogError(f"unknown event id {event_id}")

    def __iter__(self):
        return iter(self.entries)

    def total_count(self) -> int:
        return sum(e.count for e in self.entries)

    def counts(self) -> dict[int, int]:
        return {e.event_id: e.count for e in self.entries}


_RISK_NAMES = {"high": RiskClass.HIGH_RISK, "low": RiskClass.LOW_RISK}


def load_catalog(path: str | Path | None = None) -> ScenarioCatalog:
    """Load the scenario catalog from JSON; the shipped default when path is None."""
    if path is None:
        text = resources.files("peds.data").joinpath("scenario_catalog.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    if doc.get("format") != "peds-scenario-catalog":
        raise CatalogError("not a scenario catalog file")
    entries = []
    for ev in doc["events"]:
        risk = _RISK_NAMES.get(ev["risk"])
        if risk is None:
            raise CatalogError(f"event {ev.get('id')}: unknown risk {ev.get('risk')!r}")
        entries.append(ScenarioEntry(event_id=int(ev["id"]), description=str(ev["description"]),
                                     count=int(ev["count"]), risk=risk, spec=dict(ev.get("spec", {}))))
    return ScenarioCatalog(entries=tuple(entries))


def classify_event(catalog: ScenarioCatalog, event_id: int) -> RiskClass:
    """Risk class of an event id; 0 is the safe pseudo-event."""
    if event_id == 0:
        return RiskClass.SAFE
    return catalog[event_id].risk
