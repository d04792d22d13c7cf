"""Discrete-time mass-balance model of a small multi-tank water plant.

Levels are in millimetres and every tank shares the same cross-section, so a
transfer of ``x`` mm out of one tank adds ``x`` mm to its destination.  The
integrator is explicit Euler with clamping to ``[0, capacity]``.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

__all__ = [
    "PlantConfigError",
    "TankSpec",
    "LinkSpec",
    "PlantConfig",
    "PlantState",
    "ActuatorState",
    "SensorFrame",
    "default_config",
    "load_config",
    "make_plant",
    "step",
    "read_sensors",
]


class PlantConfigError(ValueError):
    pass


def _suffix(tank_id: str) -> str:
    return tank_id[1:] if tank_id[:1] in ("T", "t") and len(tank_id) > 1 else tank_id


@dataclass(frozen=True)
class TankSpec:
    id: str
    capacity_mm: float
    inflow_rate_mm_per_s: float = 0.0
    drain_rate_mm_per_s: float = 0.0
    initial_level_mm: float = 0.0

    @property
    def sensor(self) -> str:
        return "L" + _suffix(self.id)

    @property
    def pump(self) -> str:
        return "P" + _suffix(self.id)

    @property
    def drain(self) -> str:
        return "D" + _suffix(self.id)


@dataclass(frozen=True)
class LinkSpec:
    source: str
    destination: str
    transfer_rate_mm_per_s: float

    @property
    def valve(self) -> str:
        return "V" + _suffix(self.source) + _suffix(self.destination)


@dataclass(frozen=True)
class PlantConfig:
    tanks: tuple[TankSpec, ...]
    links: tuple[LinkSpec, ...] = ()
    dt_s: float = 0.25
    noise_std_mm: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tanks", tuple(self.tanks))
        object.__setattr__(self, "links", tuple(self.links))

    @property
    def n_tanks(self) -> int:
        return len(self.tanks)

    @property
    def sensor_names(self) -> tuple[str, ...]:
        return tuple(t.sensor for t in self.tanks)

    @property
    def actuator_names(self) -> tuple[str, ...]:
        return (
            tuple(t.pump for t in self.tanks)
            + tuple(link.valve for link in self.links)
            + tuple(t.drain for t in self.tanks)
        )

    def tank_index(self, tank_id: str) -> int:
        for i, t in enumerate(self.tanks):
            if t.id == tank_id:
                return i
        raise PlantConfigError(f"unknown tank {tank_id!r}")

    def validate(self) -> None:
        """Raise :class:`PlantConfigError` on the first violated invariant."""
        if not self.tanks:
            raise PlantConfigError("plant has no tanks")
        if not (self.dt_s > 0) or not math.isfinite(self.dt_s):
            raise PlantConfigError("non-positive timestep")
        if self.noise_std_mm < 0:
            raise PlantConfigError("negative noise standard deviation")
        ids = [t.id for t in self.tanks]
        if len(set(ids)) != len(ids):
            raise PlantConfigError("duplicate tank id")
        for t in self.tanks:
            if not (t.capacity_mm > 0):
                raise PlantConfigError(f"tank {t.id}: non-positive capacity")
            if t.inflow_rate_mm_per_s < 0 or t.drain_rate_mm_per_s < 0:
                raise PlantConfigError(f"tank {t.id}: negative rate")
            if not 0 <= t.initial_level_mm <= t.capacity_mm:
                raise PlantConfigError(f"tank {t.id}: initial level outside [0, capacity]")
        for link in self.links:
            self.tank_index(link.source)
            self.tank_index(link.destination)
            if link.transfer_rate_mm_per_s < 0:
                raise PlantConfigError(f"link {link.valve}: negative rate")
            if link.source == link.destination:
                raise PlantConfigError("cyclic topology")
        if _has_cycle(ids, [(l.source, l.destination) for l in self.links]):
            raise PlantConfigError("cyclic topology")
        names = self.sensor_names + self.actuator_names
        if len(set(names)) != len(names):
            raise PlantConfigError("tank ids produce clashing sensor/actuator names")

    def to_dict(self) -> dict:
        return {
            "dt_s": self.dt_s,
            "noise_std_mm": self.noise_std_mm,
            "tanks": [
                {
                    "id": t.id,
                    "capacity_mm": t.capacity_mm,
                    "inflow_rate_mm_per_s": t.inflow_rate_mm_per_s,
                    "drain_rate_mm_per_s": t.drain_rate_mm_per_s,
                    "initial_level_mm": t.initial_level_mm,
                }
                for t in self.tanks
            ],
            "links": [
                {
                    "source": l.source,
                    "destination": l.destination,
                    "transfer_rate_mm_per_s": l.transfer_rate_mm_per_s,
                }
                for l in self.links
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PlantConfig":
        try:
            tanks = tuple(
                TankSpec(
                    id=str(t["id"]),
                    capacity_mm=float(t["capacity_mm"]),
                    inflow_rate_mm_per_s=float(t.get("inflow_rate_mm_per_s", 0.0)),
                    drain_rate_mm_per_s=float(t.get("drain_rate_mm_per_s", 0.0)),
                    initial_level_mm=float(t.get("initial_level_mm", 0.0)),
                )
                for t in doc["tanks"]
            )
            links = tuple(
                LinkSpec(
                    source=str(l["source"]),
                    destination=str(l["destination"]),
                    transfer_rate_mm_per_s=float(l["transfer_rate_mm_per_s"]),
                )
                for l in doc.get("links", ())
            )
            return cls(
                tanks=tanks,
                links=links,
                dt_s=float(doc.get("dt_s", 0.25)),
                noise_std_mm=float(doc.get("noise_std_mm", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise PlantConfigError(f"malformed plant config: {exc}") from exc


def _has_cycle(nodes: Sequence[str], edges: Sequence[tuple[str, str]]) -> bool:
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        succ[a].append(b)
    colour = dict.fromkeys(nodes, 0)

    def visit(n: str) -> bool:
        colour[n] = 1
        for m in succ[n]:
            if colour[m] == 1 or (colour[m] == 0 and visit(m)):
                return True
        colour[n] = 2
        return False

    return any(colour[n] == 0 and visit(n) for n in nodes)


def default_config() -> PlantConfig:
    """Five-tank serial cascade T1 -> T2 -> ... -> T5 with inlet at T1, drain at T5."""
    return load_config(Path(__file__).with_name("data") / "plant.json")


def load_config(path: str | Path) -> PlantConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PlantConfigError(f"{path}: {exc}") from None
    cfg = PlantConfig.from_dict(doc)
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class PlantState:
    levels_mm: tuple[float, ...]
    clock_s: float = 0.0


@dataclass(frozen=True)
class ActuatorState:
    """On/off state of every actuator, in :attr:`PlantConfig.actuator_names` order."""

    pumps: tuple[bool, ...]
    valves: tuple[bool, ...]
    drains: tuple[bool, ...]

    @classmethod
    def all_off(cls, config: PlantConfig) -> "ActuatorState":
        n = config.n_tanks
        return cls((False,) * n, (False,) * len(config.links), (False,) * n)

    def to_mapping(self, config: PlantConfig) -> dict[str, float]:
        flags = self.pumps + self.valves + self.drains
        return {name: 1.0 if on else 0.0 for name, on in zip(config.actuator_names, flags)}

    @classmethod
    def from_mapping(cls, config: PlantConfig, values: Mapping[str, float]) -> "ActuatorState":
        n, m = config.n_tanks, len(config.links)
        flags = tuple(bool(values[name]) for name in config.actuator_names)
        return cls(flags[:n], flags[n:n + m], flags[n + m:])


@dataclass(frozen=True)
class SensorFrame:
    timestamp_s: float
    levels_mm: tuple[float, ...]

    def to_mapping(self, config: PlantConfig) -> dict[str, float]:
        return dict(zip(config.sensor_names, self.levels_mm))


def make_plant(config: PlantConfig, initial_levels: Sequence[float] | None = None) -> PlantState:
    config.validate()
    if initial_levels is None:
        levels = tuple(float(t.initial_level_mm) for t in config.tanks)
    else:
        levels = tuple(float(x) for x in initial_levels)
        if len(levels) != config.n_tanks:
            raise PlantConfigError("initial level count does not match tank count")
        for t, lv in zip(config.tanks, levels):
            if not 0 <= lv <= t.capacity_mm:
                raise PlantConfigError(f"tank {t.id}: initial level outside [0, capacity]")
    return PlantState(levels, 0.0)


@dataclass
class _Topology:
    # integer-indexed view of a PlantConfig, cached per config object
    capacity: list[float]
    inflow: list[float]
    drain: list[float]
    links: list[tuple[int, int, float]] = field(default_factory=list)


_TOPOLOGY_CACHE: dict[int, tuple[PlantConfig, _Topology]] = {}


def _topology(config: PlantConfig) -> _Topology:
    hit = _TOPOLOGY_CACHE.get(id(config))
    if hit is not None and hit[0] is config:
        return hit[1]
    topo = _Topology(
        capacity=[t.capacity_mm for t in config.tanks],
        inflow=[t.inflow_rate_mm_per_s for t in config.tanks],
        drain=[t.drain_rate_mm_per_s for t in config.tanks],
        links=[
            (config.tank_index(l.source), config.tank_index(l.destination), l.transfer_rate_mm_per_s)
            for l in config.links
        ],
    )
    _TOPOLOGY_CACHE[id(config)] = (config, topo)
    return topo


def step(state: PlantState, act: ActuatorState, config: PlantConfig) -> PlantState:
    """Advance the plant by one timestep.

    Outflows (links and drains) are requested simultaneously from the
    start-of-step levels; when a tank cannot supply everything requested, each
    of its outflows is scaled by the same factor.  Inflows from the inlet pump
    and upstream links are then added and the result clamped to capacity.
    """
    topo = _topology(config)
    dt = config.dt_s
    levels = state.levels_mm
    n = len(levels)

    requested = [topo.drain[i] * dt if act.drains[i] else 0.0 for i in range(n)]
    for (src, _dst, rate), is_open in zip(topo.links, act.valves):
        if is_open:
            requested[src] += rate * dt
    scale = [
        1.0 if requested[i] <= levels[i] else (levels[i] / requested[i] if requested[i] > 0 else 1.0)
        for i in range(n)
    ]

    delta = [topo.inflow[i] * dt if act.pumps[i] else 0.0 for i in range(n)]
    for i in range(n):
        if act.drains[i]:
            delta[i] -= topo.drain[i] * dt * scale[i]
    for (src, dst, rate), is_open in zip(topo.links, act.valves):
        if is_open:
            moved = rate * dt * scale[src]
            delta[src] -= moved
            delta[dst] += moved

    new_levels = tuple(
        min(max(levels[i] + delta[i], 0.0), topo.capacity[i]) for i in range(n)
    )
    return PlantState(new_levels, state.clock_s + dt)


def read_sensors(state: PlantState, config: PlantConfig, rng: random.Random | None = None) -> SensorFrame:
    """Sample the level sensors; Gaussian noise is added only when configured."""
    sigma = config.noise_std_mm
    if sigma == 0:
        return SensorFrame(state.clock_s, state.levels_mm)
    if rng is None:
        raise ValueError("noisy sensors need an rng")
    return SensorFrame(state.clock_s, tuple(lv + rng.gauss(0.0, sigma) for lv in state.levels_mm))
