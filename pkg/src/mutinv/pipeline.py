"""Closed-loop runs, mutant screening and feature extraction."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dsl import DslRuntimeError, Program, evaluate
from .learner import Dataset, feature_names
from .mutation import Mutant
from .plant import ActuatorState, PlantConfig, PlantState, read_sensors, step

POSITIVE = "positive"
DEFAULT_INITIAL_LEVELS = (300.0, 500.0, 800.0)
EQUIVALENCE_EPS_MM = 1e-6
DUPLICATE_EPS_MM = 1.0


@dataclass
class Trace:
    label: str
    init_id: str
    times: np.ndarray
    levels: np.ndarray  # (frames, tanks)
    coverage: frozenset[int]
    dt_s: float
    seed: int = 0
    config_hash: str = ""
    aborted_tick: int | None = None
    error: str | None = None

    @property
    def n_frames(self) -> int:
        return int(self.levels.shape[0])

    @property
    def duration_s(self) -> float:
        return (self.n_frames - 1) * self.dt_s

    @property
    def is_positive(self) -> bool:
        return self.label == POSITIVE

    def sidecar(self) -> dict:
        return {
            "label": self.label,
            "init_id": self.init_id,
            "seed": self.seed,
            "dt_s": self.dt_s,
            "frames": self.n_frames,
            "coverage": sorted(self.coverage),
            "config_hash": self.config_hash,
            "aborted_tick": self.aborted_tick,
            "error": self.error,
        }


class ClosedLoopError(RuntimeError):
    """A controller fault stopped the run; ``trace`` holds the frames up to it."""

    def __init__(self, tick: int, cause: DslRuntimeError, trace: Trace):
        super().__init__(f"tick {tick}: {cause}")
        self.tick = tick
        self.cause = cause
        self.trace = trace


def tick_count(duration_s: float, dt_s: float) -> int:
    n = round(duration_s / dt_s)
    if n < 1 or abs(n * dt_s - duration_s) > 1e-9 * max(1.0, duration_s):
        raise ValueError(f"duration {duration_s} s is not a positive multiple of dt {dt_s} s")
    return n


def run_closed_loop(
    program: Program,
    cfg: PlantConfig,
    init: PlantState,
    duration_s: float,
    seed: int = 0,
    label: str = POSITIVE,
    init_id: str = "s0",
    actuators: ActuatorState | None = None,
) -> Trace:
    """Alternate one scan cycle and one plant step per tick.

    Frame 0 is the initial reading; frame ``i + 1`` is read after the
    ``i``-th step, so a run of ``n`` ticks has ``n + 1`` frames.
    """
    n = tick_count(duration_s, cfg.dt_s)
    rng = random.Random(seed)
    act = actuators or ActuatorState.all_off(cfg)
    act_map = act.to_mapping(cfg)
    names = cfg.sensor_names
    state = init
    frame = read_sensors(state, cfg, rng)
    rows = [frame.levels_mm]
    times = [frame.timestamp_s]
    covered: set[int] = set()
    for tick in range(n):
        try:
            act_map, cov = evaluate(program, dict(zip(names, frame.levels_mm)), act_map)
        except DslRuntimeError as exc:
            partial = Trace(label, init_id, np.asarray(times), np.asarray(rows), frozenset(covered),
                            cfg.dt_s, seed, aborted_tick=tick, error=str(exc))
            raise ClosedLoopError(tick, exc, partial) from exc
        covered |= cov
        state = step(state, ActuatorState.from_mapping(cfg, act_map), cfg)
        frame = read_sensors(state, cfg, rng)
        rows.append(frame.levels_mm)
        times.append(frame.timestamp_s)
    return Trace(label, init_id, np.asarray(times), np.asarray(rows, dtype=np.float64),
                 frozenset(covered), cfg.dt_s, seed)


def run_or_abort(program, cfg, init, duration_s, seed=0, label=POSITIVE, init_id="s0") -> Trace:
    """Like :func:`run_closed_loop` but returns the truncated trace on a fault."""
    try:
        return run_closed_loop(program, cfg, init, duration_s, seed, label, init_id)
    except ClosedLoopError as exc:
        return exc.trace


@dataclass(frozen=True)
class ScreenVerdict:
    mutant_id: str
    verdict: str  # unexercised | equivalent | distinct
    max_deviation_mm: float
    covered: bool
    per_state_deviation: dict = field(default_factory=dict)
    aborted: bool = False

    def to_dict(self) -> dict:
        return {
            "mutant_id": self.mutant_id,
            "verdict": self.verdict,
            "max_deviation_mm": self.max_deviation_mm,
            "covered": self.covered,
            "per_state_deviation": self.per_state_deviation,
            "aborted": self.aborted,
        }


def max_deviation(a: Trace, b: Trace) -> float:
    """Largest level difference over the frames both traces have."""
    n = min(a.n_frames, b.n_frames)
    if n == 0:
        return 0.0
    return float(np.max(np.abs(a.levels[:n] - b.levels[:n])))


def _pair(mutant_traces: Sequence[Trace], positive_traces: Sequence[Trace]) -> list[tuple[Trace, Trace]]:
    pos = {t.init_id: t for t in positive_traces}
    mut = {t.init_id: t for t in mutant_traces}
    if set(pos) != set(mut) or len(pos) != len(positive_traces) or len(mut) != len(mutant_traces):
        raise ValueError(f"unpaired initial states: mutant {sorted(mut)} vs positive {sorted(pos)}")
    return [(mut[k], pos[k]) for k in sorted(pos)]


def screen(
    mutant: Mutant,
    mutant_traces: Sequence[Trace],
    positive_traces: Sequence[Trace],
    epsilon_mm: float = EQUIVALENCE_EPS_MM,
) -> ScreenVerdict:
    """Classify a mutant as unexercised, equivalent or distinct.

    A run that faulted counts as distinct behaviour and is flagged
    ``aborted``.
    """
    pairs = _pair(mutant_traces, positive_traces)
    covered = any(mutant.node_id in m.coverage for m, _ in pairs)
    per_state = {m.init_id: max_deviation(m, p) for m, p in pairs}
    worst = max(per_state.values(), default=0.0)
    aborted = any(m.aborted_tick is not None for m, _ in pairs)
    if not covered and not aborted:
        verdict = "unexercised"
    elif worst <= epsilon_mm and not aborted:
        verdict = "equivalent"
    else:
        verdict = "distinct"
    return ScreenVerdict(mutant.id, verdict, worst, covered, per_state, aborted)


def drop_similar(
    candidates: Sequence[str], traces: dict[str, Sequence[Trace]], epsilon_mm: float = DUPLICATE_EPS_MM
) -> tuple[list[str], dict[str, str]]:
    """Keep the first of every group of mutants whose traces agree within ``epsilon_mm``.

    Returns the kept ids and a map from each dropped id to the kept id it duplicates.
    """
    kept: list[str] = []
    dropped: dict[str, str] = {}
    for mid in candidates:
        mine = {t.init_id: t for t in traces[mid]}
        for other in kept:
            theirs = {t.init_id: t for t in traces[other]}
            if all(
                mine[k].n_frames == theirs[k].n_frames and max_deviation(mine[k], theirs[k]) <= epsilon_mm
                for k in mine
            ):
                dropped[mid] = other
                break
        else:
            kept.append(mid)
    return kept, dropped


def extract_features(t: Trace, stride_ticks: int = 1) -> Dataset:
    """Pair each sampled frame with the frame one tick later."""
    if t.n_frames < 2:
        raise ValueError("trace needs at least two frames")
    if stride_ticks < 1:
        raise ValueError("stride must be >= 1")
    idx = np.arange(0, t.n_frames - 1, stride_ticks)
    X = np.hstack([t.levels[idx], t.levels[idx + 1]])
    y = np.full(len(idx), 1 if t.is_positive else -1, dtype=np.int64)
    return Dataset(X, y, feature_names(t.levels.shape[1]))


def build_dataset(traces: Sequence[Trace], stride_ticks: int = 1) -> Dataset:
    return Dataset.concat([extract_features(t, stride_ticks) for t in traces])


def uniform_initial_states(cfg: PlantConfig, levels: Sequence[float] = DEFAULT_INITIAL_LEVELS) -> dict[str, PlantState]:
    """One initial state per level, every tank starting at that level."""
    from .plant import make_plant

    return {f"s{i}": make_plant(cfg, [lv] * cfg.n_tanks) for i, lv in enumerate(levels)}


# --- file formats --------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace(t: Trace, csv_path: str | Path, sensor_names: Sequence[str]) -> None:
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *sensor_names])
        for ts, row in zip(t.times, t.levels):
            w.writerow([_fmt(ts), *(_fmt(v) for v in row)])
    with open(csv_path.with_suffix(".json"), "w", encoding="utf-8") as fh:
        json.dump(t.sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_trace(csv_path: str | Path) -> Trace:
    csv_path = Path(csv_path)
    with open(csv_path.with_suffix(".json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    return Trace(
        label=meta["label"],
        init_id=meta["init_id"],
        times=data[:, 0].copy(),
        levels=data[:, 1:].copy(),
        coverage=frozenset(meta["coverage"]),
        dt_s=float(meta["dt_s"]),
        seed=int(meta["seed"]),
        config_hash=meta.get("config_hash", ""),
        aborted_tick=meta.get("aborted_tick"),
        error=meta.get("error"),
    )


def write_features(d: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.names, "label"])
        for row, label in zip(d.X, d.y):
            w.writerow([*(_fmt(v) for v in row), int(label)])


def read_features(path: str | Path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(data[:, :-1], data[:, -1].astype(np.int64), tuple(header[:-1]))
