"""Experiment configuration and the five pipeline stages behind the CLI.

An experiment directory holds everything one run produced::

    config.json              effective configuration and its hash
    plant.json, controller.ctl
    traces/positive/s0.csv   one CSV and JSON sidecar per (label, initial state)
    traces/M03/s0.csv
    mutants/manifest.json    sampled mutants with diffs; mutants/M03.ctl
    screen.json, screen.txt  screening verdicts
    features.csv, cv.json, model.json, train.txt
    individual/M03.json      per-mutant models (``train --individual``)
    smc.json, smc.txt        statistical validation
    report.json, report.txt  summary of all of the above

Every JSON artifact carries ``config_hash``.  Files are written from the
coordinating process in a fixed order and never mention the time or the
output directory, so re-running a configuration reproduces them byte for
byte, wherever the output goes.
"""

from __future__ import annotations

import copy
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

from . import __version__
from .dsl import Declarations, Program, parse, pretty_print
from .learner import (
    CvReport,
    Dataset,
    Hyperparams,
    LearnerError,
    LinearInvariant,
    cross_validate,
    extract_invariant,
    load_model_document,
    model_document,
    standardize,
    train_svm,
)
from .mutation import ALL_OPERATORS, Mutant, MutationOperator, generate_mutants, program_hash, write_manifest
from .pipeline import (
    POSITIVE,
    ClosedLoopError,
    ScreenVerdict,
    Trace,
    build_dataset,
    drop_similar,
    read_trace,
    run_closed_loop,
    run_or_abort,
    screen,
    write_features,
    write_trace,
)
from .plant import PlantConfig, PlantState, load_config, make_plant
from .smc import (
    ACCEPT_H0,
    SatisfactionSample,
    SprtConfig,
    SprtVerdict,
    check_invariant,
    chernoff_estimate,
    chernoff_sample_size,
    run_samples,
    sprt,
    vector_samples,
)

GRANULARITIES = ("vector", "run")


class ConfigError(ValueError):
    """The experiment configuration is malformed."""


class HashMismatchError(RuntimeError):
    """An input artifact was produced under a different configuration."""


class SimulationFault(RuntimeError):
    """The unmutated controller faulted during a run."""

    def __init__(self, label: str, init_id: str, cause: ClosedLoopError):
        super().__init__(f"{label}/{init_id}: controller fault at {cause}")
        self.cause = cause


def package_data(name: str) -> Path:
    return Path(str(resources.files("mutinv") / "data" / name))


DEFAULT_CONFIG_PATH = package_data("experiment.json")


# --- configuration ------------------------------------------------------


@dataclass
class MutationSettings:
    ops: tuple[str, ...] = tuple(op.value for op in ALL_OPERATORS)
    limit: int | None = 20
    seed: int = 0


@dataclass
class LearnerSettings:
    lam: float = 1e-4
    epochs: int = 50
    seed: int = 0
    k: int = 5
    stride: int = 1


@dataclass
class SmcSettings:
    theta: float = 0.98
    delta: float = 0.01
    alpha: float = 0.05
    beta: float = 0.05
    budget: int = 1_000_000
    granularity: str = "vector"
    epsilon: float = 0.01
    chernoff_delta: float = 0.05
    seed: int = 1000
    noise_std_mm: float = 0.5

    @property
    def sprt(self) -> SprtConfig:
        return SprtConfig(self.theta, self.delta, self.alpha, self.beta)


@dataclass
class ExperimentConfig:
    """Everything a pipeline run depends on.

    ``plant`` and ``controller`` are paths, resolved against the directory
    of the config file they were read from.
    """

    plant: Path
    controller: Path
    initial_levels_mm: tuple[float, ...] = (300.0, 500.0, 800.0)
    duration_s: float = 1800.0
    sim_seed: int = 0
    equivalence_eps_mm: float = 1e-6
    duplicate_eps_mm: float = 1.0
    mutation: MutationSettings = field(default_factory=MutationSettings)
    learner: LearnerSettings = field(default_factory=LearnerSettings)
    smc: SmcSettings = field(default_factory=SmcSettings)
    output_dir: Path = Path("runs/default")
    jobs: int = 1

    def __post_init__(self):
        self.plant = Path(self.plant)
        self.controller = Path(self.controller)
        self.output_dir = Path(self.output_dir)
        self.initial_levels_mm = tuple(float(v) for v in self.initial_levels_mm)
        self.mutation.ops = tuple(self.mutation.ops)
        self.check()

    def check(self) -> None:
        for p in (self.plant, self.controller):
            if not p.is_file():
                raise FileNotFoundError(f"file not found: {p}")
        if not self.initial_levels_mm:
            raise ConfigError("at least one initial level is required")
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        try:
            self.mutation.ops = tuple(MutationOperator(o.upper()).value for o in self.mutation.ops)
        except ValueError as exc:
            raise ConfigError(f"unknown mutation operator: {exc}") from None
        if self.mutation.limit is not None and self.mutation.limit < 1:
            raise ConfigError("mutation.limit must be >= 1 or null")
        if self.learner.k < 2:
            raise ConfigError("learner.k must be >= 2")
        if self.learner.stride < 1:
            raise ConfigError("learner.stride must be >= 1")
        if self.smc.granularity not in GRANULARITIES:
            raise ConfigError(f"smc.granularity must be one of {GRANULARITIES}")
        if self.smc.budget < 1:
            raise ConfigError("smc.budget must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.smc.sprt
        except ValueError as exc:
            raise ConfigError(f"smc: {exc}") from None

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | str = ".") -> "ExperimentConfig":
        base_dir = Path(base_dir)
        doc = copy.deepcopy(doc)
        known = {"plant", "controller", "initial_levels_mm", "duration_s", "sim_seed", "screening",
                 "mutation", "learner", "smc", "output_dir", "jobs"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("plant", "controller"):
            if key not in doc:
                raise ConfigError(f"missing config key: {key}")
        screening = doc.pop("screening", {})
        try:
            return cls(
                plant=base_dir / doc.pop("plant"),
                controller=base_dir / doc.pop("controller"),
                mutation=MutationSettings(**doc.pop("mutation", {})),
                learner=LearnerSettings(**doc.pop("learner", {})),
                smc=SmcSettings(**doc.pop("smc", {})),
                equivalence_eps_mm=screening.get("equivalence_eps_mm", 1e-6),
                duplicate_eps_mm=screening.get("duplicate_eps_mm", 1.0),
                **doc,
            )
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: Path | str | None = None) -> "ExperimentConfig":
        path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
        if not path.is_file():
            raise FileNotFoundError(f"file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(doc, path.parent)

    def hashed_fields(self) -> dict:
        """The inputs that determine traces, mutants and models.

        Files enter by content, not by path, and SMC settings and the output
        directory are left out: they do not change anything train consumes.
        """
        return {
            "plant_sha256": _sha256(self.plant.read_bytes()),
            "controller_sha256": _sha256(self.controller.read_bytes()),
            "initial_levels_mm": list(self.initial_levels_mm),
            "duration_s": self.duration_s,
            "sim_seed": self.sim_seed,
            "screening": {"equivalence_eps_mm": self.equivalence_eps_mm, "duplicate_eps_mm": self.duplicate_eps_mm},
            "mutation": {"ops": list(self.mutation.ops), "limit": self.mutation.limit, "seed": self.mutation.seed},
            "learner": vars(self.learner).copy(),
        }

    @property
    def config_hash(self) -> str:
        return _sha256(_canonical(self.hashed_fields()).encode())[:16]

    def to_dict(self) -> dict:
        return {
            "plant": str(self.plant),
            "controller": str(self.controller),
            "initial_levels_mm": list(self.initial_levels_mm),
            "duration_s": self.duration_s,
            "sim_seed": self.sim_seed,
            "screening": {"equivalence_eps_mm": self.equivalence_eps_mm, "duplicate_eps_mm": self.duplicate_eps_mm},
            "mutation": {"ops": list(self.mutation.ops), "limit": self.mutation.limit, "seed": self.mutation.seed},
            "learner": vars(self.learner).copy(),
            "smc": vars(self.smc).copy(),
            "jobs": self.jobs,
        }


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path):
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def _write_text(path: Path, lines: Sequence[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- parallel runs ---------------------------------------------------------


def _run_job(job):
    program, cfg, init, duration, seed, label, init_id = job
    return run_or_abort(program, cfg, init, duration, seed, label, init_id)


def _run_all(jobs: list, workers: int) -> list[Trace]:
    """Run closed-loop jobs, in parallel when ``workers > 1``; results keep job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# --- stage results ---------------------------------------------------------


@dataclass
class MutateResult:
    verdicts: list[ScreenVerdict]
    training: list[str]
    duplicates: dict[str, str]
    universe_size: int

    @property
    def counts(self) -> dict[str, int]:
        out = {"unexercised": 0, "equivalent": 0, "distinct": 0}
        for v in self.verdicts:
            out[v.verdict] += 1
        return out


@dataclass
class TrainResult:
    cv: CvReport
    invariant: LinearInvariant
    individual: dict[str, CvReport]


@dataclass
class ValidateResult:
    verdict: SprtVerdict
    p_hat: float
    chernoff_n: int
    runs: int


class Experiment:
    """The pipeline stages for one configuration and output directory."""

    def __init__(self, config: ExperimentConfig, out_dir: Path | str | None = None):
        self.config = config
        self.out = Path(out_dir) if out_dir is not None else config.output_dir
        self.plant: PlantConfig = load_config(config.plant)
        self.declarations = Declarations.from_plant(self.plant)
        self.program: Program = parse(config.controller.read_text(encoding="utf-8"), self.declarations)
        self.hash = config.config_hash

    # paths
    def trace_path(self, label: str, init_id: str) -> Path:
        return self.out / "traces" / label / f"{init_id}.csv"

    @property
    def initial_states(self) -> dict[str, PlantState]:
        n = self.plant.n_tanks
        return {f"s{i}": make_plant(self.plant, [lv] * n) for i, lv in enumerate(self.config.initial_levels_mm)}

    def _stamp(self, doc: dict) -> dict:
        doc["config_hash"] = self.hash
        return doc

    def _write_trace(self, t: Trace) -> None:
        t.config_hash = self.hash
        path = self.trace_path(t.label, t.init_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_trace(t, path, self.plant.sensor_names)

    def _load_traces(self, label: str) -> list[Trace]:
        traces = []
        for init_id in self.initial_states:
            path = self.trace_path(label, init_id)
            if not path.is_file():
                raise FileNotFoundError(f"file not found: {path}")
            t = read_trace(path)
            if t.config_hash != self.hash:
                raise HashMismatchError(
                    f"{path}: config hash {t.config_hash or '<none>'} does not match current config {self.hash}; "
                    "re-run the earlier stages with this configuration"
                )
            traces.append(t)
        return traces

    def _snapshot(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        _write_json(self.out / "config.json", self._stamp({"config": self.config.to_dict(),
                                                           "hashed": self.config.hashed_fields(),
                                                           "version": __version__}))
        (self.out / "plant.json").write_bytes(self.config.plant.read_bytes())
        (self.out / "controller.ctl").write_bytes(self.config.controller.read_bytes())

    # stages
    def simulate(self) -> list[Trace]:
        """Run the unmutated controller from every initial state and write positive traces."""
        traces = []
        for init_id, init in self.initial_states.items():
            try:
                t = run_closed_loop(self.program, self.plant, init, self.config.duration_s,
                                    self.config.sim_seed, POSITIVE, init_id)
            except ClosedLoopError as exc:
                raise SimulationFault(POSITIVE, init_id, exc) from exc
            traces.append(t)
        self._snapshot()
        for t in traces:
            self._write_trace(t)
        return traces

    def mutate(self) -> MutateResult:
        """Sample mutants, run each from every initial state, screen and pick training mutants."""
        positive = self._load_traces(POSITIVE)
        cfg = self.config
        mutants = generate_mutants(self.program, cfg.mutation.ops, cfg.mutation.limit, cfg.mutation.seed)
        states = self.initial_states
        jobs = [(m.program, self.plant, st, cfg.duration_s, cfg.sim_seed, m.id, sid)
                for m in mutants for sid, st in states.items()]
        results = _run_all(jobs, cfg.jobs)
        per_mutant: dict[str, list[Trace]] = {}
        for m_index, m in enumerate(mutants):
            per_mutant[m.id] = results[m_index * len(states):(m_index + 1) * len(states)]

        verdicts = [screen(m, per_mutant[m.id], positive, cfg.equivalence_eps_mm) for m in mutants]
        distinct = [v.mutant_id for v in verdicts if v.verdict == "distinct" and not v.aborted]
        training, duplicates = drop_similar(distinct, per_mutant, cfg.duplicate_eps_mm)

        mdir = self.out / "mutants"
        mdir.mkdir(parents=True, exist_ok=True)
        write_manifest(mdir / "manifest.json", self.program, mutants.mutants,
                       self._stamp({"universe_size": mutants.universe_size, "exhausted": mutants.exhausted,
                                    "settings": self.config.to_dict()["mutation"]}))
        for m in mutants:
            (mdir / f"{m.id}.ctl").write_text(pretty_print(m.program) + "\n", encoding="utf-8")
            for t in per_mutant[m.id]:
                self._write_trace(t)
        result = MutateResult(verdicts, training, duplicates, mutants.universe_size)
        self._write_screen(mutants.mutants, result)
        return result

    def _write_screen(self, mutants: Sequence[Mutant], res: MutateResult) -> None:
        by_id = {m.id: m for m in mutants}
        entries = []
        for v in res.verdicts:
            doc = v.to_dict()
            m = by_id[v.mutant_id]
            doc.update(operator=m.operator.value, node_id=m.node_id, original=m.original,
                       replacement=m.replacement, training=v.mutant_id in res.training,
                       duplicate_of=res.duplicates.get(v.mutant_id))
            entries.append(doc)
        _write_json(self.out / "screen.json", self._stamp({
            "counts": res.counts, "training": res.training, "duplicates": res.duplicates,
            "universe_size": res.universe_size, "mutants": entries,
        }))
        lines = [f"config_hash: {self.hash}",
                 f"mutants: {len(res.verdicts)} of {res.universe_size}",
                 "counts: " + ", ".join(f"{k}={n}" for k, n in res.counts.items()),
                 f"training: {' '.join(res.training) or '(none)'}"]
        for e in entries:
            note = " duplicate of " + e["duplicate_of"] if e["duplicate_of"] else ""
            note += " aborted" if e["aborted"] else ""
            lines.append(f"{e['mutant_id']}  {e['operator']:3}  {e['original']!s:>16} -> {e['replacement']:<4}"
                         f"  {e['verdict']:<11}  max_dev={e['max_deviation_mm']:.3f}{note}")
        _write_text(self.out / "screen.txt", lines)

    def _training_ids(self) -> list[str]:
        doc = _read_json(self.out / "screen.json")
        if doc.get("config_hash") != self.hash:
            raise HashMismatchError(f"screen.json was written under config {doc.get('config_hash')}, not {self.hash}")
        return list(doc["training"])

    def train(self, individual: bool = False) -> TrainResult:
        """Pool positive and training-mutant traces, cross-validate, fit and export the invariant."""
        cfg = self.config.learner
        hp = Hyperparams(cfg.lam, cfg.epochs)
        positive = self._load_traces(POSITIVE)
        ids = self._training_ids()
        if not ids:
            raise LearnerError("no distinct mutant traces to train against: dataset would be single-class")
        mutant_traces = {mid: self._load_traces(mid) for mid in ids}
        data = build_dataset(positive + [t for mid in ids for t in mutant_traces[mid]], cfg.stride)
        cv = cross_validate(data, cfg.k, hp, cfg.seed)
        inv, doc = self._fit(data, hp, ids)
        write_features(data, self.out / "features.csv")
        _write_json(self.out / "cv.json", self._stamp({"cv": cv.to_dict(), "mutants": ids}))
        _write_json(self.out / "model.json", doc)

        reports: dict[str, CvReport] = {}
        if individual:
            for mid in ids:
                d1 = build_dataset(positive + mutant_traces[mid], cfg.stride)
                reports[mid] = cross_validate(d1, cfg.k, hp, cfg.seed)
                _, mdoc = self._fit(d1, hp, [mid])
                mdoc["cv"] = reports[mid].to_dict()
                _write_json(self.out / "individual" / f"{mid}.json", mdoc)

        lines = [f"config_hash: {self.hash}",
                 f"training mutants: {' '.join(ids)}",
                 "class counts: " + ", ".join(f"{k}={n}" for k, n in cv.class_counts.items()),
                 f"{cv.k}-fold accuracy: " + " ".join(f"{a:.4f}" for a in cv.fold_accuracy),
                 f"mean accuracy: {cv.mean_accuracy:.4f}",
                 f"positive-class accuracy: {cv.positive_accuracy:.4f}"]
        for mid, rep in reports.items():
            lines.append(f"individual {mid}: mean accuracy {rep.mean_accuracy:.4f}")
        lines.append(f"invariant: {inv.render()}")
        _write_text(self.out / "train.txt", lines)
        return TrainResult(cv, inv, reports)

    def _fit(self, data: Dataset, hp: Hyperparams, ids: Sequence[str]) -> tuple[LinearInvariant, dict]:
        std, scaler = standardize(data)
        model = train_svm(std, hp, self.config.learner.seed)
        inv = extract_invariant(model, scaler, data.names)
        doc = model_document(model, scaler, inv, data.digest(), mutants=list(ids),
                             class_counts=data.class_counts(), invariant_hash=inv.digest())
        return inv, self._stamp(doc)

    def load_invariant(self, model_path: Path | str | None = None) -> LinearInvariant:
        path = Path(model_path) if model_path is not None else self.out / "model.json"
        doc = _read_json(path)
        if doc.get("config_hash") != self.hash:
            raise HashMismatchError(f"{path}: model was trained under config {doc.get('config_hash')}, not {self.hash}")
        return load_model_document(doc)[2]

    def validation_runs(self) -> Iterator[tuple[str, Trace]]:
        """Fresh positive runs, generated lazily.

        Run ``i`` starts from configured initial state ``i mod n`` and reads
        sensors with ``smc.noise_std_mm`` of Gaussian noise seeded by
        ``smc.seed + i``, so no two runs share a noise sequence.
        """
        smc = self.config.smc
        noisy = PlantConfig(self.plant.tanks, self.plant.links, self.plant.dt_s, smc.noise_std_mm)
        levels = self.config.initial_levels_mm
        i = 0
        while True:
            init = make_plant(noisy, [levels[i % len(levels)]] * self.plant.n_tanks)
            run_id = f"v{i:04d}"
            yield run_id, run_or_abort(self.program, noisy, init, self.config.duration_s, smc.seed + i, POSITIVE, run_id)
            i += 1

    def validate(self, model_path: Path | str | None = None, invariant: LinearInvariant | None = None) -> ValidateResult:
        """SPRT and a Hoeffding estimate of the invariant's satisfaction on fresh runs."""
        smc = self.config.smc
        inv = invariant if invariant is not None else self.load_invariant(model_path)
        cache: list[SatisfactionSample] = []
        runs = self.validation_runs()

        def samples() -> Iterator[SatisfactionSample]:
            i = 0
            while True:
                if i == len(cache):
                    run_id, t = next(runs)
                    cache.append(check_invariant(inv, t, run_id))
                yield cache[i]
                i += 1

        to_bool = vector_samples if smc.granularity == "vector" else run_samples
        verdict = sprt(to_bool(samples()), smc.sprt, smc.budget)
        n = chernoff_sample_size(smc.epsilon, smc.chernoff_delta)
        p_hat, _ = chernoff_estimate(to_bool(samples()), smc.epsilon, smc.chernoff_delta)
        result = ValidateResult(verdict, p_hat, n, len(cache))
        self._write_smc(inv, result)
        return result

    def _write_smc(self, inv: LinearInvariant, r: ValidateResult) -> None:
        smc = self.config.smc
        v = r.verdict
        _write_json(self.out / "smc.json", self._stamp({
            "decision": v.decision,
            "samples": v.samples,
            "successes": v.successes,
            "log_ratio": v.log_ratio,
            "p_hat_sprt": v.p_hat if v.samples else None,
            "budget": v.budget,
            "boundaries": {"accept_H0": smc.sprt.upper, "accept_H1": smc.sprt.lower},
            "chernoff": {"epsilon": smc.epsilon, "delta": smc.chernoff_delta, "n": r.chernoff_n, "p_hat": r.p_hat},
            "runs_generated": r.runs,
            "settings": vars(smc).copy(),
            "invariant": inv.render(),
            "invariant_hash": inv.digest(),
        }))
        _write_text(self.out / "smc.txt", [
            f"config_hash: {self.hash}",
            f"invariant: {inv.render()}",
            f"SPRT (theta={smc.theta}, delta={smc.delta}, alpha={smc.alpha}, beta={smc.beta}, "
            f"per-{smc.granularity}): {v.decision} after {v.samples} samples, log-ratio {v.log_ratio:.4f}",
            f"estimate: p_hat = {r.p_hat:.5f} from {r.chernoff_n} samples "
            f"(|p_hat - p| <= {smc.epsilon} with probability >= {1 - smc.chernoff_delta})",
            f"fresh runs generated: {r.runs}",
        ])

    def report(self) -> dict:
        """Gather the stage outputs present in the experiment directory."""
        if not (self.out / "config.json").is_file():
            raise FileNotFoundError(f"file not found: {self.out / 'config.json'}")
        doc = self._stamp({"controller_hash": program_hash(self.program)})
        lines = [f"config_hash: {self.hash}", f"controller: {self.config.controller.name} ({doc['controller_hash']})"]
        sources = {"screen": "screen.json", "cv": "cv.json", "model": "model.json", "smc": "smc.json"}
        found = {}
        for key, name in sources.items():
            path = self.out / name
            if path.is_file():
                found[key] = _read_json(path)
                if found[key].get("config_hash") != self.hash:
                    raise HashMismatchError(f"{path}: written under config {found[key].get('config_hash')}")
        if "screen" in found:
            s = found["screen"]
            doc["screening"] = {"counts": s["counts"], "training": s["training"], "duplicates": s["duplicates"]}
            lines.append("screening: " + ", ".join(f"{k}={n}" for k, n in s["counts"].items())
                         + f"; training {' '.join(s['training']) or '(none)'}")
        if "cv" in found:
            cv = found["cv"]["cv"]
            doc["cv"] = {"k": cv["k"], "mean_accuracy": cv["mean_accuracy"], "fold_accuracy": cv["fold_accuracy"]}
            lines.append(f"cross-validation: k={cv['k']} mean accuracy {cv['mean_accuracy']:.4f}")
        if "model" in found:
            doc["invariant"] = found["model"]["rendered"]
            lines.append(f"invariant: {found['model']['rendered']}")
        if "smc" in found:
            s = found["smc"]
            doc["smc"] = {"decision": s["decision"], "samples": s["samples"], "p_hat": s["chernoff"]["p_hat"]}
            lines.append(f"validation: {s['decision']} after {s['samples']} samples; "
                         f"p_hat {s['chernoff']['p_hat']:.5f}")
        _write_json(self.out / "report.json", doc)
        _write_text(self.out / "report.txt", lines)
        return doc

