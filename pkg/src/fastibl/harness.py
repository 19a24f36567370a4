"""Experiment orchestration: runs x episodes, timing, statistics, and the
cross-engine checks."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from . import core
from .agent import ENGINES, Agent
from .core import AgentParams, OptionKey, SimilarityGroup, state_from_features
from .envs import TASKS, make_task
from .rng import NoiseStream, StreamKey, StreamKind, derive_run_seed, environment_rng, noise_draw
from .speedy import SpeedyMemory, speedy_base_level, speedy_probabilities

FULL_SCALE = {"binary": (1000, 100), "insider": (1000, 100)}
FULL_SCALE_GRID = (100, 100)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    engine: str = "speedy"
    runs: int = 1
    episodes: int = 1
    steps: int = 2500
    seed: int = 0
    decay: float = 0.5
    noise: float = 0.25
    mismatch_penalty: float = 1.0
    temperature: float | None = None
    default_utility: float | None = None
    map_path: str | None = None
    scenario_path: str | None = None
    workers: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; expected one of {', '.join(TASKS)}")
        if self.engine not in (*ENGINES, "both"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.runs < 1 or self.episodes < 1 or self.steps < 1:
            raise ValueError("runs, episodes and steps must be at least 1")
        for path in (self.map_path, self.scenario_path):
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(path)


@dataclass(frozen=True)
class EpisodeRecord:
    run: int
    episode: int
    metric: float
    seconds: float


@dataclass
class ResultTable:
    task: str
    engine: str
    runs: int
    episodes: int
    rows: list[EpisodeRecord] = field(default_factory=list)

    def metric_matrix(self) -> np.ndarray:
        m = np.empty((self.runs, self.episodes))
        for r in self.rows:
            m[r.run, r.episode] = r.metric
        return m

    def seconds_matrix(self) -> np.ndarray:
        m = np.empty((self.runs, self.episodes))
        for r in self.rows:
            m[r.run, r.episode] = r.seconds
        return m

    @property
    def per_run_metric(self) -> np.ndarray:
        return self.metric_matrix().mean(axis=1)

    @property
    def episode_means(self) -> np.ndarray:
        return self.metric_matrix().mean(axis=0)

    @property
    def mean_metric(self) -> float:
        return float(self.metric_matrix().mean())

    @property
    def mean_time_per_run(self) -> float:
        return float(self.seconds_matrix().sum(axis=1).mean())

    @property
    def total_seconds(self) -> float:
        return float(self.seconds_matrix().sum())


def agent_params(config: ExperimentConfig, task) -> AgentParams:
    x0 = config.default_utility if config.default_utility is not None else task.default_utility
    return AgentParams(decay=config.decay, noise=config.noise,
                       mismatch_penalty=config.mismatch_penalty,
                       temperature=config.temperature, default_utility=x0,
                       similarity_groups=tuple(task.similarity_groups))


def _new_task(config: ExperimentConfig, run: int):
    run_seed = derive_run_seed(config.seed, run)
    task = make_task(config.task, environment_rng(run_seed), config.map_path, config.scenario_path)
    return run_seed, task


def _run_one(config: ExperimentConfig, engine, run: int) -> list[EpisodeRecord]:
    run_seed, task = _new_task(config, run)
    params = agent_params(config, task)
    agents = [Agent(params, engine, run_seed, i, backend=config.backend)
              for i in range(task.n_agents)]
    rows = []
    clock = time.perf_counter
    for episode in range(config.episodes):
        start = clock()
        metric = task.play_episode(agents, config.steps)
        rows.append(EpisodeRecord(run, episode, float(metric), clock() - start))
    return rows


def run_experiment(config: ExperimentConfig, engine=None) -> ResultTable:
    """Fresh agents per run; memory and the time counter persist across the
    run's episodes."""
    engine = engine if engine is not None else config.engine
    if engine == "both":
        raise ValueError("run_experiment needs a single engine; use compare_engines")
    if isinstance(engine, str) and engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    name = engine if isinstance(engine, str) else getattr(engine, "name", engine.__name__)
    table = ResultTable(config.task, name, config.runs, config.episodes)
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(lambda r: _run_one(config, engine, r), range(config.runs)))
    else:
        chunks = [_run_one(config, engine, r) for r in range(config.runs)]
    for rows in chunks:
        table.rows.extend(rows)
    return table


def write_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "episode", "metric", "seconds"])
        for r in sorted(table.rows, key=lambda r: (r.run, r.episode)):
            writer.writerow([r.run, r.episode, repr(r.metric), f"{r.seconds:.9f}"])
    return path


# -- statistics ---------------------------------------------------------------

def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Welch t-test; returns ``(t, p)``."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va == 0 and vb == 0:
        raise ValueError("both samples have zero variance")
    se2 = va + vb
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), df)
    return float(t), float(min(p, 1.0))


@dataclass
class ComparisonReport:
    task: str
    runs: int
    episodes: int
    mean_time: dict[str, float]
    mean_metric: dict[str, float]
    sd_metric: dict[str, float]
    ratio: float
    t: float | None
    p: float | None

    def format(self) -> str:
        lines = [f"task {self.task}: {self.runs} runs x {self.episodes} episodes"]
        for engine in self.mean_time:
            lines.append(
                f"  {engine:<8}  time/run {self.mean_time[engine]:.4f} s   "
                f"metric {self.mean_metric[engine]:.4f} ± {self.sd_metric[engine]:.4f}")
        lines.append(f"  ratio baseline/speedy: {self.ratio:.2f}")
        if self.t is None:
            lines.append("  t-test: n/a (fewer than two runs or zero variance)")
        else:
            lines.append(f"  t-test: t = {self.t:.2f}, p = {self.p:.2g}")
        return "\n".join(lines)


def summarize_comparison(baseline: ResultTable, speedy: ResultTable) -> ComparisonReport:
    tables = {"baseline": baseline, "speedy": speedy}
    per_run = {k: v.per_run_metric for k, v in tables.items()}
    try:
        t, p = welch_t_test(per_run["baseline"], per_run["speedy"])
    except ValueError:
        t = p = None
    times = {k: v.mean_time_per_run for k, v in tables.items()}
    return ComparisonReport(
        task=baseline.task, runs=baseline.runs, episodes=baseline.episodes,
        mean_time=times,
        mean_metric={k: float(v.mean()) for k, v in per_run.items()},
        sd_metric={k: float(v.std(ddof=1)) if v.size > 1 else 0.0 for k, v in per_run.items()},
        ratio=times["baseline"] / times["speedy"] if times["speedy"] > 0 else math.inf,
        t=t, p=p)


def compare_engines(config: ExperimentConfig) -> tuple[ComparisonReport, dict[str, ResultTable]]:
    tables = {e: run_experiment(config, engine=e) for e in ("baseline", "speedy")}
    return summarize_comparison(tables["baseline"], tables["speedy"]), tables


# -- cross-engine replay ------------------------------------------------------

class Divergence(Exception):
    def __init__(self, agent_id, t, actions, values):
        self.agent_id, self.t, self.actions, self.values = agent_id, t, actions, values
        super().__init__(f"agent {agent_id} at t={t}: actions {actions}, values {values}")


class PairedAgent:
    """Drives two agents in lockstep and raises ``Divergence`` as soon as
    their decisions or blended values disagree."""

    def __init__(self, first: Agent, second: Agent, rel_tol: float = 1e-9,
                 abs_tol: float = 1e-12):
        self.first, self.second = first, second
        self.rel_tol, self.abs_tol = rel_tol, abs_tol
        self.decisions = 0
        self.max_deviation = 0.0

    @property
    def t(self):
        return self.first.t

    def choose(self, state, actions):
        a = self.first.choose(state, actions)
        b = self.second.choose(state, actions)
        va, vb = self.first.last_values, self.second.last_values
        close = all(math.isclose(x, y, rel_tol=self.rel_tol, abs_tol=self.abs_tol)
                    for x, y in zip(va, vb))
        if a != b or not close:
            raise Divergence(self.first.agent_id, self.first.t, (a, b), (va, vb))
        for x, y in zip(va, vb):
            if x != y:
                self.max_deviation = max(self.max_deviation, abs(x - y) / max(abs(x), abs(y)))
        self.decisions += 1
        return a

    def respond(self, outcome, delayed=False):
        self.first.respond(outcome, delayed)
        self.second.respond(outcome, delayed)

    def assign_credit(self, outcome):
        self.first.assign_credit(outcome)
        self.second.assign_credit(outcome)

    def reset_episode(self):
        self.first.reset_episode()
        self.second.reset_episode()


@dataclass
class EquivalenceReport:
    task: str
    passed: bool
    decisions: int
    max_relative_deviation: float
    divergence: str | None = None

    def format(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = (f"{status} {self.task}: {self.decisions} decisions, "
                f"max relative deviation {self.max_relative_deviation:.3g}")
        if self.divergence:
            line += f"\n  first divergence: {self.divergence}"
        return line


def verify_equivalence(config: ExperimentConfig, engines=("baseline", "speedy")) -> EquivalenceReport:
    decisions = 0
    deviation = 0.0
    for run in range(config.runs):
        run_seed, task = _new_task(config, run)
        params = agent_params(config, task)
        agents = [PairedAgent(Agent(params, engines[0], run_seed, i, backend=config.backend),
                              Agent(params, engines[1], run_seed, i, backend=config.backend))
                  for i in range(task.n_agents)]
        episode = 0
        try:
            for episode in range(config.episodes):
                task.play_episode(agents, config.steps)
        except Divergence as exc:
            where = f"run {run}, episode {episode}, {exc}"
            return EquivalenceReport(config.task, False, decisions + sum(a.decisions for a in agents),
                                     deviation, where)
        decisions += sum(a.decisions for a in agents)
        deviation = max([deviation] + [a.max_deviation for a in agents])
    return EquivalenceReport(config.task, True, decisions, deviation)


EQUIVALENCE_SUITE = (
    dict(task="binary", episodes=1000),
    dict(task="insider", episodes=100),
    dict(task="minimap", episodes=5, steps=200, map_path="mini"),
    dict(task="fireman", episodes=3, steps=300),
    dict(task="coopnav", episodes=3, steps=300),
)


def equivalence_suite_configs(seed: int = 0, backend: str | None = None) -> list[ExperimentConfig]:
    from importlib import resources
    mini = str(resources.files("fastibl.data").joinpath("minimap_mini.txt"))
    configs = []
    for entry in EQUIVALENCE_SUITE:
        entry = dict(entry)
        if entry.get("map_path") == "mini":
            entry["map_path"] = mini
        configs.append(ExperimentConfig(seed=seed, backend=backend, **entry))
    return configs


# -- scalar oracle ------------------------------------------------------------

@dataclass
class OracleReport:
    cases: int
    max_deviation: float
    max_base_level_deviation: float
    max_probability_deviation: float

    def format(self) -> str:
        return (f"{self.cases} randomized memories: max |blended| deviation "
                f"{self.max_deviation:.3g}, base-level {self.max_base_level_deviation:.3g}, "
                f"probability {self.max_probability_deviation:.3g}")


def _random_case(rng: np.random.Generator):
    partial = rng.random() < 0.5
    groups: tuple[SimilarityGroup, ...] = ()
    arity = 3
    if partial:
        order = rng.permutation(arity)
        cut = int(rng.integers(1, arity + 1))
        groups = (SimilarityGroup(tuple(int(i) for i in order[:cut]), "linear",
                                  tuple(float(r) for r in rng.uniform(1.0, 10.0, cut))),)
        if cut < arity and rng.random() < 0.7:
            groups += (SimilarityGroup(tuple(int(i) for i in order[cut:]), "exact"),)
    noise = 0.0 if rng.random() < 0.1 else float(rng.uniform(0.05, 0.5))
    temperature = float(rng.uniform(0.1, 1.0)) if noise == 0.0 or rng.random() < 0.3 else None
    params = AgentParams(decay=float(rng.uniform(0.1, 1.0)), noise=noise,
                         mismatch_penalty=float(rng.uniform(0.0, 2.0)),
                         temperature=temperature, similarity_groups=groups)
    n_actions = int(rng.integers(1, 4))
    events = []
    options = []
    for k in range(int(rng.integers(1, 11))):
        features = tuple(float(v) for v in rng.integers(0, 4, arity))
        option = OptionKey(state_from_features(features + (k,) if not partial else features),
                           int(rng.integers(n_actions)))
        if option in options:
            continue
        options.append(option)
        n_stamps = int(rng.integers(1, 21))
        outcomes = rng.choice([-1.0, 0.0, 0.25, 0.75, 3.0, 4.0], size=int(rng.integers(1, 5)),
                              replace=False)
        for _ in range(n_stamps):
            events.append((option, float(rng.choice(outcomes))))
    order = rng.permutation(len(events))
    stamps = np.sort(rng.choice(10 * len(events) + 1, size=len(events), replace=False))
    history = [(events[i][0], events[i][1], int(s)) for i, s in zip(order, stamps)]
    t = int(stamps[-1]) + 1 + int(rng.integers(0, 5))
    return params, options, history, t


def _brute_force(params, history, query: OptionKey, t, run_seed):
    """Scalar reference math applied instance by instance to the raw history."""
    option_ord: dict = {}
    groups: dict = {}
    for option, x, stamp in history:
        option_ord.setdefault(option, len(option_ord))
        groups.setdefault(option, {}).setdefault(x, []).append(stamp)
    acts, outs, bases = [], [], []
    for option, by_outcome in groups.items():
        if option.action != query.action:
            continue
        if not params.partial_matching and option != query:
            continue
        sim = core.similarity_term(query.state.features, option.state.features,
                                   params.similarity_groups)
        for j, (x, stamps) in enumerate(by_outcome.items()):
            xi = noise_draw(StreamKey(run_seed, StreamKind.NOISE, 0, (t, option_ord[option], j)))
            acts.append(core.activation(stamps, t, sim, xi, params))
            bases.append((stamps, core.base_level(stamps, t, params.decay)))
            outs.append(x)
    probs = core.retrieval_probabilities(acts, params.tau)
    return core.blended_value(probs, outs), acts, probs, bases


def oracle_check(cases: int = 1000, seed: int = 0, backend=None) -> OracleReport:
    rng = np.random.default_rng(seed)
    worst = worst_base = worst_prob = 0.0
    for case in range(cases):
        params, options, history, t = _random_case(rng)
        run_seed = int(rng.integers(2 ** 63))
        memory = SpeedyMemory(params, backend=backend)
        for option, x, stamp in history:
            memory.respond(option, x, stamp)
        memory.pending.clear()
        noise = NoiseStream(run_seed, 0)
        values = memory.evaluate(options, t, noise)
        for option, value in zip(options, values):
            expected, acts, probs, bases = _brute_force(params, history, option, t, run_seed)
            worst = max(worst, abs(value - expected))
            worst_prob = max(worst_prob, float(np.max(np.abs(
                speedy_probabilities(acts, params.tau) - np.asarray(probs)))))
            for stamps, base in bases:
                worst_base = max(worst_base, abs(
                    speedy_base_level(sorted(stamps), t, params.decay, backend) - base))
    return OracleReport(cases, worst, worst_base, worst_prob)


def full_scale(config: ExperimentConfig) -> ExperimentConfig:
    runs, episodes = FULL_SCALE.get(config.task, FULL_SCALE_GRID)
    return replace(config, runs=runs, episodes=episodes)
