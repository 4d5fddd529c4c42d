"""Experiment harness: seeded episodes, CSV records, pipeline commands.

An experiment is one flat key-value file naming a domain, a solver, a
heuristic mode, and parameters.  Episodes are independently seeded as
base seed plus episode index, so any subset reproduces bit-for-bit.
Macro guidance follows the plan-execute loop contract: the macro set is
grounded from the current belief only when every macro from the last
grounding has been walked past, and grounding time is charged to the
planner's clock.
"""

from __future__ import annotations

import csv
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt
from pathlib import Path
from statistics import fmean, stdev
from typing import Callable, Optional, Sequence

from . import despot as despot_mod
from . import pomcp as pomcp_mod
from .core import (
    BeliefCollapse,
    discounted_return,
    belief_update,
    fresh_posterior_belief,
    sample_initial_belief,
)
from .domains import pocman as pm
from .domains import rocksample as rs
from .flatconfig import ConfigError, parse_flat
from .macros import (
    Hypothesis,
    MacroAction,
    MacroBinding,
    TransitionAxioms,
    asset_path,
    compute_macro_set,
    load_pocman_coverage,
    load_pocman_theory,
    load_pocman_transitions,
    load_rocksample_coverage,
    load_rocksample_theory,
    load_rocksample_transitions,
    pocman_binding,
    rocksample_binding,
)
from .traces import (
    Trace,
    TraceStep,
    emit_cdpis,
    export_ilasp,
    load_traces,
    save_traces,
    select_traces,
)

CSV_HEADER = ("episode", "disc_return", "steps", "time_per_step_s", "gamma_calls", "seed")

DOMAINS = ("rocksample", "pocman")
SOLVERS = ("pomcp", "despot")
HEURISTICS = ("none", "pref", "local", "timed")

_DIRECTION_NAMES = ("north", "south", "east", "west")


class EmptyInput(ValueError):
    """A summary was requested over data with no rows."""


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str
    solver: str
    heuristic: str = "none"
    episodes: int = 10
    seed: int = 1
    max_steps: int = 60
    particles: int = 512
    discount: float = 0.95
    grid_size: int = 5
    rock_count: int = 3
    maze: str = "maze_10x10"
    ghost_count: int = 2
    rho_f: float = 0.5
    rho_g: float = 0.75
    simulations: int = 1024
    exploration: float = 10.0
    max_depth: int = 60
    n_max: int = 10
    scenarios: int = 64
    epsilon: float = 0.01
    max_trials: int = 12
    mdp_depth: int = 3
    upper_bound: str = "trivial"
    l_max: int = 10
    traces: str = ""


_INT_KEYS = (
    "episodes", "seed", "max_steps", "particles", "grid_size", "rock_count",
    "ghost_count", "simulations", "max_depth", "n_max", "scenarios",
    "max_trials", "mdp_depth", "l_max",
)
_FLOAT_KEYS = ("discount", "rho_f", "rho_g", "exploration", "epsilon")
_STR_KEYS = ("domain", "solver", "heuristic", "maze", "upper_bound", "traces")


def parse_experiment_config(text: str) -> ExperimentConfig:
    raw = parse_flat(text)
    values: dict = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            caster = int
        elif key in _FLOAT_KEYS:
            caster = float
        elif key in _STR_KEYS:
            caster = str
        else:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    for required in ("domain", "solver"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    config = ExperimentConfig(**values)
    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    if config.domain not in DOMAINS:
        raise ConfigError(f"unknown domain {config.domain!r}")
    if config.solver not in SOLVERS:
        raise ConfigError(f"unknown solver {config.solver!r}")
    if config.heuristic not in HEURISTICS:
        raise ConfigError(f"unknown heuristic {config.heuristic!r}")
    if config.episodes < 0:
        raise ConfigError("episodes must be nonnegative")
    if config.max_steps < 1 or config.particles < 1 or config.l_max < 1:
        raise ConfigError("max_steps, particles, and l_max must be positive")
    if not 0 < config.discount < 1:
        raise ConfigError("discount must lie in (0,1)")
    if config.domain == "rocksample":
        if config.grid_size < 2 or config.rock_count < 1:
            raise ConfigError("rocksample needs grid_size >= 2 and rock_count >= 1")
        if config.rock_count > config.grid_size * config.grid_size:
            raise ConfigError("more rocks than grid cells")
    else:
        maze_file(config)
        if config.ghost_count < 0:
            raise ConfigError("ghost_count must be nonnegative")
        if not 0 < config.rho_f <= 1 or not 0 <= config.rho_g <= 1:
            raise ConfigError("rho_f must be in (0,1], rho_g in [0,1]")
    try:
        if config.solver == "pomcp":
            _pomcp_config(config)
        else:
            _despot_config(config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_experiment_config(path) -> ExperimentConfig:
    return parse_experiment_config(Path(path).read_text())


def maze_file(config: ExperimentConfig) -> Path:
    shipped = asset_path(f"{config.maze}.txt")
    if shipped.exists():
        return shipped
    direct = Path(config.maze)
    if direct.exists():
        return direct
    raise ConfigError(f"maze {config.maze!r} is neither a shipped asset nor a file")


def _pomcp_config(config: ExperimentConfig) -> pomcp_mod.PomcpConfig:
    return pomcp_mod.PomcpConfig(
        simulations=config.simulations,
        exploration=config.exploration,
        discount=config.discount,
        max_depth=config.max_depth,
        n_max=config.n_max,
        heuristic_enabled=config.heuristic != "none",
    )


def _despot_config(config: ExperimentConfig) -> despot_mod.DespotConfig:
    lower = {"none": "trivial", "pref": "pref", "local": "local", "timed": "timed"}
    return despot_mod.DespotConfig(
        k=config.scenarios,
        epsilon=config.epsilon,
        max_depth=config.max_depth,
        upper_bound_kind=config.upper_bound,
        lower_bound_kind=lower[config.heuristic],
        max_trials=config.max_trials,
        mdp_depth=config.mdp_depth,
    )


def build_model(config: ExperimentConfig):
    if config.domain == "rocksample":
        layout_rng = random.Random(config.seed)
        model = rs.RocksampleModel.generate(
            config.grid_size, config.rock_count, layout_rng
        )
    else:
        maze = pm.load_maze_file(maze_file(config))
        model = pm.PocmanModel(maze, config.ghost_count, config.rho_f, config.rho_g)
    model.discount = config.discount
    return model


class MacroSchedule:
    """Refresh-on-exhaustion macro bookkeeping for the plan-execute loop.

    A grounded macro set stays live while some macro still extends past
    the number of steps walked since grounding; only when every macro is
    exhausted is the grounder invoked again.  `calls` counts groundings.
    """

    def __init__(self, ground: Callable) -> None:
        self.ground = ground
        self.macros: Optional[dict[int, MacroAction]] = None
        self.window = 0
        self.calls = 0

    def current(self, belief) -> dict[int, MacroAction]:
        """Remaining-length macros for this step, regrounding if exhausted."""
        if self.macros is None or not any(
            m.length > self.window for m in self.macros.values()
        ):
            self.macros = self.ground(belief)
            self.window = 0
            self.calls += 1
        return {
            a: MacroAction(a, max(m.length - self.window, 0))
            for a, m in self.macros.items()
        }

    def advance(self) -> None:
        self.window += 1


class Runtime:
    """Per-process experiment state: model, solver configs, macro assets."""

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.model = build_model(config)
        if config.domain == "rocksample":
            self.binding: MacroBinding = rocksample_binding(self.model)
            self.coverage = load_rocksample_coverage(self.model.action_count)
            self.hypothesis: Hypothesis = load_rocksample_theory()
            self.transitions: TransitionAxioms = load_rocksample_transitions()
        else:
            self.binding = pocman_binding(self.model)
            self.coverage = load_pocman_coverage()
            self.hypothesis = load_pocman_theory()
            self.transitions = load_pocman_transitions()
        self.pomcp_config = (
            _pomcp_config(config) if config.solver == "pomcp" else None
        )
        self.despot_config = (
            _despot_config(config) if config.solver == "despot" else None
        )

    def ground_macros(self, belief) -> dict[int, MacroAction]:
        # the local arm forces single-step macros at the grounding itself,
        # so it pays a (cheaper) grounding on every step instead of banking
        l_max = 1 if self.config.heuristic == "local" else self.config.l_max
        return compute_macro_set(
            belief, self.binding, self.hypothesis, self.transitions, l_max
        )

    def episode(self, index: int, record_trace: bool = False):
        config = self.config
        seed = config.seed + index
        rng = random.Random(seed)
        model = self.model
        state = model.sample_initial_state(rng)
        belief = sample_initial_belief(model, config.particles, rng)
        uses_macros = config.heuristic in ("timed", "local")
        schedule = MacroSchedule(self.ground_macros)
        planning_seconds = 0.0
        rewards: list[float] = []
        steps: list[TraceStep] = []
        for _ in range(config.max_steps):
            start = time.perf_counter()
            suggested: frozenset[int] = frozenset()
            remaining: Optional[dict[int, MacroAction]] = None
            if uses_macros:
                remaining = schedule.current(belief)
                suggested = frozenset(
                    a for a, m in remaining.items() if m.length > 0
                )
            if config.solver == "pomcp":
                heuristic = self._pomcp_heuristic(suggested)
                action = pomcp_mod.search(
                    belief, model, self.pomcp_config, rng, heuristic
                )
            else:
                action = despot_mod.search_despot(
                    belief, model, self.despot_config, rng, remaining
                )
            planning_seconds += time.perf_counter() - start
            if record_trace:
                steps_features = self.binding.featurize(belief)
            outcome = model.step(state, action, rng)
            rewards.append(outcome.reward)
            if record_trace:
                steps.append(TraceStep(steps_features, action, outcome.reward))
            if outcome.terminal:
                break
            try:
                belief = belief_update(
                    belief, action, outcome.observation, model, rng
                )
            except BeliefCollapse:
                belief = fresh_posterior_belief(
                    outcome.next_state, model, config.particles, rng
                )
            state = outcome.next_state
            schedule.advance()
        record = EpisodeRecord(
            episode=index,
            disc_return=discounted_return(rewards, config.discount),
            steps=len(rewards),
            time_per_step_s=planning_seconds / len(rewards),
            gamma_calls=schedule.calls,
            seed=seed,
        )
        if record_trace:
            return record, Trace(tuple(steps))
        return record

    def _pomcp_heuristic(
        self, suggested: frozenset[int]
    ) -> Optional[pomcp_mod.Heuristic]:
        mode = self.config.heuristic
        if mode == "none":
            return None
        if mode == "pref":
            return pomcp_mod.Heuristic(preferred=True)
        weights = pomcp_mod.rollout_weights(
            self.model.action_count, suggested, self.coverage
        )
        return pomcp_mod.Heuristic(suggested=suggested, weights=weights)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    disc_return: float
    steps: int
    time_per_step_s: float
    gamma_calls: int
    seed: int

    def as_row(self) -> tuple:
        return (
            self.episode,
            self.disc_return,
            self.steps,
            self.time_per_step_s,
            self.gamma_calls,
            self.seed,
        )


def _episode_row(payload: tuple[ExperimentConfig, int]) -> EpisodeRecord:
    config, index = payload
    return Runtime(config).episode(index)


def run_experiment(
    config: ExperimentConfig, out_path, parallel: int = 1
) -> list[EpisodeRecord]:
    records: list[EpisodeRecord] = []
    with open(out_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        handle.flush()
        if parallel > 1 and config.episodes > 1:
            payloads = [(config, i) for i in range(config.episodes)]
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                for record in pool.map(_episode_row, payloads):
                    records.append(record)
                    writer.writerow(record.as_row())
                    handle.flush()
        else:
            runtime = Runtime(config) if config.episodes else None
            for index in range(config.episodes):
                record = runtime.episode(index)
                records.append(record)
                writer.writerow(record.as_row())
                handle.flush()
    return records


def generate_traces(config: ExperimentConfig, out_path) -> list[Trace]:
    runtime = Runtime(config)
    traces = []
    for index in range(config.episodes):
        _, trace = runtime.episode(index, record_trace=True)
        traces.append(trace)
    save_traces(traces, out_path)
    return traces


def export_examples(config: ExperimentConfig, out_path) -> int:
    """Select above-mean traces from the archive and export their CDPIs."""
    if not config.traces:
        raise ConfigError("export needs a 'traces' key pointing at an archive")
    archive = Path(config.traces)
    if not archive.exists():
        raise ConfigError(f"trace archive {archive} does not exist")
    traces = load_traces(archive)
    runtime = Runtime(config)
    selected = select_traces(traces, config.discount)
    cdpis = []
    for k, trace in enumerate(selected, start=1):
        if len(trace) < 2:
            continue
        cdpis.extend(
            emit_cdpis(
                trace,
                runtime.binding.term_of,
                runtime.binding.learnable,
                prefix=f"t{k}e",
            )
        )
    export_ilasp(cdpis, out_path)
    return len(cdpis)


def ground_report(config: ExperimentConfig) -> str:
    """Macro lengths grounded from a fresh initial belief, as flat text."""
    runtime = Runtime(config)
    rng = random.Random(config.seed)
    belief = sample_initial_belief(runtime.model, config.particles, rng)
    macros = compute_macro_set(
        belief, runtime.binding, runtime.hypothesis, runtime.transitions,
        config.l_max,
    )
    lines = [
        f"{_DIRECTION_NAMES[action]} = {macros[action].length}"
        for action in runtime.binding.learnable
    ]
    return "".join(line + "\n" for line in lines)


# -------------------------------------------------------------- summary


@dataclass(frozen=True)
class SummaryRow:
    source: str
    episodes: int
    return_mean: float
    return_std: float
    return_stderr: float
    time_mean: float
    time_std: float


def _spread(values: Sequence[float]) -> tuple[float, float]:
    if len(values) < 2:
        return 0.0, 0.0
    s = stdev(values)
    return s, s / sqrt(len(values))


def summarize(paths: Sequence) -> list[SummaryRow]:
    if not paths:
        raise EmptyInput("no CSV files to summarize")
    rows = []
    for path in paths:
        with open(path, newline="") as handle:
            records = list(csv.DictReader(handle))
        if not records:
            raise EmptyInput(f"{path} has no episode rows")
        returns = [float(r["disc_return"]) for r in records]
        times = [float(r["time_per_step_s"]) for r in records]
        return_std, return_stderr = _spread(returns)
        time_std, _ = _spread(times)
        rows.append(
            SummaryRow(
                source=str(path),
                episodes=len(records),
                return_mean=fmean(returns),
                return_std=return_std,
                return_stderr=return_stderr,
                time_mean=fmean(times),
                time_std=time_std,
            )
        )
    return rows


SUMMARY_HEADER = (
    "source", "episodes", "return_mean", "return_std", "return_stderr",
    "time_mean", "time_std",
)


def write_summary_csv(rows: Sequence[SummaryRow], out_path) -> None:
    with open(out_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(
                (
                    row.source, row.episodes, row.return_mean, row.return_std,
                    row.return_stderr, row.time_mean, row.time_std,
                )
            )


def summary_table(rows: Sequence[SummaryRow]) -> str:
    header = f"{'source':<40} {'n':>4} {'return':>10} {'std':>9} {'t/step':>9}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.source:<40} {row.episodes:>4} {row.return_mean:>10.3f} "
            f"{row.return_std:>9.3f} {row.time_mean:>9.4f}"
        )
    return "".join(line + "\n" for line in lines)
