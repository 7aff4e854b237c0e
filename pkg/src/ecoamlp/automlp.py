"""Evolutionary hyperparameter search over a small ensemble of MLPs.

The ensemble holds ``ensemble_size`` networks whose hidden width and
learning rate are sampled log-uniformly from the configured ranges. Each
generation every member trains for ``cycles_per_generation`` epochs and is
scored by validation misclassification rate. The worst floor(size / 2)
members are then replaced in place by offspring: a surviving parent is
picked uniformly, its hidden width and learning rate are jittered
log-normally (sigma 0.3 and 0.5 in log space), clamped back into range,
and the child starts from fresh random weights. With ``warm_start`` a
child whose width matches its parent copies the parent's weights instead.

Every random draw comes from a sub-seed derived from the run seed plus
structural tags (generation, slot, cycle), so runs are reproducible and
insensitive to incidental iteration order.
"""

from __future__ import annotations

import dataclasses
import math
from typing import List, Tuple

import numpy as np

from .data import Dataset, round_half_up
from .errors import ConfigError
from .mlp import MlpConfig, MlpNetwork, evaluate_error, init_network, train_epoch
from .rng import subseed

_ROLE_HP_INIT = 1
_ROLE_WEIGHTS = 2
_ROLE_SHUFFLE = 3
_ROLE_OFFSPRING = 4

HIDDEN_SIGMA = 0.3
"""Log-space jitter applied to a parent's hidden width."""

LR_SIGMA = 0.5
"""Log-space jitter applied to a parent's learning rate."""


@dataclasses.dataclass(frozen=True)
class AutoMlpParams:
    ensemble_size: int = 4
    cycles_per_generation: int = 10
    generations: int = 10
    hidden_range: Tuple[int, int] = (2, 256)
    lr_range: Tuple[float, float] = (1e-3, 1.0)
    seed: int = 0
    warm_start: bool = False

    def __post_init__(self) -> None:
        if self.ensemble_size < 2:
            raise ConfigError(f"ensemble_size must be >= 2, got {self.ensemble_size}")
        if self.cycles_per_generation < 1:
            raise ConfigError("cycles_per_generation must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        lo, hi = self.hidden_range
        if not (1 <= lo < hi):
            raise ConfigError(f"hidden_range must satisfy 1 <= min < max, got {self.hidden_range}")
        lr_lo, lr_hi = self.lr_range
        if not (0.0 < lr_lo < lr_hi):
            raise ConfigError(f"lr_range must satisfy 0 < min < max, got {self.lr_range}")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")


@dataclasses.dataclass(frozen=True)
class MemberRecord:
    """One member's standing after a generation's evaluation."""

    member: int
    hidden_units: int
    learning_rate: float
    validation_error: float
    replaced: bool

    def to_json_obj(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass
class AutoMlpPopulation:
    """Mutable search state: the live networks plus per-generation records."""

    params: AutoMlpParams
    input_dim: int
    members: List[MlpNetwork]
    generation: int = 0
    history: List[Tuple[MemberRecord, ...]] = dataclasses.field(default_factory=list)


@dataclasses.dataclass(frozen=True)
class AutoMlpRun:
    """Finished search: the winning network and the full history."""

    winner: MlpNetwork
    winner_slot: int
    history: Tuple[Tuple[MemberRecord, ...], ...]

    @property
    def winner_validation_error(self) -> float:
        return self.history[-1][self.winner_slot].validation_error

    def history_json_obj(self) -> list:
        return [[r.to_json_obj() for r in gen] for gen in self.history]


def init_population(params: AutoMlpParams, input_dim: int) -> AutoMlpPopulation:
    """Seeded initial ensemble with log-uniform hyperparameters."""
    hp_rng = np.random.default_rng(subseed(params.seed, _ROLE_HP_INIT))
    members = []
    for slot in range(params.ensemble_size):
        hidden = _sample_log_uniform_int(hp_rng, params.hidden_range)
        lr = _sample_log_uniform(hp_rng, params.lr_range)
        config = MlpConfig(
            input_dim=input_dim,
            hidden_units=hidden,
            learning_rate=lr,
            weight_init_seed=subseed(params.seed, _ROLE_WEIGHTS, 0, slot),
        )
        members.append(init_network(config))
    return AutoMlpPopulation(params, input_dim, members)


def run_generation(
    population: AutoMlpPopulation,
    train: Dataset,
    validation: Dataset,
    params: AutoMlpParams = None,
) -> AutoMlpPopulation:
    """Train, evaluate, record, and replace the losing half in place."""
    params = population.params if params is None else params
    gen = population.generation
    for slot, net in enumerate(population.members):
        for cycle in range(params.cycles_per_generation):
            train_epoch(net, train, subseed(params.seed, _ROLE_SHUFFLE, gen, slot, cycle))
    errors = [evaluate_error(net, validation) for net in population.members]
    ranking = sorted(range(params.ensemble_size), key=lambda s: (errors[s], s))
    n_replace = params.ensemble_size // 2
    survivors = ranking[: params.ensemble_size - n_replace]
    losers = set(ranking[params.ensemble_size - n_replace :])
    records = tuple(
        MemberRecord(
            member=slot,
            hidden_units=net.config.hidden_units,
            learning_rate=net.config.learning_rate,
            validation_error=errors[slot],
            replaced=slot in losers,
        )
        for slot, net in enumerate(population.members)
    )
    for slot in sorted(losers):
        population.members[slot] = _make_offspring(population, survivors, gen, slot)
    population.history.append(records)
    population.generation = gen + 1
    return population


def train_automlp(split, params: AutoMlpParams) -> AutoMlpRun:
    """Run the full search on a train/validation split.

    Accepts anything with ``train`` and ``validation`` datasets; no other
    part of the split is touched.
    """
    return fit_automlp(split.train, split.validation, params)


def fit_automlp(train: Dataset, validation: Dataset, params: AutoMlpParams) -> AutoMlpRun:
    if len(train) == 0 or len(validation) == 0:
        raise ConfigError("automlp needs non-empty train and validation sets")
    population = init_population(params, input_dim=train.n_features)
    for _ in range(params.generations):
        run_generation(population, train, validation)
    last = population.history[-1]
    winner_slot = min(range(params.ensemble_size), key=lambda s: (last[s].validation_error, s))
    return AutoMlpRun(
        winner=population.members[winner_slot],
        winner_slot=winner_slot,
        history=tuple(population.history),
    )


def _make_offspring(
    population: AutoMlpPopulation,
    survivors: List[int],
    gen: int,
    slot: int,
) -> MlpNetwork:
    params = population.params
    rng = np.random.default_rng(subseed(params.seed, _ROLE_OFFSPRING, gen, slot))
    parent = population.members[survivors[int(rng.integers(len(survivors)))]]
    hidden = _jitter_log_normal_int(rng, parent.config.hidden_units, HIDDEN_SIGMA,
                                    params.hidden_range)
    lr = _jitter_log_normal(rng, parent.config.learning_rate, LR_SIGMA, params.lr_range)
    config = MlpConfig(
        input_dim=population.input_dim,
        hidden_units=hidden,
        learning_rate=lr,
        weight_init_seed=subseed(params.seed, _ROLE_WEIGHTS, gen + 1, slot),
    )
    child = init_network(config)
    if params.warm_start and hidden == parent.config.hidden_units:
        child.w_ih = parent.w_ih.copy()
        child.w_ho = parent.w_ho.copy()
        child.epochs_trained = parent.epochs_trained
    return child


def _sample_log_uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    lo, hi = bounds
    value = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    return min(max(value, lo), hi)


def _sample_log_uniform_int(rng: np.random.Generator, bounds: Tuple[int, int]) -> int:
    lo, hi = bounds
    value = round_half_up(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return min(max(value, lo), hi)


def _jitter_log_normal(
    rng: np.random.Generator,
    center: float,
    sigma: float,
    bounds: Tuple[float, float],
) -> float:
    lo, hi = bounds
    center = min(max(center, lo), hi)
    value = math.exp(math.log(center) + sigma * rng.standard_normal())
    return min(max(value, lo), hi)


def _jitter_log_normal_int(
    rng: np.random.Generator,
    center: int,
    sigma: float,
    bounds: Tuple[int, int],
) -> int:
    lo, hi = bounds
    center = min(max(center, lo), hi)
    value = round_half_up(math.exp(math.log(center) + sigma * rng.standard_normal()))
    return min(max(value, lo), hi)
