"""Sampled Dirichlet priors, Bayesian posterior updates and posterior-mean opponent models.

Each opponent (label, position) pair gets ``k`` strategies drawn before play
from independent per-info-set Dirichlet distributions centred on a prior
mean. A posterior over pairs of sample indices is kept for each seating
configuration; after a hand only the configuration that was played changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable, Mapping

import numpy as np

from .game import (
    ALL_DEALS, POSITIONS, Card, HandObservation, is_terminal, showdown_positions, situation_at,
)
from .strategies import N_INFOSETS, BehavioralStrategy

ModelKey = tuple[Hashable, int]  # (opponent label, position)
Configuration = tuple[ModelKey, ModelKey]

_TINY = np.finfo(float).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)


def round_and_normalize(strategy: BehavioralStrategy, epsilon: float) -> BehavioralStrategy:
    """Clamp both action probabilities of every info set into [eps, 1 - eps] and renormalize."""
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    pair = np.stack([strategy.probs, 1.0 - strategy.probs], axis=-1)
    pair = np.clip(pair, epsilon, 1.0 - epsilon)
    pair /= pair.sum(axis=-1, keepdims=True)
    return BehavioralStrategy(strategy.position, pair[:, 0])


def gamma_sample(shape, rng: np.random.Generator, size=None):
    """Gamma(shape, 1) draws, valid for every shape > 0.

    Shapes of at least one use numpy's Marsaglia-Tsang sampler directly;
    smaller shapes are boosted: Gamma(shape + 1) * U ** (1 / shape).
    ``shape`` may be an array; ``size`` broadcasts it. A scalar shape with no
    size returns a float. Draws are floored at the smallest normal double.
    """
    a = np.asarray(shape, dtype=float)
    if np.any(~(a > 0)):
        raise ValueError("gamma shape must be positive")
    scalar = a.ndim == 0 and size is None
    target = a.shape if size is None else tuple(np.atleast_1d(size))
    a = np.broadcast_to(a, target)
    boost = a < 1.0
    out = np.asarray(rng.standard_gamma(np.where(boost, a + 1.0, a)), dtype=float)
    if boost.any():
        out[boost] *= rng.random(int(boost.sum())) ** (1.0 / a[boost])
    out = np.maximum(out, _TINY)
    return float(out) if scalar else out


@dataclass
class PriorSpec:
    epsilon: float = 0.05
    eta: float = 4.0
    k: int = 10
    means: Mapping[ModelKey, BehavioralStrategy] = field(default_factory=dict)
    mode: str = "informed"

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.mode not in ("informed", "uniform2"):
            raise ValueError(f"prior mode must be 'informed' or 'uniform2', got {self.mode!r}")
        for (label, pos), strat in self.means.items():
            if strat.position != pos:
                raise ValueError(f"prior mean for {label!r} in position {pos} is a position-{strat.position} strategy")

    def dirichlet_params(self, key: ModelKey) -> np.ndarray:
        """(16, 2) Dirichlet parameters (aggressive, passive) for one model."""
        if self.mode == "uniform2":
            return np.full((N_INFOSETS, 2), 2.0)
        mean = round_and_normalize(self.means[key], self.epsilon).probs
        return self.eta * np.stack([mean, 1.0 - mean], axis=-1)


class SampleBank:
    """The ``k`` sampled strategies of each opponent model.

    Probabilities of both actions are stored so that neither is lost to
    rounding when a draw is extremely lopsided.
    """

    def __init__(self, samples: Mapping[ModelKey, np.ndarray]):
        self._pairs: dict[ModelKey, np.ndarray] = {}
        for key in sorted(samples, key=_key_order):
            pair = np.asarray(samples[key], dtype=float)
            if pair.ndim == 2:  # aggressive probs only
                pair = np.stack([pair, 1.0 - pair], axis=-1)
            if pair.ndim != 3 or pair.shape[1:] != (N_INFOSETS, 2):
                raise ValueError(f"samples for {key} must have shape (k, 16, 2)")
            pair = pair.copy()
            pair.setflags(write=False)
            self._pairs[key] = pair
        ks = {p.shape[0] for p in self._pairs.values()}
        if len(ks) > 1:
            raise ValueError("every model needs the same number of samples")
        self.k = ks.pop() if ks else 0

    def keys(self) -> list[ModelKey]:
        return list(self._pairs)

    def __contains__(self, key: ModelKey) -> bool:
        return key in self._pairs

    def __len__(self) -> int:
        return len(self._pairs)

    def pairs(self, key: ModelKey) -> np.ndarray:
        """(k, 16, 2) action probabilities; [..., 0] aggressive, [..., 1] passive."""
        return self._pairs[key]

    def aggressive(self, key: ModelKey) -> np.ndarray:
        return self._pairs[key][..., 0]

    def strategies(self, key: ModelKey) -> list[BehavioralStrategy]:
        return [BehavioralStrategy(key[1], row) for row in self.aggressive(key)]

    def to_json(self) -> str:
        return json.dumps(
            [{"label": str(label), "position": pos, "samples": self._pairs[(label, pos)].tolist()}
             for label, pos in self._pairs],
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> SampleBank:
        return cls({(d["label"], int(d["position"])): np.array(d["samples"]) for d in json.loads(text)})


def _key_order(key: ModelKey):
    return (str(key[0]), key[1])


def create_samples(spec: PriorSpec, rng: np.random.Generator, keys: Iterable[ModelKey] | None = None) -> SampleBank:
    """Draw ``spec.k`` strategies per model: Gamma(alpha, 1) per action, normalized per info set."""
    keys = sorted(spec.means if keys is None else keys, key=_key_order)
    samples = {}
    for key in keys:
        alpha = spec.dirichlet_params(key)
        y = gamma_sample(np.broadcast_to(alpha, (spec.k, N_INFOSETS, 2)), rng)
        # clamp by at most one ulp so that neither action is exactly 0 or 1
        samples[key] = np.clip(y / y.sum(axis=-1, keepdims=True), _TINY, _BELOW_ONE)
    return SampleBank(samples)


# --- likelihoods ----------------------------------------------------------------

def consistent_deals(obs: HandObservation) -> list[tuple[Card, Card, Card]]:
    """Every deal agreeing with the observer's card and the revealed cards."""
    return list(_consistent(obs.observer, obs.own_card, tuple(sorted(obs.revealed.items()))))


@lru_cache(maxsize=None)
def _consistent(observer: int, own: Card, revealed: tuple[tuple[int, Card], ...]) -> tuple:
    known = dict(revealed)
    known[observer] = own
    return tuple(d for d in ALL_DEALS if all(d[p - 1] == c for p, c in known.items()))


@lru_cache(maxsize=None)
def _line(actions: str) -> tuple[tuple[tuple[int, int, int], ...], frozenset[int]]:
    """(position, situation, action column) per action, and the showdown positions.

    Column 0 is the aggressive action, 1 the passive one.
    """
    if not is_terminal(actions):
        raise ValueError(f"observation of unfinished hand {actions!r}")
    decisions = tuple((situation_at(actions[:n]).position, situation_at(actions[:n]).index, 0 if a in "bc" else 1)
                      for n, a in enumerate(actions))
    return decisions, frozenset(showdown_positions(actions))


def _check_observation(obs: HandObservation) -> tuple[tuple, tuple]:
    decisions, shown = _line(obs.actions)
    if set(obs.revealed) != shown:
        raise ValueError("revealed cards do not match the showdown of the action sequence")
    deals = _consistent(obs.observer, obs.own_card, tuple(sorted(obs.revealed.items())))
    if not deals:
        raise ValueError("observation inconsistent with any deal")
    return decisions, deals


def likelihood_matrix(obs: HandObservation, pairs_a: np.ndarray, pos_a: int,
                      pairs_b: np.ndarray, pos_b: int) -> np.ndarray:
    """Likelihood of the opponents' observed actions for every sample pair.

    ``pairs_a`` and ``pairs_b`` are (k, 16, 2) action-probability arrays of the
    opponents in positions ``pos_a`` and ``pos_b``. Hidden cards are summed
    out over all deals consistent with the observation, each weighted by
    1 / (number of consistent deals). The observer's own action
    probabilities are left out; they are the same for every sample pair.
    """
    if {pos_a, pos_b, obs.observer} != set(POSITIONS):
        raise ValueError("the two opponent positions and the observer must cover all three seats")
    decisions, deals = _check_observation(obs)
    n = len(deals)
    fa = np.ones((pairs_a.shape[0], n))
    fb = np.ones((pairs_b.shape[0], n))
    for h, deal in enumerate(deals):
        for pos, sit, col in decisions:
            slot = int(deal[pos - 1]) * 4 + sit - 1
            if pos == pos_a:
                fa[:, h] *= pairs_a[:, slot, col]
            elif pos == pos_b:
                fb[:, h] *= pairs_b[:, slot, col]
    return (fa / n) @ fb.T


def hand_likelihood(obs: HandObservation, tau_a: BehavioralStrategy, tau_b: BehavioralStrategy) -> float:
    """Marginal likelihood of the two opponents' observed actions under one strategy pair."""
    pa = np.stack([tau_a.probs, 1.0 - tau_a.probs], axis=-1)[None]
    pb = np.stack([tau_b.probs, 1.0 - tau_b.probs], axis=-1)[None]
    return float(likelihood_matrix(obs, pa, tau_a.position, pb, tau_b.position)[0, 0])


# --- posterior --------------------------------------------------------------------

class PosteriorTable:
    """Joint posterior over sample-index pairs, one k x k matrix per configuration.

    A configuration names the two active models as ``((label_a, pos_a),
    (label_b, pos_b))``; rows index samples of the first, columns the second.
    Unseen configurations start uniform.
    """

    def __init__(self, k: int, matrices: Mapping[Configuration, np.ndarray] | None = None):
        self.k = int(k)
        self._m: dict[Configuration, np.ndarray] = {}
        for config, m in (matrices or {}).items():
            m = np.array(m, dtype=float)
            if m.shape != (self.k, self.k):
                raise ValueError(f"posterior for {config} must be {self.k}x{self.k}")
            self._m[config] = m

    def uniform(self) -> np.ndarray:
        return np.full((self.k, self.k), 1.0 / (self.k * self.k))

    def matrix(self, config: Configuration) -> np.ndarray:
        m = self._m.get(config)
        return self.uniform() if m is None else m.copy()

    def configurations(self) -> list[Configuration]:
        return list(self._m)

    def with_matrix(self, config: Configuration, m: np.ndarray) -> PosteriorTable:
        out = PosteriorTable(self.k)
        out._m = dict(self._m)
        out._m[config] = m
        return out

    def to_json(self) -> str:
        rows = [{"models": [[str(l), p] for l, p in config], "weights": m.tolist()}
                for config, m in sorted(self._m.items(), key=lambda kv: [_key_order(x) for x in kv[0]])]
        return json.dumps({"k": self.k, "tables": rows}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> PosteriorTable:
        d = json.loads(text)
        mats = {tuple((l, int(p)) for l, p in row["models"]): np.array(row["weights"]) for row in d["tables"]}
        return cls(d["k"], mats)  # type: ignore[arg-type]


def bayes_update(prior: np.ndarray, likelihood: np.ndarray) -> np.ndarray:
    q = prior * likelihood
    z = q.sum()
    if not z > 0:
        raise ValueError("observation impossible under all samples")
    # keep weights representable: exact Bayes never drives a weight to zero
    return np.maximum(q / z, _TINY)


def update_posterior(table: PosteriorTable, config: Configuration, obs: HandObservation,
                     bank: SampleBank) -> PosteriorTable:
    (_, pos_a), (_, pos_b) = config
    lik = likelihood_matrix(obs, bank.pairs(config[0]), pos_a, bank.pairs(config[1]), pos_b)
    return table.with_matrix(config, bayes_update(table.matrix(config), lik))


def mixture_probs(table: PosteriorTable, config: Configuration, bank: SampleBank) -> tuple[np.ndarray, np.ndarray]:
    """Aggressive-action probabilities of both posterior-mean models, as raw arrays."""
    m = table._m.get(config)
    if m is None:
        m = table.uniform()
    a = np.clip(m.sum(axis=1) @ bank.aggressive(config[0]), 0.0, 1.0)
    b = np.clip(m.sum(axis=0) @ bank.aggressive(config[1]), 0.0, 1.0)
    return a, b


def mixture_model(table: PosteriorTable, config: Configuration,
                  bank: SampleBank) -> tuple[BehavioralStrategy, BehavioralStrategy]:
    """Posterior-weighted average of each active model's samples."""
    a, b = mixture_probs(table, config, bank)
    return BehavioralStrategy(config[0][1], a), BehavioralStrategy(config[1][1], b)
