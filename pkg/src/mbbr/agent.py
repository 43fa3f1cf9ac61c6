"""Multiplayer Bayesian best response agent.

Plays a default equilibrium strategy for the first ``H`` hands while
updating posteriors over sampled opponent strategies, then best-responds to
the posterior-mean models of whichever two opponent (label, seat) models
are active in the current hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .bayes import (
    Configuration, PosteriorTable, PriorSpec, SampleBank, create_samples, mixture_model, mixture_probs,
    update_posterior,
)
from .best_response import best_response_probs
from .game import POSITIONS, HandObservation, InfoSetKey
from .strategies import AgentPolicy, BehavioralStrategy, nash_profile

Profile = tuple[BehavioralStrategy, BehavioralStrategy, BehavioralStrategy]


def next_seat(seat: int) -> int:
    """Seat rotation between hands: first to act moves to third, second to first, third to second."""
    return (seat - 2) % 3 + 1


@dataclass
class MbbrConfig:
    epsilon: float = 0.05
    k: int = 10
    eta: float = 4.0
    H: int = 100
    T: int = 3000
    default_profile: Profile = field(default_factory=lambda: nash_profile("lower"))
    prior_mean_profile: Profile = field(default_factory=lambda: nash_profile("midpoint"))
    prior_mode: str = "informed"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.H <= self.T:
            raise ValueError(f"need 0 <= H <= T, got H={self.H}, T={self.T}")
        for name in ("default_profile", "prior_mean_profile"):
            prof = getattr(self, name)
            if tuple(s.position for s in prof) != POSITIONS:
                raise ValueError(f"{name} must hold strategies for positions 1, 2, 3")

    def prior(self, opponent_labels: Sequence[Hashable]) -> PriorSpec:
        means = {(label, pos): self.prior_mean_profile[pos - 1] for label in opponent_labels for pos in POSITIONS}
        return PriorSpec(self.epsilon, self.eta, self.k, means, self.prior_mode)


class MbbrAgent(AgentPolicy):
    """Bayesian best-response agent for one match.

    ``opponent_labels`` fixes the row/column order of the posterior tables;
    when omitted, the opponents seen at the first hand are adopted in seat
    order after ours.
    """

    name = "MBBR"

    def __init__(self, config: MbbrConfig, our_label: Hashable = "MBBR",
                 opponent_labels: Sequence[Hashable] | None = None,
                 rng: np.random.Generator | None = None,
                 on_models: Callable[[int, Configuration, tuple[BehavioralStrategy, ...]], None] | None = None):
        self.config = config
        self.our_label = our_label
        self.name = str(our_label)
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.on_models = on_models
        self.t = 0
        self.seat: int | None = None
        self.bank: SampleBank | None = None
        self.posterior = PosteriorTable(config.k)
        self.update_counts: dict[Configuration, int] = {}
        self.labels: tuple[Hashable, Hashable] | None = None
        self._config: Configuration | None = None
        self._response: np.ndarray | None = None
        if opponent_labels is not None:
            self._init_models(tuple(opponent_labels))

    def _init_models(self, labels: tuple[Hashable, ...]) -> None:
        if len(labels) != 2 or labels[0] == labels[1] or self.our_label in labels:
            raise ValueError(f"need two distinct opponent labels different from ours, got {labels}")
        self.labels = labels  # type: ignore[assignment]
        self.bank = create_samples(self.config.prior(labels), self.rng)
        # Seating under rotation keeps the cyclic order: labels[0] sits right after us.
        for seat in POSITIONS:
            config = ((labels[0], seat % 3 + 1), (labels[1], (seat + 1) % 3 + 1))
            self.posterior = self.posterior.with_matrix(config, self.posterior.uniform())

    @property
    def exploiting(self) -> bool:
        return self.t > self.config.H

    def configuration(self, seat: int, seating: Mapping[int, Hashable]) -> Configuration:
        where = {label: s for s, label in seating.items()}
        a, b = self.labels  # type: ignore[misc]
        return ((a, where[a]), (b, where[b]))

    def begin_hand(self, hand_index: int, seat: int, seating: Mapping[int, Hashable]) -> None:
        if self.labels is None:
            self._init_models(tuple(seating[(seat + i - 1) % 3 + 1] for i in (1, 2)))
        self.t = hand_index
        self.seat = seat
        self._config = self.configuration(seat, seating)
        self._response = None
        if self.exploiting:
            a, b = mixture_probs(self.posterior, self._config, self.bank)
            if self.on_models is not None:
                self.on_models(hand_index, self._config, mixture_model(self.posterior, self._config, self.bank))
            table = np.zeros((3, 16))
            table[self._config[0][1] - 1] = a
            table[self._config[1][1] - 1] = b
            self._response = best_response_probs(seat, table)

    def prob(self, key: InfoSetKey) -> float:
        if key.position != self.seat:
            raise ValueError(f"asked to act in position {key.position} while seated in {self.seat}")
        if self._response is not None:
            return float(self._response[key.index])
        return float(self.config.default_profile[key.position - 1].probs[key.index])

    def end_hand(self, obs: HandObservation) -> None:
        if obs.observer != self.seat:
            raise ValueError("observation is not from our seat")
        self.posterior = update_posterior(self.posterior, self._config, obs, self.bank)
        self.update_counts[self._config] = self.update_counts.get(self._config, 0) + 1
        self._response = None

    def current_models(self) -> tuple[BehavioralStrategy, BehavioralStrategy]:
        return mixture_model(self.posterior, self._config, self.bank)


def new_agent(config: MbbrConfig, our_label: Hashable, opponent_labels: Sequence[Hashable]) -> MbbrAgent:
    return MbbrAgent(config, our_label, opponent_labels)
