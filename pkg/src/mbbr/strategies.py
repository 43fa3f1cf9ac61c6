"""Behavioral strategies, the robust Nash agents and a zoo of exploitable agents.

A behavioral strategy for one position stores, for each of its 16 info
sets, the probability of the aggressive action (bet when unopened, call
when facing a bet). Slots are card-major: ``card * 4 + situation - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .game import CARDS, POSITIONS, Card, HandObservation, InfoSetKey, enumerate_infosets

N_INFOSETS = 16


@dataclass(eq=False)
class BehavioralStrategy:
    position: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        if self.position not in POSITIONS:
            raise ValueError(f"position must be 1, 2 or 3, got {self.position}")
        probs = np.asarray(self.probs, dtype=float).reshape(-1).copy()
        if probs.shape != (N_INFOSETS,):
            raise ValueError(f"expected {N_INFOSETS} info sets, got {probs.shape[0]}")
        if np.any(~np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        probs.setflags(write=False)
        self.probs = probs

    def __getitem__(self, key: InfoSetKey | tuple[Card | str, int]) -> float:
        if isinstance(key, InfoSetKey):
            if key.position != self.position:
                raise KeyError(f"info set {key} does not belong to position {self.position}")
            return float(self.probs[key.index])
        card, sit = key
        return float(self.probs[InfoSetKey(self.position, Card.parse(card), sit).index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BehavioralStrategy):
            return NotImplemented
        return self.position == other.position and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash((self.position, self.probs.tobytes()))

    @classmethod
    def constant(cls, position: int, p: float) -> BehavioralStrategy:
        return cls(position, np.full(N_INFOSETS, p))

    @classmethod
    def from_mapping(cls, position: int, values: Mapping[tuple[int, int], float]) -> BehavioralStrategy:
        """Build from ``{(card 1..4, situation 1..4): prob}``; every cell must be present."""
        probs = np.empty(N_INFOSETS)
        for key in enumerate_infosets(position):
            probs[key.index] = float(values[(int(key.card) + 1, key.situation)])
        return cls(position, probs)

    def items(self) -> Iterable[tuple[InfoSetKey, float]]:
        for key in enumerate_infosets(self.position):
            yield key, float(self.probs[key.index])


def action_for(key: InfoSetKey, aggressive: bool) -> str:
    if key.situation == 1:
        return "b" if aggressive else "k"
    return "c" if aggressive else "f"


def act(strategy: BehavioralStrategy, key: InfoSetKey, rng: np.random.Generator) -> str:
    """Sample an action at ``key``: one uniform draw, aggressive iff it falls below the probability."""
    p = strategy[key]
    return action_for(key, rng.random() < p)


# --- text format ------------------------------------------------------------

def _format_prob(p: float | Fraction) -> str:
    if isinstance(p, Fraction):
        return str(p)
    fr = Fraction(p).limit_denominator(1 << 16)
    return str(fr) if float(fr) == p else repr(float(p))


def _parse_prob(text: str) -> Fraction:
    return Fraction(text.strip())


def dump_strategies(strategies: Iterable[BehavioralStrategy]) -> str:
    lines = []
    for strat in strategies:
        for key, p in strat.items():
            lines.append(f"{key.position} {Card(key.card).name} {key.situation} {_format_prob(p)}")
    return "\n".join(lines) + "\n"


def dump_params(params: Mapping[InfoSetKey, Fraction]) -> str:
    keys = sorted(params, key=lambda k: (k.position, k.index))
    return "".join(f"{k.position} {Card(k.card).name} {k.situation} {_format_prob(params[k])}\n" for k in keys)


def parse_params(text: str) -> dict[InfoSetKey, Fraction]:
    """Parse ``position card situation prob`` lines; ``#`` starts a comment."""
    out: dict[InfoSetKey, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        pos, card, sit, prob = parts
        key = InfoSetKey(int(pos), Card.parse(card), int(sit))
        if key.position not in POSITIONS or key.situation not in (1, 2, 3, 4):
            raise ValueError(f"line {lineno}: bad info set {line!r}")
        p = _parse_prob(prob)
        if not 0 <= p <= 1:
            raise ValueError(f"line {lineno}: probability {prob} outside [0, 1]")
        out[key] = p
    return out


def parse_strategies(text: str) -> tuple[BehavioralStrategy, ...]:
    """Parse a strategy file into one strategy per position it covers, sorted by position."""
    params = parse_params(text)
    out = []
    for pos in sorted({k.position for k in params}):
        missing = [k for k in enumerate_infosets(pos) if k not in params]
        if missing:
            raise ValueError(f"position {pos} is missing info sets {', '.join(map(str, missing))}")
        out.append(BehavioralStrategy(pos, [float(params[k]) for k in enumerate_infosets(pos)]))
    return tuple(out)


# --- robust Nash family points ------------------------------------------------

F = Fraction

# Listed parameters per position, keyed (card j, situation k) with j = 1 (J) .. 4 (A).
_LISTED_CELLS = ((1, 1), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (3, 4), (4, 1))

_TABLES: dict[str, dict[int, tuple[Fraction, ...]]] = {
    # values in _LISTED_CELLS order
    "lower": {
        1: (F(0), F(0), F(0), F(0), F(0), F(0), F(1, 2), F(0), F(0)),
        2: (F(0), F(0), F(0), F(0), F(0), F(0), F(1, 2), F(0), F(0)),
        3: (F(0), F(1, 2), F(0), F(0), F(0), F(0), F(1, 2), F(0), F(1)),
    },
    "upper": {
        1: (F(0), F(0), F(0), F(0), F(0), F(0), F(1, 2), F(0), F(0)),
        2: (F(1, 4), F(1, 4), F(0), F(0), F(0), F(1), F(7, 8), F(0), F(1)),
        3: (F(0), F(1, 2), F(0), F(0), F(0), F(0), F(0), F(1), F(1)),
    },
    "midpoint": {
        1: (F(0), F(0), F(0), F(0), F(0), F(0), F(1, 2), F(0), F(0)),
        2: (F(1, 8), F(1, 8), F(0), F(0), F(0), F(23, 64), F(11, 16), F(0), F(1, 2)),
        3: (F(0), F(1, 2), F(0), F(0), F(0), F(0), F(1, 4), F(1, 2), F(1)),
    },
}

# Cells missing from the tables are fixed by dominance: a Jack never wins a
# showdown, an Ace always does, and a Queen facing a bet plus a call would
# need both live opponents to hold the single Jack.
_DOMINANCE_CELLS = {(1, 2): F(0), (1, 3): F(0), (1, 4): F(0), (2, 4): F(0),
                    (4, 2): F(1), (4, 3): F(1), (4, 4): F(1)}

NASH_POINTS = ("lower", "midpoint", "upper")
POINT_ALIASES = {
    "lower": "lower", "n1": "lower", "low": "lower",
    "upper": "upper", "n2": "upper", "up": "upper",
    "midpoint": "midpoint", "n3": "midpoint", "mid": "midpoint",
}
AGENT_NAMES = {"lower": "N1", "upper": "N2", "midpoint": "N3"}


def canonical_point(point: str) -> str:
    try:
        return POINT_ALIASES[point.lower()]
    except KeyError:
        raise ValueError(f"unknown Nash family point {point!r}; choose lower, midpoint or upper") from None


def listed_params(point: str) -> dict[InfoSetKey, Fraction]:
    """The 27 table entries of a family point, keyed by info set."""
    table = _TABLES[canonical_point(point)]
    return {
        InfoSetKey(pos, Card(j - 1), k): value
        for pos, values in table.items()
        for (j, k), value in zip(_LISTED_CELLS, values)
    }


# As printed, the upper point has P2 always calling a bet with K (b32 = 1),
# which makes betting the Ace worth 1/192 chip more to P1 than the listed
# check. The largest b32 keeping the profile an equilibrium is
# (2 + 4 b11 + 3 b21) / 4 = 15/16; the midpoint's 23/64 is half that bound.
UPPER_B32_BOUND = F(15, 16)


def nash_params(point: str, repaired: bool = False) -> dict[InfoSetKey, Fraction]:
    """All 48 exact parameters of a family point: the table entries plus dominance cells.

    ``repaired=True`` caps the upper point's b32 at ``UPPER_B32_BOUND``; the
    other points are unaffected.
    """
    params = listed_params(point)
    for pos in POSITIONS:
        for (j, k), value in _DOMINANCE_CELLS.items():
            params[InfoSetKey(pos, Card(j - 1), k)] = value
    if repaired and canonical_point(point) == "upper":
        params[InfoSetKey(2, Card.K, 2)] = UPPER_B32_BOUND
    return params


def nash_profile(point: str, repaired: bool = False) -> tuple[BehavioralStrategy, BehavioralStrategy, BehavioralStrategy]:
    params = nash_params(point, repaired)
    return tuple(  # type: ignore[return-value]
        BehavioralStrategy(pos, [float(params[k]) for k in enumerate_infosets(pos)]) for pos in POSITIONS
    )


# --- agents -------------------------------------------------------------------

class AgentPolicy:
    """Seat-aware agent interface used by the match harness.

    ``begin_hand`` is called before every hand with the 1-based hand index,
    the agent's seat and the identities of all three seats; ``prob`` gives
    the aggressive-action probability at one of the agent's info sets;
    ``end_hand`` delivers the agent's own view of the finished hand.
    """

    name = "agent"

    def begin_hand(self, hand_index: int, seat: int, seating: Mapping[int, str]) -> None:
        pass

    def prob(self, key: InfoSetKey) -> float:
        raise NotImplementedError

    def act(self, key: InfoSetKey, rng: np.random.Generator) -> str:
        return action_for(key, rng.random() < self.prob(key))

    def end_hand(self, obs: HandObservation) -> None:
        pass


class StaticAgent(AgentPolicy):
    """Plays a fixed strategy per seat, ignoring history."""

    def __init__(self, name: str, profile: tuple[BehavioralStrategy, ...]):
        if tuple(s.position for s in profile) != POSITIONS:
            raise ValueError("profile must hold strategies for positions 1, 2, 3 in order")
        self.name = name
        self.profile = profile
        self._table = np.stack([s.probs for s in profile])

    def prob(self, key: InfoSetKey) -> float:
        return float(self._table[key.position - 1, key.index])


def nash_agent(point: str) -> StaticAgent:
    point = canonical_point(point)
    return StaticAgent(AGENT_NAMES[point], nash_profile(point))


def _zoo_rule(name: str, card: Card, situation: int) -> float:
    if name == "always-aggressive":
        return 1.0
    if name == "calling-station":
        return 0.0 if situation == 1 else 1.0
    if name == "honest":
        return 1.0 if card >= Card.K else 0.0
    if name == "tight-folder":
        return 1.0 if card == Card.A else 0.0
    if name == "uniform-random":
        return 0.5
    raise ValueError(f"unknown zoo agent {name!r}")


ZOO_NAMES = ("always-aggressive", "calling-station", "honest", "tight-folder", "uniform-random")


def zoo_profile(name: str) -> tuple[BehavioralStrategy, BehavioralStrategy, BehavioralStrategy]:
    return tuple(  # type: ignore[return-value]
        BehavioralStrategy(pos, [_zoo_rule(name, k.card, k.situation) for k in enumerate_infosets(pos)])
        for pos in POSITIONS
    )


def zoo_agent(name: str) -> StaticAgent:
    """Stand-in opponents.

    always-aggressive bets and calls everything; calling-station never bets
    and never folds; honest is aggressive with K or A only; tight-folder is
    aggressive with A only; uniform-random is aggressive half the time.
    """
    return StaticAgent(name, zoo_profile(name))


__all__ = [
    "AGENT_NAMES", "AgentPolicy", "BehavioralStrategy", "CARDS", "NASH_POINTS", "StaticAgent",
    "ZOO_NAMES", "act", "action_for", "canonical_point", "dump_params", "dump_strategies",
    "listed_params", "nash_agent", "nash_params", "nash_profile", "parse_params",
    "parse_strategies", "zoo_agent", "zoo_profile",
]
