"""Exact expected values, best responses and exploitability.

The game tree is flattened once into index tables over (deal, terminal line,
decision) so that a profile's value is a gather-and-product over a
24 x 13 x 5 array. A best response is found card by card: for each of our
four cards, all 16 pure assignments over our four situations are scored
and the best one kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .game import ALL_DEALS, POSITIONS, TERMINAL_SEQUENCES, payoff, situation_at
from .strategies import N_INFOSETS, BehavioralStrategy

N_DEALS = len(ALL_DEALS)
N_LINES = len(TERMINAL_SEQUENCES)
MAX_DECISIONS = 5
TIE_TOL = 1e-12

# Flat layout of a profile: v[0:48] aggressive probs (position-major, card-major),
# v[48:96] passive probs, v[96] = 1 for padding.
_PASSIVE_OFFSET = 3 * N_INFOSETS
_PAD = 2 * _PASSIVE_OFFSET


def _line_decisions(line: str) -> list[tuple[int, int, bool]]:
    """(position, situation, aggressive) for each action on a terminal line."""
    return [(situation_at(line[:n]).position, situation_at(line[:n]).index, a in "bc")
            for n, a in enumerate(line)]


LINE_DECISIONS = tuple(_line_decisions(line) for line in TERMINAL_SEQUENCES)

PAYOFFS = np.array([[payoff(deal, line) for line in TERMINAL_SEQUENCES] for deal in ALL_DEALS], dtype=float)
DEAL_CARDS = np.array(ALL_DEALS, dtype=int)  # (24, 3)


def _decision_index(deal, pos: int, sit: int, aggressive: bool) -> int:
    slot = (pos - 1) * N_INFOSETS + int(deal[pos - 1]) * 4 + sit - 1
    return slot if aggressive else slot + _PASSIVE_OFFSET


def _index_table(skip: int | None) -> np.ndarray:
    idx = np.full((N_DEALS, N_LINES, MAX_DECISIONS), _PAD, dtype=np.intp)
    for d, deal in enumerate(ALL_DEALS):
        for li, decisions in enumerate(LINE_DECISIONS):
            for m, (pos, sit, aggr) in enumerate(decisions):
                if pos != skip:
                    idx[d, li, m] = _decision_index(deal, pos, sit, aggr)
    return idx


DECISION_INDEX = _index_table(None)
OPPONENT_INDEX = {p: _index_table(p) for p in POSITIONS}


def _consistency(position: int) -> np.ndarray:
    """(16, 13) 0/1 matrix: does pure assignment ``a`` (bit s-1 set = aggressive
    in situation s) take every action ``position`` takes on each line?"""
    out = np.zeros((16, N_LINES))
    for a in range(16):
        for li, decisions in enumerate(LINE_DECISIONS):
            out[a, li] = all(
                bool(a >> (sit - 1) & 1) == aggr for pos, sit, aggr in decisions if pos == position
            )
    return out


CONSISTENT = {p: _consistency(p) for p in POSITIONS}
# Assignment search order: fewest aggressive choices first, so ties go passive.
_ORDER = np.array(sorted(range(16), key=lambda a: (bin(a).count("1"), a)))
_ORDERED_BITS = ((_ORDER[:, None] >> np.arange(4)) & 1).astype(float)  # (16, 4)

CARD_MASKS = {p: np.stack([DEAL_CARDS[:, p - 1] == c for c in range(4)]) for p in POSITIONS}  # (4, 24)


def _flat(profile: Sequence[BehavioralStrategy] | np.ndarray) -> np.ndarray:
    if isinstance(profile, np.ndarray):
        aggr = profile.reshape(-1)
    else:
        aggr = np.concatenate([s.probs for s in profile])
    return np.concatenate([aggr, 1.0 - aggr, [1.0]])


def _as_table(strategies) -> np.ndarray:
    """(3, 16) table of aggressive probs; positions not supplied stay zero."""
    table = np.zeros((3, N_INFOSETS))
    if isinstance(strategies, Mapping):
        strategies = strategies.values()
    for s in strategies:
        table[s.position - 1] = s.probs
    return table


def line_values(profile) -> np.ndarray:
    """Reach-weighted payoffs, shape (24, 13, 3), each deal weighted 1/24."""
    v = _flat(_as_table(profile))
    reach = v[DECISION_INDEX].prod(axis=-1)
    return reach[..., None] * PAYOFFS / N_DEALS


def profile_value(profile) -> np.ndarray:
    """Expected chips per hand for positions 1, 2, 3."""
    return line_values(profile).sum(axis=(0, 1))


@dataclass
class ResponseResult:
    strategy: BehavioralStrategy
    value: float
    card_values: np.ndarray  # per-card contribution to value


def assignment_values(position: int, opponents) -> np.ndarray:
    """(4, 16) expected value contributed by each card under each pure assignment.

    Columns follow the passive-first search order; column ``i`` corresponds to
    situation bits ``_ORDER[i]``.
    """
    table = opponents if isinstance(opponents, np.ndarray) else _as_table(opponents)
    v = _flat(table)
    opp_reach = v[OPPONENT_INDEX[position]].prod(axis=-1)  # (24, 13)
    weighted = opp_reach * PAYOFFS[:, :, position - 1] / N_DEALS
    per_card = CARD_MASKS[position] @ weighted  # (4, 13)
    return per_card @ CONSISTENT[position][_ORDER].T


def _best_assignment(position: int, opponents) -> tuple[np.ndarray, np.ndarray]:
    ev = assignment_values(position, opponents)
    best = ev.max(axis=1, keepdims=True)
    choice = np.argmax(ev >= best - TIE_TOL * np.maximum(1.0, np.abs(best)), axis=1)
    probs = _ORDERED_BITS[choice].reshape(-1)  # card-major: card * 4 + situation - 1
    return probs, ev[np.arange(4), choice]


def best_response_probs(position: int, table: np.ndarray) -> np.ndarray:
    """Pure best-response probabilities against a (3, 16) opponent table."""
    return _best_assignment(position, table)[0]


def best_response(position: int, opponents) -> ResponseResult:
    """Pure best response for ``position`` against fixed opponent strategies.

    ``opponents`` is an iterable (or position-keyed mapping) of the other two
    positions' strategies, or a (3, 16) table whose row for ``position`` is
    ignored. Ties go to the assignment with the fewest aggressive actions, so
    unreachable info sets are played passively.
    """
    if position not in POSITIONS:
        raise ValueError(f"position must be 1, 2 or 3, got {position}")
    probs, card_values = _best_assignment(position, opponents)
    return ResponseResult(BehavioralStrategy(position, probs), float(card_values.sum()), card_values)


def best_response_value(position: int, opponents) -> float:
    return best_response(position, opponents).value


def assignment_weights(probs: np.ndarray) -> np.ndarray:
    """(4, 16) probability that a behavioral strategy plays each pure assignment, per card.

    Each of our situations is visited at most once per hand, so the behavioral
    strategy is equivalent to this product distribution over assignments.
    """
    p = np.asarray(probs, dtype=float).reshape(4, 1, 4)
    bits = _ORDERED_BITS[None]
    return np.where(bits == 1.0, p, 1.0 - p).prod(axis=-1)


def strategy_value(position: int, strategy: BehavioralStrategy, opponents) -> float:
    """Value of ``strategy`` for ``position``, summed the same way as a best response.

    For a pure strategy this reproduces ``best_response(...).value`` bit for bit.
    """
    ev = assignment_values(position, opponents)
    return float((assignment_weights(strategy.probs) * ev).sum(axis=1).sum())


def exploitability(profile: Sequence[BehavioralStrategy]) -> np.ndarray:
    """Per-position gain available from deviating to a best response (clamped at 0)."""
    table = _as_table(profile)
    gains = np.zeros(3)
    for p in POSITIONS:
        ev = assignment_values(p, table)
        _, best = _best_assignment(p, table)
        own = (assignment_weights(table[p - 1]) * ev).sum(axis=1)
        gains[p - 1] = best.sum() - own.sum()
    return np.maximum(gains, 0.0)
