"""Three-player Kuhn poker.

Four cards (J < Q < K < A), three players, one ante each and a single
fixed-size bet. Action sequences are lower-case strings over ``k`` (check),
``b`` (bet), ``c`` (call) and ``f`` (fold); deals are 3-character strings
such as ``"QKA"`` giving the cards of positions 1, 2, 3.

Positions are 1-based everywhere. The n-th action of any betting line
(0-based) always belongs to position ``n % 3 + 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, NamedTuple

POSITIONS = (1, 2, 3)
ACTIONS = "kbcf"
AGGRESSIVE = frozenset("bc")


class Card(IntEnum):
    J = 0
    Q = 1
    K = 2
    A = 3

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str | Card | int) -> Card:
        if isinstance(text, str):
            try:
                return cls[text.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown card {text!r}") from None
        return cls(int(text))


CARDS = tuple(Card)

Deal = tuple[Card, Card, Card]

ALL_DEALS: tuple[Deal, ...] = tuple(
    tuple(d) for d in itertools.permutations(CARDS, 3)  # type: ignore[misc]
)


def parse_deal(text: str | Deal) -> Deal:
    if isinstance(text, str):
        cards = tuple(Card.parse(ch) for ch in text.strip())
    else:
        cards = tuple(Card.parse(c) for c in text)
    if len(cards) != 3 or len(set(cards)) != 3:
        raise ValueError(f"a deal needs three distinct cards, got {text!r}")
    return cards  # type: ignore[return-value]


def format_deal(deal: Deal) -> str:
    return "".join(Card(c).name for c in deal)


def normalize_seq(seq: str) -> str:
    """Canonical form of an action sequence: lower case, no separators."""
    out = "".join(ch for ch in seq.lower() if not ch.isspace() and ch not in ",-")
    bad = set(out) - set(ACTIONS)
    if bad:
        raise ValueError(f"unknown action symbols {sorted(bad)} in {seq!r}")
    return out


class Situation(NamedTuple):
    position: int
    index: int
    prefix: str


# (position, index) -> public prefix at which that position acts.
# Index 1 is the unopened bet/check decision; 2-4 face a bet.
SITUATIONS: dict[tuple[int, int], Situation] = {
    (pos, idx): Situation(pos, idx, prefix)
    for pos, table in {
        1: ("", "kkb", "kbf", "kbc"),
        2: ("k", "b", "kkbf", "kkbc"),
        3: ("kk", "kb", "bf", "bc"),
    }.items()
    for idx, prefix in enumerate(table, start=1)
}
_BY_PREFIX = {s.prefix: s for s in SITUATIONS.values()}


def _bet_index(seq: str) -> int:
    return seq.find("b")


def _check_prefix(seq: str) -> None:
    """Raise ValueError unless ``seq`` is a prefix of a legal betting line."""
    bet = -1
    for n, a in enumerate(seq):
        if bet < 0:
            if n >= 3:
                raise ValueError(f"illegal action sequence {seq!r}: betting already closed")
            if a == "b":
                bet = n
            elif a != "k":
                raise ValueError(f"illegal action sequence {seq!r}: {a!r} with no bet to face")
        else:
            if n >= bet + 3:
                raise ValueError(f"illegal action sequence {seq!r}: betting already closed")
            if a not in "cf":
                raise ValueError(f"illegal action sequence {seq!r}: {a!r} while facing a bet")


def is_terminal(seq: str) -> bool:
    seq = normalize_seq(seq)
    _check_prefix(seq)
    bet = _bet_index(seq)
    if bet < 0:
        return len(seq) == 3
    return len(seq) == bet + 3


def to_move(seq: str) -> int:
    """Position whose turn it is at a non-terminal prefix."""
    if is_terminal(seq):
        raise ValueError("no actions at terminal")
    return len(normalize_seq(seq)) % 3 + 1


def legal_actions(seq: str) -> frozenset[str]:
    seq = normalize_seq(seq)
    if is_terminal(seq):
        raise ValueError("no actions at terminal")
    return frozenset("cf") if "b" in seq else frozenset("kb")


def situation_of(position: int, seq: str) -> Situation | None:
    """The betting situation of ``position`` at ``seq``, or None if it is not to act."""
    seq = normalize_seq(seq)
    _check_prefix(seq)
    sit = _BY_PREFIX.get(seq)
    if sit is None or sit.position != position:
        return None
    return sit


def situation_at(seq: str) -> Situation:
    """The situation of whoever is to act at the non-terminal prefix ``seq``."""
    try:
        return _BY_PREFIX[seq]
    except KeyError:
        raise ValueError(f"{seq!r} is not a decision point") from None


def contributions(seq: str) -> tuple[int, int, int]:
    chips = [1, 1, 1]
    for n, a in enumerate(seq):
        if a in AGGRESSIVE:
            chips[n % 3] += 1
    return tuple(chips)  # type: ignore[return-value]


def folded(seq: str) -> frozenset[int]:
    return frozenset(n % 3 + 1 for n, a in enumerate(seq) if a == "f")


def showdown_positions(seq: str) -> tuple[int, ...]:
    """Positions whose cards are shown at the end of a terminal line (empty if uncontested)."""
    live = tuple(p for p in POSITIONS if p not in folded(seq))
    return live if len(live) >= 2 else ()


def payoff(deal: Deal, seq: str) -> tuple[int, int, int]:
    """Net chips won by each position at the end of a terminal line."""
    seq = normalize_seq(seq)
    if not is_terminal(seq):
        raise ValueError(f"payoff of non-terminal sequence {seq!r}")
    paid = contributions(seq)
    live = [p for p in POSITIONS if p not in folded(seq)]
    winner = max(live, key=lambda p: deal[p - 1])
    pot = sum(paid)
    return tuple((pot if p == winner else 0) - paid[p - 1] for p in POSITIONS)  # type: ignore[return-value]


@dataclass(frozen=True)
class HandObservation:
    """What one seat learns from a finished hand."""

    observer: int
    own_card: Card
    actions: str
    revealed: Mapping[int, Card] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.observer in self.revealed and self.revealed[self.observer] != self.own_card:
            raise ValueError("revealed card of the observer disagrees with own_card")


def observe(deal: Deal, seq: str, observer: int) -> HandObservation:
    seq = normalize_seq(seq)
    if not is_terminal(seq):
        raise ValueError(f"cannot observe non-terminal sequence {seq!r}")
    shown = {p: Card(deal[p - 1]) for p in showdown_positions(seq)}
    return HandObservation(observer, Card(deal[observer - 1]), seq, shown)


class InfoSetKey(NamedTuple):
    position: int
    card: Card
    situation: int

    @property
    def index(self) -> int:
        """Card-major slot of this info set within its position (0..15)."""
        return int(self.card) * 4 + self.situation - 1

    def __str__(self) -> str:
        return f"{self.position} {Card(self.card).name} {self.situation}"


def enumerate_infosets(position: int) -> list[InfoSetKey]:
    if position not in POSITIONS:
        raise ValueError(f"position must be 1, 2 or 3, got {position}")
    return [InfoSetKey(position, c, s) for c in CARDS for s in (1, 2, 3, 4)]


def infoset_at(deal: Deal, seq: str) -> InfoSetKey:
    sit = situation_at(seq)
    return InfoSetKey(sit.position, Card(deal[sit.position - 1]), sit.index)


def _prefixes(seq: str = "") -> list[str]:
    out = [seq]
    if not is_terminal(seq):
        for a in sorted(legal_actions(seq)):
            out.extend(_prefixes(seq + a))
    return out


ALL_PREFIXES: tuple[str, ...] = tuple(_prefixes())
TERMINAL_SEQUENCES: tuple[str, ...] = tuple(s for s in ALL_PREFIXES if is_terminal(s))
DECISION_PREFIXES: tuple[str, ...] = tuple(s for s in ALL_PREFIXES if not is_terminal(s))
