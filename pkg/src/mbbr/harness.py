"""Duplicate-match tournaments.

A duplicate set plays the same deal schedule once for each of the six
assignments of agents to starting seats. Seats rotate every hand; cards are
attached to seats, so every agent sees every card sequence from every seat.
Standard errors are taken across duplicate sets, the independent unit.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agent import MbbrAgent, MbbrConfig, next_seat
from .game import (
    ALL_DEALS, DECISION_PREFIXES, TERMINAL_SEQUENCES, Deal, HandObservation, InfoSetKey, format_deal, is_terminal,
    parse_deal, payoff, showdown_positions, situation_at,
)
from .strategies import AgentPolicy, ZOO_NAMES, canonical_point, nash_agent, zoo_agent

PERMUTATIONS = tuple(itertools.permutations(range(3)))


def sub_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit child seed for a position in the run hierarchy."""
    state = np.random.SeedSequence([int(seed) & (2**64 - 1), *path]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


# --- agents ---------------------------------------------------------------------

@dataclass(frozen=True)
class AgentSpec:
    """Recipe for a fresh agent: Nash points N1/N2/N3, zoo names, or MBBR."""

    name: str
    mbbr: MbbrConfig | None = None

    def make(self, seed: int, label: str) -> AgentPolicy:
        kind = self.name.split(":", 1)[0]
        if self.mbbr is not None or kind.upper() == "MBBR":
            config = replace(self.mbbr or MbbrConfig(), seed=seed)
            return MbbrAgent(config, our_label=label, rng=np.random.default_rng(seed))
        if kind.upper() in ("N1", "N2", "N3"):
            agent = nash_agent({"N1": "lower", "N2": "upper", "N3": "midpoint"}[kind.upper()])
        elif kind in ZOO_NAMES:
            agent = zoo_agent(kind)
        else:
            try:
                agent = nash_agent(canonical_point(kind))
            except ValueError:
                raise ValueError(f"unknown agent {self.name!r}") from None
        agent.name = label
        return agent


def as_spec(agent: str | AgentSpec) -> AgentSpec:
    return agent if isinstance(agent, AgentSpec) else AgentSpec(agent)


def slot_labels(specs: Sequence[AgentSpec]) -> list[str]:
    """Agent names made unique within a grouping (repeats get ``#2``, ``#3``)."""
    seen: dict[str, int] = {}
    out = []
    for s in specs:
        seen[s.name] = seen.get(s.name, 0) + 1
        out.append(s.name if seen[s.name] == 1 else f"{s.name}#{seen[s.name]}")
    return out


# --- deal schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class DealSchedule:
    deals: tuple[Deal, ...]
    seed: int | None = None

    @classmethod
    def generate(cls, hands: int, seed: int) -> DealSchedule:
        idx = np.random.default_rng(seed).integers(len(ALL_DEALS), size=hands)
        return cls(tuple(ALL_DEALS[i] for i in idx), seed)

    def __len__(self) -> int:
        return len(self.deals)

    def to_text(self) -> str:
        return "".join(format_deal(d) + "\n" for d in self.deals)

    @classmethod
    def from_text(cls, text: str, seed: int | None = None) -> DealSchedule:
        return cls(tuple(parse_deal(line) for line in text.split() if line.strip()), seed)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> DealSchedule:
        return cls.from_text(Path(path).read_text())


# --- single match -------------------------------------------------------------------

@dataclass
class MatchSpec:
    agents: tuple[AgentSpec, AgentSpec, AgentSpec]
    hands: int = 3000
    seed: int = 0
    seats: tuple[int, int, int] = (1, 2, 3)  # starting seat of each agent
    rotate_seats: bool = True

    def __post_init__(self) -> None:
        self.agents = tuple(as_spec(a) for a in self.agents)  # type: ignore[assignment]
        if len(self.agents) != 3:
            raise ValueError("a match needs exactly three agents")
        if self.hands < 1:
            raise ValueError("a match needs at least one hand")
        if sorted(self.seats) != [1, 2, 3]:
            raise ValueError(f"starting seats must be a permutation of 1, 2, 3, got {self.seats}")


@dataclass
class MatchResult:
    labels: tuple[str, str, str]
    chips: np.ndarray  # (3,) total per agent
    hands: int
    hand_payoffs: np.ndarray  # (hands, 3) per agent
    seat_history: np.ndarray  # (hands, 3) seat of each agent
    deals: tuple[Deal, ...] = ()
    lines: tuple[str, ...] = ()  # action line of each hand

    @property
    def winrates(self) -> np.ndarray:
        """Millichips per hand for each agent."""
        return self.chips / self.hands * 1000.0


# Fast lookup tables for the hand loop.
_SITUATION = {p: situation_at(p) for p in DECISION_PREFIXES}
_TERMINAL = {p + a: is_terminal(p + a) for p in DECISION_PREFIXES for a in "kbcf"
             if (a in "kb") != ("b" in p)}
_PAYOFF = {(deal, line): payoff(deal, line) for deal in ALL_DEALS for line in TERMINAL_SEQUENCES}
_SHOWDOWN = {line: showdown_positions(line) for line in TERMINAL_SEQUENCES}


def play_hand(agents: Sequence[AgentPolicy], rngs: Sequence[np.random.Generator],
              seat_of: Sequence[int], deal: Deal) -> tuple[str, tuple[int, int, int]]:
    """Play one hand; returns the action line and per-seat payoffs."""
    at_seat = {s: i for i, s in enumerate(seat_of)}
    seq = ""
    while True:
        sit = _SITUATION[seq]
        i = at_seat[sit.position]
        key = InfoSetKey(sit.position, deal[sit.position - 1], sit.index)
        seq += agents[i].act(key, rngs[i])
        if _TERMINAL[seq]:
            return seq, _PAYOFF[deal, seq]


def run_match(spec: MatchSpec, schedule: DealSchedule) -> MatchResult:
    if len(schedule) < spec.hands:
        raise ValueError(f"deal schedule has {len(schedule)} hands, match needs {spec.hands}")
    labels = tuple(slot_labels(spec.agents))
    streams = np.random.SeedSequence(spec.seed).spawn(3)
    agents, rngs = [], []
    for i, (agent_spec, ss) in enumerate(zip(spec.agents, streams)):
        act_ss, init_ss = ss.spawn(2)
        init_seed = int(init_ss.generate_state(2, np.uint64)[0])
        agents.append(agent_spec.make(init_seed, labels[i]))
        rngs.append(np.random.default_rng(act_ss))

    seats = list(spec.seats)
    lines = []
    pay = np.zeros((spec.hands, 3), dtype=np.int64)
    hist = np.zeros((spec.hands, 3), dtype=np.int8)
    for t in range(spec.hands):
        deal = schedule.deals[t]
        seating = {s: labels[i] for i, s in enumerate(seats)}
        for i, agent in enumerate(agents):
            agent.begin_hand(t + 1, seats[i], seating)
        seq, by_seat = play_hand(agents, rngs, seats, deal)
        lines.append(seq)
        shown = {p: deal[p - 1] for p in _SHOWDOWN[seq]}
        for i, agent in enumerate(agents):
            s = seats[i]
            pay[t, i] = by_seat[s - 1]
            hist[t, i] = s
            agent.end_hand(HandObservation(s, deal[s - 1], seq, shown))
        if pay[t].sum() != 0:
            raise AssertionError(f"hand {t + 1} is not zero-sum: {pay[t]}")
        if spec.rotate_seats:
            seats = [next_seat(s) for s in seats]
    return MatchResult(labels, pay.sum(axis=0), spec.hands, pay, hist, tuple(schedule.deals[: spec.hands]),
                       tuple(lines))


# --- duplicate sets -----------------------------------------------------------------

@dataclass
class DuplicateResult:
    labels: tuple[str, str, str]
    matches: list[MatchResult]
    schedule_seed: int
    hands: int  # per match

    @property
    def chips(self) -> np.ndarray:
        return sum(m.chips for m in self.matches)

    @property
    def winrates(self) -> np.ndarray:
        return self.chips / (self.hands * len(self.matches)) * 1000.0


def run_duplicate_set(agents: Sequence[str | AgentSpec], hands: int = 3000, seed: int = 0,
                      rotate_seats: bool = True) -> DuplicateResult:
    """Six matches, one per starting-seat permutation, sharing one deal schedule.

    Each agent slot keeps the same action-sampling stream in all six matches.
    """
    specs = tuple(as_spec(a) for a in agents)
    schedule_seed = sub_seed(seed, 0)
    schedule = DealSchedule.generate(hands, schedule_seed)
    match_seed = sub_seed(seed, 1)
    matches = [
        run_match(MatchSpec(specs, hands, match_seed, tuple(p + 1 for p in perm), rotate_seats), schedule)
        for perm in PERMUTATIONS
    ]
    return DuplicateResult(tuple(slot_labels(specs)), matches, schedule_seed, hands)


# --- statistics -----------------------------------------------------------------------

def winrate_stats(values: Sequence[float]) -> tuple[float, float | None]:
    """Mean and standard error of the mean; the error is None with fewer than two values."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no winrates to summarize")
    if x.size < 2:
        return float(x.mean()), None
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def pooled_stats(groups: Sequence[Sequence[float]]) -> tuple[float, float | None]:
    """Mean over groupings of per-grouping mean winrates, with a stratified standard error.

    Each grouping gets equal weight; the error combines the within-grouping
    errors, so fixed differences between groupings do not count as noise.
    With a single grouping this is ``winrate_stats``.
    """
    if not groups:
        raise ValueError("no winrates to summarize")
    stats = [winrate_stats(g) for g in groups]
    mean = float(np.mean([m for m, _ in stats]))
    if any(se is None for _, se in stats):
        return mean, None
    return mean, float(math.sqrt(sum(se * se for _, se in stats)) / len(stats))


# --- tournaments ------------------------------------------------------------------------

@dataclass
class GroupingResult:
    labels: tuple[str, str, str]
    set_winrates: np.ndarray  # (sets, 3) millichips per hand
    seeds: list[int]


@dataclass
class TournamentResult:
    groupings: list[GroupingResult]
    hands: int
    seed: int

    def agent_winrates(self) -> dict[str, list[np.ndarray]]:
        """Per-set winrates of each agent, one array per grouping slot it filled."""
        out: dict[str, list[np.ndarray]] = {}
        for g in self.groupings:
            for i, label in enumerate(g.labels):
                out.setdefault(label.split("#", 1)[0], []).append(g.set_winrates[:, i])
        return out

    def agent_stats(self, name: str) -> tuple[float, float | None]:
        return pooled_stats(self.agent_winrates()[name])

    def ranking(self) -> list[tuple[str, float, float | None]]:
        rows = [(name, *pooled_stats(v)) for name, v in self.agent_winrates().items()]
        return sorted(rows, key=lambda r: -r[1])

    def rows(self) -> list[dict]:
        out = []
        for g in self.groupings:
            grouping = "+".join(g.labels)
            for i, label in enumerate(g.labels):
                mean, se = winrate_stats(g.set_winrates[:, i])
                out.append({"agent": label, "grouping": grouping, "winrate_mchips": mean,
                            "stderr": se, "hands": self.hands, "seed": self.seed})
        return out

    def to_csv(self) -> str:
        return rows_to_csv(self.rows(), ["agent", "grouping", "winrate_mchips", "stderr", "hands", "seed"])

    def summary(self) -> dict:
        return {
            "hands": self.hands,
            "seed": self.seed,
            "ranking": [{"agent": a, "winrate_mchips": round(m, 4), "stderr": None if s is None else round(s, 4)}
                        for a, m, s in self.ranking()],
        }

    def table(self) -> str:
        """Ranked agents and winrates in two rows, strongest first."""
        ranked = self.ranking()
        names = [a for a, _, _ in ranked]
        values = [f"{m:.1f}" for _, m, _ in ranked]
        width = [max(len(n), len(v)) for n, v in zip(names, values)]
        return "\n".join(" ".join(x.rjust(w) for x, w in zip(row, width)) for row in (names, values)) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def rows_to_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _run_set(job: tuple[tuple[AgentSpec, ...], int, int, bool]) -> np.ndarray:
    specs, hands, seed, rotate = job
    return run_duplicate_set(specs, hands, seed, rotate).winrates


def tournament(groupings: Sequence[Sequence[str | AgentSpec]], matches_per_grouping: int = 10,
               hands: int = 3000, seed: int = 0, workers: int = 1,
               rotate_seats: bool = True) -> TournamentResult:
    """Run ``matches_per_grouping`` duplicate sets for every grouping, each with its own deals."""
    groups = [tuple(as_spec(a) for a in g) for g in groupings]
    jobs = [(g, hands, sub_seed(seed, gi, j), rotate_seats)
            for gi, g in enumerate(groups) for j in range(matches_per_grouping)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_set, jobs))
    else:
        results = [_run_set(job) for job in jobs]
    out = []
    for gi, g in enumerate(groups):
        chunk = results[gi * matches_per_grouping:(gi + 1) * matches_per_grouping]
        seeds = [job[2] for job in jobs[gi * matches_per_grouping:(gi + 1) * matches_per_grouping]]
        out.append(GroupingResult(tuple(slot_labels(g)), np.array(chunk), seeds))
    return TournamentResult(out, hands, seed)


# --- parameter sweeps -------------------------------------------------------------------

SWEEP_PARAMETERS = {"epsilon": float, "H": int, "eta": float, "k": int}


def sweep(parameter: str, values: Sequence, config: MbbrConfig | None = None,
          opponents: Sequence[Sequence[str]] = (("calling-station", "calling-station"),),
          repetitions: int = 10, hands: int = 3000, seed: int = 0, workers: int = 1) -> list[dict]:
    """MBBR winrate as one parameter varies; every value reuses the same seeds."""
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"cannot sweep {parameter!r}; choose one of {', '.join(SWEEP_PARAMETERS)}")
    if not values:
        raise ValueError("no values to sweep")
    base = config or MbbrConfig()
    rows = []
    for value in values:
        value = SWEEP_PARAMETERS[parameter](value)
        horizon = max(base.T, hands, value if parameter == "H" else 0)
        mbbr = AgentSpec("MBBR", replace(base, **{parameter: value, "T": horizon}))
        result = tournament([(mbbr, *pair) for pair in opponents], repetitions, hands, seed, workers)
        mean, se = result.agent_stats("MBBR")
        rows.append({"parameter": parameter, "value": value, "winrate_mchips": mean, "stderr": se,
                     "hands": hands, "seed": seed})
    return rows


def sweep_to_csv(rows: Sequence[dict]) -> str:
    return rows_to_csv(rows, ["parameter", "value", "winrate_mchips", "stderr", "hands", "seed"])


def result_json(result: TournamentResult) -> str:
    return json.dumps(result.summary(), indent=2)
