"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

The slow criteria (6-8) play full tournaments; the whole module takes several
minutes on one core. Seeds are fixed constants.
"""

import itertools
import time

import numpy as np
import pytest

from mbbr.agent import MbbrConfig
from mbbr.bayes import PosteriorTable, PriorSpec, create_samples, round_and_normalize, update_posterior
from mbbr.best_response import best_response, best_response_value, exploitability, profile_value
from mbbr.game import ALL_DEALS, Card, TERMINAL_SEQUENCES, observe, parse_deal, payoff
from mbbr.harness import AgentSpec, PERMUTATIONS, run_duplicate_set, tournament
from mbbr.strategies import NASH_POINTS, AGENT_NAMES, ZOO_NAMES, nash_profile, zoo_profile

from oracles import brute_posterior, exhaustive_best_value, random_strategy, simulate

SETS = 10
HANDS = 3000


def _combined(*ses):
    return float(np.sqrt(sum(s * s for s in ses)))


def test_c1_nash_verification(report):
    start = time.perf_counter()
    gains = {p: exploitability(nash_profile(p)) for p in NASH_POINTS}
    elapsed = time.perf_counter() - start
    bad = {AGENT_NAMES[p]: g.max() for p, g in gains.items() if g.max() > 1e-9}
    detail = ", ".join(f"{AGENT_NAMES[p]} max gain {g.max():.2e}" for p, g in gains.items()) + f"; {elapsed:.3f}s"
    assert report("C1 Nash verification (N1, N2, N3 exploitability <= 1e-9, < 1 s)",
                  not bad and elapsed < 1.0, detail), f"exploitable: {bad}"


def test_c2_worked_example_payoff(report):
    example = payoff(parse_deal("QKA"), "kkbfc")
    sums = {(d, line): sum(payoff(d, line)) for d in ALL_DEALS for line in TERMINAL_SEQUENCES}
    ok = example == (-1, -2, 3) and len(sums) == 24 * 13 and not any(sums.values())
    assert report("C2 worked-example payoff and zero-sum table", ok,
                  f"QKA kkbfc -> {example}; {len(sums)} cells, nonzero sums: {sum(map(bool, sums.values()))}")


def test_c3_posterior_oracle(report):
    rng = np.random.default_rng(2024)
    mid = nash_profile("midpoint")
    worst, hands = 0.0, 0
    start = time.perf_counter()
    while hands < 1000:
        observer = int(rng.integers(1, 4))
        a, b = [p for p in (1, 2, 3) if p != observer]
        config = (("A", a), ("B", b))
        spec = PriorSpec(k=3, means={config[0]: mid[a - 1], config[1]: mid[b - 1]})
        bank = create_samples(spec, rng)
        sa, sb = bank.strategies(config[0]), bank.strategies(config[1])
        truth = {a: sa[rng.integers(3)], b: sb[rng.integers(3)],
                 observer: round_and_normalize(random_strategy(observer, rng), 0.05)}
        profile = tuple(truth[p] for p in (1, 2, 3))
        table, seen = PosteriorTable(3), []
        for _ in range(10):
            deal = ALL_DEALS[rng.integers(24)]
            seen.append(observe(deal, simulate(deal, profile, rng), observer))
            table = update_posterior(table, config, seen[-1], bank)
            expected = brute_posterior(np.full((3, 3), 1 / 9), seen, sa, a, sb, b)
            worst = max(worst, float(np.max(np.abs(table.matrix(config) - expected))))
            hands += 1
    elapsed = time.perf_counter() - start
    assert report("C3 posterior matches brute-force Bayes (1000 hands, k=3, <= 1e-12)", worst <= 1e-12,
                  f"max abs diff {worst:.2e} over {hands} hands; {elapsed:.1f}s")


def test_c4_best_response_oracle(report):
    rng = np.random.default_rng(99)
    two_card_diff = 0.0
    for pos, cards in itertools.product((1, 2, 3), [(Card.J, Card.A), (Card.Q, Card.K)]):
        opps = [round_and_normalize(random_strategy(p, rng), 0.05) for p in (1, 2, 3) if p != pos]
        result = best_response(pos, opps)
        per_card = sum(result.card_values[int(c)] for c in cards)
        two_card_diff = max(two_card_diff, abs(per_card - exhaustive_best_value(pos, opps, cards)))
    violations = 0
    for pos in (1, 2, 3):
        opps = [random_strategy(p, rng) for p in (1, 2, 3) if p != pos]
        best = best_response_value(pos, opps)
        for _ in range(1000):
            value = profile_value(opps + [random_strategy(pos, rng)])[pos - 1]
            violations += value > best + 1e-12
    ok = two_card_diff <= 1e-12 and violations == 0
    assert report("C4 best response vs exhaustive 2-card search and 1000 random strategies", ok,
                  f"2-card max diff {two_card_diff:.1e} (6 instances); random strategies beating BR: {violations}/3000")


def test_c5_dirichlet_machinery(report):
    rng = np.random.default_rng(5)
    mid = nash_profile("midpoint")
    worst, min_prob = 0.0, 1.0
    for eta in (1.0, 4.0):
        means = {("o", p): mid[p - 1] for p in (1, 2, 3)}
        bank = create_samples(PriorSpec(epsilon=0.05, eta=eta, k=10**4, means=means), rng)
        for key in bank.keys():
            target = round_and_normalize(means[key], 0.05).probs
            pairs = bank.pairs(key)
            worst = max(worst, float(np.max(np.abs(pairs.mean(axis=0) - np.stack([target, 1 - target], -1)))))
            min_prob = min(min_prob, float(pairs.min()))
    ok = worst <= 0.01 and min_prob > 0
    assert report("C5 Dirichlet sample means within 0.01 (eta 1 and 4, 1e4 samples), all probs > 0", ok,
                  f"max |mean - p| {worst:.4f}; smallest sampled prob {min_prob:.2e}")


@pytest.fixture(scope="module")
def desk_runs():
    start = time.perf_counter()
    mbbr = tournament([(AgentSpec("MBBR", MbbrConfig()), "calling-station", "calling-station")], SETS, HANDS, 0)
    elapsed = time.perf_counter() - start
    nash = tournament([("N1", "calling-station", "calling-station")], SETS, HANDS, 0)
    return mbbr, nash, elapsed


def test_c6_exploitation_at_desk_scale(report, desk_runs):
    mbbr, nash, elapsed = desk_runs
    m, m_se = mbbr.agent_stats("MBBR")
    n, n_se = nash.agent_stats("N1")
    cs = zoo_profile("calling-station")
    br = 1000 * np.mean([best_response_value(p, [s for s in cs if s.position != p]) for p in (1, 2, 3)])
    se = _combined(m_se, n_se)
    beats = m - n > 3 * se
    share = (m - n) / (br - n)
    ok = beats and share >= 0.5 and elapsed < 120
    assert report("C6 MBBR vs two calling stations (beats N1 by > 3 SE, >= 50% of gap to BR, < 2 min)", ok,
                  f"MBBR {m:.1f} +- {m_se:.1f}, N1 {n:.1f} +- {n_se:.1f}, BR {br:.1f} mchips/hand; "
                  f"margin {(m - n) / se:.1f} SE; gap captured {share:.0%}; {elapsed:.0f}s")


ZOO_PAIRS = list(itertools.combinations(ZOO_NAMES, 2))


def _vs_zoo(agent):
    result = tournament([(agent, a, b) for a, b in ZOO_PAIRS], 2, HANDS, 11)
    return result.agent_stats(agent.name)


@pytest.fixture(scope="module")
def ablations():
    configs = {
        "informed": MbbrConfig(), "uniform2": MbbrConfig(prior_mode="uniform2"),
        "k=1": MbbrConfig(k=1), "k=5": MbbrConfig(k=5), "k=20": MbbrConfig(k=20), "H=3000": MbbrConfig(H=HANDS),
    }
    out = {name: _vs_zoo(AgentSpec("MBBR", cfg)) for name, cfg in configs.items()}
    out["k=10"] = out["informed"]
    out["N1"] = _vs_zoo(AgentSpec("N1"))
    return out


def _fmt(stats):
    return f"{stats[0]:.1f} +- {stats[1]:.1f}"


def test_c7a_uniform2_prior_worse(report, ablations):
    inf, uni = ablations["informed"], ablations["uniform2"]
    assert report("C7a uniform2 prior below informed prior vs zoo", uni[0] < inf[0],
                  f"informed {_fmt(inf)}, uniform2 {_fmt(uni)} mchips/hand (10 zoo pairs x 2 sets)")


def test_c7b_winrate_nondecreasing_in_k(report, ablations):
    ks = ["k=1", "k=5", "k=10", "k=20"]
    drops = [(a, b) for a, b in zip(ks, ks[1:])
             if ablations[b][0] < ablations[a][0] - 2 * _combined(ablations[a][1], ablations[b][1])]
    assert report("C7b winrate non-decreasing in k within 2 SE", not drops,
                  ", ".join(f"{k} {_fmt(ablations[k])}" for k in ks)), f"drops: {drops}"


def test_c7c_never_exploiting_matches_nash(report, ablations):
    h, n = ablations["H=3000"], ablations["N1"]
    ok = abs(h[0] - n[0]) <= 2 * _combined(h[1], n[1])
    assert report("C7c H=3000 matches N1 within 2 SE", ok, f"H=3000 {_fmt(h)}, N1 {_fmt(n)}")


def test_c8_determinism_and_protocol(report, desk_runs):
    agents = [AgentSpec("MBBR", MbbrConfig(H=50)), "honest", "uniform-random"]
    a = run_duplicate_set(agents, 600, 77)
    b = run_duplicate_set(agents, 600, 77)
    identical = all(np.array_equal(x.hand_payoffs, y.hand_payoffs) and x.lines == y.lines
                    for x, y in zip(a.matches, b.matches))
    shared = len(a.matches) == len(PERMUTATIONS) and all(m.deals == a.matches[0].deals for m in a.matches)
    coverage = all(sorted(m.seat_history[t:t + 3, i]) == [1, 2, 3]
                   for m in a.matches for t in range(598) for i in range(3))
    elapsed = desk_runs[2]
    ok = identical and shared and coverage and elapsed < 300
    assert report("C8 determinism, shared deals, seat coverage, 10x6x3000 tournament < 5 min", ok,
                  f"bit-identical reruns {identical}; shared schedules {shared}; rotation coverage {coverage}; "
                  f"tournament {elapsed:.0f}s")
