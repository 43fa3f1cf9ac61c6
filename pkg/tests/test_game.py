import pytest
from hypothesis import given, strategies as st

from mbbr.game import (
    ALL_DEALS, ALL_PREFIXES, DECISION_PREFIXES, POSITIONS, TERMINAL_SEQUENCES, Card, InfoSetKey,
    enumerate_infosets, folded, format_deal, infoset_at, is_terminal, legal_actions, normalize_seq, observe,
    parse_deal, payoff, situation_at, situation_of, to_move,
)

from oracles import terminal_lines

deals = st.sampled_from(ALL_DEALS)
lines = st.sampled_from(TERMINAL_SEQUENCES)


def test_card_order_and_deals():
    assert Card.J < Card.Q < Card.K < Card.A
    assert len(ALL_DEALS) == 24 and len(set(ALL_DEALS)) == 24
    assert all(len(set(d)) == 3 for d in ALL_DEALS)
    assert parse_deal("QKA") == (Card.Q, Card.K, Card.A)
    assert format_deal(parse_deal("akq")) == "AKQ"
    with pytest.raises(ValueError):
        parse_deal("QQA")


@pytest.mark.parametrize("seq, expected", [("", {"k", "b"}), ("kb", {"c", "f"}), ("kkbf", {"c", "f"})])
def test_legal_actions(seq, expected):
    assert legal_actions(seq) == expected


def test_legal_actions_at_terminal():
    with pytest.raises(ValueError, match="no actions at terminal"):
        legal_actions("kkk")


@pytest.mark.parametrize("seq, expected", [("kkk", True), ("kkb", False), ("bff", True), ("kbcf", True), ("", False)])
def test_is_terminal(seq, expected):
    assert is_terminal(seq) is expected


@pytest.mark.parametrize("seq", ["kkkk", "bk", "c", "kbfff", "x"])
def test_illegal_prefix(seq):
    with pytest.raises(ValueError):
        is_terminal(seq)


def test_sequence_text_normalization():
    assert normalize_seq("K K B F C") == "kkbfc"
    assert normalize_seq("k-b,c") == "kbc"


@pytest.mark.parametrize("deal, seq, expected", [
    ("QKA", "kkbfc", (-1, -2, 3)),
    ("AKQ", "kkk", (2, -1, -1)),
    ("JQK", "bff", (2, -1, -1)),
    ("JKA", "bcc", (-2, -2, 4)),
])
def test_payoff_examples(deal, seq, expected):
    assert payoff(parse_deal(deal), seq) == expected


def test_thirteen_terminal_lines():
    reference = terminal_lines()
    assert len(reference) == 13
    assert sorted(TERMINAL_SEQUENCES) == sorted(reference)
    assert max(map(len, TERMINAL_SEQUENCES)) == 5


def test_payoffs_zero_sum_and_bounded():
    for deal in ALL_DEALS:
        for line in TERMINAL_SEQUENCES:
            p = payoff(deal, line)
            assert sum(p) == 0
            assert all(-2 <= x <= 4 for x in p)


@pytest.mark.parametrize("pos, seq, expected", [(1, "", 1), (3, "kb", 2), (2, "kkb", None), (2, "kkbf", 3), (3, "bc", 4)])
def test_situation_of(pos, seq, expected):
    sit = situation_of(pos, seq)
    assert (sit.index if sit else None) == expected


def test_situation_table():
    table = {1: {1: "", 2: "kkb", 3: "kbf", 4: "kbc"},
             2: {1: "k", 2: "b", 3: "kkbf", 4: "kkbc"},
             3: {1: "kk", 2: "kb", 3: "bf", 4: "bc"}}
    for pos, rows in table.items():
        for idx, prefix in rows.items():
            sit = situation_at(prefix)
            assert (sit.position, sit.index) == (pos, idx)
    assert sorted(p for rows in table.values() for p in rows.values()) == sorted(DECISION_PREFIXES)


def test_exactly_one_mover_per_decision_prefix():
    for seq in DECISION_PREFIXES:
        movers = [p for p in POSITIONS if situation_of(p, seq) is not None]
        assert movers == [to_move(seq)]


@pytest.mark.parametrize("deal, seq, observer, revealed", [
    ("QKA", "kkbfc", 1, {2: Card.K, 3: Card.A}),
    ("JQK", "bff", 2, {}),
    ("AKQ", "kkk", 2, {1: Card.A, 2: Card.K, 3: Card.Q}),
])
def test_observe_examples(deal, seq, observer, revealed):
    obs = observe(parse_deal(deal), seq, observer)
    assert dict(obs.revealed) == revealed
    assert obs.own_card == parse_deal(deal)[observer - 1]


@given(deals, lines, st.sampled_from(POSITIONS))
def test_observe_reveals_exactly_showdown(deal, line, observer):
    obs = observe(deal, line, observer)
    out = folded(line)
    showdown = len(out) <= 1
    for p in POSITIONS:
        assert (p in obs.revealed) == (showdown and p not in out)
        if p in obs.revealed:
            assert obs.revealed[p] == deal[p - 1]


def test_enumerate_infosets():
    for pos in POSITIONS:
        keys = enumerate_infosets(pos)
        assert len(keys) == 16 and len(set(keys)) == 16
        assert [k.index for k in keys] == list(range(16))
    assert enumerate_infosets(2)[0] == InfoSetKey(2, Card.J, 1)


@given(deals, st.sampled_from(DECISION_PREFIXES))
def test_infoset_at_matches_mover(deal, seq):
    key = infoset_at(deal, seq)
    assert key.position == to_move(seq)
    assert key.card == deal[key.position - 1]
    assert key.situation == situation_at(seq).index


def test_prefix_tree_size():
    assert len(ALL_PREFIXES) == len(DECISION_PREFIXES) + len(TERMINAL_SEQUENCES) == 25
