import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastic_self.game import (
    GameError,
    GameParseError,
    load_game,
    make_game,
    parse_game,
    payoff,
    prisoners_dilemma,
    serialize_game,
)

DOCS = Path(__file__).resolve().parent.parent / "docs"


def test_paper_pd_cells(pd):
    assert pd.players == ("A", "B")
    assert pd.actions == (("C", "D"), ("C", "D"))
    cells = {pd.outcome_name(o): tuple(pd.payoffs[o]) for o in pd.outcomes()}
    assert cells == {"CC": (6, 6), "CD": (0, 10), "DC": (10, 0), "DD": (1, 1)}


@pytest.mark.parametrize("outcome, player, expected", [
    (("D", "C"), "A", 10),
    (("C", "C"), "B", 6),
    (("C", "D"), "A", 0),
    (("D", "D"), "B", 1),
])
def test_payoff_lookup(pd, outcome, player, expected):
    assert payoff(pd, pd.outcome_of(outcome), player) == expected


def test_payoff_errors(pd):
    with pytest.raises(GameError, match="unknown player"):
        payoff(pd, (0, 0), "Z")
    with pytest.raises(GameError, match="out of range"):
        payoff(pd, (0, 2), "A")
    with pytest.raises(GameError, match="entries"):
        payoff(pd, (0,), "A")


def test_make_game_from_mapping_matches_pd(pd):
    g = make_game(
        ["A", "B"],
        {"A": ["C", "D"], "B": ["C", "D"]},
        {("C", "C"): [6, 6], ("C", "D"): [0, 10], ("D", "C"): [10, 0], ("D", "D"): [1, 1]},
    )
    assert g == pd


def test_degenerate_single_player():
    g = make_game(["solo"], [["only"]], {("only",): [0]})
    assert g.shape == (1,)
    assert payoff(g, (0,), "solo") == 0


def test_missing_outcome():
    with pytest.raises(GameError, match="missing outcome"):
        make_game(["A", "B"], [["C", "D"], ["C", "D"]],
                  {("C", "C"): [1, 1], ("C", "D"): [1, 1], ("D", "C"): [1, 1]})


@pytest.mark.parametrize("players, actions, message", [
    (["A", "A"], [["x"], ["y"]], "duplicate player"),
    (["A", "B"], [["x", "x"], ["y"]], "duplicate action"),
    (["A", "B"], [["x"], []], "no actions"),
    (["A", "B"], [["x"]], "action lists"),
    ([], [], "at least one player"),
])
def test_label_validation(players, actions, message):
    with pytest.raises(GameError, match=message):
        make_game(players, actions, np.zeros(tuple(len(a) for a in actions) + (len(players),)))


def test_non_finite_payoff_names_coordinate():
    table = np.zeros((2, 2, 2))
    table[1, 0, 1] = np.inf
    with pytest.raises(GameError, match=r"\('D', 'C'\).*'B'"):
        make_game(["A", "B"], [["C", "D"], ["C", "D"]], table)


def test_shape_mismatch():
    with pytest.raises(GameError, match="shape"):
        make_game(["A", "B"], [["C", "D"], ["C", "D"]], np.zeros((2, 2, 3)))


def test_game_is_immutable(pd):
    with pytest.raises(ValueError):
        pd.payoffs[0, 0, 0] = 99
    with pytest.raises(AttributeError):
        pd.players = ("X", "Y")


def test_input_array_is_copied():
    table = np.zeros((1, 1, 2))
    g = make_game(["A", "B"], [["x"], ["y"]], table)
    table[0, 0, 0] = 5
    assert g.payoffs[0, 0, 0] == 0


def test_pd_all_zero():
    g = prisoners_dilemma(0, 0, 0, 0)
    assert not g.payoffs.any()


@given(st.tuples(*[st.floats(-1e6, 1e6, allow_nan=False)] * 4))
def test_pd_is_symmetric(vals):
    g = prisoners_dilemma(*vals)
    cd, dc = (0, 1), (1, 0)
    assert payoff(g, cd, "A") == payoff(g, dc, "B")
    assert payoff(g, cd, "B") == payoff(g, dc, "A")


def test_payoff_total_over_outcomes(pd):
    for o in itertools.product(range(2), range(2)):
        for p in pd.players:
            payoff(pd, o, p)
    assert len(list(pd.outcomes())) == 4


def test_outcome_order_is_row_major():
    g = make_game(["X", "Y", "Z"], [["a", "b"], ["l", "m", "r"], ["u", "v"]], np.zeros((2, 3, 2, 3)))
    assert list(g.outcomes()) == list(itertools.product(range(2), range(3), range(2)))


# --- text format -------------------------------------------------------------


def test_round_trip_pd(pd):
    assert parse_game(serialize_game(pd)) == pd


def test_serialize_is_canonical(pd):
    text = serialize_game(pd)
    assert serialize_game(parse_game(text)) == text


def test_three_player_doc_has_twelve_outcomes():
    g = load_game(DOCS / "three_player.yaml")
    assert g.shape == (2, 3, 2)
    assert len(list(g.outcomes())) == 2 * 3 * 2
    assert payoff(g, g.outcome_of(["b", "r", "u"]), "Y") == -1


def test_docs_pd_matches_builtin(pd):
    assert load_game(DOCS / "prisoners_dilemma.yaml") == pd


@pytest.mark.parametrize("bad", ["NaN", ".nan", ".inf", "-.inf", "abc", "true"])
def test_invalid_payoff_values_rejected(bad):
    text = f"""
players: [A]
actions: {{A: [x]}}
payoffs:
  - {{outcome: [x], values: [{bad}]}}
"""
    with pytest.raises(GameError):
        parse_game(text)


def test_exponent_notation_parses():
    g = parse_game("players: [A]\nactions: {A: [x]}\npayoffs:\n  - {outcome: [x], values: [1e-5]}\n")
    assert g.payoffs[0, 0] == 1e-5


def test_syntax_error_reports_position():
    text = "players: [A, B\nactions: {A: [x]}\n"
    with pytest.raises(GameParseError) as info:
        parse_game(text)
    assert info.value.line is not None and info.value.column is not None
    assert "line" in str(info.value)


@pytest.mark.parametrize("text, message", [
    ("players: [A]\nactions: {A: [x]}\n", "missing key 'payoffs'"),
    ("- 1\n- 2\n", "mapping"),
    ("players: [A]\nactions: {A: [x]}\npayoffs:\n  - {outcome: [y], values: [1]}\n", "unknown action"),
    ("players: [A]\nactions: {A: [x]}\npayoffs:\n  - {outcome: [x], values: [1, 2]}\n", "payoff values"),
    ("players: [A]\nactions: {A: [x]}\npayoffs:\n  - {outcome: [x], values: [1]}\n"
     "  - {outcome: [x], values: [2]}\n", "duplicate outcome"),
    ("players: [A]\nactions: {A: [x], B: [y]}\npayoffs: []\n", "unknown player"),
    ("players: [A]\nactions: {A: [x]}\npayoffs: []\nextra: 1\n", "unknown key"),
])
def test_semantic_errors(text, message):
    with pytest.raises(GameError, match=message):
        parse_game(text)


labels = st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=6)


@st.composite
def games(draw):
    n = draw(st.integers(1, 3))
    players = draw(st.lists(labels, min_size=n, max_size=n, unique=True))
    actions = [draw(st.lists(labels, min_size=1, max_size=3, unique=True)) for _ in range(n)]
    shape = tuple(len(a) for a in actions)
    flat = draw(st.lists(
        st.floats(allow_nan=False, allow_infinity=False, width=64),
        min_size=math.prod(shape) * n, max_size=math.prod(shape) * n,
    ))
    return make_game(players, actions, np.array(flat).reshape(shape + (n,)))


@settings(max_examples=150, deadline=None)
@given(games())
def test_round_trip_property(g):
    back = parse_game(serialize_game(g))
    assert back == g
    assert back.players == g.players and back.actions == g.actions
