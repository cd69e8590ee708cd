"""Brute-force reference implementations.

Everything here works on plain nested dicts keyed by outcome tuples and uses
exact comparisons, independent of the numpy code paths under test.
"""

import itertools
from fractions import Fraction

from elastic_self.game import make_game


def table_of(game):
    """{outcome: tuple of payoffs} from a Game, via plain Python floats."""
    return {o: tuple(float(v) for v in game.payoffs[o]) for o in itertools.product(*map(range, game.shape))}


def nash(shape, table):
    found = set()
    for o, vec in table.items():
        stable = True
        for p, n in enumerate(shape):
            for alt in range(n):
                dev = o[:p] + (alt,) + o[p + 1:]
                if table[dev][p] > vec[p]:
                    stable = False
        if stable:
            found.add(o)
    return found


def pareto(table):
    front = set()
    for o, v in table.items():
        dominated = False
        for o2, w in table.items():
            if all(a >= b for a, b in zip(w, v)) and any(a > b for a, b in zip(w, v)):
                dominated = True
                break
        if not dominated:
            front.add(o)
    return front


def dominant(shape, table, p):
    opp_ranges = [range(n) for q, n in enumerate(shape) if q != p]
    for a in range(shape[p]):
        wins = True
        for b in range(shape[p]):
            if b == a:
                continue
            for rest in itertools.product(*opp_ranges):
                oa = rest[:p] + (a,) + rest[p:]
                ob = rest[:p] + (b,) + rest[p:]
                if not table[oa][p] > table[ob][p]:
                    wins = False
        if wins and shape[p] > 1:
            return a
    return None


def derived(gamma, distances, payoffs):
    """Exact weighted mean: distances[o], payoffs[o] for each identity object o."""
    gamma = Fraction(gamma)
    weights = {o: Fraction(1) if d == 0 else gamma ** d for o, d in distances.items()}
    z = sum(weights.values())
    return sum(weights[o] * Fraction(payoffs[o]) for o in distances) / z


def pd_expected(gamma, r, s, t, p):
    """Expected utilities (C, D) for a player identifying with the other at distance 1."""
    g = Fraction(gamma)
    u = lambda mine, theirs: (Fraction(mine) + g * Fraction(theirs)) / (1 + g)
    ec = (u(r, r) + u(s, t)) / 2
    ed = (u(t, s) + u(p, p)) / 2
    return ec, ed


def random_game(rng, n_players, max_actions=4, low=-5, high=5):
    shape = tuple(int(rng.integers(2, max_actions + 1)) for _ in range(n_players))
    players = [f"P{i}" for i in range(n_players)]
    actions = [[f"a{k}" for k in range(n)] for n in shape]
    payoffs = rng.integers(low, high + 1, size=shape + (n_players,)).astype(float)
    return make_game(players, actions, payoffs)
