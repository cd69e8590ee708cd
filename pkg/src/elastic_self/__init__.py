"""Elastic sense of self for normal-form games.

Agents value outcomes by an attenuation-weighted mix of their own payoff and
the payoffs of whatever they identify with.
"""

from .analysis import (
    Crossover,
    GameReport,
    SweepResult,
    altruist_attractors,
    analyze,
    crossover_gamma,
    expected_utilities,
    expected_utility,
    gamma_sweep,
    pareto_frontier,
    pure_nash,
    strictly_dominant,
)
from .evolution import (
    EvolveConfig,
    InvasionResult,
    Population,
    Trajectory,
    init_population,
    invasion_experiment,
    run,
    step,
)
from .game import (
    Game,
    GameError,
    GameParseError,
    load_game,
    make_game,
    paper_pd,
    parse_game,
    payoff,
    prisoners_dilemma,
    serialize_game,
)
from .identity import (
    GroupResolver,
    IdentityError,
    SenseOfSelf,
    derived_utility,
    identity_weight,
    mutual_profile,
    normalizer,
    transform_game,
)

__version__ = "0.1.0"
