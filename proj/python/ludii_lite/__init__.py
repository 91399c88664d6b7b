"""Python interface to the ludii-lite general game system."""

import json as _json

from . import _core
from ._core import (
    Game,
    LudError,
    canonical_text,
    compile,
    corpus_distance_csv,
    distance_csv,
    enumerate_states,
    fitch_cost,
    grammar_text,
    influence_dot,
    neighbor_joining,
    wed,
)

__all__ = [
    "Game",
    "LudError",
    "canonical_text",
    "choose_move",
    "compile",
    "corpus",
    "corpus_distance_csv",
    "distance_csv",
    "enumerate_states",
    "evaluate",
    "fitch_cost",
    "grammar_text",
    "influence_dot",
    "initial_state",
    "neighbor_joining",
    "reconstruct",
    "replay",
    "solve",
    "train_features",
    "wed",
]


def initial_state(game):
    return _json.loads(_core.initial_state_json(game))


def replay(game, trace):
    """State after the moves of `trace`, one `player kind from to` line each."""
    return _json.loads(_core.replay_json(game, trace))


def solve(game, budget=1_000_000):
    return _json.loads(_core.solve_json(game, budget))


def evaluate(game, games=100, ladder_games=0, seed=0, ladder=(16, 64, 256, 1024), threads=1):
    return _json.loads(_core.evaluate_json(game, games, ladder_games, seed, list(ladder), threads))


def train_features(game, games=500, iterations=32, learn_rate=0.005, seed=0, keep=64, threads=1):
    return _json.loads(
        _core.train_features_json(game, games, iterations, learn_rate, seed, keep, threads)
    )


def choose_move(game, trace="", iterations=1000, seed=0):
    return _json.loads(_core.choose_move_json(game, trace, iterations, seed))


def corpus(directory):
    return _json.loads(_core.corpus_json(str(directory)))


def reconstruct(spec, threads=1):
    """Ranked candidates for a reconstruction spec given as a dict or JSON text."""
    text = spec if isinstance(spec, str) else _json.dumps(spec)
    return _json.loads(_core.reconstruct_json(text, threads))
