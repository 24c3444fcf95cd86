"""Shared fixtures and independent oracles for the test suite.

The oracles here are deliberately written with different algorithms
than the code under test: breadth-first search instead of backward
induction, central finite differences instead of backprop, and a
direct random-walk simulator instead of the learner's rollout path.
"""

from collections import deque
import json
import os

import numpy as np
import pytest

from dialogue_shaping.learner import PolicyParams, a2c_loss_and_grads
from dialogue_shaping.world import (
    GameSpec,
    initial_state,
    load_game_spec,
    load_game_spec_file,
    step,
    valid_actions,
)

GAMES_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "games")


@pytest.fixture(scope="session")
def mini_spec() -> GameSpec:
    return load_game_spec_file(os.path.join(GAMES_DIR, "game1-mini.json"))


@pytest.fixture(scope="session")
def game1_spec() -> GameSpec:
    return load_game_spec_file(os.path.join(GAMES_DIR, "game1.json"))


def bfs_shortest_win(spec: GameSpec, step_cap: int = 75):
    """Minimal number of actions to a winning step, by plain BFS.

    Independent reference for value_iteration. Returns None when no
    win is reachable within step_cap actions.
    """
    start, _ = initial_state(spec)
    seen = {start.key()}
    queue = deque([(start, 0)])
    no_cap = 10**9
    while queue:
        state, depth = queue.popleft()
        if depth >= step_cap:
            continue
        for action in valid_actions(spec, state):
            nxt, _, reward, _ = step(spec, state, action, no_cap)
            if reward > 0:
                return depth + 1
            key = nxt.key()
            if key not in seen:
                seen.add(key)
                queue.append((nxt, depth + 1))
    return None


def random_walk_score(spec: GameSpec, rng: np.random.Generator, step_cap: int = 75):
    """Score of one uniformly random episode, engine rewards only."""
    state, _ = initial_state(spec)
    total = 0
    done = False
    while not done:
        actions = valid_actions(spec, state)
        action = actions[rng.integers(len(actions))]
        state, _, reward, done = step(spec, state, action, step_cap)
        total += reward
    return total


def finite_difference_grads(
    params: PolicyParams,
    steps,
    returns,
    advantages,
    value_coef: float,
    entropy_coef: float,
    h: float = 1e-6,
):
    """Central finite differences of the A2C loss in every coordinate."""

    def loss_of(p: PolicyParams) -> float:
        loss, _ = a2c_loss_and_grads(
            p, steps, returns, advantages, value_coef, entropy_coef
        )
        return loss

    grads = {}
    for name in ("w1", "b1", "wp", "bp", "wv"):
        array = getattr(params, name)
        grad = np.zeros_like(array)
        flat = array.reshape(-1)
        grad_flat = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            up = loss_of(params)
            flat[i] = original - h
            down = loss_of(params)
            flat[i] = original
            grad_flat[i] = (up - down) / (2 * h)
        grads[name] = grad
    up = loss_of(
        PolicyParams(
            w1=params.w1, b1=params.b1, wp=params.wp, bp=params.bp,
            wv=params.wv, bv=params.bv + h, hash_seed=params.hash_seed,
        )
    )
    down = loss_of(
        PolicyParams(
            w1=params.w1, b1=params.b1, wp=params.wp, bp=params.bp,
            wv=params.wv, bv=params.bv - h, hash_seed=params.hash_seed,
        )
    )
    grads["bv"] = (up - down) / (2 * h)
    return grads


def relative_error(analytic, numeric) -> float:
    a = np.asarray(analytic, dtype=float).reshape(-1)
    b = np.asarray(numeric, dtype=float).reshape(-1)
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


_ROOM_NAMES = [
    "cellar", "kitchen", "library", "chapel", "stable",
    "armory", "garden", "attic", "vault", "tower",
]
_OBJECT_NAMES = ["sword", "lantern", "rope", "red key", "old map", "silver coin"]
_CHARACTER_NAMES = ["dragon", "troll", "ghost", "warden"]


def random_game_document(rng: np.random.Generator) -> str:
    """A random valid game: a chain of rooms with optional north spurs.

    The chain guarantees exit symmetry and full connectivity, so the
    goal is always reachable when an object is required.
    """
    chain_length = int(rng.integers(2, 5))
    rooms = []
    names = list(_ROOM_NAMES)
    rng.shuffle(names)
    for i in range(chain_length):
        exits = {}
        if i > 0:
            exits["west"] = f"r{i - 1}"
        if i < chain_length - 1:
            exits["east"] = f"r{i + 1}"
        rooms.append(
            {
                "id": f"r{i}",
                "name": names[i],
                "description": f"The {names[i]}.",
                "exits": exits,
            }
        )
    spur_at = None
    if rng.random() < 0.5:
        spur_at = int(rng.integers(chain_length))
        rooms[spur_at]["exits"]["north"] = "spur"
        rooms.append(
            {
                "id": "spur",
                "name": names[chain_length],
                "description": f"The {names[chain_length]}.",
                "exits": {"south": f"r{spur_at}"},
            }
        )
    room_ids = [r["id"] for r in rooms]

    n_objects = int(rng.integers(1, 4))
    object_names = list(_OBJECT_NAMES)
    rng.shuffle(object_names)
    objects = [
        {
            "id": f"o{i}",
            "name": object_names[i],
            "room": room_ids[int(rng.integers(len(room_ids)))],
            "portable": True,
        }
        for i in range(n_objects)
    ]

    character_names = list(_CHARACTER_NAMES)
    rng.shuffle(character_names)
    characters = [
        {
            "id": "monster",
            "name": character_names[0],
            "room": room_ids[int(rng.integers(len(room_ids)))],
            "hostile": True,
        }
    ]
    if rng.random() < 0.3:
        characters.append(
            {
                "id": "bystander",
                "name": character_names[1],
                "room": room_ids[int(rng.integers(len(room_ids)))],
                "hostile": False,
            }
        )

    requires = None if rng.random() < 0.2 else f"o{int(rng.integers(n_objects))}"
    document = {
        "rooms": rooms,
        "objects": objects,
        "characters": characters,
        "goal": {
            "verb": "kill",
            "target": "monster",
            "requires": requires,
            "reward": 15,
        },
        "start_room": room_ids[0],
    }
    return json.dumps(document)


def random_game_spec(rng: np.random.Generator) -> GameSpec:
    return load_game_spec(random_game_document(rng))
