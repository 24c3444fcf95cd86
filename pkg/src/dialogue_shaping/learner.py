"""Actor-critic learner over hashed text features, plus an exact oracle.

The policy is a one-hidden-layer network on a fixed-length feature
vector built by keyed feature hashing of the observation channels and
the internal KG. Action scores are masked to the currently valid
actions. Gradients are computed analytically; a2c_loss_and_grads is
written so that finite differences of its loss reproduce its gradients
exactly when returns and advantages are held fixed.

value_iteration does exact finite-horizon backward induction on the
deterministic transition graph and is the reference for what "optimal"
means in the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import hashlib
import re

import numpy as np

from .kg import KnowledgeGraph
from .world import (
    GameSpec,
    ObservationBundle,
    WorldState,
    initial_state,
    step,
    valid_actions,
)

DEFAULT_FEATURE_DIM = 256
DEFAULT_HIDDEN_DIM = 64
INIT_SCALE = 0.05

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# The four observation channels, in fixed order; each owns a quarter of
# the feature vector.
_CHANNELS = (
    "room_description",
    "inventory_text",
    "last_action_feedback",
    "last_action_text",
)


class OracleError(RuntimeError):
    """Raised when the exact oracle cannot enumerate the state space."""


class UpdateError(RuntimeError):
    """Raised when a parameter update produces non-finite values."""


def _hash_slot(token: str, slots: int, hash_seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(
        token.encode("utf-8"),
        key=str(hash_seed).encode("utf-8"),
        digest_size=9,
    ).digest()
    index = int.from_bytes(digest[:8], "big") % slots
    sign = 1.0 if digest[8] & 1 else -1.0
    return index, sign


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=50_000)
def _featurize_cached(
    obs: ObservationBundle, edges: frozenset, dim: int, hash_seed: int
) -> np.ndarray:
    quarter = dim // 4
    vec = np.zeros(dim, dtype=np.float64)
    for channel_index, channel in enumerate(_CHANNELS):
        offset = channel_index * quarter
        for token in _tokens(getattr(obs, channel)):
            index, sign = _hash_slot(f"{channel_index}|{token}", quarter, hash_seed)
            vec[offset + index] += sign
    for triple in edges:
        index, sign = _hash_slot(f"kg|{triple.as_text()}", dim, hash_seed)
        vec[index] += sign
    vec.flags.writeable = False
    return vec


def featurize(
    obs: ObservationBundle,
    kg: KnowledgeGraph,
    dim: int = DEFAULT_FEATURE_DIM,
    hash_seed: int = 0,
) -> np.ndarray:
    """Hash observation channels and KG triples into a length-dim vector.

    Each channel's tokens land in that channel's quarter of the vector
    with a hashed sign; KG triples hash across the whole vector. The
    result is deterministic in (inputs, hash_seed) and read-only
    (cached; do not mutate).
    """
    if dim % 4 != 0:
        raise ValueError("feature dimension must be divisible by 4")
    return _featurize_cached(obs, kg.edges, dim, hash_seed)


@dataclass
class PolicyParams:
    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    wp: np.ndarray  # (A, H)
    bp: np.ndarray  # (A,)
    wv: np.ndarray  # (H,)
    bv: float
    hash_seed: int = 0  # featurizer key; travels with the weights
    update_count: int = 0

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[1]

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            wp=self.wp.copy(),
            bp=self.bp.copy(),
            wv=self.wv.copy(),
            bv=self.bv,
            hash_seed=self.hash_seed,
            update_count=self.update_count,
        )

    def finite(self) -> bool:
        return bool(
            np.isfinite(self.w1).all()
            and np.isfinite(self.b1).all()
            and np.isfinite(self.wp).all()
            and np.isfinite(self.bp).all()
            and np.isfinite(self.wv).all()
            and np.isfinite(self.bv)
        )


def init_params(
    n_actions: int,
    dim: int = DEFAULT_FEATURE_DIM,
    hidden: int = DEFAULT_HIDDEN_DIM,
    seed: int = 0,
    hash_seed: int = 0,
) -> PolicyParams:
    rng = np.random.default_rng(seed)

    def uniform(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

    return PolicyParams(
        w1=uniform(hidden, dim),
        b1=uniform(hidden),
        wp=uniform(n_actions, hidden),
        bp=uniform(n_actions),
        wv=uniform(hidden),
        bv=float(uniform()),
        hash_seed=hash_seed,
    )


def _forward(params: PolicyParams, f: np.ndarray):
    z = params.w1 @ f + params.b1
    h = np.tanh(z)
    scores = params.wp @ h + params.bp
    value = float(params.wv @ h + params.bv)
    return h, scores, value


def masked_log_probs(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Log-softmax over the masked entries; -inf where invalid."""
    out = np.full_like(scores, -np.inf)
    valid = np.flatnonzero(mask)
    if valid.size == 0:
        raise ValueError("action mask admits no actions")
    s = scores[valid]
    s = s - s.max()
    log_z = np.log(np.exp(s).sum())
    out[valid] = s - log_z
    return out


def policy_value(params: PolicyParams, f: np.ndarray, mask: np.ndarray):
    h, scores, value = _forward(params, f)
    return masked_log_probs(scores, mask), value


def select_action(
    params: PolicyParams,
    f: np.ndarray,
    mask: np.ndarray,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
) -> int:
    """Pick a valid action index; invalid actions have probability zero.

    Greedy mode breaks score ties toward the lowest index.
    """
    log_probs, _ = policy_value(params, f, mask)
    if mode == "greedy":
        return int(np.argmax(log_probs))
    if mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        probs = np.exp(log_probs)
        probs = probs / probs.sum()
        return int(rng.choice(len(probs), p=probs))
    raise ValueError(f"unknown selection mode {mode!r}")


@dataclass(frozen=True)
class TrajectoryStep:
    features: np.ndarray
    action: int
    mask: np.ndarray
    reward: float
    done: bool


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    out = np.zeros(len(rewards))
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


@dataclass
class Grads:
    w1: np.ndarray
    b1: np.ndarray
    wp: np.ndarray
    bp: np.ndarray
    wv: np.ndarray
    bv: float


def a2c_loss_and_grads(
    params: PolicyParams,
    steps: list[TrajectoryStep],
    returns: np.ndarray,
    advantages: np.ndarray,
    value_coef: float,
    entropy_coef: float,
) -> tuple[float, Grads]:
    """Mean A2C loss over steps and its exact analytic gradients.

    returns and advantages enter as fixed inputs, so central finite
    differences of the returned loss in params reproduce the returned
    gradients; the update path computes advantages from the current
    value head first and then calls this.
    """
    n = len(steps)
    g = Grads(
        w1=np.zeros_like(params.w1),
        b1=np.zeros_like(params.b1),
        wp=np.zeros_like(params.wp),
        bp=np.zeros_like(params.bp),
        wv=np.zeros_like(params.wv),
        bv=0.0,
    )
    loss = 0.0
    for t, step_record in enumerate(steps):
        f = step_record.features
        h, scores, value = _forward(params, f)
        log_probs = masked_log_probs(scores, step_record.mask)
        valid = np.flatnonzero(step_record.mask)
        probs = np.zeros_like(scores)
        probs[valid] = np.exp(log_probs[valid])
        entropy = -float((probs[valid] * log_probs[valid]).sum())

        adv = advantages[t]
        ret = returns[t]
        loss += (
            -log_probs[step_record.action] * adv
            - entropy_coef * entropy
            + value_coef * (value - ret) ** 2
        )

        ds = np.zeros_like(scores)
        ds[valid] = adv * probs[valid]
        ds[step_record.action] -= adv
        ds[valid] += entropy_coef * probs[valid] * (log_probs[valid] + entropy)
        dv = 2.0 * value_coef * (value - ret)

        g.wp += np.outer(ds, h)
        g.bp += ds
        g.wv += dv * h
        g.bv += dv
        dh = params.wp.T @ ds + dv * params.wv
        dz = dh * (1.0 - h * h)
        g.w1 += np.outer(dz, f)
        g.b1 += dz

    loss /= n
    g.w1 /= n
    g.b1 /= n
    g.wp /= n
    g.bp /= n
    g.wv /= n
    g.bv /= n
    return float(loss), g


def a2c_update(
    params: PolicyParams,
    batch: list[Trajectory],
    gamma: float,
    lr: float,
    value_coef: float = 0.5,
    entropy_coef: float = 0.01,
) -> PolicyParams:
    """One plain-SGD actor-critic update over complete trajectories."""
    if not batch:
        return params
    steps: list[TrajectoryStep] = []
    returns_parts = []
    for trajectory in batch:
        steps.extend(trajectory.steps)
        rewards = [s.reward for s in trajectory.steps]
        returns_parts.append(discounted_returns(rewards, gamma))
    returns = np.concatenate(returns_parts)

    values = np.array(
        [_forward(params, s.features)[2] for s in steps]
    )
    advantages = returns - values

    _, g = a2c_loss_and_grads(
        params, steps, returns, advantages, value_coef, entropy_coef
    )
    new = PolicyParams(
        w1=params.w1 - lr * g.w1,
        b1=params.b1 - lr * g.b1,
        wp=params.wp - lr * g.wp,
        bp=params.bp - lr * g.bp,
        wv=params.wv - lr * g.wv,
        bv=params.bv - lr * g.bv,
        hash_seed=params.hash_seed,
        update_count=params.update_count + 1,
    )
    if not new.finite():
        for index, trajectory in enumerate(batch):
            if not all(np.isfinite(s.reward) for s in trajectory.steps):
                raise UpdateError(f"non-finite reward in trajectory {index}")
        raise UpdateError("parameter update produced non-finite values")
    return new


def value_iteration(
    spec: GameSpec,
    gamma: float = 1.0,
    step_cap: int = 75,
    max_states: int = 200_000,
) -> tuple[float, int | None]:
    """Exact finite-horizon solution of a game by backward induction.

    Returns the undiscounted optimal return from the start state and the
    minimal number of actions to win, or (0.0, None) when the goal is
    unreachable within step_cap. gamma is validated for interface
    parity with the learner but the reported return is undiscounted.
    Raises OracleError if the reachable state space exceeds max_states.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must be in (0, 1]")

    start, _ = initial_state(spec)
    start_key = start.key()
    # Reachable-state enumeration. The step counter is excluded from
    # state identity; a huge cap keeps step() from terminating on it.
    no_cap = 10**9
    states: dict[tuple, WorldState] = {start_key: start}
    transitions: dict[tuple, list[tuple[float, tuple, bool]]] = {}
    frontier = [start_key]
    while frontier:
        key = frontier.pop()
        state = states[key]
        outgoing = []
        for action in valid_actions(spec, state):
            nxt, _, reward, _ = step(spec, state, action, no_cap)
            won = reward > 0
            nxt_key = nxt.key()
            outgoing.append((float(reward), nxt_key, won))
            if not won and nxt_key not in states:
                if len(states) >= max_states:
                    raise OracleError(
                        f"reachable state space exceeds {max_states} states"
                    )
                # Renumber steps so the stored state stays usable.
                states[nxt_key] = WorldState(
                    current_room=nxt.current_room,
                    inventory=nxt.inventory,
                    object_locations=nxt.object_locations,
                    character_alive=nxt.character_alive,
                    steps_taken=0,
                    done=False,
                )
                frontier.append(nxt_key)
        transitions[key] = outgoing

    # V_k(s): best undiscounted return achievable from s in k actions.
    values = {key: 0.0 for key in states}
    for horizon in range(1, step_cap + 1):
        new_values = {}
        for key in states:
            best = 0.0
            for reward, nxt_key, won in transitions[key]:
                candidate = reward if won else reward + values[nxt_key]
                best = max(best, candidate)
            new_values[key] = best
        if new_values[start_key] > 0.0:
            return new_values[start_key], horizon
        if new_values == values:
            return 0.0, None
        values = new_values
    return 0.0, None
