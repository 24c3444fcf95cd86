"""Overlap-driven reward shaping with per-episode accounting.

Each target edge pays its bonus at most once per episode, the first
time it appears in the agent's internal graph. Shaping reads world
state, never writes it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kg import KnowledgeGraph, Triple, overlap

DEFAULT_BONUS_PER_EDGE = 2.0


@dataclass(frozen=True)
class ShapingState:
    matched: frozenset[Triple]
    bonus_per_edge: float

    def __post_init__(self) -> None:
        if self.bonus_per_edge < 0:
            raise ValueError("bonus_per_edge must be non-negative")


def new_episode(bonus_per_edge: float = DEFAULT_BONUS_PER_EDGE) -> ShapingState:
    return ShapingState(matched=frozenset(), bonus_per_edge=bonus_per_edge)


def shaping_reward(
    ss: ShapingState, internal: KnowledgeGraph, target: KnowledgeGraph
) -> tuple[float, ShapingState]:
    """Pay bonus_per_edge for each target edge newly matched this episode."""
    new_matches = overlap(internal, target) - set(ss.matched)
    bonus = ss.bonus_per_edge * len(new_matches)
    return bonus, ShapingState(
        matched=ss.matched | new_matches, bonus_per_edge=ss.bonus_per_edge
    )
