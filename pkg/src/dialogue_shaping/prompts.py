"""Prompt templates for the three LLM roles.

The NPC prompt hands the model the full ground truth of a game so it
can answer as an in-game informant; the agent prompt sets up the
question-asking role with its follow-up rules; the extraction prompt
asks for the gathered facts as textual KG edges. The surrounding
dialogue code treats all three as opaque strings.
"""

from __future__ import annotations

from .kg import normalize
from .world import GameSpec, Goal

NPC_ROLE = (
    "You are an NPC in a text-adventure game. You and the agent are both in"
    " the game. For each step, waits for the agent to ask questions, then you"
    " should provide a correct answer based on the information about the game"
    " given as follow:"
)

LAYOUT_NOTE = "(A-east-B means A is to the east of B, and B is to the west of A)"

AGENT_ROLE = (
    "You are an agent in a text-adventure game. You and the NPC are both in"
    " the game. Your goal is to {verb} the {target}. For each step, you should"
    " ask questions to the NPC in order to get the information on how to"
    " {verb} the {target}.\n"
    "Ask a new set of questions based on the current observation and answers"
    " given to the previous set of questions according to the following rule:"
    ' 1. ask similar and follow-up questions to previous questions that have a'
    ' "yes" answer. 2. Avoid asking similar and follow-up questions to'
    ' previous questions that have a "no" answer.'
)

KG_PROMPT = (
    "Output a textual knowledge graph that contains the game information"
    " required to reach the goal. Output it in the format of edges (entity1"
    " --direction or verbs→ entity2). For example, you--have→rugs,"
    " town center --west→ the bar"
)


def layout_entries(spec: GameSpec) -> list[str]:
    """One `A-direction-B` entry per room adjacency, each pair once.

    The entry `A-east-B` states that A lies to the east of B, so an exit
    east from B leading to A renders as `A-east-B`. Rooms are visited in
    declaration order and the reverse edge is skipped.
    """
    entries = []
    seen: set[frozenset[str]] = set()
    for room in spec.rooms:
        for direction, dest in room.exits:
            pair = frozenset((room.id, dest))
            if pair in seen:
                continue
            seen.add(pair)
            entries.append(
                f"{normalize(spec.room(dest).name)}-{direction}-{normalize(room.name)}"
            )
    return entries


def goal_sentence(spec: GameSpec) -> str:
    goal = spec.goal
    target = spec.character(goal.target)
    room_name = normalize(spec.room(target.room).name)
    sentence = f"A {normalize(target.name)} is in the {room_name}."
    if goal.requires is not None:
        required = normalize(spec.object(goal.requires).name)
        sentence += (
            f" The only way to {goal.verb} the {normalize(target.name)} is to"
            f" use a {required} and there is no other way."
        )
    else:
        sentence += (
            f" No object is needed to {goal.verb} the {normalize(target.name)}."
        )
    return sentence


def object_information(spec: GameSpec) -> str:
    sentences = []
    for room in spec.rooms:
        names = [normalize(o.name) for o in spec.objects if o.room == room.id]
        room_name = normalize(room.name)
        if names:
            sentences.append(f"{', '.join(names)} is in {room_name}.")
        else:
            sentences.append(f"{room_name} has no objects.")
    return " ".join(sentences)


def render_npc_prompt(spec: GameSpec) -> str:
    return (
        f"{NPC_ROLE}\n"
        f"Layout: {', '.join(layout_entries(spec))} {LAYOUT_NOTE}\n"
        f"Goal and prerequisite: {goal_sentence(spec)}\n"
        f"Object information: {object_information(spec)}"
    )


def render_agent_prompt(goal: Goal, target_name: str | None = None) -> str:
    """Fill the questioner role template for a goal.

    The goal stores a character id; pass target_name to substitute the
    display name instead (the dialogue layer always does).
    """
    name = normalize(target_name if target_name is not None else goal.target)
    return AGENT_ROLE.format(verb=goal.verb, target=name)


def render_kg_prompt() -> str:
    return KG_PROMPT
