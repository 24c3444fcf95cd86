"""Deterministic text-game engine.

Loads declarative game specs, enumerates valid actions, applies
transitions, and emits the four-channel observation plus the terminal
goal reward. The engine is a pure state machine: every operation is a
function of its inputs and returns fresh values, so independent episodes
can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
from typing import Mapping

DIRECTIONS = ("north", "south", "east", "west")
OPPOSITE = {"north": "south", "south": "north", "east": "west", "west": "east"}

HELD = "held"


class GameSpecError(ValueError):
    """Raised when a game-spec document violates the schema."""


class InvalidActionError(ValueError):
    """Raised when step() receives an action outside the valid set."""


@dataclass(frozen=True)
class Room:
    id: str
    name: str
    description: str
    exits: tuple[tuple[str, str], ...]  # (direction, destination room id)

    def exit_map(self) -> dict[str, str]:
        return dict(self.exits)


@dataclass(frozen=True)
class Object:
    id: str
    name: str
    room: str
    portable: bool


@dataclass(frozen=True)
class Character:
    id: str
    name: str
    room: str
    hostile: bool


@dataclass(frozen=True)
class Goal:
    verb: str
    target: str  # character id
    requires: str | None  # object id
    reward: int


@dataclass(frozen=True)
class GameSpec:
    rooms: tuple[Room, ...]
    objects: tuple[Object, ...]
    characters: tuple[Character, ...]
    goal: Goal
    start_room: str

    def room(self, room_id: str) -> Room:
        return self._rooms_by_id[room_id]

    def object(self, object_id: str) -> Object:
        return self._objects_by_id[object_id]

    def character(self, character_id: str) -> Character:
        return self._characters_by_id[character_id]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_rooms_by_id", {r.id: r for r in self.rooms})
        object.__setattr__(self, "_objects_by_id", {o.id: o for o in self.objects})
        object.__setattr__(
            self, "_characters_by_id", {c.id: c for c in self.characters}
        )


@dataclass(frozen=True)
class WorldState:
    current_room: str
    inventory: frozenset[str]
    object_locations: Mapping[str, str]  # object id -> room id or HELD
    character_alive: Mapping[str, bool]
    steps_taken: int
    done: bool

    def key(self) -> tuple:
        """Hashable identity ignoring the step counter, for search oracles."""
        return (
            self.current_room,
            tuple(sorted(self.object_locations.items())),
            tuple(sorted(self.character_alive.items())),
        )


@dataclass(frozen=True)
class Action:
    kind: str  # go | get | drop | kill_with | kill
    direction: str | None = None
    object_id: str | None = None
    character_id: str | None = None

    def text(self, spec: GameSpec) -> str:
        if self.kind == "go":
            return f"go {self.direction}"
        if self.kind == "get":
            return f"get {spec.object(self.object_id).name}"
        if self.kind == "drop":
            return f"drop {spec.object(self.object_id).name}"
        if self.kind == "kill_with":
            return (
                f"kill {spec.character(self.character_id).name}"
                f" with {spec.object(self.object_id).name}"
            )
        if self.kind == "kill":
            return f"kill {spec.character(self.character_id).name}"
        raise ValueError(f"unknown action kind {self.kind!r}")


@dataclass(frozen=True)
class ObservationBundle:
    """The four observation channels fed to the learner, exactly."""

    room_description: str
    inventory_text: str
    last_action_feedback: str
    last_action_text: str


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise GameSpecError(f"duplicate key {key!r} in document")
        seen.add(key)
    return dict(pairs)


def _require_keys(record: dict, allowed: set[str], where: str) -> None:
    for key in record:
        if key not in allowed:
            raise GameSpecError(f"unknown key {key!r} in {where}")
    for key in allowed:
        if key not in record:
            raise GameSpecError(f"missing key {key!r} in {where}")


def _require_str(value, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise GameSpecError(f"{what} must be a non-empty string, got {value!r}")
    return value


def _require_bool(value, what: str) -> bool:
    if not isinstance(value, bool):
        raise GameSpecError(f"{what} must be a boolean, got {value!r}")
    return value


def load_game_spec(document: str) -> GameSpec:
    """Parse and validate a UTF-8 JSON game-spec document.

    Raises GameSpecError naming the offending element for any schema
    violation: unknown keys, dangling id references, asymmetric exits,
    non-positive goal reward, or a non-portable prerequisite.
    """
    try:
        raw = json.loads(document, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise GameSpecError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise GameSpecError("top-level document must be a JSON object")
    _require_keys(
        raw, {"rooms", "objects", "characters", "goal", "start_room"}, "document"
    )

    if not isinstance(raw["rooms"], list) or not raw["rooms"]:
        raise GameSpecError("no rooms declared")

    rooms = []
    for entry in raw["rooms"]:
        _require_keys(entry, {"id", "name", "description", "exits"}, "room entry")
        rid = _require_str(entry["id"], "room id")
        exits_raw = entry["exits"]
        if not isinstance(exits_raw, dict):
            raise GameSpecError(f"exits of room {rid!r} must be an object")
        exits = []
        for direction, dest in exits_raw.items():
            if direction not in DIRECTIONS:
                raise GameSpecError(
                    f"invalid direction {direction!r} in room {rid!r}"
                )
            exits.append((direction, _require_str(dest, f"exit of room {rid!r}")))
        rooms.append(
            Room(
                id=rid,
                name=_require_str(entry["name"], f"name of room {rid!r}"),
                description=_require_str(
                    entry["description"], f"description of room {rid!r}"
                ),
                exits=tuple(exits),
            )
        )

    objects = []
    for entry in raw.get("objects", []):
        _require_keys(entry, {"id", "name", "room", "portable"}, "object entry")
        oid = _require_str(entry["id"], "object id")
        objects.append(
            Object(
                id=oid,
                name=_require_str(entry["name"], f"name of object {oid!r}"),
                room=_require_str(entry["room"], f"room of object {oid!r}"),
                portable=_require_bool(entry["portable"], f"portable of {oid!r}"),
            )
        )

    characters = []
    for entry in raw.get("characters", []):
        _require_keys(entry, {"id", "name", "room", "hostile"}, "character entry")
        cid = _require_str(entry["id"], "character id")
        characters.append(
            Character(
                id=cid,
                name=_require_str(entry["name"], f"name of character {cid!r}"),
                room=_require_str(entry["room"], f"room of character {cid!r}"),
                hostile=_require_bool(entry["hostile"], f"hostile of {cid!r}"),
            )
        )

    goal_raw = raw["goal"]
    if not isinstance(goal_raw, dict):
        raise GameSpecError("goal must be an object")
    _require_keys(goal_raw, {"verb", "target", "requires", "reward"}, "goal")
    requires = goal_raw["requires"]
    if requires is not None:
        requires = _require_str(requires, "goal.requires")
    reward = goal_raw["reward"]
    if not isinstance(reward, int) or isinstance(reward, bool) or reward <= 0:
        raise GameSpecError(f"goal.reward must be a positive integer, got {reward!r}")
    goal = Goal(
        verb=_require_str(goal_raw["verb"], "goal.verb"),
        target=_require_str(goal_raw["target"], "goal.target"),
        requires=requires,
        reward=reward,
    )

    spec = GameSpec(
        rooms=tuple(rooms),
        objects=tuple(objects),
        characters=tuple(characters),
        goal=goal,
        start_room=_require_str(raw["start_room"], "start_room"),
    )
    _validate(spec)
    return spec


def load_game_spec_file(path: str) -> GameSpec:
    with open(path, encoding="utf-8") as fh:
        return load_game_spec(fh.read())


def _validate(spec: GameSpec) -> None:
    ids: set[str] = set()
    for entity in (*spec.rooms, *spec.objects, *spec.characters):
        if entity.id in ids:
            raise GameSpecError(f"duplicate id {entity.id!r}")
        ids.add(entity.id)

    room_ids = {r.id for r in spec.rooms}
    for room in spec.rooms:
        seen_dirs = set()
        for direction, dest in room.exits:
            if direction in seen_dirs:
                raise GameSpecError(
                    f"duplicate exit direction {direction!r} in room {room.id!r}"
                )
            seen_dirs.add(direction)
            if dest not in room_ids:
                raise GameSpecError(
                    f"exit {direction!r} of room {room.id!r} leads to"
                    f" undeclared room {dest!r}"
                )
            back = spec.room(dest).exit_map().get(OPPOSITE[direction])
            if back != room.id:
                raise GameSpecError(
                    f"asymmetric exit: room {room.id!r} has {direction} ->"
                    f" {dest!r} but {dest!r} has no {OPPOSITE[direction]} exit back"
                )

    for obj in spec.objects:
        if obj.room not in room_ids:
            raise GameSpecError(
                f"object {obj.id!r} placed in undeclared room {obj.room!r}"
            )
    for char in spec.characters:
        if char.room not in room_ids:
            raise GameSpecError(
                f"character {char.id!r} placed in undeclared room {char.room!r}"
            )

    if spec.start_room not in room_ids:
        raise GameSpecError(f"start_room {spec.start_room!r} is not a declared room")

    goal = spec.goal
    if goal.verb != "kill":
        raise GameSpecError(
            f"unsupported goal verb {goal.verb!r}: the action vocabulary"
            " only includes 'kill'"
        )
    if goal.target not in {c.id for c in spec.characters}:
        raise GameSpecError(f"goal target {goal.target!r} is not a declared character")
    if goal.requires is not None:
        by_id = {o.id: o for o in spec.objects}
        if goal.requires not in by_id:
            raise GameSpecError(
                f"goal requires undeclared object {goal.requires!r}"
            )
        if not by_id[goal.requires].portable:
            raise GameSpecError(
                f"goal requires object {goal.requires!r} which is not portable"
            )


def enumerate_actions(spec: GameSpec) -> list[Action]:
    """Every syntactically formable action, in canonical catalog order.

    Templates in declaration order (go, get, drop, kill-with, kill);
    entities in spec-declaration order. This ordering defines the action
    indices the learner's masks and tie-breaks use.
    """
    catalog: list[Action] = []
    for direction in DIRECTIONS:
        catalog.append(Action(kind="go", direction=direction))
    portables = [o for o in spec.objects if o.portable]
    for obj in portables:
        catalog.append(Action(kind="get", object_id=obj.id))
    for obj in portables:
        catalog.append(Action(kind="drop", object_id=obj.id))
    for char in spec.characters:
        for obj in portables:
            catalog.append(
                Action(kind="kill_with", character_id=char.id, object_id=obj.id)
            )
    for char in spec.characters:
        catalog.append(Action(kind="kill", character_id=char.id))
    return catalog


def initial_state(spec: GameSpec) -> tuple[WorldState, ObservationBundle]:
    state = WorldState(
        current_room=spec.start_room,
        inventory=frozenset(),
        object_locations={o.id: o.room for o in spec.objects},
        character_alive={c.id: True for c in spec.characters},
        steps_taken=0,
        done=False,
    )
    return state, _observe(spec, state, feedback="", action_text="")


def valid_actions(spec: GameSpec, state: WorldState) -> list[Action]:
    """Exactly the actions step() accepts in this state, deterministically ordered."""
    if state.done:
        return []
    actions: list[Action] = []
    room = spec.room(state.current_room)
    for direction, _dest in room.exits:
        actions.append(Action(kind="go", direction=direction))
    for obj in spec.objects:
        if obj.portable and state.object_locations[obj.id] == state.current_room:
            actions.append(Action(kind="get", object_id=obj.id))
    for obj in spec.objects:
        if obj.id in state.inventory:
            actions.append(Action(kind="drop", object_id=obj.id))
    # Characters do not move; their room is fixed by the game definition.
    present = [
        c
        for c in spec.characters
        if c.room == state.current_room and state.character_alive[c.id]
    ]
    for char in present:
        for obj in spec.objects:
            if obj.id in state.inventory:
                actions.append(
                    Action(kind="kill_with", character_id=char.id, object_id=obj.id)
                )
    for char in present:
        actions.append(Action(kind="kill", character_id=char.id))
    return actions


def step(
    spec: GameSpec, state: WorldState, action: Action, step_cap: int
) -> tuple[WorldState, ObservationBundle, int, bool]:
    """Apply one action. Returns (state', observation, reward, done).

    Reward is 0 on every step except the winning kill, which pays
    goal.reward and ends the episode. Reaching step_cap ends the episode
    with reward 0 unless the same step won. The action must come from
    valid_actions(); anything else raises InvalidActionError.
    """
    if state.done:
        raise InvalidActionError("episode is done; no further transitions accepted")
    if action not in valid_actions(spec, state):
        raise InvalidActionError(
            f"action {action.text(spec)!r} is not valid in room"
            f" {state.current_room!r}"
        )

    goal = spec.goal
    reward = 0
    current_room = state.current_room
    inventory = set(state.inventory)
    locations = dict(state.object_locations)
    alive = dict(state.character_alive)

    if action.kind == "go":
        current_room = spec.room(current_room).exit_map()[action.direction]
        feedback = f"You go {action.direction}."
    elif action.kind == "get":
        obj = spec.object(action.object_id)
        inventory.add(obj.id)
        locations[obj.id] = HELD
        feedback = f"You pick up the {obj.name}."
    elif action.kind == "drop":
        obj = spec.object(action.object_id)
        inventory.discard(obj.id)
        locations[obj.id] = current_room
        feedback = f"You drop the {obj.name}."
    elif action.kind in ("kill_with", "kill"):
        char = spec.character(action.character_id)
        used = action.object_id  # None for a bare kill
        if char.id == goal.target and used == goal.requires:
            alive[char.id] = False
            reward = goal.reward
            if used is None:
                feedback = f"You {goal.verb} the {char.name}. You have won the game!"
            else:
                weapon = spec.object(used).name
                feedback = (
                    f"You {goal.verb} the {char.name} with the {weapon}."
                    " You have won the game!"
                )
        elif used is None:
            feedback = (
                f"You cannot kill the {char.name} with your bare hands."
                f" The {char.name} shrugs off your attack."
            )
        else:
            weapon = spec.object(used).name
            feedback = (
                f"The {weapon} is useless against the {char.name}."
                f" The {char.name} shrugs off your attack."
            )
    else:
        raise InvalidActionError(f"unknown action kind {action.kind!r}")

    steps_taken = state.steps_taken + 1
    done = reward > 0 or steps_taken >= step_cap

    new_state = WorldState(
        current_room=current_room,
        inventory=frozenset(inventory),
        object_locations=locations,
        character_alive=alive,
        steps_taken=steps_taken,
        done=done,
    )
    obs = _observe(spec, new_state, feedback=feedback, action_text=action.text(spec))
    return new_state, obs, reward, done


def _observe(
    spec: GameSpec, state: WorldState, feedback: str, action_text: str
) -> ObservationBundle:
    room = spec.room(state.current_room)
    parts = [f"{room.name}. {room.description}"]
    directions = [d for d, _ in room.exits]
    if directions:
        parts.append(f"Exits: {', '.join(directions)}.")
    here_objects = [
        spec.object(oid).name
        for oid, loc in state.object_locations.items()
        if loc == state.current_room
    ]
    if here_objects:
        parts.append(f"You see {', '.join(sorted(here_objects))} here.")
    for char in spec.characters:
        if char.room == state.current_room:
            if state.character_alive[char.id]:
                parts.append(f"A {char.name} is here.")
            else:
                parts.append(f"The corpse of the {char.name} lies here.")
    if state.inventory:
        names = sorted(spec.object(oid).name for oid in state.inventory)
        inventory_text = f"You are carrying: {', '.join(names)}."
    else:
        inventory_text = "You are carrying nothing."
    return ObservationBundle(
        room_description=" ".join(parts),
        inventory_text=inventory_text,
        last_action_feedback=feedback,
        last_action_text=action_text,
    )


def parse_action(spec: GameSpec, text: str) -> Action:
    """Parse a command in the action grammar against a spec's entity names.

    Accepts: go <direction>, get <object>, drop <object>,
    kill <character> with <object>, kill <character>. Entity names are
    matched case-insensitively on display names.
    """
    words = text.strip().lower().split()
    if not words:
        raise InvalidActionError("empty command")

    def find_object(name: str) -> Object:
        for obj in spec.objects:
            if obj.name.lower() == name:
                return obj
        raise InvalidActionError(f"no such object {name!r}")

    def find_character(name: str) -> Character:
        for char in spec.characters:
            if char.name.lower() == name:
                return char
        raise InvalidActionError(f"no such character {name!r}")

    verb, rest = words[0], words[1:]
    if verb == "go":
        if len(rest) != 1 or rest[0] not in DIRECTIONS:
            raise InvalidActionError(f"cannot parse direction in {text!r}")
        return Action(kind="go", direction=rest[0])
    if verb in ("get", "take"):
        return Action(kind="get", object_id=find_object(" ".join(rest)).id)
    if verb == "drop":
        return Action(kind="drop", object_id=find_object(" ".join(rest)).id)
    if verb == "kill":
        if "with" in rest:
            split = rest.index("with")
            char = find_character(" ".join(rest[:split]))
            obj = find_object(" ".join(rest[split + 1 :]))
            return Action(kind="kill_with", character_id=char.id, object_id=obj.id)
        return Action(kind="kill", character_id=find_character(" ".join(rest)).id)
    raise InvalidActionError(f"cannot parse command {text!r}")
