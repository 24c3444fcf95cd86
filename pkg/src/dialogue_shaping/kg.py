"""Knowledge-graph triples: maintenance, parsing, overlap.

Two graph kinds share one representation. The internal graph tracks what
the agent has seen and done and is rebuilt incrementally each step; the
target graph is distilled from dialogue before training and never
changes. Reward shaping is driven by their edge overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .world import GameSpec, ObservationBundle, WorldState

ARROW = "→"  # the parser accepts both this and "->"


class KGParseError(ValueError):
    """Raised when textual KG input has a malformed edge."""

    def __init__(self, line_number: int, text: str, reason: str):
        self.line_number = line_number
        self.text = text
        super().__init__(f"line {line_number}: {reason}: {text!r}")


def normalize(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class Triple:
    subject: str
    relation: str
    object: str

    def __post_init__(self) -> None:
        for field_name in ("subject", "relation", "object"):
            value = normalize(getattr(self, field_name))
            if not value:
                raise ValueError(f"triple {field_name} is empty after normalization")
            object.__setattr__(self, field_name, value)

    def as_text(self) -> str:
        return f"{self.subject} --{self.relation}-> {self.object}"


@dataclass(frozen=True)
class KnowledgeGraph:
    edges: frozenset[Triple]
    kind: str  # "internal" | "target"

    def __post_init__(self) -> None:
        if self.kind not in ("internal", "target"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        object.__setattr__(self, "edges", frozenset(self.edges))

    def with_edges(self, edges) -> "KnowledgeGraph":
        return KnowledgeGraph(edges=frozenset(edges), kind=self.kind)


def empty_internal_kg() -> KnowledgeGraph:
    return KnowledgeGraph(edges=frozenset(), kind="internal")


def update_internal(
    kg: KnowledgeGraph,
    spec: GameSpec,
    state: WorldState,
    obs: ObservationBundle,
) -> KnowledgeGraph:
    """Fold one step's world state into the agent's internal graph.

    Applies exactly these rules and nothing else:
    location edge replaced, exit edges added, visible objects added,
    held objects become have-edges (dropping their location edges), and
    a goal edge is added once the goal target is dead.
    """
    if kg.kind != "internal":
        raise ValueError(f"update_internal needs an internal graph, got {kg.kind!r}")

    room = spec.room(state.current_room)
    room_name = normalize(room.name)
    edges = {t for t in kg.edges if not (t.subject == "you" and t.relation == "in")}
    edges.add(Triple("you", "in", room_name))

    for direction, dest in room.exits:
        edges.add(Triple(room_name, direction, normalize(spec.room(dest).name)))

    for obj in spec.objects:
        if state.object_locations[obj.id] == state.current_room:
            edges.add(Triple(normalize(obj.name), "in", room_name))

    for oid in state.inventory:
        name = normalize(spec.object(oid).name)
        edges = {
            t for t in edges if not (t.subject == name and t.relation == "in")
        }
        edges.add(Triple("you", "have", name))

    goal = spec.goal
    if not state.character_alive[goal.target]:
        target_name = normalize(spec.character(goal.target).name)
        edges.add(Triple("you", goal.verb, target_name))

    return kg.with_edges(edges)


def _parse_edge(segment: str, line_number: int) -> Triple:
    text = segment
    for arrow in (ARROW, "->"):
        if arrow in text:
            left, _, right = text.partition(arrow)
            break
    else:
        raise KGParseError(line_number, segment.strip(), "no edge arrow found")
    before, sep, relation = left.rpartition("--")
    if not sep:
        raise KGParseError(line_number, segment.strip(), "no '--' before arrow")
    subject = normalize(before)
    relation = normalize(relation).rstrip("-")
    obj = normalize(right)
    if not (subject and relation and obj):
        raise KGParseError(line_number, segment.strip(), "empty edge component")
    return Triple(subject, relation, obj)


def parse_kg_text(text: str, kind: str = "target") -> KnowledgeGraph:
    """Parse `A --rel-> B` edges separated by commas or newlines.

    Both the ASCII arrow and the unicode one are accepted, as is
    whitespace around the separators. Blank segments and `#` comment
    lines are skipped. Malformed edges raise KGParseError carrying the
    line number and offending text.
    """
    edges: set[Triple] = set()
    for line_number, line in enumerate(text.splitlines(), start=1):
        if line.strip().startswith("#"):
            continue
        for segment in line.split(","):
            if not segment.strip():
                continue
            edges.add(_parse_edge(segment, line_number))
    return KnowledgeGraph(edges=frozenset(edges), kind=kind)


def filter_you_edges(kg: KnowledgeGraph) -> KnowledgeGraph:
    """Keep only edges whose subject is "you"."""
    return KnowledgeGraph(
        edges=frozenset(t for t in kg.edges if t.subject == "you"),
        kind="target",
    )


def overlap(internal: KnowledgeGraph, target: KnowledgeGraph) -> set[Triple]:
    return set(internal.edges & target.edges)


def serialize_kg(kg: KnowledgeGraph) -> str:
    """One sorted `A --rel-> B` edge per line; inverse of parse_kg_text."""
    lines = sorted(t.as_text() for t in kg.edges)
    return "".join(line + "\n" for line in lines)


def render_kg_text(kg: KnowledgeGraph) -> str:
    """Alias kept for symmetry with parse_kg_text."""
    return serialize_kg(kg)


def load_kg_file(path: str) -> KnowledgeGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_kg_text(fh.read())


def save_kg_file(kg: KnowledgeGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_kg(kg))
