"""Netlist data model, text parser, and serializer.

Grammar (one statement per line, ``#`` starts a comment):

    R <node+> <node-> <value>
    L <node+> <node-> <value>
    C <node+> <node-> <value>
    T <n1+> <n1-> <n2+> <n2-> <ratio>
    P <node+> <node->
    F <node> <node> ... <node>

Node ``0`` is ground.  Values accept decimals and fractions such as ``3/4``.
Ports are ordered by file order; the first ``F`` line is the outer face.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import NetlistError
from ..structured import fmt_float

ELEMENT_KINDS = ("R", "L", "C", "T")


@dataclass(frozen=True)
class Element:
    """Two-terminal element, or a four-terminal ideal transformer (kind T,
    value = turns ratio)."""

    kind: str
    nodes: tuple[str, ...]
    value: float


@dataclass(frozen=True)
class Netlist:
    nodes: tuple[str, ...]
    elements: tuple[Element, ...]
    ports: tuple[tuple[str, str], ...]
    faces: tuple[tuple[str, ...], ...] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.elements) + len(self.ports)


def _edge_pairs(net: Netlist):
    """Unordered node pairs for every element edge and port edge.

    Transformers contribute two edges (primary and secondary windings).
    """
    pairs = []
    for el in net.elements:
        if el.kind == "T":
            pairs.append(frozenset(el.nodes[:2]))
            pairs.append(frozenset(el.nodes[2:]))
        else:
            pairs.append(frozenset(el.nodes))
    for a, b in net.ports:
        pairs.append(frozenset((a, b)))
    return pairs


def _connected(nodes, pairs) -> bool:
    if not nodes:
        return True
    reach = {next(iter(nodes))}
    frontier = list(reach)
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for pair in pairs:
        pq = tuple(pair)
        if len(pq) == 2:
            adj[pq[0]].add(pq[1])
            adj[pq[1]].add(pq[0])
    while frontier:
        cur = frontier.pop()
        for nxt in adj[cur]:
            if nxt not in reach:
                reach.add(nxt)
                frontier.append(nxt)
    return reach == set(nodes)


def face_slots(net: Netlist) -> dict[frozenset, list[int]]:
    """Map each unordered node pair to the face indices whose boundary
    traverses it, with multiplicity (a bridge is traversed twice by one
    face)."""
    slots: dict[frozenset, list[int]] = {}
    for idx, cycle in enumerate(net.faces or ()):
        k = len(cycle)
        for i in range(k):
            a, b = cycle[i], cycle[(i + 1) % k]
            if a == b:
                raise NetlistError(f"face {idx} repeats node {a!r} consecutively")
            slots.setdefault(frozenset((a, b)), []).append(idx)
    return slots


def validate_netlist(net: Netlist) -> None:
    node_set = set(net.nodes)
    if len(net.nodes) != len(node_set):
        raise NetlistError("duplicate node names")
    for el in net.elements:
        if el.kind not in ELEMENT_KINDS:
            raise NetlistError(f"unknown element kind {el.kind!r}")
        want = 4 if el.kind == "T" else 2
        if len(el.nodes) != want:
            raise NetlistError(
                f"{el.kind} element takes {want} nodes, got {len(el.nodes)}"
            )
        for nd in el.nodes:
            if nd not in node_set:
                raise NetlistError(f"element references unknown node {nd!r}")
        if not el.value > 0:
            raise NetlistError(
                f"non-positive {el.kind} value {el.value!r}"
            )
    seen_ports = set()
    for a, b in net.ports:
        if a not in node_set or b not in node_set:
            raise NetlistError(f"port references unknown node ({a!r}, {b!r})")
        if a == b:
            raise NetlistError(f"port nodes must be distinct, got {a!r} twice")
        key = frozenset((a, b))
        if key in seen_ports:
            raise NetlistError(f"duplicate port across ({a!r}, {b!r})")
        seen_ports.add(key)

    if net.faces is not None:
        for idx, cycle in enumerate(net.faces):
            if len(cycle) < 2:
                raise NetlistError(f"face {idx} has fewer than two nodes")
            for nd in cycle:
                if nd not in node_set:
                    raise NetlistError(f"face {idx} references unknown node {nd!r}")
        pairs = _edge_pairs(net)
        used = {nd for pair in pairs for nd in pair}
        if not _connected(used, pairs):
            raise NetlistError("embedding requires a connected network")
        v = len(used)
        e = len(pairs)
        f = len(net.faces)
        if v - e + f != 2:
            raise NetlistError(
                f"embedding fails the Euler check: V - E + F = "
                f"{v} - {e} + {f} = {v - e + f}, expected 2"
            )
        slots = face_slots(net)
        from collections import Counter

        edge_mult = Counter(pairs)
        for pair, count in edge_mult.items():
            got = len(slots.get(pair, ()))
            if got != 2 * count:
                a, b = tuple(pair)
                raise NetlistError(
                    f"edges between {a!r} and {b!r} need {2 * count} face "
                    f"slots, embedding provides {got}"
                )
        for pair in slots:
            if pair not in edge_mult:
                a, b = tuple(pair)
                raise NetlistError(
                    f"embedding traverses ({a!r}, {b!r}) but no element "
                    f"connects those nodes"
                )


def _parse_value(token: str, line_no: int) -> float:
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            val = float(num) / float(den)
        else:
            val = float(token)
    except (ValueError, ZeroDivisionError):
        raise NetlistError(f"bad numeric value {token!r}", line=line_no) from None
    return val


def parse_netlist(text: str) -> Netlist:
    nodes: list[str] = []
    node_set: set[str] = set()
    elements: list[Element] = []
    ports: list[tuple[str, str]] = []
    faces: list[tuple[str, ...]] = []

    def note(name: str) -> str:
        if name not in node_set:
            node_set.add(name)
            nodes.append(name)
        return name

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind in ("R", "L", "C"):
            if len(tokens) != 4:
                raise NetlistError(
                    f"{kind} takes <node+> <node-> <value>, got {len(tokens) - 1} "
                    f"fields", line=line_no)
            value = _parse_value(tokens[3], line_no)
            if not value > 0:
                raise NetlistError(
                    f"non-positive {kind} value {tokens[3]}", line=line_no)
            elements.append(Element(kind, (note(tokens[1]), note(tokens[2])), value))
        elif kind == "T":
            if len(tokens) != 6:
                raise NetlistError(
                    "T takes <n1+> <n1-> <n2+> <n2-> <ratio>", line=line_no)
            ratio = _parse_value(tokens[5], line_no)
            if not ratio > 0:
                raise NetlistError(
                    f"non-positive turns ratio {tokens[5]}", line=line_no)
            elements.append(
                Element("T", tuple(note(t) for t in tokens[1:5]), ratio))
        elif kind == "P":
            if len(tokens) != 3:
                raise NetlistError("P takes <node+> <node->", line=line_no)
            if tokens[1] == tokens[2]:
                raise NetlistError(
                    f"port nodes must be distinct, got {tokens[1]!r} twice",
                    line=line_no)
            ports.append((note(tokens[1]), note(tokens[2])))
        elif kind == "F":
            if len(tokens) < 3:
                raise NetlistError("F takes at least two nodes", line=line_no)
            for t in tokens[1:]:
                if t not in node_set:
                    raise NetlistError(
                        f"face references unknown node {t!r}", line=line_no)
            faces.append(tuple(tokens[1:]))
        else:
            raise NetlistError(f"unknown statement {kind!r}", line=line_no)

    net = Netlist(tuple(nodes), tuple(elements), tuple(ports),
                  tuple(faces) if faces else None)
    validate_netlist(net)
    return net


def serialize_netlist(net: Netlist) -> str:
    lines = []
    for el in net.elements:
        lines.append(f"{el.kind} {' '.join(el.nodes)} {fmt_float(el.value)}")
    for a, b in net.ports:
        lines.append(f"P {a} {b}")
    for cycle in net.faces or ():
        lines.append("F " + " ".join(cycle))
    return "\n".join(lines) + "\n"


def open_circuit_capacitors(net: Netlist) -> Netlist:
    """Remove every capacitor; drop the embedding if that changed the edge
    set (the face data would no longer cover the remaining edges)."""
    kept = tuple(el for el in net.elements if el.kind != "C")
    if len(kept) == len(net.elements):
        return net
    return Netlist(net.nodes, kept, net.ports, None)
