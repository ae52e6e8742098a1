"""Planar dual of a resistive network from user-supplied face data.

One dual node per face; every resistor r between two faces becomes a 1/r
resistor between the corresponding dual nodes, and every port becomes a
dual port between its two adjacent faces.  Pendant branches are pruned
first and bridge elements (same face on both sides) are dropped, since
they lie on no cycle and have no dual edge.

Face lines cannot name which of several parallel edges borders which lens
face, so the dual is emitted in a canonical order instead: parallel dual
edges appear in the order of the primal series path they came from,
threaded from the end whose face is listed first and ending at the port
if the path carries one.  Dualizing the output again therefore restores
the original network up to node renaming.
"""

from __future__ import annotations

from collections import Counter

from ..errors import NetlistError
from .netlist import Element, Netlist, validate_netlist


def _prune_pendants(net: Netlist) -> Netlist:
    """Iteratively delete degree-1 non-port nodes with their elements."""
    port_nodes = {n for pair in net.ports for n in pair}
    elements = list(net.elements)
    while True:
        degree: Counter = Counter()
        for el in elements:
            degree.update(set(el.nodes))
        for pair in net.ports:
            degree.update(pair)
        drop = {n for n, d in degree.items() if d == 1 and n not in port_nodes}
        if not drop:
            break
        elements = [el for el in elements if not drop & set(el.nodes)]
    kept_nodes = tuple(
        n for n in net.nodes
        if n in port_nodes or any(n in el.nodes for el in elements)
    )
    return Netlist(kept_nodes, tuple(elements), net.ports, net.faces)


def _contract_faces(faces, kept: set) -> list[tuple[str, ...]]:
    """Remove pruned nodes from the face cycles and collapse the repeats the
    pendant excursions leave behind.  Positions (face indices) are kept."""
    out = []
    for cycle in faces:
        seq = [n for n in cycle if n in kept]
        changed = True
        while changed and len(seq) > 1:
            changed = False
            for i in range(len(seq)):
                if seq[i] == seq[(i + 1) % len(seq)]:
                    del seq[i]
                    changed = True
                    break
        out.append(tuple(seq))
    return out


def _slots_by_pair(faces) -> dict[frozenset, list[int]]:
    slots: dict[frozenset, list[int]] = {}
    for idx, cycle in enumerate(faces):
        if len(cycle) < 2:
            continue
        k = len(cycle)
        for i in range(k):
            a, b = cycle[i], cycle[(i + 1) % k]
            slots.setdefault(frozenset((a, b)), []).append(idx)
    return slots


def _pair_face_slots(slot_list: list[int]) -> list[tuple[int, int]]:
    """Pair up the face slots of the parallel edges between one node pair.

    Endpoint faces (appearing once) start the chain; interior lens faces
    appear twice.  Ties are broken deterministically; different choices
    correspond to re-embeddings with the same dual behavior.
    """
    cnt = Counter(slot_list)
    pairs: list[tuple[int, int]] = []
    cur: int | None = None
    while sum(cnt.values()):
        if cur is None:
            singles = sorted(f for f in cnt if cnt[f] == 1)
            cur = singles[0] if singles else sorted(cnt)[0]
        cnt[cur] -= 1
        if cnt[cur] == 0:
            del cnt[cur]
        others = sorted(f for f in cnt if f != cur)
        if others:
            doubled = [f for f in others if cnt[f] >= 2]
            partner = doubled[0] if doubled else others[0]
        elif cnt:
            partner = cur  # only its own slot left: a bridge
        else:
            raise NetlistError("face slots do not pair up")
        pairs.append((cur, partner))
        cnt[partner] -= 1
        if cnt[partner] == 0:
            del cnt[partner]
        cur = partner if cnt.get(partner) else None
    return pairs


def _walk_node_link(incident: list[int], edge_faces: dict,
                    edge_nodes: dict) -> list[int] | None:
    """Order the faces around a node: consecutive edges of the rotation share
    the face between them.  Returns the face cycle, or None if inconsistent."""
    remaining = list(incident)
    first = remaining.pop(0)
    f0, g0 = edge_faces[first]
    cycle = [g0]
    cur = g0
    while remaining:
        pick = None
        for eid in remaining:
            if cur in edge_faces[eid]:
                pick = eid
                break
        if pick is None:
            return None
        remaining.remove(pick)
        a, b = edge_faces[pick]
        cur = b if a == cur else a
        cycle.append(cur)
    return cycle if cur == f0 and len(cycle) >= 2 else None


def _walk_bundle(eids: list[int], edge_nodes: dict, node: str) -> list[int]:
    """Greedy walk of a parallel bundle's primal edges starting at node."""
    remaining = list(eids)
    walk: list[int] = []
    while remaining:
        pick = next((e for e in remaining if node in edge_nodes[e]), None)
        if pick is None:
            walk.extend(remaining)
            break
        remaining.remove(pick)
        walk.append(pick)
        a, b = edge_nodes[pick]
        node = b if a == node else a
    return walk


def _bundle_shape(eids, edge_nodes, edge_payload):
    """Classify a bundle as a primal series path, a closed loop, or a
    tangle of true parallels; returns (kind, ends, port_eids)."""
    counts: Counter = Counter()
    for e in eids:
        counts.update(edge_nodes[e])
    ports = [e for e in eids if edge_payload[e][0] == "port"]
    ends = sorted(n for n, c in counts.items() if c == 1)
    if len(ends) == 2 and not set(counts.values()) - {1, 2}:
        return "path", ends, ports
    if not ends and set(counts.values()) == {2}:
        return "loop", [], ports
    return "tangle", [], ports


def _orient_port_chains(bundles, edge_nodes, edge_payload, face_walks):
    """Reorder the dual face list so a port-carrying series chain starts
    at its far end: ports are always zipped onto the last lens pair, so
    the chain must run toward the port for a later dual to invert it."""
    pos = {node: i for i, (node, _) in enumerate(face_walks)}
    for eids in bundles.values():
        kind, ends, ports = _bundle_shape(eids, edge_nodes, edge_payload)
        if kind != "path" or len(ports) != 1:
            continue
        touched = set(edge_nodes[ports[0]]) & set(ends)
        if len(touched) != 1:
            continue
        near = touched.pop()
        far = next(n for n in ends if n != near)
        i, j = pos.get(far), pos.get(near)
        if i is not None and j is not None and i > j:
            face_walks[i], face_walks[j] = face_walks[j], face_walks[i]
            pos[far], pos[near] = j, i


def _bundle_order(eids, edge_nodes, edge_payload, rank):
    """Order a parallel bundle along its primal series path.

    The parallel dual edges between one face pair are the duals of a
    primal series path (or of the whole loop when the network is a single
    cycle).  Dualizing again threads the lens chain from the end face
    listed first and hands the final pair to the port, so emitting the
    bundle in path order from that end makes the double dual restore the
    original network.
    """
    if len(eids) < 2:
        return list(eids)
    kind, ends, ports = _bundle_shape(eids, edge_nodes, edge_payload)
    if kind == "path":
        start = min(ends, key=lambda n: rank.get(n, len(rank)))
        if len(ports) == 1:
            touched = set(edge_nodes[ports[0]]) & set(ends)
            if len(touched) == 1:
                start = next(n for n in ends if n not in touched)
        return _walk_bundle(eids, edge_nodes, start)
    if kind == "loop":
        first = ports[0] if ports else eids[0]
        rest = [e for e in eids if e != first]
        a, b = edge_nodes[first]
        return [first] + _walk_bundle(rest, edge_nodes, b)
    return list(eids)


def planar_dual(net: Netlist, outer_face: int = 0) -> Netlist:
    if net.faces is None:
        raise NetlistError("missing embedding: the netlist has no F lines")
    for el in net.elements:
        if el.kind != "R":
            raise NetlistError(
                f"dual is defined for resistor networks only, found "
                f"{el.kind} element (open-circuit capacitors first)")
    if not 0 <= outer_face < len(net.faces):
        raise NetlistError(f"outer face index {outer_face} out of range")
    validate_netlist(net)

    pruned = _prune_pendants(net)
    kept = set(pruned.nodes)
    faces = _contract_faces(net.faces, kept)
    slots = _slots_by_pair(faces)

    # edge table: elements then ports, each to be assigned a face pair
    edge_nodes: dict[int, tuple[str, str]] = {}
    edge_payload: dict[int, tuple[str, object]] = {}
    by_pair: dict[frozenset, list[int]] = {}
    eid = 0
    for el in pruned.elements:
        edge_nodes[eid] = el.nodes
        edge_payload[eid] = ("element", el)
        by_pair.setdefault(frozenset(el.nodes), []).append(eid)
        eid += 1
    for k, pair in enumerate(pruned.ports):
        edge_nodes[eid] = pair
        edge_payload[eid] = ("port", k)
        by_pair.setdefault(frozenset(pair), []).append(eid)
        eid += 1

    assignment: dict[int, tuple[int, int]] = {}
    for pair, edge_ids in sorted(by_pair.items(), key=lambda kv: sorted(kv[0])):
        slot_list = slots.get(pair, [])
        if len(slot_list) != 2 * len(edge_ids):
            a, b = sorted(pair)
            raise NetlistError(
                f"edges between {a!r} and {b!r} are adjacent to "
                f"{len(slot_list)} face slots, expected {2 * len(edge_ids)}")
        for one, fg in zip(edge_ids, _pair_face_slots(slot_list)):
            assignment[one] = fg

    def face_name(idx: int) -> str:
        return "0" if idx == outer_face else f"f{idx}"

    cycle_edges: dict[int, tuple[int, int]] = {}
    for one, (f, g) in assignment.items():
        if f == g:
            if edge_payload[one][0] == "port":
                raise NetlistError("a port lies on a bridge; it has no dual")
            continue  # bridge element: no dual edge
        cycle_edges[one] = (f, g)

    # dual embedding: one dual face per primal node, primal ground first
    face_walks: list[tuple[str, tuple[str, ...]]] = []
    for node in pruned.nodes:
        incident = [e for e in cycle_edges if node in edge_nodes[e]]
        if not incident:
            continue
        cycle = _walk_node_link(incident, cycle_edges, edge_nodes)
        if cycle is None:
            raise NetlistError(f"embedding is inconsistent around node {node!r}")
        named = (node, tuple(face_name(f) for f in cycle))
        if node == "0":
            face_walks.insert(0, named)
        else:
            face_walks.append(named)

    bundles: dict[tuple[int, int], list[int]] = {}
    for one, (f, g) in cycle_edges.items():
        bundles.setdefault(tuple(sorted((f, g))), []).append(one)
    _orient_port_chains(bundles, edge_nodes, edge_payload, face_walks)
    rank = {node: i for i, (node, _) in enumerate(face_walks)}
    dual_faces = [walk for _, walk in face_walks]

    dual_elements: list[Element] = []
    dual_ports: list = [None] * len(pruned.ports)
    for key in sorted(bundles):
        for one in _bundle_order(bundles[key], edge_nodes, edge_payload, rank):
            kind, payload = edge_payload[one]
            f, g = cycle_edges[one]
            if kind == "element":
                dual_elements.append(
                    Element("R", (face_name(f), face_name(g)),
                            1.0 / payload.value))
            else:
                dual_ports[payload] = (face_name(f), face_name(g))
    if any(p is None for p in dual_ports):
        raise NetlistError("a port lost its adjacent faces during pruning")

    used_nodes: list[str] = []
    for el in dual_elements:
        for nd in el.nodes:
            if nd not in used_nodes:
                used_nodes.append(nd)
    for a, b in dual_ports:
        for nd in (a, b):
            if nd not in used_nodes:
                used_nodes.append(nd)

    dual = Netlist(tuple(used_nodes), tuple(dual_elements), tuple(dual_ports),
                   tuple(dual_faces) if dual_faces else None)
    validate_netlist(dual)
    return dual
