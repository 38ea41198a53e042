"""Marked PLCW decompositions of oriented surfaces.

A complex stores vertices, directed edges (the stored direction is a
provisional traversal direction, not the marking orientation), faces as
counterclockwise cyclic words of edge sides, punctures, and parametrized or
free boundary components.  A marking adds edge orientations, one marked side
per face, and Z/r edge indices.

Conventions pinned by the calibration tests in tests/test_plcw.py:

* D_v counts faces whose marked side *starts* at v in the counterclockwise
  traversal.  (The dual reading fails to make mark rotation preserve
  admissibility.)
* The vertex condition on a closed parametrized boundary core is
  sum(s-hat) == D_v - N_v + eps_v*x_v + 1 (mod r) with eps = +1 incoming,
  -1 outgoing; the +1 offset is forced by compatibility with the gluing rule
  s = s1 + s2 + 1 and gives the disk an outgoing label of +1.
* Rotating a mark counterclockwise crosses the previously marked side; the
  crossed edge index changes by +1 when the edge is oriented against the
  face and by -1 when oriented with it.
* Incoming parametrized boundary edges are oriented against the induced
  boundary orientation, outgoing ones along it; reversals of parametrized
  edges are not fixed moves here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product

OPEN, CLOSED, FREE = "open", "closed", "free"
IN, OUT = "in", "out"


class PlcwError(ValueError):
    pass


class MoveError(PlcwError):
    """An illegal or non-normalizable move."""


class GluingError(PlcwError):
    pass


class ResourceError(RuntimeError):
    """Enumeration budget exceeded."""


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Face:
    id: str
    word: tuple[tuple[str, int], ...]  # (edge id, +1/-1), counterclockwise

    def __post_init__(self):
        if not self.word:
            raise PlcwError(f"face {self.id} has an empty boundary word")
        for _, flag in self.word:
            if flag not in (1, -1):
                raise PlcwError(f"face {self.id} has a bad direction flag")


@dataclass(frozen=True)
class BoundaryComponent:
    kind: str                      # open | closed | free
    direction: str | None          # in | out | None (free)
    label: int | str | None        # Z/r residue (closed), "*" (open), None (free)
    core: tuple[str, ...]          # edge ids along the induced boundary orientation

    def __post_init__(self):
        if self.kind not in (OPEN, CLOSED, FREE):
            raise PlcwError(f"unknown boundary kind {self.kind!r}")
        if self.kind == FREE:
            if self.direction is not None or self.label is not None:
                raise PlcwError("free boundary carries no direction or label")
        else:
            if self.direction not in (IN, OUT):
                raise PlcwError(f"parametrized boundary needs a direction")
            if self.kind == OPEN and self.label != "*":
                raise PlcwError("open boundary label must be '*'")
            if self.kind == CLOSED and not isinstance(self.label, int):
                raise PlcwError("closed boundary label must be a residue")
        if not self.core:
            raise PlcwError("boundary component needs at least one core edge")


@dataclass(frozen=True)
class PlcwComplex:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    faces: tuple[Face, ...]
    punctures: frozenset[str] = frozenset()
    boundary: tuple[BoundaryComponent, ...] = ()

    # -- lookups ------------------------------------------------------------

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def face_map(self) -> dict[str, Face]:
        return {f.id: f for f in self.faces}

    @cached_property
    def sides_of_edge(self) -> dict[str, list[tuple[str, int, int]]]:
        """edge id -> [(face id, position, flag)] over all face words."""
        out: dict[str, list[tuple[str, int, int]]] = {e.id: [] for e in self.edges}
        for f in self.faces:
            for pos, (eid, flag) in enumerate(f.word):
                out[eid].append((f.id, pos, flag))
        return out

    @cached_property
    def boundary_edge_ids(self) -> frozenset[str]:
        return frozenset(eid for eid, sides in self.sides_of_edge.items()
                         if len(sides) == 1)

    @cached_property
    def free_edge_ids(self) -> frozenset[str]:
        used = set()
        for b in self.boundary:
            if b.kind != FREE:
                used.update(b.core)
        return frozenset(self.boundary_edge_ids - used)

    @cached_property
    def parametrized_edge_ids(self) -> frozenset[str]:
        return frozenset(eid for b in self.boundary if b.kind != FREE
                         for eid in b.core)

    @cached_property
    def marked_edge_ids(self) -> frozenset[str]:
        """K-bar_1: every edge except the free-boundary ones."""
        return frozenset(e.id for e in self.edges) - self.free_edge_ids

    @cached_property
    def boundary_of_edge(self) -> dict[str, BoundaryComponent]:
        out = {}
        for b in self.boundary:
            for eid in b.core:
                out[eid] = b
        return out

    def side_vertices(self, eid: str, flag: int) -> tuple[str, str]:
        """(initial, terminal) vertex of a side in traversal direction."""
        e = self.edge_map[eid]
        return (e.tail, e.head) if flag == 1 else (e.head, e.tail)

    @cached_property
    def vertex_kind(self) -> dict[str, tuple[str, BoundaryComponent | None]]:
        """vertex -> ("interior"|"closed"|"open"|"free", component or None)."""
        kinds: dict[str, tuple[str, BoundaryComponent | None]] = {
            v: ("interior", None) for v in self.vertices}
        for b in self.boundary:
            for eid in b.core:
                e = self.edge_map[eid]
                for v in (e.tail, e.head):
                    kinds[v] = (b.kind, b)
        for eid in self.free_edge_ids:
            e = self.edge_map[eid]
            for v in (e.tail, e.head):
                if kinds[v][0] == "interior":
                    kinds[v] = (FREE, None)
        return kinds

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    # -- structural validation ----------------------------------------------

    def validate(self) -> None:
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise PlcwError("duplicate edge ids")
        fids = [f.id for f in self.faces]
        if len(set(fids)) != len(fids):
            raise PlcwError("duplicate face ids")
        if len(set(self.vertices)) != len(self.vertices):
            raise PlcwError("duplicate vertex ids")
        vset = set(self.vertices)
        for e in self.edges:
            if e.tail not in vset or e.head not in vset:
                raise PlcwError(f"edge {e.id} has an unknown endpoint")
        if not self.faces:
            raise PlcwError("a PLCW surface needs at least one 2-cell")
        for f in self.faces:
            for pos, (eid, flag) in enumerate(f.word):
                if eid not in self.edge_map:
                    raise PlcwError(f"face {f.id} uses unknown edge {eid}")
                nxt = f.word[(pos + 1) % len(f.word)]
                if self.side_vertices(eid, flag)[1] != self.side_vertices(*nxt)[0]:
                    raise PlcwError(
                        f"face {f.id} word is not a closed edge path at position {pos}")
        for eid, sides in self.sides_of_edge.items():
            if len(sides) > 2:
                raise PlcwError(f"edge {eid} appears in more than two face sides")
            if len(sides) == 0:
                raise PlcwError(f"edge {eid} does not border any face")
            if len(sides) == 2 and sides[0][2] == sides[1][2]:
                raise PlcwError(
                    f"edge {eid} is traversed twice in the same direction "
                    "(surface would be non-orientable)")
        covered = set()
        for b in self.boundary:
            for eid in b.core:
                if eid in covered:
                    raise PlcwError(f"edge {eid} lies on two boundary components")
                covered.add(eid)
                if eid not in self.boundary_edge_ids:
                    raise PlcwError(f"core edge {eid} is not a boundary edge")
        for eid in self.boundary_edge_ids:
            if eid not in covered:
                raise PlcwError(f"boundary edge {eid} not assigned to a component")
        for b in self.boundary:
            self._validate_core(b)
        for p in self.punctures:
            if p not in vset:
                raise PlcwError(f"puncture {p} is not a vertex")
            if self.vertex_kind[p][0] != "interior":
                raise PlcwError(f"puncture {p} lies on the boundary")

    def _validate_core(self, b: BoundaryComponent) -> None:
        # cores are listed along the induced boundary orientation, which for
        # boundary edges is the direction of their unique face side.
        seq = []
        for eid in b.core:
            (fid, pos, flag) = self.sides_of_edge[eid][0]
            seq.append(self.side_vertices(eid, flag))
        for (a, b1), (c, d) in zip(seq, seq[1:]):
            if b1 != c:
                raise PlcwError("boundary core is not a connected chain")
        closedish = seq[-1][1] == seq[0][0]
        if b.kind in (CLOSED, FREE) and b.kind == CLOSED and not closedish:
            raise PlcwError("closed boundary core does not close up")
        if b.kind == OPEN and closedish and len(seq) > 0 and seq[0][0] == seq[-1][1]:
            # an open core may incidentally close only if it is a single loop,
            # which we reject: interval cores must have distinct endpoints
            raise PlcwError("open boundary core closes into a circle")


@dataclass(frozen=True)
class Marking:
    """Edge orientations (+1 along the stored direction), marked side
    positions per face, and Z/r indices on K-bar_1."""

    r: int
    orientation: tuple[tuple[str, int], ...]
    marked: tuple[tuple[str, int], ...]
    index: tuple[tuple[str, int], ...]

    @staticmethod
    def make(r: int, orientation: dict[str, int], marked: dict[str, int],
             index: dict[str, int]) -> "Marking":
        return Marking(
            r,
            tuple(sorted(orientation.items())),
            tuple(sorted(marked.items())),
            tuple(sorted((k, v % r) for k, v in index.items())),
        )

    @cached_property
    def o(self) -> dict[str, int]:
        return dict(self.orientation)

    @cached_property
    def m(self) -> dict[str, int]:
        return dict(self.marked)

    @cached_property
    def s(self) -> dict[str, int]:
        return dict(self.index)

    def with_changes(self, orientation=None, marked=None, index=None) -> "Marking":
        return Marking.make(self.r,
                            orientation if orientation is not None else self.o,
                            marked if marked is not None else self.m,
                            index if index is not None else self.s)


def validate_marking(K: PlcwComplex, mk: Marking) -> None:
    """Structural validity of a marking for K; raises PlcwError listing cells."""
    bad = []
    need = K.marked_edge_ids
    if set(mk.o) != need:
        bad.append(f"orientation domain {sorted(set(mk.o) ^ need)}")
    if set(mk.s) != need:
        bad.append(f"index domain {sorted(set(mk.s) ^ need)}")
    if set(mk.m) != {f.id for f in K.faces}:
        bad.append("marked positions must cover exactly the faces")
    else:
        for f in K.faces:
            if not 0 <= mk.m[f.id] < len(f.word):
                bad.append(f"marked position of face {f.id} out of range")
    for eid, v in mk.o.items():
        if v not in (1, -1):
            bad.append(f"orientation of {eid} must be +-1")
    for eid, v in mk.s.items():
        if not 0 <= v < mk.r:
            bad.append(f"index of {eid} not reduced mod {mk.r}")
    if bad:
        raise PlcwError("invalid marking: " + "; ".join(bad))
    for b in K.boundary:
        if b.kind == FREE:
            continue
        for eid in b.core:
            want = 1 if b.direction == OUT else -1
            (fid, pos, flag) = K.sides_of_edge[eid][0]
            if mk.o[eid] * flag != want:
                raise PlcwError(
                    f"boundary edge {eid} violates the in/out orientation convention")


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class VertexRecord:
    vertex: str
    kind: str
    d: int
    n: int
    s_hat_sum: int
    defect: int           # (lhs - rhs) mod r; 0 means the congruence holds
    checked: bool

    @property
    def passed(self) -> bool:
        return (not self.checked) or self.defect == 0


@dataclass(frozen=True)
class AdmissibilityReport:
    r: int
    records: tuple[VertexRecord, ...]

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    def failures(self) -> list[VertexRecord]:
        return [rec for rec in self.records if not rec.passed]


def _oriented_endpoints(K: PlcwComplex, mk: Marking, eid: str) -> tuple[str, str]:
    e = K.edge_map[eid]
    return (e.tail, e.head) if mk.o[eid] == 1 else (e.head, e.tail)


def marked_side_initial(K: PlcwComplex, mk: Marking, fid: str) -> str:
    f = K.face_map[fid]
    eid, flag = f.word[mk.m[fid]]
    return K.side_vertices(eid, flag)[0]


def check_admissible(K: PlcwComplex, mk: Marking) -> AdmissibilityReport:
    """Evaluate the per-vertex index congruence; punctures and free/open
    boundary vertices carry no condition."""
    validate_marking(K, mk)
    r = mk.r
    d_count: dict[str, int] = {v: 0 for v in K.vertices}
    for f in K.faces:
        d_count[marked_side_initial(K, mk, f.id)] += 1
    n_count: dict[str, int] = {v: 0 for v in K.vertices}
    s_sum: dict[str, int] = {v: 0 for v in K.vertices}
    for eid in K.marked_edge_ids:
        tail, head = _oriented_endpoints(K, mk, eid)
        n_count[tail] += 1
        n_count[head] += 1
        if tail == head:
            s_sum[tail] += -1
        else:
            s_sum[tail] += mk.s[eid]
            s_sum[head] += -1 - mk.s[eid]
    records = []
    for v in K.vertices:
        kind, comp = K.vertex_kind[v]
        if v in K.punctures or kind in (FREE, OPEN):
            records.append(VertexRecord(v, kind if v not in K.punctures else "puncture",
                                        d_count[v], n_count[v], s_sum[v], 0, False))
            continue
        if kind == "interior":
            rhs = d_count[v] - n_count[v] + 1
        else:  # closed parametrized boundary
            eps = 1 if comp.direction == IN else -1
            rhs = d_count[v] - n_count[v] + eps * comp.label + 1
        defect = (s_sum[v] - rhs) % r
        records.append(VertexRecord(v, kind, d_count[v], n_count[v],
                                    s_sum[v], defect, True))
    return AdmissibilityReport(r, tuple(records))


def is_admissible(K: PlcwComplex, mk: Marking) -> bool:
    return check_admissible(K, mk).passed


# ---------------------------------------------------------------------------
# fixed moves


def side_is_with_face(K: PlcwComplex, mk: Marking, fid: str, pos: int) -> bool:
    """True when the marking orientation agrees with the ccw traversal."""
    eid, flag = K.face_map[fid].word[pos]
    return mk.o[eid] * flag == 1


def reverse_edge(K: PlcwComplex, mk: Marking, eid: str) -> Marking:
    if eid not in K.marked_edge_ids:
        raise MoveError(f"edge {eid} carries no orientation")
    if eid in K.parametrized_edge_ids:
        raise MoveError(f"edge {eid} is parametrized; its orientation is pinned")
    o = dict(mk.o)
    s = dict(mk.s)
    o[eid] = -o[eid]
    s[eid] = (-1 - s[eid]) % mk.r
    return mk.with_changes(orientation=o, index=s)


def rotate_mark(K: PlcwComplex, mk: Marking, fid: str) -> Marking:
    f = K.face_map[fid]
    n1 = len(f.word)
    pos = mk.m[fid]
    eid, _ = f.word[pos]
    s = dict(mk.s)
    if eid in K.marked_edge_ids:
        delta = -1 if side_is_with_face(K, mk, fid, pos) else 1
        s[eid] = (s[eid] + delta) % mk.r
    m = dict(mk.m)
    m[fid] = (pos + 1) % n1
    return mk.with_changes(marked=m, index=s)


def deck(K: PlcwComplex, mk: Marking, fid: str, k: int) -> Marking:
    """Shift the indices of a face's sides by +-k (sheet change over the face)."""
    f = K.face_map[fid]
    s = dict(mk.s)
    for pos, (eid, _) in enumerate(f.word):
        if eid in K.marked_edge_ids:
            delta = -k if side_is_with_face(K, mk, fid, pos) else k
            s[eid] = (s[eid] + delta) % mk.r
    return mk.with_changes(index=s)


FIXED_MOVE_KINDS = ("reverse_edge", "rotate_mark", "deck")


def apply_fixed_move(K: PlcwComplex, mk: Marking, move: tuple) -> Marking:
    """Apply one fixed move, given as ("reverse_edge", eid),
    ("rotate_mark", fid) or ("deck", fid, k).  Requires an admissible input
    and preserves admissibility."""
    report = check_admissible(K, mk)
    if not report.passed:
        raise MoveError("fixed moves require an admissible marking")
    kind = move[0]
    if kind == "reverse_edge":
        out = reverse_edge(K, mk, move[1])
    elif kind == "rotate_mark":
        out = rotate_mark(K, mk, move[1])
    elif kind == "deck":
        out = deck(K, mk, move[1], move[2])
    else:
        raise MoveError(f"unknown fixed move {kind!r}")
    return out


# ---------------------------------------------------------------------------
# elementary moves


def _fresh(base: str, taken) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def _core_direction_sign(K: PlcwComplex, b: BoundaryComponent) -> int:
    return 1 if b.direction == IN else -1


def split_edge(K: PlcwComplex, mk: Marking, eid: str) -> tuple[PlcwComplex, Marking]:
    """Add a bivalent vertex in the middle of an edge (move 4a, adding).

    Both halves keep the old stored direction and marking orientation.  The
    index is copied onto the first half; the second half gets s + eps*x on a
    closed parametrized core (forced by the vertex condition at the new
    vertex) and plain s everywhere else.  Marks on the split side move to
    the first half, which keeps every D_v count unchanged.
    """
    e = K.edge_map[eid]
    vnew = _fresh(f"{eid}_mid", set(K.vertices))
    taken = set(K.edge_map)
    e1 = _fresh(f"{eid}a", taken)
    taken.add(e1)
    e2 = _fresh(f"{eid}b", taken)
    edges = []
    for old in K.edges:
        if old.id == eid:
            edges.append(Edge(e1, e.tail, vnew))
            edges.append(Edge(e2, vnew, e.head))
        else:
            edges.append(old)
    faces = []
    marks = {}
    for f in K.faces:
        word = []
        old_mark = mk.m[f.id]
        new_mark = None
        for pos, (wid, flag) in enumerate(f.word):
            if pos == old_mark:
                new_mark = len(word)
            if wid == eid:
                word.extend([(e1, 1), (e2, 1)] if flag == 1 else [(e2, -1), (e1, -1)])
            else:
                word.append((wid, flag))
        faces.append(Face(f.id, tuple(word)))
        marks[f.id] = new_mark
    boundary = []
    comp = K.boundary_of_edge.get(eid)
    for b in K.boundary:
        core = []
        for cid in b.core:
            if cid == eid:
                (fid, pos, flag) = K.sides_of_edge[eid][0]
                core.extend([e1, e2] if flag == 1 else [e2, e1])
            else:
                core.append(cid)
        boundary.append(replace(b, core=tuple(core)))
    K2 = PlcwComplex(K.vertices + (vnew,), tuple(edges), tuple(faces),
                     K.punctures, tuple(boundary))
    o = {k: v for k, v in mk.o.items() if k != eid}
    s = {k: v for k, v in mk.s.items() if k != eid}
    if eid in K.marked_edge_ids:
        o[e1] = o[e2] = mk.o[eid]
        s_first, s_second = mk.s[eid], mk.s[eid]
        if comp is not None and comp.kind == CLOSED:
            eps = 1 if comp.direction == IN else -1
            s_second = (mk.s[eid] + eps * comp.label) % mk.r
        # "first" means first along the marking orientation of e
        (fid, pos, flag) = K.sides_of_edge[eid][0] if K.sides_of_edge[eid] else (None, None, 1)
        if mk.o[eid] == 1:
            s[e1], s[e2] = s_first, s_second
        else:
            s[e2], s[e1] = s_first, s_second
    mk2 = Marking.make(mk.r, o, marks, s)
    return K2, mk2


def merge_vertex(K: PlcwComplex, mk: Marking, v: str) -> tuple[PlcwComplex, Marking]:
    """Remove a bivalent vertex (move 4a, removing).

    Adjacent marks are first rotated off v (fixed moves).  For admissible
    markings the index compatibility at v is automatic except at open-core
    vertices, where it is checked explicitly.
    """
    if v in K.punctures:
        raise MoveError("cannot remove a puncture")
    kind, comp = K.vertex_kind[v]
    if kind == OPEN:
        raise MoveError("cannot remove an endpoint of a parametrized interval")
    incident = [e for e in K.edges if v in (e.tail, e.head)]
    if len(incident) != 2 or any(e.tail == e.head for e in incident):
        raise MoveError(f"vertex {v} is not bivalent")
    if not check_admissible(K, mk).passed:
        raise MoveError("elementary moves require an admissible marking")
    for f in K.faces:
        guard = 0
        while marked_side_initial(K, mk, f.id) == v:
            mk = rotate_mark(K, mk, f.id)
            guard += 1
            if guard > len(f.word):
                raise MoveError(f"cannot rotate the mark of {f.id} off {v}")
    ea, eb = incident
    # realign so the path runs a -> v (via ea) -> b (via eb), in stored directions
    a = ea.tail if ea.head == v else ea.head
    b_end = eb.head if eb.tail == v else eb.tail
    carries_data = ea.id in K.marked_edge_ids
    if carries_data != (eb.id in K.marked_edge_ids):
        raise MoveError("cannot merge a data-carrying edge with a free edge")
    if carries_data:
        # orient both along the path via move 1 where needed
        def path_dir(e: Edge, into_v: bool) -> int:
            # +1 when the stored direction agrees with a->v->b
            return 1 if (e.head == v if into_v else e.tail == v) else -1
        want_a, want_b = path_dir(ea, True), path_dir(eb, False)
        if mk.o[ea.id] != want_a:
            mk = reverse_edge(K, mk, ea.id)
        if mk.o[eb.id] != want_b:
            mk = reverse_edge(K, mk, eb.id)
        s_a, s_b = mk.s[ea.id], mk.s[eb.id]
        if comp is not None and comp.kind == CLOSED:
            eps = 1 if comp.direction == IN else -1
            expected = (s_a + eps * comp.label) % mk.r
        else:
            expected = s_a
        if s_b != expected:
            raise MoveError(
                f"indices of {ea.id} and {eb.id} are incompatible at {v}; "
                "apply fixed moves first")
        s_val, o_val = s_a, 1
    enew = _fresh(f"{ea.id}{eb.id}", set(K.edge_map))
    edges = [Edge(enew, a, b_end)] + [e for e in K.edges
                                      if e.id not in (ea.id, eb.id)]
    faces = []
    marks = {}
    for f in K.faces:
        word = list(f.word)
        n1 = len(word)
        old_mark = mk.m[f.id]
        shift = next((i for i in range(n1)
                      if K.side_vertices(*word[i])[0] != v), None)
        if shift is None:
            raise MoveError(f"face {f.id} degenerates when removing {v}")
        word = word[shift:] + word[:shift]
        old_mark = (old_mark - shift) % n1
        out = []
        new_mark = None
        i = 0
        while i < len(word):
            side = word[i]
            if K.side_vertices(*side)[1] == v and side[0] in (ea.id, eb.id):
                direction = 1 if side[0] == ea.id else -1
                if old_mark in (i, i + 1):
                    new_mark = len(out)
                out.append((enew, direction))
                i += 2
            else:
                if old_mark == i:
                    new_mark = len(out)
                out.append(side)
                i += 1
        if new_mark is None:
            new_mark = 0
        faces.append(Face(f.id, tuple(out)))
        marks[f.id] = new_mark
    boundary = []
    for bc in K.boundary:
        core = list(bc.core)
        if ea.id in core or eb.id in core:
            k = len(core)
            shift = next(i for i in range(k) if core[i] not in (ea.id, eb.id)) \
                if any(c not in (ea.id, eb.id) for c in core) else 0
            core = core[shift:] + core[:shift]
            out = []
            i = 0
            while i < len(core):
                if core[i] in (ea.id, eb.id) and i + 1 < len(core) \
                        and core[i + 1] in (ea.id, eb.id):
                    first = core[i]
                    out.append(enew)
                    i += 2
                elif core[i] in (ea.id, eb.id):
                    out.append(enew)
                    i += 1
                else:
                    out.append(core[i])
                    i += 1
            core = out
        boundary.append(replace(bc, core=tuple(core)))
    K2 = PlcwComplex(tuple(w for w in K.vertices if w != v), tuple(edges),
                     tuple(faces), K.punctures, tuple(boundary))
    o = {k: w for k, w in mk.o.items() if k not in (ea.id, eb.id)}
    s = {k: w for k, w in mk.s.items() if k not in (ea.id, eb.id)}
    if carries_data:
        o[enew] = o_val
        s[enew] = s_val
    mk2 = Marking.make(mk.r, o, marks, s)
    K2.validate()
    return K2, mk2


def split_face(K: PlcwComplex, mk: Marking, fid: str,
               corner_i: int, corner_j: int) -> tuple[PlcwComplex, Marking]:
    """Add an interior edge across a face (move 4b, adding).

    Corners are numbered by word position: corner p sits before side p.  The
    new edge runs from corner_i to corner_j; the split-off face f2 consists
    of sides corner_i..corner_j-1 and is marked on the new edge, which gets
    index 0 and is oriented with f2 (the removal normal form).  The mark of
    the original face is first rotated into the remaining range.
    """
    f = K.face_map[fid]
    n1 = len(f.word)
    if corner_i == corner_j or not (0 <= corner_i < n1 and 0 <= corner_j < n1):
        raise MoveError("chord corners must be distinct word positions")
    # rotate the mark into f1's side range [corner_j, corner_i)
    def in_f1(pos: int) -> bool:
        return (pos - corner_j) % n1 < (corner_i - corner_j) % n1
    guard = 0
    while not in_f1(mk.m[fid]):
        mk = rotate_mark(K, mk, fid)
        guard += 1
        if guard > n1:
            raise MoveError("cannot rotate the mark out of the split region")
    word = f.word
    enew = _fresh(f"{fid}_chord", set(K.edge_map))
    va = K.side_vertices(*word[corner_i])[0]
    vb = K.side_vertices(*word[corner_j])[0]
    f2_sides = [word[(corner_i + t) % n1] for t in range((corner_j - corner_i) % n1)]
    f1_sides = [word[(corner_j + t) % n1] for t in range((corner_i - corner_j) % n1)]
    # f2 = split-off region, traversed ccw: its sides then the chord vb ->va
    f2_id = _fresh(f"{fid}2", set(K.face_map))
    new_edge = Edge(enew, vb, va)  # so that (enew, +1) closes f2's word
    f2_word = tuple(f2_sides) + ((enew, 1),)
    f1_word = tuple(f1_sides) + ((enew, -1),)
    faces = []
    marks = {}
    for g in K.faces:
        if g.id == fid:
            faces.append(Face(fid, f1_word))
            old = mk.m[fid]
            marks[fid] = (old - corner_j) % n1
        else:
            faces.append(g)
            marks[g.id] = mk.m[g.id]
    faces.append(Face(f2_id, f2_word))
    marks[f2_id] = len(f2_sides)  # the chord side
    K2 = PlcwComplex(K.vertices, K.edges + (new_edge,), tuple(faces),
                     K.punctures, K.boundary)
    o = dict(mk.o)
    s = dict(mk.s)
    o[enew] = 1   # with f2: f2 traverses (enew, +1)
    s[enew] = 0
    mk2 = Marking.make(mk.r, o, marks, s)
    K2.validate()
    return K2, mk2


def merge_edge(K: PlcwComplex, mk: Marking, eid: str) -> tuple[PlcwComplex, Marking]:
    """Remove an interior edge separating two distinct faces (move 4b).

    Normalizes via fixed moves: orients e with the face whose mark will be
    dropped, and rotates that face's mark onto e.  The index must then be 0;
    apply a deck move first when it is not (this is deliberately not done
    automatically).
    """
    sides = K.sides_of_edge[eid]
    if len(sides) != 2:
        raise MoveError(f"edge {eid} is not interior")
    (fa, pa, flag_a), (fb, pb, flag_b) = sides
    if fa == fb:
        raise MoveError("cannot remove an edge with both sides on one face")
    if not check_admissible(K, mk).passed:
        raise MoveError("elementary moves require an admissible marking")
    # f2 := the face e is oriented with; normalize the orientation so that a
    # well-defined choice exists, preferring to keep f_a's mark.
    if side_is_with_face(K, mk, fa, pa):
        f2, p2, f1, p1 = fa, pa, fb, pb
    else:
        f2, p2, f1, p1 = fb, pb, fa, pa
    guard = 0
    while mk.m[f1] == p1:
        mk = rotate_mark(K, mk, f1)
        guard += 1
        if guard > len(K.face_map[f1].word):
            raise MoveError(f"cannot rotate the mark of {f1} off {eid}")
    face2 = K.face_map[f2]
    guard = 0
    while mk.m[f2] != p2:
        mk = rotate_mark(K, mk, f2)
        guard += 1
        if guard > mk.r * len(face2.word) + 1:
            raise MoveError(f"cannot rotate the mark of {f2} onto {eid}")
    if mk.s[eid] != 0:
        raise MoveError(
            f"edge {eid} has index {mk.s[eid]}; a deck move must zero it first")
    face1 = K.face_map[f1]
    w1, w2 = list(face1.word), list(face2.word)
    n1, n2 = len(w1), len(w2)
    # merged word: replace e's side in f1 by f2's word read from just after e
    insert = [w2[(p2 + 1 + t) % n2] for t in range(n2 - 1)]
    merged = []
    new_mark = None
    for pos, side in enumerate(w1):
        if pos == p1:
            merged.extend(insert)
        else:
            if pos == mk.m[f1]:
                new_mark = len(merged)
            merged.append(side)
    if new_mark is None:
        raise MoveError(f"the mark of {f1} sits on the removed edge; rotate it first")
    faces = []
    marks = {}
    for g in K.faces:
        if g.id == f2:
            continue
        if g.id == f1:
            faces.append(Face(f1, tuple(merged)))
            marks[f1] = new_mark
        else:
            faces.append(g)
            marks[g.id] = mk.m[g.id]
    K2 = PlcwComplex(K.vertices, tuple(e for e in K.edges if e.id != eid),
                     tuple(faces), K.punctures, K.boundary)
    o = {k: v for k, v in mk.o.items() if k != eid}
    s = {k: v for k, v in mk.s.items() if k != eid}
    mk2 = Marking.make(mk.r, o, marks, s)
    K2.validate()
    return K2, mk2


ELEMENTARY_MOVE_KINDS = ("split_edge", "merge_vertex", "split_face", "merge_edge")


def apply_elementary_move(K: PlcwComplex, mk: Marking,
                          move: tuple) -> tuple[PlcwComplex, Marking]:
    """Apply one elementary move, given as ("split_edge", eid),
    ("merge_vertex", v), ("split_face", fid, i, j) or ("merge_edge", eid)."""
    kind = move[0]
    if kind == "split_edge":
        return split_edge(K, mk, move[1])
    if kind == "merge_vertex":
        return merge_vertex(K, mk, move[1])
    if kind == "split_face":
        return split_face(K, mk, move[1], move[2], move[3])
    if kind == "merge_edge":
        return merge_edge(K, mk, move[1])
    raise MoveError(f"unknown elementary move {kind!r}")


# ---------------------------------------------------------------------------
# gluing


def glue(K1: PlcwComplex, mk1: Marking, out_index: int,
         K2: PlcwComplex, mk2: Marking, in_index: int
         ) -> tuple[PlcwComplex, Marking, dict[str, str], dict[str, str]]:
    """Glue an outgoing component of (K1, mk1) to an incoming one of (K2, mk2).

    Core cells are identified in order; the glued edge index is
    s1 + s2 + 1 (mod r).  Returns the glued pair plus the id relabelings
    applied to each input (cells of K2 are suffixed to stay unique).
    """
    if mk1.r != mk2.r:
        raise GluingError("cover orders differ")
    r = mk1.r
    try:
        b1 = K1.boundary[out_index]
        b2 = K2.boundary[in_index]
    except IndexError as exc:
        raise GluingError("no such boundary component") from exc
    if b1.direction != OUT or b2.direction != IN:
        raise GluingError("gluing needs an outgoing and an incoming component")
    if b1.kind != b2.kind or b1.kind == FREE:
        raise GluingError(f"boundary kinds do not match: {b1.kind} vs {b2.kind}")
    if b1.kind == CLOSED and (b1.label - b2.label) % r != 0:
        raise GluingError(f"boundary labels disagree: {b1.label} vs {b2.label}")
    if len(b1.core) != len(b2.core):
        raise GluingError("core cell counts differ")

    # Disjointify K2's ids.
    taken_v = set(K1.vertices)
    taken_e = set(K1.edge_map)
    taken_f = set(K1.face_map)
    ren_v = {v: _fresh(v, taken_v) for v in K2.vertices}
    taken_v.update(ren_v.values())
    ren_e = {e.id: _fresh(e.id, taken_e) for e in K2.edges}
    taken_e.update(ren_e.values())
    ren_f = {f.id: _fresh(f.id, taken_f) for f in K2.faces}

    # Identify core cells in order.  Both cores follow the induced boundary
    # orientation of their own surface; the orientations are opposite in the
    # glued surface, so matching edge i of b1 with edge i of b2 reversed
    # keeps corresponding endpoints together for closed single-cell cores
    # and for open cores (whose parametrizations both start at the same
    # endpoint of the interval).
    core2 = list(b2.core)[::-1] if len(b2.core) > 1 else list(b2.core)
    edge_id_map = {}   # renamed K2 core edge -> K1 core edge
    vertex_map = {}    # renamed K2 vertex -> K1 vertex
    for eid1, eid2 in zip(b1.core, core2):
        e1 = K1.edge_map[eid1]
        e2 = K2.edge_map[eid2]
        edge_id_map[ren_e[eid2]] = eid1
        # match endpoints via the marking orientations: out-edges point along
        # the glued edge direction, in-edges against their own induced
        # orientation hence also along it.
        t1, h1 = _oriented_endpoints(K1, mk1, eid1)
        t2, h2 = _oriented_endpoints(K2, mk2, eid2)
        vertex_map[ren_v[t2]] = t1
        vertex_map[ren_v[h2]] = h1

    def map_v(v2: str) -> str:
        rv = ren_v[v2]
        return vertex_map.get(rv, rv)

    def map_e(eid2: str) -> str:
        re_ = ren_e[eid2]
        return edge_id_map.get(re_, re_)

    vertices = list(K1.vertices) + [ren_v[v] for v in K2.vertices
                                    if ren_v[v] not in vertex_map]
    edges = list(K1.edges)
    for e in K2.edges:
        if ren_e[e.id] in edge_id_map:
            continue
        edges.append(Edge(ren_e[e.id], map_v(e.tail), map_v(e.head)))
    faces = list(K1.faces)
    for f in K2.faces:
        faces.append(Face(ren_f[f.id],
                          tuple((map_e(eid), flag) for eid, flag in f.word)))
    punctures = frozenset(K1.punctures) | frozenset(map_v(p) for p in K2.punctures)
    boundary = [bc for i, bc in enumerate(K1.boundary) if i != out_index]
    for i, bc in enumerate(K2.boundary):
        if i == in_index:
            continue
        boundary.append(replace(bc, core=tuple(map_e(c) for c in bc.core)))

    o = dict(mk1.o)
    s = dict(mk1.s)
    marks = dict(mk1.m)
    for eid, v in mk2.o.items():
        if ren_e[eid] not in edge_id_map:
            o[ren_e[eid]] = v
    for eid, v in mk2.s.items():
        if ren_e[eid] not in edge_id_map:
            s[ren_e[eid]] = v
    for fid, v in mk2.m.items():
        marks[ren_f[fid]] = v
    for eid1, eid2 in zip(b1.core, core2):
        s[eid1] = (mk1.s[eid1] + mk2.s[eid2] + 1) % r
        # orientation of the glued edge: keep K1's stored-direction flag
        o[eid1] = mk1.o[eid1]
    K = PlcwComplex(tuple(vertices), tuple(edges), tuple(faces),
                    punctures, tuple(boundary))
    mk = Marking.make(r, o, marks, s)
    K.validate()
    ren1 = {}
    ren2 = {**{v: map_v(v) for v in K2.vertices},
            **{e.id: map_e(e.id) for e in K2.edges},
            **{f.id: ren_f[f.id] for f in K2.faces}}
    return K, mk, ren1, ren2


# ---------------------------------------------------------------------------
# enumeration of admissible markings modulo fixed moves


def _marking_key(mk: Marking) -> tuple:
    return (mk.orientation, mk.marked, mk.index)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def candidate_count(K: PlcwComplex, r: int) -> int:
    reversible = [e for e in K.marked_edge_ids if e not in K.parametrized_edge_ids]
    total = (2 ** len(reversible)) * (r ** len(K.marked_edge_ids))
    for f in K.faces:
        total *= len(f.word)
    return total


def all_admissible_markings(K: PlcwComplex, r: int, budget: int = 10 ** 7):
    """Yield every admissible marking; boundary edge orientations follow the
    in/out convention and are not enumerated."""
    K.validate()
    if candidate_count(K, r) > budget:
        raise ResourceError(
            f"{candidate_count(K, r)} candidate markings exceed the budget {budget}")
    eids = sorted(K.marked_edge_ids)
    reversible = [e for e in eids if e not in K.parametrized_edge_ids]
    pinned = {}
    for b in K.boundary:
        if b.kind == FREE:
            continue
        want = 1 if b.direction == OUT else -1
        for eid in b.core:
            (fid, pos, flag) = K.sides_of_edge[eid][0]
            pinned[eid] = want * flag
    fids = sorted(f.id for f in K.faces)
    face_sizes = {f.id: len(f.word) for f in K.faces}
    for bits in product((1, -1), repeat=len(reversible)):
        o = dict(pinned)
        o.update(zip(reversible, bits))
        for mark_tuple in product(*[range(face_sizes[fid]) for fid in fids]):
            m = dict(zip(fids, mark_tuple))
            for idx_tuple in product(range(r), repeat=len(eids)):
                s = dict(zip(eids, idx_tuple))
                mk = Marking.make(r, o, m, s)
                if check_admissible(K, mk).passed:
                    yield mk


def fixed_moves(K: PlcwComplex) -> list[tuple]:
    moves: list[tuple] = []
    for eid in sorted(K.marked_edge_ids - K.parametrized_edge_ids):
        moves.append(("reverse_edge", eid))
    for f in K.faces:
        moves.append(("rotate_mark", f.id))
        moves.append(("deck", f.id, 1))
    return moves


def enumerate_structures(K: PlcwComplex, r: int, budget: int = 10 ** 7
                         ) -> tuple[int, list[Marking]]:
    """Count admissible markings modulo fixed moves; returns
    (class count, one representative per class, smallest key first)."""
    markings = {}
    for mk in all_admissible_markings(K, r, budget):
        markings[_marking_key(mk)] = mk
    uf = _UnionFind()
    for key in markings:
        uf.add(key)
    moves = fixed_moves(K)
    for key, mk in markings.items():
        for move in moves:
            kind = move[0]
            if kind == "reverse_edge":
                nxt = reverse_edge(K, mk, move[1])
            elif kind == "rotate_mark":
                nxt = rotate_mark(K, mk, move[1])
            else:
                nxt = deck(K, mk, move[1], move[2])
            nkey = _marking_key(nxt)
            if nkey not in markings:
                raise PlcwError(
                    f"fixed move {move} left the admissible set; "
                    "convention calibration is broken")
            uf.union(key, nkey)
    classes: dict = {}
    for key, mk in markings.items():
        root = uf.find(key)
        if root not in classes or key < _marking_key(classes[root]):
            classes[root] = mk
    reps = [classes[root] for root in sorted(classes)]
    return len(reps), reps


# ---------------------------------------------------------------------------
# radial normalization inside an embedded disk


def radialize_disk(K: PlcwComplex, mk: Marking, inside_vertices
                   ) -> tuple[PlcwComplex, Marking]:
    """Replace the decomposition inside an embedded disk by the radial form
    (one central vertex, spokes to the region boundary, one triangle per
    boundary cell).

    The region is the star of the given interior vertices; its boundary
    curve crosses exactly the edges with one endpoint inside.  Preconditions
    (each edge crossed at most once, each face met in a single interval) are
    enforced.  Outside the region the decomposition is unchanged and the
    marking changes only by the fixed moves needed to rotate marks out of
    the region; the new interior indices are solved from the vertex
    conditions, which has a solution exactly when the region bounds a disk.
    """
    inside = frozenset(inside_vertices)
    if not inside:
        raise MoveError("the region must contain at least one vertex")
    if not inside <= set(K.vertices):
        raise MoveError("unknown vertices in the region")
    if inside & K.punctures:
        raise MoveError("the region may not contain punctures")
    for v in inside:
        if K.vertex_kind[v][0] != "interior":
            raise MoveError(f"region vertex {v} lies on the boundary")
    if not check_admissible(K, mk).passed:
        raise MoveError("radialization requires an admissible marking")

    crossed = sorted(e.id for e in K.edges
                     if (e.tail in inside) + (e.head in inside) == 1)
    if not crossed:
        raise MoveError("the region boundary crosses no edges")

    # precondition: inside corners of every face form at most one cyclic run
    for f in K.faces:
        flags = [K.side_vertices(*side)[0] in inside for side in f.word]
        runs = sum(1 for i in range(len(flags))
                   if flags[i] and not flags[i - 1])
        if runs > 1:
            raise MoveError(
                f"face {f.id} meets the region in {runs} intervals; "
                "refine the decomposition first")

    # 1. split every crossed edge; midpoints form the circle
    circle = set()
    for eid in crossed:
        K, mk = split_edge(K, mk, eid)
        circle.add(K.vertices[-1])

    inside_faces = {f.id for f in K.faces
                    if all(K.side_vertices(*s)[0] in inside for s in f.word)}

    # 2. cut each mixed face along the chord joining its two circle corners
    changed = True
    while changed:
        changed = False
        for f in K.faces:
            if f.id in inside_faces:
                continue
            word = f.word
            n1 = len(word)
            corners = [i for i in range(n1)
                       if K.side_vertices(*word[i])[0] in circle]
            for a_pos in corners:
                b_pos = None
                step = 0
                for t in range(1, n1):
                    w = (a_pos + t) % n1
                    vtx = K.side_vertices(*word[w])[0]
                    if vtx in circle:
                        b_pos, step = w, t
                        break
                    if vtx not in inside:
                        break
                if b_pos is None:
                    continue
                if step == 1 and not any(
                        K.side_vertices(*word[(a_pos + t) % n1])[0] in inside
                        for t in range(1, step)):
                    # consecutive circle corners; the single side between them
                    # is an inside edge-half only if it dips into the region
                    side_vtx = K.side_vertices(*word[a_pos])
                    if side_vtx[1] in circle and side_vtx[0] in circle:
                        continue
                K, mk = split_face(K, mk, f.id, a_pos, b_pos)
                inside_faces.add(K.faces[-1].id)
                changed = True
                break
            if changed:
                break

    return _replace_interior_with_radial(K, mk, inside, circle, inside_faces)


def _replace_interior_with_radial(K: PlcwComplex, mk: Marking, inside, circle,
                                  inside_faces) -> tuple[PlcwComplex, Marking]:
    interior_edges = set()
    cycle_edges = set()
    for e in K.edges:
        sides = K.sides_of_edge[e.id]
        inside_sides = sum(1 for fid, _, _ in sides if fid in inside_faces)
        if inside_sides == len(sides) and inside_sides > 0:
            interior_edges.add(e.id)
        elif inside_sides == 1 and len(sides) == 2:
            cycle_edges.add(e.id)
    if not inside_faces:
        raise MoveError("region interior is empty after cutting")
    if not cycle_edges:
        raise MoveError("region has no boundary cycle; it is not a disk")

    # traverse the cycle in the direction induced by the inside faces
    step = {}
    inside_flag = {}
    for fid in sorted(inside_faces):
        for pos, (eid, flag) in enumerate(K.face_map[fid].word):
            if eid in cycle_edges:
                a, b = K.side_vertices(eid, flag)
                step[a] = (eid, b)
                inside_flag[eid] = flag
    start = min(step)
    ordered = []
    v = start
    for _ in range(len(step)):
        eid, b = step[v]
        ordered.append((eid, v, b))
        v = b
    if v != start or len(ordered) != len(step) or len(ordered) != len(cycle_edges):
        raise MoveError("region boundary is not a single circle")

    center = _fresh("radial_center", set(K.vertices))
    taken_e = set(K.edge_map)
    spokes = {}
    for eid, a, b in ordered:
        spokes[a] = _fresh(f"spoke_{a}", taken_e)
        taken_e.add(spokes[a])

    vertices = tuple(w for w in K.vertices if w not in inside) + (center,)
    edges = [e for e in K.edges if e.id not in interior_edges]
    edges.extend(Edge(spokes[a], a, center) for _, a, _ in ordered)
    faces = [f for f in K.faces if f.id not in inside_faces]
    marks = {f.id: mk.m[f.id] for f in faces}
    taken_f = set(K.face_map)
    for eid, a, b in ordered:
        fid = _fresh(f"radial_{eid}", taken_f)
        taken_f.add(fid)
        faces.append(Face(fid, ((eid, inside_flag[eid]),
                                (spokes[b], 1), (spokes[a], -1))))
        marks[fid] = 0
    K2 = PlcwComplex(vertices, tuple(edges), tuple(faces), K.punctures, K.boundary)
    K2.validate()

    o = {k: w for k, w in mk.o.items() if k not in interior_edges}
    s = {k: w for k, w in mk.s.items() if k not in interior_edges}
    for a, sp in spokes.items():
        o[sp] = 1
        s[sp] = 0
    mk2 = Marking.make(mk.r, o, marks, s)
    return _solve_spoke_indices(K2, mk2, spokes)


def _solve_spoke_indices(K: PlcwComplex, mk: Marking, spokes) -> Marking:
    """Solve the radial vertex conditions; each circle vertex pins one spoke."""
    r = mk.r
    s = dict(mk.s)
    for a, sp in sorted(spokes.items()):
        s[sp] = 0
        base = mk.with_changes(index=s)
        rec = next(rec for rec in check_admissible(K, base).records
                   if rec.vertex == a)
        # spoke points out of a, so its index enters the sum linearly
        if rec.checked:
            s[sp] = (-rec.defect) % r
    mk = mk.with_changes(index=s)
    report = check_admissible(K, mk)
    if not report.passed:
        bad = sorted(rec.vertex for rec in report.failures())
        raise MoveError(
            f"no radial marking extends the boundary data (defects at {bad}); "
            "the selected region does not bound a disk")
    return mk
