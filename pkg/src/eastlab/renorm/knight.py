"""Knight-move block graph and its splitting into d+1 grid-isomorphic classes.

Join y to x whenever y_j = x_j - 2 for one coordinate and y_i = x_i - 1 for
all others.  The step vectors are v_j = (1,..,1) + e_j, whose integer span is
an index-(d+1) sublattice of Z^d (the step matrix I + ones has determinant
d+1), so the equivalence generated by the relation on Z^d splits the lattice
into d+1 classes, labelled by the coordinate sum mod d+1.  Each class maps
bijectively onto Z^d by its v-basis coordinates, and under that map the
knight edges are exactly the unit lattice steps; this module emits the
witness for a finite window and checks the edge correspondence both ways.
Window connectivity is also reported: cells near window corners can be cut
off from their class, which is a boundary effect, not a failure of the
splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..lattice import Box, Site


def knight_steps(d: int) -> list[Site]:
    """The d step vectors v_j = (1, ..., 1) + e_j."""
    return [tuple(1 + (1 if i == j else 0) for i in range(d)) for j in range(d)]


def _v_coordinates(w: Site, d: int) -> tuple[int, ...] | None:
    """Solve w = sum_j a_j v_j for integer a, if possible.

    The inverse of the step matrix I + ones is I - ones/(d+1), so
    a_i = w_i - sum(w)/(d+1); integral iff sum(w) is divisible by d+1.
    """
    s = sum(w)
    if s % (d + 1) != 0:
        return None
    t = s // (d + 1)
    return tuple(c - t for c in w)


@dataclass(frozen=True)
class KnightClasses:
    """Partition of a window into the d+1 classes with lattice coordinates.

    witness maps each site to (class id, coordinates in the v-basis relative
    to the class base point); within a class, in-window knight edges
    correspond exactly to unit steps of the coordinates, both ways.
    window_components counts the connected components the edges actually
    realise inside the window (boundary corners may be cut off).
    """

    window: Box
    class_count: int
    classes: tuple[tuple[Site, ...], ...]
    witness: dict[Site, tuple[int, tuple[int, ...]]]
    edges: tuple[tuple[Site, Site], ...]
    window_components: int


def knight_classes(window: Box) -> KnightClasses:
    d = window.d
    steps = knight_steps(d)
    sites = list(window.sites())

    by_residue: dict[int, list[Site]] = {}
    for x in sites:
        by_residue.setdefault(sum(x) % (d + 1), []).append(x)
    classes = tuple(tuple(sorted(g)) for _, g in sorted(by_residue.items()))

    edges = []
    for x in sites:
        for v in steps:
            y = tuple(c - e for c, e in zip(x, v))
            if y in window:
                edges.append((y, x))

    witness: dict[Site, tuple[int, tuple[int, ...]]] = {}
    coord_index: dict[tuple[int, tuple[int, ...]], Site] = {}
    for cid, cls in enumerate(classes):
        base = cls[0]
        for x in cls:
            a = _v_coordinates(tuple(c - b for c, b in zip(x, base)), d)
            if a is None:
                raise RuntimeError(f"site {x} shares a residue with {base} "
                                   "but is outside its step lattice")
            witness[x] = (cid, a)
            coord_index[(cid, a)] = x
    # edge <-> unit-step correspondence, both directions
    edge_set = set(edges)
    for y, x in edges:
        cy, ay = witness[y]
        cx, ax = witness[x]
        if cy != cx:
            raise RuntimeError("edge joins distinct classes")
        diff = tuple(b - a for a, b in zip(ay, ax))
        if sorted(diff) != [0] * (d - 1) + [1]:
            raise RuntimeError(f"edge {y}->{x} is not a unit lattice step")
    for (cid, a), x in coord_index.items():
        for j in range(d):
            up = tuple(c + (1 if i == j else 0) for i, c in enumerate(a))
            if (cid, up) in coord_index:
                if (x, coord_index[(cid, up)]) not in edge_set:
                    raise RuntimeError(f"unit step at {x} is not an edge")

    index = {x: i for i, x in enumerate(sites)}
    parent = list(range(len(sites)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for y, x in edges:
        ry, rx = find(index[y]), find(index[x])
        if ry != rx:
            parent[rx] = ry
    components = len({find(i) for i in range(len(sites))})

    return KnightClasses(
        window, len(classes), classes, witness, tuple(edges), components
    )
