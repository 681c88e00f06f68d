"""Finite restricted permutational wreath products Z/2 wr_Q B.

Elements are pairs (config, b): a finite subset of Q (the support of a
Z/2-valued function on Q) and an element of B.  B acts on configurations
through a surjective homomorphism proj: B -> Q by permuting indices from
the left, and the group law is

    (phi1, b1) (phi2, b2) = (phi1 xor b1.phi2, b1 b2),
    (b.phi)(q) = phi(proj(b)^-1 q).

The lamp coefficient group Z/2 is hard-coded: supports xor exactly, so
all arithmetic is bit-level and errorless.  The standard generating set
is the single lamp flip delta at the identity of Q together with the
generators of B.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .errors import CapExceededError, InvalidInputError, VerificationError
from .expander_zoo import FiniteGroupTable
from .graph_core import LabeledGraph, build_graph

#: largest full Cayley graph wreath_cayley will materialize
WREATH_VERTEX_CAP = 1 << 20

#: label of the lamp-flip generator
DELTA_LABEL = "delta"


@dataclass(frozen=True)
class WreathGroup:
    """The data of Z/2 wr_Q B for a surjection proj: B ->> Q.

    ``proj[b]`` is the image in Q of the B-element ``b``; it is checked
    exhaustively to be a surjective homomorphism.  The generating set
    is the lamp flip delta (an involution) together with B's stored
    generator set, which FiniteGroupTable keeps closed under inverses,
    so the whole set is symmetric.
    """

    Q: FiniteGroupTable
    B: FiniteGroupTable
    proj: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "proj", tuple(int(q) for q in self.proj))
        if len(self.proj) != self.B.order:
            raise InvalidInputError("proj must assign an image to every element of B")
        for q in self.proj:
            if not (0 <= q < self.Q.order):
                raise InvalidInputError(f"proj value {q} outside Q")
        for a in range(self.B.order):
            for b in range(self.B.order):
                if self.proj[self.B.mul(a, b)] != self.Q.mul(self.proj[a], self.proj[b]):
                    raise InvalidInputError(
                        f"proj is not a homomorphism at ({a}, {b})"
                    )
        if len(set(self.proj)) != self.Q.order:
            raise InvalidInputError("proj is not surjective onto Q")
        if not self.B.generators:
            raise InvalidInputError("B needs a generating set")

    @property
    def order(self) -> int:
        return (1 << self.Q.order) * self.B.order

    @property
    def generators(self) -> tuple["WreathElement", ...]:
        """The symmetric generating set: the lamp flip delta at the
        identity of Q, then (empty config, t) for each generator t of B."""
        out = [self.delta()]
        out.extend(WreathElement(frozenset(), t) for t in self.B.generators)
        return tuple(out)

    def identity(self) -> "WreathElement":
        return WreathElement(frozenset(), self.B.identity)

    def delta(self, q: Optional[int] = None) -> "WreathElement":
        """The lamp flip at q (default: the identity of Q)."""
        point = self.Q.identity if q is None else q
        if not (0 <= point < self.Q.order):
            raise InvalidInputError(f"no point {point} in Q")
        return WreathElement(frozenset((point,)), self.B.identity)

    def validate(self, x: "WreathElement") -> None:
        if not (0 <= x.b < self.B.order):
            raise InvalidInputError(f"element of wrong group: b = {x.b}")
        for q in x.config:
            if not (0 <= q < self.Q.order):
                raise InvalidInputError(f"element of wrong group: lamp at {q}")


@dataclass(frozen=True)
class WreathElement:
    """A lamp configuration (support subset of Q) and a B-coordinate."""

    config: frozenset[int]
    b: int

    def key(self) -> tuple:
        """Canonical sort key: sorted support, then the B-index."""
        return (tuple(sorted(self.config)), self.b)


def wreath_mul(W: WreathGroup, x: WreathElement, y: WreathElement) -> WreathElement:
    W.validate(x)
    W.validate(y)
    shift = W.proj[x.b]
    moved = frozenset(W.Q.mul(shift, q) for q in y.config)
    return WreathElement(x.config ^ moved, W.B.mul(x.b, y.b))


def wreath_inv(W: WreathGroup, x: WreathElement) -> WreathElement:
    W.validate(x)
    binv = W.B.inverse(x.b)
    shift = W.proj[binv]
    inv = WreathElement(frozenset(W.Q.mul(shift, q) for q in x.config), binv)
    if wreath_mul(W, x, inv) != W.identity():
        raise VerificationError("inverse failed its defining identity")
    return inv


# -- Cayley graphs ----------------------------------------------------------


@dataclass(frozen=True)
class WreathBall:
    """A Cayley graph of a wreath group, or a metric ball inside one.

    ``elements[i]`` is the group element sitting at vertex ``i``;
    ``complete`` says whether the whole group was enumerated.
    """

    graph: LabeledGraph
    elements: tuple[WreathElement, ...]
    radius: Optional[int]
    complete: bool

    def index_of(self, x: WreathElement) -> int:
        try:
            return self.elements.index(x)
        except ValueError as exc:
            raise InvalidInputError("element not in the enumerated ball") from exc


def _generator_pairs(W: WreathGroup) -> list[tuple[int, str]]:
    """One (canonical element, base label) entry per generator pair of B."""
    pairs = []
    seen = set()
    labels = set()
    for t in W.B.generators:
        s = W.B.inverse(t)
        canon = min(t, s)
        if canon in seen:
            continue
        seen.add(canon)
        base = W.B.name(canon)
        if base == DELTA_LABEL or base in labels:
            raise InvalidInputError(f"generator label {base!r} collides")
        labels.add(base)
        pairs.append((canon, base))
    return pairs


def wreath_cayley(
    W: WreathGroup, radius: Optional[int] = None, cap: int = WREATH_VERTEX_CAP
) -> WreathBall:
    """Cayley graph of W on delta and the B-generators, or the ball of
    the given radius around the identity (as an induced subgraph).

    Vertices are numbered breadth-first from the identity; within each
    BFS level elements are sorted by (sorted support, B-index), so the
    numbering is deterministic.  Building the full graph requires
    2^|Q| * |B| <= cap.
    """
    if radius is None and W.order > cap:
        raise CapExceededError(
            f"full wreath Cayley graph has {W.order} vertices, above the cap {cap}"
        )
    pairs = _generator_pairs(W)
    moves = [(W.delta(), DELTA_LABEL)]
    for t, base in pairs:
        moves.append((WreathElement(frozenset(), t), base))
        s = W.B.inverse(t)
        if s != t:
            moves.append((WreathElement(frozenset(), s), base))

    index: dict[WreathElement, int] = {W.identity(): 0}
    order: list[WreathElement] = [W.identity()]
    frontier = [W.identity()]
    depth = 0
    while frontier and (radius is None or depth < radius):
        found = set()
        for x in frontier:
            for move, _ in moves:
                y = wreath_mul(W, x, move)
                if y not in index:
                    found.add(y)
        for y in sorted(found, key=WreathElement.key):
            index[y] = len(order)
            order.append(y)
        if len(order) > cap:
            raise CapExceededError(f"ball enumeration passed the cap {cap}")
        frontier = sorted(found, key=WreathElement.key)
        depth += 1

    complete = radius is None
    if complete and len(order) != W.order:
        raise VerificationError(
            f"enumerated {len(order)} elements, expected {W.order}; "
            "the generating set failed to generate"
        )

    edges = []
    for i, x in enumerate(order):
        y = wreath_mul(W, x, W.delta())
        j = index.get(y)
        # delta is an involution: one edge per unordered vertex pair
        if j is not None and i < j:
            edges.append((i, j, DELTA_LABEL))
        for t, base in pairs:
            s = W.B.inverse(t)
            y = wreath_mul(W, x, WreathElement(frozenset(), t))
            j = index.get(y)
            if j is None:
                continue
            if s == t:
                if i < j:
                    edges.append((i, j, base))
            else:
                edges.append((i, j, base))
    alphabet = [DELTA_LABEL] + [base for _, base in pairs]
    graph = build_graph(
        len(order),
        edges,
        alphabet=alphabet,
        annotations={
            "construction": f"wreath Z/2 over Q of order {W.Q.order}, base order {W.B.order}",
            "vertex_supports": tuple(tuple(sorted(x.config)) for x in order),
            "vertex_b_names": tuple(W.B.name(x.b) for x in order),
        },
    )
    return WreathBall(graph=graph, elements=tuple(order), radius=radius, complete=complete)


# -- the relative subset X --------------------------------------------------


@dataclass(frozen=True)
class RelativeSubset:
    """The |Q| single-lamp involutions (delta_g, 1_B), ordered by g."""

    elements: tuple[WreathElement, ...]

    def __len__(self) -> int:
        return len(self.elements)


def x_subset(W: WreathGroup) -> RelativeSubset:
    return RelativeSubset(tuple(W.delta(g) for g in range(W.Q.order)))


# -- subwreath embedding ----------------------------------------------------


def subwreath_embed(
    W_small: WreathGroup,
    W_big: WreathGroup,
    vertex_inclusion: dict[int, int],
    quotient_bijection: dict[int, int],
) -> dict[WreathElement, WreathElement]:
    """The embedding (phi, l) -> (Phi, l) of Z/2 wr_{L'} L into
    Z/2 wr_{K'} K: Phi agrees with phi on the image of L's quotient
    (transported by the bijection) and vanishes elsewhere.

    ``vertex_inclusion`` maps B-elements of W_small into B-elements of
    W_big; it must be an injective homomorphism carrying generators to
    generators (that makes Cay(L, U) a subgraph of Cay(K, V)).
    ``quotient_bijection`` maps Q-elements of W_big back to Q-elements
    of W_small; composed with W_big's projection it must reproduce
    W_small's projection.  Both hypotheses are checked exhaustively, and
    the returned map is verified to be an injective homomorphism.
    """
    L, K = W_small.B, W_big.B
    incl = vertex_inclusion
    if sorted(incl) != list(range(L.order)):
        raise InvalidInputError("vertex inclusion must be defined on all of L")
    if len(set(incl.values())) != L.order:
        raise InvalidInputError("vertex inclusion is not injective")
    for v in incl.values():
        if not (0 <= v < K.order):
            raise InvalidInputError(f"inclusion value {v} outside K")
    for a in range(L.order):
        for b in range(L.order):
            if incl[L.mul(a, b)] != K.mul(incl[a], incl[b]):
                raise InvalidInputError("vertex inclusion is not a homomorphism")
    big_gens = set(K.generators)
    for u in L.generators:
        if incl[u] not in big_gens:
            raise InvalidInputError(
                f"Cay(L, U) is not a subgraph of Cay(K, V): generator {u} "
                f"maps to {incl[u]}, which is not a K-generator"
            )

    # the bijection must cover exactly the projected image of L
    projected = {W_big.proj[incl[l]] for l in range(L.order)}
    f = quotient_bijection
    if set(f) != projected:
        raise InvalidInputError(
            "quotient bijection must be defined exactly on the projection of L"
        )
    if len(set(f.values())) != len(f):
        raise InvalidInputError("quotient bijection is not injective")
    for l in range(L.order):
        if f[W_big.proj[incl[l]]] != W_small.proj[l]:
            raise InvalidInputError(
                "quotient bijection does not intertwine the two projections"
            )
    f_inv = {v: k for k, v in f.items()}
    if sorted(f_inv) != list(range(W_small.Q.order)):
        raise InvalidInputError("quotient bijection does not reach all of L'")

    if W_small.order > WREATH_VERTEX_CAP:
        raise CapExceededError("small wreath group too large to enumerate")
    mapping: dict[WreathElement, WreathElement] = {}
    configs = [frozenset(q for q in range(W_small.Q.order) if mask >> q & 1)
               for mask in range(1 << W_small.Q.order)]
    for cfg in configs:
        big_cfg = frozenset(f_inv[q] for q in cfg)
        for b in range(L.order):
            mapping[WreathElement(cfg, b)] = WreathElement(big_cfg, incl[b])

    if len(set(mapping.values())) != len(mapping):
        raise VerificationError("subwreath embedding is not injective")
    elems = list(mapping)
    if len(elems) <= 256:
        check_pairs = ((x, y) for x in elems for y in elems)
    else:
        rng = random.Random(20240817)
        check_pairs = (
            (rng.choice(elems), rng.choice(elems)) for _ in range(2000)
        )
    for x, y in check_pairs:
        lhs = mapping[wreath_mul(W_small, x, y)]
        rhs = wreath_mul(W_big, mapping[x], mapping[y])
        if lhs != rhs:
            raise VerificationError("subwreath embedding is not a homomorphism")
    return mapping


def verify_subgraph_embedding(
    gm: dict[int, int], g_small: LabeledGraph, g_big: LabeledGraph
) -> bool:
    """True iff ``gm`` maps g_small injectively into g_big carrying
    every edge to an edge."""
    for v in range(g_small.vertex_count):
        if v not in gm:
            raise InvalidInputError(f"vertex {v} has no image")
    if len({gm[v] for v in range(g_small.vertex_count)}) != g_small.vertex_count:
        return False
    adjacency = set()
    for d in range(g_big.dart_count):
        adjacency.add((g_big.dart_source(d), g_big.dart_target(d)))
    for u, v, _ in g_small.edges():
        if (gm[u], gm[v]) not in adjacency:
            return False
    return True
