"""Finite level quotients as permutation groups.

The quotient G_n = G/Stab(L_n) acts on the m_1*...*m_n level-n vertices
(lexicographic order).  Orders, membership, and subgroup data come from a
deterministic Schreier-Sims stabilizer chain: base points are chosen as
the first moved point (optionally prescribed), generators are processed
in a fixed order, and all Schreier generators are sifted, so runs are
reproducible bit for bit.  Permutations are numpy int arrays composed by
fancy indexing; group orders are exact Python integers.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, log
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .automorphisms import TreeAutomorphism
from .errors import ResourceBoundExceeded
from .groups import GroupDefinition

_IMAGE_CACHE: Dict[Tuple[int, int], np.ndarray] = {}


def _state_images(state: TreeAutomorphism, level: int) -> np.ndarray:
    """Index permutation induced by a state on level-`level` vertices."""
    key = (state.serial, level)
    hit = _IMAGE_CACHE.get(key)
    if hit is not None:
        return hit
    if level == 0:
        arr = np.zeros(1, dtype=np.int32)
    else:
        m = state.shape.branching(0)
        blocks = [None] * m
        width = state.shape.shift().level_size(level - 1)
        for y in range(m):
            sub = _state_images(state.children[y], level - 1)
            blocks[y] = state.root_perm[y] * width + sub
        arr = np.concatenate(blocks)
    arr.setflags(write=False)
    _IMAGE_CACHE[key] = arr
    return arr


def _pinv(p: np.ndarray) -> np.ndarray:
    out = np.empty_like(p)
    out[p] = np.arange(len(p), dtype=p.dtype)
    return out


class _Level:
    """One level of the chain: base point, orbit, generators, cursors.

    ``gens`` are all strong generators fixing the base prefix above this
    level (each also appears in the lists of the shallower levels).
    ``orbit_cursor[gi]``/``pair_cursor[gi]`` record how many orbit points
    have been expanded/Schreier-checked with generator gi; orbits and
    generator lists only grow, so processed work never needs redoing.
    """

    __slots__ = ("point", "points", "transversal", "inv_transversal",
                 "gens", "orbit_cursor", "pair_cursor", "seen")

    def __init__(self, point: int, identity: np.ndarray):
        self.point = point
        self.points = [point]
        self.transversal = {point: identity}
        self.inv_transversal = {point: identity}
        self.gens: List[np.ndarray] = []
        self.orbit_cursor: List[int] = []
        self.pair_cursor: List[int] = []
        self.seen = set()


class StabilizerChain:
    """Deterministic Schreier-Sims stabilizer chain.

    Generators are processed in a fixed order and every Schreier
    generator is sifted exactly once (work cursors make revisits cheap);
    a Schreier generator that once sifted to the identity stays inside
    the deeper subgroup because subgroups only grow, so the processing
    order does not affect correctness.  No randomization anywhere.
    """

    def __init__(self, degree: int, base_prescription: Sequence[int] = ()):
        self.degree = degree
        self.identity = np.arange(degree, dtype=np.int32)
        self._id_bytes = self.identity.tobytes()
        self.levels: List[_Level] = []
        for b in base_prescription:
            self.levels.append(_Level(int(b), self.identity))

    @property
    def base(self) -> List[int]:
        return [lv.point for lv in self.levels]

    def sift(self, perm: np.ndarray, start: int = 0) -> Optional[np.ndarray]:
        """Strip through transversals; None iff membership holds."""
        g = np.asarray(perm, dtype=np.int32)
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            y = int(g[lv.point])
            if y == lv.point:
                continue
            inv = lv.inv_transversal.get(y)
            if inv is None:
                return g
            g = inv[g]
        if g.tobytes() == self._id_bytes:
            return None
        return g

    def contains(self, perm: np.ndarray) -> bool:
        return self.sift(perm) is None

    def _install(self, perm: np.ndarray, start: int = 0) -> int:
        """Attach a nontrivial permutation at its level (extending the
        base when it fixes every current base point).  Returns the level."""
        i = start
        while i < len(self.levels) and perm[self.levels[i].point] == self.levels[i].point:
            i += 1
        if i == len(self.levels):
            moved = np.nonzero(perm != self.identity)[0]
            self.levels.append(_Level(int(moved[0]), self.identity))
        for j in range(i + 1):
            lv = self.levels[j]
            lv.gens.append(perm)
            lv.orbit_cursor.append(0)
            lv.pair_cursor.append(0)
        return i

    def _extend_orbit(self, i: int) -> bool:
        """Expand the orbit of level i with any unprocessed (point, gen)
        pairs; returns True if new points appeared."""
        lv = self.levels[i]
        grew = False
        changed = True
        while changed:
            changed = False
            for gi, g in enumerate(lv.gens):
                while lv.orbit_cursor[gi] < len(lv.points):
                    x = lv.points[lv.orbit_cursor[gi]]
                    lv.orbit_cursor[gi] += 1
                    y = int(g[x])
                    if y not in lv.transversal:
                        uy = g[lv.transversal[x]]
                        lv.transversal[y] = uy
                        lv.inv_transversal[y] = _pinv(uy)
                        lv.points.append(y)
                        grew = True
                        changed = True
        return grew

    def _pending(self, i: int) -> bool:
        lv = self.levels[i]
        return any(c < len(lv.points) for c in lv.orbit_cursor) or any(
            c < len(lv.points) for c in lv.pair_cursor
        )

    def _process_level(self, i: int) -> bool:
        """Expand the orbit, then sift unprocessed Schreier generators.
        Stops at the first residue installed deeper (so deeper levels can
        settle before more of this level is enumerated); cursors make the
        eventual revisit resume where it stopped.  Returns True iff a
        residue was installed."""
        self._extend_orbit(i)
        lv = self.levels[i]
        for gi in range(len(lv.gens)):
            g = lv.gens[gi]
            while lv.pair_cursor[gi] < len(lv.points):
                x = lv.points[lv.pair_cursor[gi]]
                lv.pair_cursor[gi] += 1
                z = g[lv.transversal[x]]
                y = int(z[lv.point])
                sg = lv.inv_transversal[y][z]
                key = sg.tobytes()
                if key == self._id_bytes:
                    continue
                # exact dedup is memory-bounded: only small orbits keep a
                # seen-set; duplicates elsewhere just sift twice
                if len(lv.points) <= 64:
                    if key in lv.seen:
                        continue
                    lv.seen.add(key)
                residue = self.sift(sg, i + 1)
                if residue is not None:
                    self._install(residue, i + 1)
                    return True
        return False

    def _run(self):
        """Process pending work, deepest level first."""
        while True:
            target = -1
            for i in range(len(self.levels) - 1, -1, -1):
                if self._pending(i):
                    target = i
                    break
            if target < 0:
                return
            self._process_level(target)

    def add_generator(self, perm: np.ndarray):
        g = np.asarray(perm, dtype=np.int32)
        if g.tobytes() == self._id_bytes:
            return
        if self.sift(g) is None:
            return
        self._install(g)
        self._run()

    def order(self) -> int:
        n = 1
        for lv in self.levels:
            n *= len(lv.points)
        return n

    def strong_generators(self) -> List[np.ndarray]:
        return list(self.levels[0].gens) if self.levels else []

    def stabilizer_generators(self, depth: int) -> List[np.ndarray]:
        """Generators of the subgroup fixing the first `depth` base points."""
        if depth >= len(self.levels):
            return []
        return list(self.levels[depth].gens)


def chain_from_generators(degree: int, gens: Sequence[np.ndarray],
                          base_prescription: Sequence[int] = ()) -> StabilizerChain:
    chain = StabilizerChain(degree, base_prescription)
    staged = False
    for g in gens:
        g = np.asarray(g, dtype=np.int32)
        if g.tobytes() == chain._id_bytes:
            continue
        chain._install(g)
        staged = True
    if staged:
        chain._run()
    return chain


class LevelQuotient:
    """The permutation group induced by a group on one tree level."""

    def __init__(self, group: GroupDefinition, level: int):
        self.group = group
        self.level = level
        self.degree = group.shape.level_size(level)
        self.gen_perms: Dict[str, np.ndarray] = {}
        for letter in group.canonical_letters:
            label = group.letter_labels.get(letter, str(letter))
            state = group.state_of_letter(letter)
            self.gen_perms[label] = _state_images(state, level)
        self.gen_labels = list(self.gen_perms)
        self._chain: Optional[StabilizerChain] = None

    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = chain_from_generators(
                self.degree, list(self.gen_perms.values())
            )
        return self._chain

    def order(self) -> int:
        return self.chain().order()

    def contains(self, perm: np.ndarray) -> bool:
        return self.chain().contains(np.asarray(perm, dtype=np.int32))

    def perm_of_word(self, word) -> np.ndarray:
        letters = self.group.word(word).letters
        p = np.arange(self.degree, dtype=np.int32)
        for letter in letters:
            state = self.group.state_of_letter(letter)
            p = _state_images(state, self.level)[p]
        return p

    def perm_of_state(self, state: TreeAutomorphism) -> np.ndarray:
        return _state_images(state, self.level)

    def brute_force_order(self, cap: int = 1 << 21) -> int:
        """Breadth-first closure; only sensible for small degrees."""
        seen = {self.identity_bytes()}
        frontier = [np.arange(self.degree, dtype=np.int32)]
        gens = list(self.gen_perms.values())
        count = 1
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = g[p]
                    key = q.tobytes()
                    if key not in seen:
                        if count >= cap:
                            raise ResourceBoundExceeded("closure cap hit")
                        seen.add(key)
                        count += 1
                        nxt.append(q)
            frontier = nxt
        return count

    def identity_bytes(self):
        return np.arange(self.degree, dtype=np.int32).tobytes()


class SubgroupHandle:
    """A subgroup of a LevelQuotient given by generating permutations."""

    def __init__(self, parent: LevelQuotient, gens: Sequence[np.ndarray]):
        self.parent = parent
        self.gens = [np.asarray(g, dtype=np.int32) for g in gens]
        self._chain: Optional[StabilizerChain] = None

    def chain(self) -> StabilizerChain:
        if self._chain is None:
            self._chain = chain_from_generators(self.parent.degree, self.gens)
        return self._chain

    def order(self) -> int:
        return self.chain().order()

    def index(self) -> int:
        return self.parent.order() // self.order()

    def contains(self, perm: np.ndarray) -> bool:
        return self.chain().contains(perm)


def level_quotient(group: GroupDefinition, level: int) -> LevelQuotient:
    return LevelQuotient(group, level)


def group_order(q: LevelQuotient) -> int:
    return q.order()


# -- normal closures, commutators, series -------------------------------


def _comm(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # [p, q] = p^-1 q^-1 p q; composition is left-to-right application
    return q[p[_pinv(q)[_pinv(p)]]]


def normal_closure(q: LevelQuotient, seeds: Sequence[np.ndarray]) -> SubgroupHandle:
    """Normal closure of the seeds under conjugation by the group generators."""
    sub = StabilizerChain(q.degree)
    gens: List[np.ndarray] = []
    work = [np.asarray(s, dtype=np.int32) for s in seeds]
    conj = [(c, _pinv(c)) for c in q.gen_perms.values()]
    while work:
        g = work.pop()
        if sub.contains(g):
            continue
        sub.add_generator(g)
        gens.append(g)
        for c, cinv in conj:
            work.append(c[g[cinv]])
    handle = SubgroupHandle(q, gens)
    handle._chain = sub
    return handle


def commutator_subgroup(q: LevelQuotient, h1_gens: Sequence[np.ndarray],
                        h2_gens: Sequence[np.ndarray]) -> SubgroupHandle:
    """Normal closure of the commutators of the given generating sets."""
    seeds = [_comm(x, y) for x in h1_gens for y in h2_gens]
    return normal_closure(q, seeds)


def derived_series_orders(q: LevelQuotient, kmax: int) -> List[int]:
    """Orders of G_n = G^(0) >= G^(1) >= ... >= G^(kmax)."""
    orders = [q.order()]
    gens = list(q.gen_perms.values())
    for _ in range(kmax):
        sub = commutator_subgroup(q, gens, gens)
        orders.append(sub.order())
        if orders[-1] == 1:
            break
        gens = sub.gens
    return orders


def lower_central_series(q: LevelQuotient, kmax: int) -> List[SubgroupHandle]:
    """gamma_1 = G_n, gamma_{k+1} = <[gamma_k, G]>, as subgroup handles."""
    group_gens = list(q.gen_perms.values())
    series = [SubgroupHandle(q, group_gens)]
    current = group_gens
    for _ in range(kmax):
        nxt = commutator_subgroup(q, current, group_gens)
        series.append(nxt)
        if nxt.order() == 1:
            break
        current = nxt.gens
    return series


def lower_central_ranks(group: GroupDefinition, level: int, kmax: int,
                        p: Optional[int] = None) -> List[int]:
    """Ranks of gamma_k / gamma_{k+1} in the level quotient, k = 1..kmax.

    These quotients are elementary abelian p-groups for the groups at
    hand, so the rank is log_p of the index; p defaults to the branching
    index of the tree.
    """
    if p is None:
        p = group.shape.branching(0)
    q = level_quotient(group, level)
    series = lower_central_series(q, kmax + 1)
    ranks = []
    for k in range(min(kmax, len(series) - 1)):
        idx = series[k].order() // series[k + 1].order()
        rank = 0
        while idx > 1:
            if idx % p:
                raise ValueError(f"gamma_{k + 1}/gamma_{k + 2} is not a {p}-group")
            idx //= p
            rank += 1
        ranks.append(rank)
    while len(ranks) < kmax:
        ranks.append(0)
    return ranks


def nilpotency_class(group: GroupDefinition, level: int, kcap: int = 128) -> int:
    q = level_quotient(group, level)
    series = lower_central_series(q, kcap)
    for k, handle in enumerate(series):
        if handle.order() == 1:
            return k - 1 + 1  # gamma_{k+1} trivial -> class k
    raise ResourceBoundExceeded(f"nilpotency class exceeds {kcap}")


# -- rigid stabilizers, parabolic suborbits ------------------------------


def _points_under(group: GroupDefinition, level: int,
                  vertex: Tuple[int, ...]) -> List[int]:
    verts = group.shape.vertices(level)
    return [i for i, v in enumerate(verts) if v[: len(vertex)] == tuple(vertex)]


def pointwise_stabilizer(q: LevelQuotient, points: Sequence[int]) -> SubgroupHandle:
    """Subgroup fixing every listed point, via a chain based at those points."""
    chain = chain_from_generators(
        q.degree, list(q.gen_perms.values()), base_prescription=points
    )
    return SubgroupHandle(q, chain.stabilizer_generators(len(points)))


def rigid_stabilizer(group: GroupDefinition, level: int,
                     vertex: Tuple[int, ...],
                     q: Optional[LevelQuotient] = None) -> SubgroupHandle:
    """Elements fixing every level vertex outside the subtree at `vertex`."""
    if q is None:
        q = level_quotient(group, level)
    inside = set(_points_under(group, level, vertex))
    outside = [i for i in range(q.degree) if i not in inside]
    return pointwise_stabilizer(q, outside)


def rigid_level_stabilizer(group: GroupDefinition, level: int, depth: int,
                           q: Optional[LevelQuotient] = None) -> SubgroupHandle:
    """Product of the rigid stabilizers of all depth-`depth` vertices."""
    if q is None:
        q = level_quotient(group, level)
    gens: List[np.ndarray] = []
    for v in group.shape.vertices(depth):
        gens.extend(rigid_stabilizer(group, level, v, q=q).gens)
    return SubgroupHandle(q, gens)


def suborbit_profile(group: GroupDefinition, level: int,
                     basepoint: Optional[Tuple[int, ...]] = None) -> List[int]:
    """Orbit sizes of the basepoint stabilizer on the level, sorted.

    The default basepoint is the rightmost vertex (m, m, ..., m), the
    level-n stage of the spine ray.
    """
    q = level_quotient(group, level)
    verts = group.shape.vertices(level)
    if basepoint is None:
        basepoint = tuple(group.shape.branching(i) - 1 for i in range(level))
    pt = verts.index(tuple(basepoint))
    stab = pointwise_stabilizer(q, [pt])

    parent = list(range(q.degree))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in stab.gens:
        for x in range(q.degree):
            rx, ry = find(x), find(int(g[x]))
            if rx != ry:
                parent[ry] = rx
    sizes: Dict[int, int] = {}
    for x in range(q.degree):
        r = find(x)
        sizes[r] = sizes.get(r, 0) + 1
    return sorted(sizes.values())


# -- ambient orders and Hausdorff ratios ----------------------------------


def full_aut_order(group: GroupDefinition, level: int) -> int:
    """|Aut(T)_n| = m_1! (m_2!)^{m_1} (m_3!)^{m_1 m_2} ..."""
    total = 1
    width = 1
    for i in range(level):
        total *= factorial(group.shape.branching(i)) ** width
        width *= group.shape.branching(i)
    return total


def sylow_wreath_order(group: GroupDefinition, level: int,
                       p: Optional[int] = None) -> int:
    """Order of the level quotient of the iterated wreath power of C_p."""
    if p is None:
        p = group.shape.branching(0)
    width = 1
    exponent = 0
    for i in range(level):
        exponent += width
        width *= group.shape.branching(i)
    return p**exponent


def hausdorff_ratio(group: GroupDefinition, level: int,
                    ambient: str = "sylow") -> float:
    """log|G_n| / log|W_n| for the ambient closure W at the same level.

    ambient='sylow' measures inside the iterated wreath power of the
    cyclic group of prime order p = branching index; for binary shapes
    this *is* the full automorphism group.  ambient='full' uses Aut(T)
    with full symmetric groups at every vertex.
    """
    q = level_quotient(group, level)
    g_order = q.order()
    if ambient == "sylow":
        w_order = sylow_wreath_order(group, level)
    elif ambient == "full":
        w_order = full_aut_order(group, level)
    else:
        raise ValueError(f"unknown ambient {ambient!r}")
    return log(g_order) / log(w_order)


def hausdorff_ratio_exact(group: GroupDefinition, level: int) -> Fraction:
    """Exact exponent ratio when both orders are powers of the same prime."""
    p = group.shape.branching(0)
    q = level_quotient(group, level)

    def p_exponent(n: int) -> int:
        e = 0
        while n % p == 0 and n > 1:
            n //= p
            e += 1
        if n != 1:
            raise ValueError(f"order is not a power of {p}")
        return e

    return Fraction(p_exponent(q.order()),
                    p_exponent(sylow_wreath_order(group, level)))


def format_order(n: int) -> str:
    """Print a prime power as p^e, otherwise decimal."""
    if n <= 1:
        return str(n)
    for p in range(2, 1000):
        if n % p == 0:
            e, m = 0, n
            while m % p == 0:
                m //= p
                e += 1
            if m == 1:
                return f"{p}^{e}" if e > 1 else str(n)
            break
    return str(n)
