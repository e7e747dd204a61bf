"""Core data types shared across the construction engine.

Conventions:
  * points are dense 0-based integers 0..n-1
  * a block is a set of distinct points, stored sorted
  * block collections are numpy int32 matrices, one row per block, short rows
    padded on the right with -1
  * group and hole partitions are tuples of sorted point tuples
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PAD = -1

# final outputs always have blocks of size 4; transversal-design intermediates
# go wider (TD(10,m) is the largest any pipeline touches)
MIN_BLOCK = 2
MAX_BLOCK = 16


class Kind(Enum):
    PACKING = "packing"
    GDD = "gdd"
    TD = "td"
    DGDD = "dgdd"


def as_block_array(rows, width=None):
    """Pack an iterable of point sequences into a padded int32 matrix."""
    rows = [sorted(int(x) for x in r) for r in rows]
    if width is None:
        width = max((len(r) for r in rows), default=4)
    out = np.full((len(rows), width), PAD, dtype=np.int32)
    for i, r in enumerate(rows):
        if not MIN_BLOCK <= len(r) <= MAX_BLOCK:
            raise ValueError("block size %d out of range" % len(r))
        out[i, : len(r)] = r
    return out


def iter_blocks(arr):
    """Yield each row of a padded block matrix as a tuple without padding."""
    for row in arr:
        yield tuple(int(x) for x in row if x != PAD)


def block_sizes(arr):
    return (arr != PAD).sum(axis=1)


def concat_blocks(parts):
    """Stack block matrices of possibly different widths into one."""
    parts = [p for p in parts if p is not None and len(p)]
    if not parts:
        return np.empty((0, 4), dtype=np.int32)
    width = max(p.shape[1] for p in parts)
    padded = []
    for p in parts:
        if p.shape[1] < width:
            fill = np.full((p.shape[0], width - p.shape[1]), PAD, dtype=np.int32)
            p = np.hstack([p, fill])
        padded.append(p)
    return np.vstack(padded)


def _check_blocks(n, arr):
    if arr.ndim != 2:
        raise ValueError("blocks must be a 2d array")
    if arr.size == 0:
        return
    if arr.min() < PAD or arr.max() >= n:
        raise ValueError("point out of range 0..%d" % (n - 1))
    sizes = block_sizes(arr)
    if sizes.min() < MIN_BLOCK or sizes.max() > MAX_BLOCK:
        raise ValueError("block size out of range")
    left, right = arr[:, :-1], arr[:, 1:]
    bad = (right != PAD) & ((left == PAD) | (left >= right))
    if bad.any():
        raise ValueError("rows must be sorted, distinct, padded on the right")


def _check_partition(n, parts, what):
    seen = sorted(p for part in parts for p in part)
    if seen != list(range(n)):
        raise ValueError("%s must partition 0..%d" % (what, n - 1))


@dataclass(frozen=True, eq=False)
class Design:
    """An immutable block collection with optional group/hole structure."""

    n: int
    blocks: np.ndarray
    kind: Kind = Kind.PACKING
    groups: tuple = ()
    holes: tuple = ()

    def __post_init__(self):
        arr = np.ascontiguousarray(self.blocks, dtype=np.int32)
        _check_blocks(self.n, arr)
        arr.setflags(write=False)
        object.__setattr__(self, "blocks", arr)
        object.__setattr__(
            self, "groups", tuple(tuple(sorted(g)) for g in self.groups)
        )
        object.__setattr__(self, "holes", tuple(tuple(sorted(h)) for h in self.holes))
        if self.kind in (Kind.GDD, Kind.TD, Kind.DGDD):
            _check_partition(self.n, self.groups, "groups")
        if self.kind is Kind.DGDD:
            _check_partition(self.n, self.holes, "holes")

    @property
    def b(self):
        return int(self.blocks.shape[0])

    def group_type(self):
        return canonical_type(len(g) for g in self.groups)

    def relabeled(self, perm):
        """Apply a Permutation (or image list) to every point."""
        images = np.asarray(
            perm.images if isinstance(perm, Permutation) else perm, dtype=np.int32
        )
        table = np.concatenate([images, np.int32([PAD])])  # PAD maps to itself
        blocks = np.sort(table[self.blocks], axis=1)
        # padding sorts to the front; rotate it back to the right
        blocks = np.where(blocks == PAD, PAD, blocks)
        width = blocks.shape[1]
        pads = (blocks == PAD).sum(axis=1)
        if pads.any():
            rows = np.nonzero(pads)[0]
            for i in rows:
                k = pads[i]
                blocks[i] = np.concatenate([blocks[i][k:], blocks[i][:k]])
        groups = tuple(tuple(int(images[p]) for p in g) for g in self.groups)
        holes = tuple(tuple(int(images[p]) for p in h) for h in self.holes)
        return Design(self.n, blocks, self.kind, groups, holes)


def canonical_type(sizes):
    """Exponential text form of a group-size multiset, largest size first."""
    c = Counter(int(s) for s in sizes)
    if any(s <= 0 for s in c):
        raise ValueError("group sizes must be positive")
    return " ".join("%d^%d" % (g, c[g]) for g in sorted(c, reverse=True))


def parse_type(text):
    """Inverse of canonical_type; returns ((size, count), ...) sorted."""
    pairs = []
    for term in text.split():
        m = re.fullmatch(r"(\d+)(?:\^(\d+))?", term)
        if not m:
            raise ValueError("bad type term %r" % term)
        size = int(m.group(1))
        count = int(m.group(2) or 1)
        if size <= 0 or count <= 0:
            raise ValueError("bad type term %r" % term)
        pairs.append((size, count))
    merged = Counter()
    for size, count in pairs:
        merged[size] += count
    return tuple(sorted(merged.items(), reverse=True))


def type_sizes(text):
    out = []
    for size, count in parse_type(text):
        out.extend([size] * count)
    return out


@dataclass(frozen=True)
class Permutation:
    """A bijection on 0..n-1 stored by its image table."""

    images: tuple

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError("not a permutation")

    @staticmethod
    def identity(n):
        return Permutation(tuple(range(n)))

    @staticmethod
    def from_cycles(n, text):
        """Parse disjoint cycle notation like "(0,3,6)(1,4,7)".

        Fixed points may be omitted; a bare singleton such as "(1)" or an
        empty "()" therefore denotes the identity.
        """
        text = text.replace(" ", "")
        if not re.fullmatch(r"(\([0-9,]*\))*", text):
            raise ValueError("bad cycle notation %r" % text)
        images = list(range(n))
        seen = set()
        for body in re.findall(r"\(([0-9,]*)\)", text):
            if not body:
                continue
            pts = [int(t) for t in body.split(",")]
            if any(p >= n for p in pts):
                raise ValueError("cycle point out of range")
            if seen & set(pts) or len(set(pts)) != len(pts):
                raise ValueError("cycles are not disjoint")
            seen |= set(pts)
            for a, b in zip(pts, pts[1:] + pts[:1]):
                images[a] = b
        return Permutation(tuple(images))

    @property
    def n(self):
        return len(self.images)

    def __call__(self, x):
        return self.images[x]

    def apply_block(self, block):
        return tuple(sorted(self.images[p] for p in block))

    def cycles(self):
        """Nontrivial cycles, each rotated to start at its least point."""
        out = []
        seen = [False] * self.n
        for start in range(self.n):
            if seen[start] or self.images[start] == start:
                continue
            cyc = [start]
            seen[start] = True
            x = self.images[start]
            while x != start:
                seen[x] = True
                cyc.append(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return tuple(out)

    def order(self):
        return math.lcm(*(len(c) for c in self.cycles())) if self.cycles() else 1

    def to_text(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cyc)


# Named irregular leave families.  Each value is (point count, edge count)
# with None meaning "all remaining points".
NAMED_LEAVES = {
    "empty": (0, 0),
    "matching": (None, None),
    "star-matching": (None, None),
    "k33": (6, 9),
    "prism": (6, 9),
    "k6-k4": (6, 9),
}


@dataclass(frozen=True)
class LeaveSpec:
    """A requested leave: cycle-length multiset plus optional named part.

    hamiltonian=True defers a single cycle of length n to bind time.
    """

    cycles: tuple = ()
    named: str = None
    hamiltonian: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "cycles", tuple(sorted(int(c) for c in self.cycles))
        )
        if any(c < 3 for c in self.cycles):
            raise ValueError("cycle length < 3")
        if self.named is not None and self.named not in NAMED_LEAVES:
            raise ValueError("unknown leave name %r" % self.named)

    def is_empty(self):
        return not self.cycles and not self.hamiltonian and (
            self.named in (None, "empty")
        )

    def min_points(self):
        fixed, _ = NAMED_LEAVES.get(self.named, (0, 0))
        return sum(self.cycles) + (fixed if fixed is not None else 5)

    def bind(self, n):
        """Lay the spec onto 0..n-1 per the natural labeling (see blockdev)."""
        cycles = list(self.cycles)
        if self.hamiltonian:
            if cycles or self.named not in (None, "empty"):
                raise ValueError("hamiltonian spec cannot carry other parts")
            cycles = [n]
        if sum(cycles) > n:
            raise ValueError("cycle lengths overflow n=%d" % n)
        placed = []
        at = 0
        for length in cycles:
            placed.append(tuple(range(at, at + length)))
            at += length
        extra = []
        name = self.named
        if name in ("k33", "prism", "k6-k4"):
            if at + 6 > n:
                raise ValueError("named leave overflows n=%d" % n)
            a = at
            if name == "k33":
                extra = [(a + i, a + 3 + j) for i in range(3) for j in range(3)]
            elif name == "prism":
                extra = [
                    (a, a + 1), (a, a + 2), (a + 1, a + 2),
                    (a + 3, a + 4), (a + 3, a + 5), (a + 4, a + 5),
                    (a, a + 3), (a + 1, a + 4), (a + 2, a + 5),
                ]
            else:  # complete graph on six points minus one on four
                extra = [(a, a + 1)]
                extra += [(a, a + j) for j in range(2, 6)]
                extra += [(a + 1, a + j) for j in range(2, 6)]
            at += 6
        elif name == "star-matching":
            if at + 5 > n or (n - at - 5) % 2:
                raise ValueError("star-matching needs an odd remainder >= 5")
            extra = [(at, at + j) for j in range(1, 5)]
            at += 5
            extra += [(p, p + 1) for p in range(at, n, 2)]
            at = n
        elif name == "matching":
            if (n - at) % 2:
                raise ValueError("matching needs an even remainder")
            extra = [(p, p + 1) for p in range(at, n, 2)]
            at = n
        return LabeledLeave.from_parts(n, placed, extra)

    def to_text(self):
        if self.is_empty():
            return "empty"
        terms = []
        if self.hamiltonian:
            terms.append("hamiltonian")
        c = Counter(self.cycles)
        for length in sorted(c):
            terms.append(
                "%d" % length if c[length] == 1 else "%d^%d" % (length, c[length])
            )
        if self.named and self.named != "empty":
            terms.append(self.named)
        return ",".join(terms)


def parse_leave_spec(text):
    """Parse comma-separated terms: `len`, `len^count`, or a reserved name."""
    text = text.strip()
    if text in ("", "empty"):
        return LeaveSpec()
    cycles = []
    named = None
    hamiltonian = False
    for term in text.split(","):
        term = term.strip()
        if term == "hamiltonian":
            hamiltonian = True
            continue
        if term in NAMED_LEAVES:
            if named is not None:
                raise ValueError("two named parts in %r" % text)
            named = term
            continue
        m = re.fullmatch(r"(\d+)(?:\^(\d+))?", term)
        if not m:
            raise ValueError("bad leave term %r" % term)
        length, count = int(m.group(1)), int(m.group(2) or 1)
        if length < 3:
            raise ValueError("cycle length %d < 3" % length)
        if count <= 0:
            raise ValueError("bad count in %r" % term)
        cycles.extend([length] * count)
    return LeaveSpec(tuple(cycles), named, hamiltonian)


@dataclass(frozen=True)
class LabeledLeave:
    """A realized leave: explicit point-labeled cycles plus loose edges."""

    n: int
    cycles: tuple = ()
    extra_edges: tuple = ()

    @staticmethod
    def from_parts(n, cycles, extra_edges):
        cyc = tuple(tuple(int(p) for p in c) for c in cycles)
        edges = tuple(
            (min(int(a), int(b)), max(int(a), int(b))) for a, b in extra_edges
        )
        leave = LabeledLeave(n, cyc, edges)
        leave.validate()
        return leave

    def validate(self):
        seen = set()
        for c in self.cycles:
            if len(c) < 3 or len(set(c)) != len(c):
                raise ValueError("bad cycle %r" % (c,))
            if seen & set(c):
                raise ValueError("cycles share points")
            seen |= set(c)
        all_edges = list(self.edges())
        if len(set(all_edges)) != len(all_edges):
            raise ValueError("duplicate leave edge")
        for a, b in all_edges:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise ValueError("bad edge (%d,%d)" % (a, b))

    def edges(self):
        for c in self.cycles:
            for i in range(len(c)):
                a, b = c[i], c[(i + 1) % len(c)]
                yield (a, b) if a < b else (b, a)
        yield from self.extra_edges

    def edge_count(self):
        return sum(len(c) for c in self.cycles) + len(self.extra_edges)

    def cycle_type(self):
        return tuple(sorted(len(c) for c in self.cycles))

    def is_cycles_only(self):
        return not self.extra_edges

    def relabeled(self, perm):
        img = perm.images if isinstance(perm, Permutation) else perm
        return LabeledLeave.from_parts(
            self.n,
            [tuple(img[p] for p in c) for c in self.cycles],
            [(img[a], img[b]) for a, b in self.extra_edges],
        )

    def shifted(self, offset, n):
        """Embed into a larger point set by adding a constant offset."""
        return LabeledLeave.from_parts(
            n,
            [tuple(p + offset for p in c) for c in self.cycles],
            [(a + offset, b + offset) for a, b in self.extra_edges],
        )


@dataclass(frozen=True)
class BaseBlockScript:
    """Base blocks plus a developing permutation, as in the catalog files."""

    n: int
    alpha: Permutation
    blocks: tuple
    starred: tuple
    leave: LeaveSpec
    ident: str = ""

    def __post_init__(self):
        if self.alpha.n != self.n:
            raise ValueError("alpha acts on the wrong point count")
        if len(self.blocks) != len(self.starred):
            raise ValueError("starred flags out of step with blocks")
        object.__setattr__(
            self,
            "blocks",
            tuple(tuple(sorted(int(p) for p in b)) for b in self.blocks),
        )


# Congruence classification of the minimum leave, keyed by n mod 12.
FAMILY_BY_RESIDUE = {
    1: "empty", 4: "empty",
    7: "nine-edge", 10: "nine-edge",
    2: "matching", 8: "matching",
    5: "star-matching", 11: "star-matching",
    0: "two-regular", 3: "two-regular",
    6: "two-regular-plus", 9: "two-regular-plus",
}


def classify_congruence(n):
    """Name the minimum-leave family for MP(n,4); depends on n mod 12 only."""
    if n < 4:
        raise ValueError("n must be at least 4")
    return FAMILY_BY_RESIDUE[n % 12]


def min_leave_edges(n):
    """Edge count of the minimum admissible leave for each residue class."""
    family = classify_congruence(n)
    if family == "empty":
        return 0
    if family == "nine-edge":
        return 9
    if family == "matching":
        return n // 2
    if family == "star-matching":
        return 4 + (n - 5) // 2
    if family == "two-regular":
        return n
    return n + 3


@dataclass(frozen=True)
class PlanStep:
    """One node of a construction plan tree; params hold the arithmetic."""

    op: str
    params: dict = field(default_factory=dict)
    children: tuple = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def to_obj(self):
        return {
            "op": self.op,
            "params": self.params,
            "children": [c.to_obj() for c in self.children],
        }


@dataclass
class BuildResult:
    """Outcome of the dispatcher: a design, a plan, or a refusal."""

    status: str  # "materialized" | "plan-only" | "unsupported"
    design: Design = None
    plan: PlanStep = None
    reason: str = ""
