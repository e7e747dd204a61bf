"""Exhaustive verification of packings and group-divisible designs.

Every pair of points is tracked in a flat bitset.  The index of the sorted
pair (i, j) is  n*i + j - i*(i+1)/2;  the n slots with j == i are unused and
get masked out up front.  At fifty thousand points the table is well under
two hundred megabytes, so full verification stays cheap even for the largest
designs this package will materialize.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .model import (
    PAD,
    Design,
    Kind,
    LabeledLeave,
    LeaveSpec,
    block_sizes,
    min_leave_edges,
)

MAX_REPORTED = 100


@dataclass
class VerificationReport:
    ok: bool
    n: int
    b: int
    violations: list = field(default_factory=list)
    leave: LabeledLeave = None
    notes: list = field(default_factory=list)

    def add(self, text):
        if len(self.violations) < MAX_REPORTED:
            self.violations.append(text)
        elif len(self.violations) == MAX_REPORTED:
            self.violations.append("further violations suppressed")
        self.ok = False

    def summary(self):
        state = "ok" if self.ok else "FAILED"
        head = "%s: n=%d blocks=%d" % (state, self.n, self.b)
        return "\n".join([head] + self.violations + self.notes)


def johnson_bound(n):
    """Classical counting bound on the number of blocks."""
    return (n // 4) * ((n - 1) // 3) if n % 4 == 0 else n * ((n - 1) // 3) // 4


def max_blocks(n):
    """Block count of a maximum packing, from the minimum-leave edge count."""
    total = n * (n - 1) // 2
    rest = total - min_leave_edges(n)
    if rest % 6:
        raise AssertionError("leave table broken at n=%d" % n)
    return rest // 6


def leave_congruences(n):
    """Residues every leave must honor: (edge count mod 6, degree mod 3)."""
    return (n * (n - 1) // 2) % 6, (n - 1) % 3


def check_leave_congruences(leave):
    """Return a list of congruence violations for a realized leave."""
    edge_mod, deg_mod = leave_congruences(leave.n)
    out = []
    if leave.edge_count() % 6 != edge_mod:
        out.append(
            "leave has %d edges, needs %d mod 6" % (leave.edge_count(), edge_mod)
        )
    deg = np.zeros(leave.n, dtype=np.int64)
    for a, b in leave.edges():
        deg[a] += 1
        deg[b] += 1
    bad = np.nonzero(deg % 3 != deg_mod)[0]
    for v in bad[:10]:
        out.append("point %d has leave degree %d, needs %d mod 3"
                   % (v, deg[v], deg_mod))
    if len(bad) > 10:
        out.append("%d points with bad leave degree in total" % len(bad))
    return out


def _pairs_of(blocks, n):
    """All sorted-pair indices covered by the rows of a block matrix."""
    sizes = block_sizes(blocks)
    chunks = []
    for size in np.unique(sizes):
        rows = blocks[sizes == size][:, :size].astype(np.int64)
        for a, b in combinations(range(int(size)), 2):
            i, j = rows[:, a], rows[:, b]
            chunks.append(i * n + j - i * (i + 1) // 2)
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def _index_to_pair(idx, n):
    """Vectorized inverse of the pair index formula."""
    i_arr = np.arange(n, dtype=np.int64)
    row_min = n * i_arr + i_arr + 1 - i_arr * (i_arr + 1) // 2
    i = np.searchsorted(row_min, idx, side="right") - 1
    j = idx - n * i + i * (i + 1) // 2
    return i, j


def _covered_once(idx, n, report, label="pair"):
    """Sort indices, report duplicates, return the unique covered set."""
    idx = np.sort(idx)
    dup_mask = np.zeros(len(idx), dtype=bool)
    if len(idx):
        dup_mask[1:] = idx[1:] == idx[:-1]
    if dup_mask.any():
        dups = np.unique(idx[dup_mask])
        i, j = _index_to_pair(dups, n)
        counts = np.searchsorted(idx, dups, side="right") - np.searchsorted(
            idx, dups, side="left"
        )
        for k in range(len(dups)):
            report.add(
                "%s (%d,%d) covered %d times" % (label, i[k], j[k], counts[k])
            )
            if k >= MAX_REPORTED:
                break
        idx = np.unique(idx)
    return idx


def _uncovered(idx_unique, n):
    """Complement of the covered set inside the valid pair-index space."""
    slots = n * (n - 1) // 2 + n  # includes the n unused j == i slots
    words = np.zeros((slots + 63) // 64, dtype=np.uint64)
    for chunk in np.array_split(idx_unique, max(1, len(idx_unique) // 4000000 + 1)):
        np.bitwise_or.at(
            words, chunk >> 6, np.uint64(1) << (chunk & 63).astype(np.uint64)
        )
    diag = np.arange(n, dtype=np.int64)
    diag_idx = n * diag + diag - diag * (diag + 1) // 2
    np.bitwise_or.at(
        words, diag_idx >> 6, np.uint64(1) << (diag_idx & 63).astype(np.uint64)
    )
    tail = slots & 63
    if tail:
        words[-1] |= ~np.uint64(0) << np.uint64(tail)
    holes = np.flatnonzero(words != ~np.uint64(0))
    out = []
    for w in holes:
        bits = ~words[w]
        base = int(w) << 6
        while bits:
            low = bits & (~bits + np.uint64(1))
            out.append(base + int(low).bit_length() - 1)
            bits ^= low
    return np.array(sorted(out), dtype=np.int64)


def extract_leave(design):
    """Decompose the uncovered pairs into cycles plus leftover edges."""
    idx = _pairs_of(design.blocks, design.n)
    idx = np.unique(idx)
    missing = _uncovered(idx, design.n)
    i, j = _index_to_pair(missing, design.n)
    return edges_to_leave(design.n, list(zip(i.tolist(), j.tolist())))


def edges_to_leave(n, edges):
    """Split an edge list into cycle components and irregular leftovers."""
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    cycles, extra = [], []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        if all(len(adj[v]) == 2 for v in comp) and len(comp) >= 3:
            cyc = [min(comp)]
            prev, cur = None, cyc[0]
            while True:
                nxt = [w for w in adj[cur] if w != prev]
                step = nxt[0]
                if len(nxt) == 2:  # first move: pick the smaller neighbor
                    step = min(nxt)
                if step == cyc[0]:
                    break
                cyc.append(step)
                prev, cur = cur, step
            cycles.append(tuple(cyc))
        else:
            comp_set = set(comp)
            for v in comp:
                for w in adj[v]:
                    if v < w and w in comp_set:
                        extra.append((v, w))
    return LabeledLeave.from_parts(n, cycles, sorted(set(extra)))


def verify_packing(design, expect_leave=None, maximum=False):
    """Check 4-uniformity and at-most-once pair coverage; classify the leave.

    expect_leave may be a LeaveSpec (structural comparison) or a
    LabeledLeave (exact uncovered edge set).
    """
    report = VerificationReport(True, design.n, design.b)
    sizes = block_sizes(design.blocks)
    bad = np.nonzero(sizes != 4)[0]
    for row in bad[:MAX_REPORTED]:
        report.add("block %d has size %d" % (row, sizes[row]))
    if len(bad):
        return report
    idx = _pairs_of(design.blocks, design.n)
    idx = _covered_once(idx, design.n, report)
    if not report.ok:
        return report
    missing = _uncovered(idx, design.n)
    i, j = _index_to_pair(missing, design.n)
    leave = edges_to_leave(design.n, list(zip(i.tolist(), j.tolist())))
    report.leave = leave
    if maximum and design.b != max_blocks(design.n):
        report.add(
            "%d blocks but a maximum packing has %d"
            % (design.b, max_blocks(design.n))
        )
    if expect_leave is not None:
        for msg in _match_leave(leave, expect_leave):
            report.add(msg)
    return report


def _match_leave(leave, expect):
    if isinstance(expect, LabeledLeave):
        got = set(leave.edges())
        want = set(expect.edges())
        out = []
        for e in sorted(want - got)[:10]:
            out.append("expected leave edge %s is covered" % (e,))
        for e in sorted(got - want)[:10]:
            out.append("unexpected leave edge %s" % (e,))
        return out
    return match_leave_spec(leave, expect)


def match_leave_spec(leave, spec):
    """Structural comparison of a realized leave against a LeaveSpec."""
    out = []
    want_cycles = list(spec.cycles)
    if spec.hamiltonian:
        want_cycles.append(leave.n)
    if sorted(want_cycles) != list(leave.cycle_type()):
        out.append(
            "cycle type %s, expected %s"
            % (list(leave.cycle_type()), sorted(want_cycles))
        )
    extra = leave.extra_edges
    name = spec.named or "empty"
    if name == "empty":
        if extra:
            out.append("%d stray leave edges, expected none" % len(extra))
    elif name == "matching":
        deg = {}
        for a, b in extra:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        if deg and max(deg.values()) > 1:
            out.append("irregular part is not a matching")
    elif name == "star-matching":
        deg = {}
        for a, b in extra:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        degs = sorted(deg.values(), reverse=True)
        if degs[:1] != [4] or any(d != 1 for d in degs[1:]):
            out.append("irregular part is not one 4-star plus a matching")
    elif name in ("k33", "prism", "k6-k4"):
        if len(extra) != 9:
            out.append("irregular part has %d edges, expected 9" % len(extra))
        elif not leave_isomorphic(extra, _named_reference(name)):
            out.append("irregular part is not a %s graph" % name)
    return out


def _named_reference(name):
    if name == "k33":
        return [(i, 3 + j) for i in range(3) for j in range(3)]
    if name == "prism":
        return [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5),
                (0, 3), (1, 4), (2, 5)]
    edges = [(0, 1)]
    edges += [(0, j) for j in range(2, 6)]
    edges += [(1, j) for j in range(2, 6)]
    return edges


def leave_isomorphic(edges_a, edges_b):
    """Graph isomorphism by backtracking; intended for tiny leave parts."""
    va = sorted({p for e in edges_a for p in e})
    vb = sorted({p for e in edges_b for p in e})
    if len(va) > 12 or len(vb) > 12:
        raise ValueError("isomorphism test capped at 12 vertices")
    if len(va) != len(vb) or len(edges_a) != len(edges_b):
        return False
    ea = {frozenset(e) for e in edges_a}
    eb = {frozenset(e) for e in edges_b}
    deg_a = {v: sum(v in e for e in ea) for v in va}
    deg_b = {v: sum(v in e for e in eb) for v in vb}
    if sorted(deg_a.values()) != sorted(deg_b.values()):
        return False

    assign = {}

    def place(k):
        if k == len(va):
            return True
        v = va[k]
        for w in vb:
            if w in assign.values() or deg_a[v] != deg_b[w]:
                continue
            good = True
            for u in va[:k]:
                if (frozenset((u, v)) in ea) != (frozenset((assign[u], w)) in eb):
                    good = False
                    break
            if good:
                assign[v] = w
                if place(k + 1):
                    return True
                del assign[v]
        return False

    return place(0)


def _point_labels(parts, n):
    lab = np.full(n, -1, dtype=np.int64)
    for k, part in enumerate(parts):
        lab[list(part)] = k
    return lab


def verify_gdd(design):
    """Check a GDD, TD, or DGDD: forbidden pairs absent, others covered once."""
    report = VerificationReport(True, design.n, design.b)
    if design.kind not in (Kind.GDD, Kind.TD, Kind.DGDD):
        report.add("not a group-divisible kind: %s" % design.kind)
        return report
    n = design.n
    glab = _point_labels(design.groups, n)
    sizes = block_sizes(design.blocks)
    if design.kind is Kind.TD:
        k = len(design.groups)
        bad = np.nonzero(sizes != k)[0]
        for row in bad[:MAX_REPORTED]:
            report.add("block %d has size %d, want %d" % (row, sizes[row], k))
        if len(bad):
            return report

    # forbidden pairs inside blocks
    idx = _pairs_of(design.blocks, n)
    i, j = _index_to_pair(idx, n)
    same_group = glab[i] == glab[j]
    hlab = None
    same_hole = np.zeros(len(idx), dtype=bool)
    if design.kind is Kind.DGDD:
        hlab = _point_labels(design.holes, n)
        same_hole = hlab[i] == hlab[j]
    bad = np.nonzero(same_group | same_hole)[0]
    for k_ in bad[:20]:
        where = "group" if same_group[k_] else "hole"
        report.add("pair (%d,%d) lies inside a %s" % (i[k_], j[k_], where))
    if len(bad) > 20:
        report.add("%d forbidden pairs inside blocks in total" % len(bad))
    if not report.ok:
        return report

    idx = _covered_once(idx, n, report)
    if not report.ok:
        return report

    # completeness by counting
    total = n * (n - 1) // 2
    within_g = sum(len(g) * (len(g) - 1) // 2 for g in design.groups)
    required = total - within_g
    if design.kind is Kind.DGDD:
        within_h = sum(len(h) * (len(h) - 1) // 2 for h in design.holes)
        bundle = {}
        for p in range(n):
            key = (glab[p], hlab[p])
            bundle[key] = bundle.get(key, 0) + 1
        within_both = sum(c * (c - 1) // 2 for c in bundle.values())
        required = total - within_g - within_h + within_both
    if len(idx) != required:
        report.add(
            "%d distinct pairs covered, expected %d" % (len(idx), required)
        )
    return report


def verify_design(design, expect_leave=None, maximum=False):
    if design.kind is Kind.PACKING:
        return verify_packing(design, expect_leave, maximum)
    return verify_gdd(design)
