"""Randomized search for packings, plain or under a prescribed automorphism.

Raw hill climbing over 4-subsets works only for very small instances; the
workhorse is the quotient search: fix a permutation sigma commuting with the
target structure (leave graph, group partition), collapse pairs into
sigma-orbits, and climb over orbit slots instead of pairs.  A solution in the
quotient is a set of base blocks; developing them under sigma and verifying
gives the full design.  Orbit arithmetic is checked per candidate block (a
block orbit of length L covers a pair orbit of size s exactly once iff it
contains s/L pairs of that orbit), so short orbits are admitted soundly.

Randomness comes from a xoshiro256** generator seeded explicitly; every
search is reproducible from (target, sigma, seed).
"""

from __future__ import annotations

from .model import Design, Kind, Permutation, as_block_array

M64 = (1 << 64) - 1

DEFAULT_BUDGET = 60_000

FREE = -1


class Xoshiro256:
    """xoshiro256** with splitmix64 seeding."""

    def __init__(self, seed):
        s = seed & M64
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & M64
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
            state.append(z ^ (z >> 31))
        self.s = state

    def next64(self):
        s0, s1, s2, s3 = self.s
        x = (s1 * 5) & M64
        result = (((x << 7) | (x >> 57)) & M64) * 9 & M64
        t = (s1 << 17) & M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & M64
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, bound):
        return self.next64() % bound


class PairSpace:
    """Cover slots for unordered point pairs, quotiented by an automorphism
    group.

    With sigma=None each non-excluded pair is its own slot.  Otherwise sigma
    is a Permutation or a list of commuting-or-not generators; slots are the
    orbits of pairs under the generated group, and excluded pairs (leave
    edges, within-group pairs) must form a union of orbits.
    """

    def __init__(self, n, sigma=None, excluded=()):
        self.n = n
        if sigma is None:
            gens = ()
        elif isinstance(sigma, Permutation):
            gens = (tuple(sigma.images),)
        else:
            gens = tuple(tuple(g.images) for g in sigma)
        gens = tuple(g for g in gens if any(g[i] != i for i in range(n)))
        self.gens = gens
        self.sigma = sigma if gens else None
        tri = [n * a - a * (a + 1) // 2 for a in range(n)]
        self.tri = tri
        npairs = tri[-1] + n
        slot_of = [-2] * npairs  # -2 unassigned, -1 excluded
        for a, b in excluded:
            if a > b:
                a, b = b, a
            slot_of[tri[a] + b] = -1
        reps = []
        sizes = []
        if not gens:
            for a in range(n):
                base = tri[a]
                for b in range(a + 1, n):
                    if slot_of[base + b] == -2:
                        slot_of[base + b] = len(reps)
                        reps.append((a, b))
                        sizes.append(1)
        else:
            for a in range(n):
                base = tri[a]
                for b in range(a + 1, n):
                    if slot_of[base + b] != -2:
                        continue
                    sid = len(reps)
                    slot_of[base + b] = sid
                    queue = [(a, b)]
                    size = 1
                    while queue:
                        x, y = queue.pop()
                        for im in gens:
                            u, v = im[x], im[y]
                            if u > v:
                                u, v = v, u
                            idx = tri[u] + v
                            prev = slot_of[idx]
                            if prev == sid:
                                continue
                            if prev != -2:
                                raise ValueError(
                                    "automorphism does not preserve the "
                                    "excluded pairs")
                            slot_of[idx] = sid
                            size += 1
                            queue.append((u, v))
                    reps.append((a, b))
                    sizes.append(size)
        self.slot_of = slot_of
        self.reps = reps
        self.sizes = sizes
        self.nslots = len(reps)

    def slot(self, a, b):
        if a > b:
            a, b = b, a
        return self.slot_of[self.tri[a] + b]

    def block_orbit(self, block):
        """All distinct images of the block under the group."""
        start = tuple(sorted(block))
        seen = {start}
        queue = [start]
        while queue:
            cur = queue.pop()
            for im in self.gens:
                nxt = tuple(sorted(im[x] for x in cur))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def block_slots(self, block):
        """Slots covered exactly once by the block's orbit, or None if the
        orbit would cover some pair twice or touch an excluded pair."""
        tri = self.tri
        cnt = {}
        for i in range(4):
            x = block[i]
            for j in range(i + 1, 4):
                y = block[j]
                s = self.slot_of[tri[x] + y if x < y else tri[y] + x]
                if s < 0:
                    return None
                cnt[s] = cnt.get(s, 0) + 1
        if not self.gens:
            return list(cnt)
        length = len(self.block_orbit(block))
        sizes = self.sizes
        for s, c in cnt.items():
            if length * c != sizes[s]:
                return None
        return list(cnt)

    def develop(self, base_blocks):
        """Expand base blocks under the group into the full block list."""
        if not self.gens:
            return [tuple(sorted(b)) for b in base_blocks]
        out = []
        for block in base_blocks:
            out.extend(self.block_orbit(block))
        return out


def _climb(space, seed, max_iters):
    """Hill climb over cover slots; returns base blocks or None.

    Moves cover one uncovered slot with a new block, preferring fully fresh
    completions and otherwise ejecting the single conflicting block.
    """
    n = space.n
    rng = Xoshiro256(seed)
    below = rng.below
    slot_of = space.slot_of
    tri = space.tri
    reps = space.reps
    nslots = space.nslots
    cover = [FREE] * nslots
    uncovered = list(range(nslots))
    blocks = {}
    slots_of_block = {}
    next_id = 0
    free_ids = []
    covered = 0
    it = 0
    while covered < nslots and it < max_iters:
        it += 1
        while True:
            k = below(len(uncovered))
            s = uncovered[k]
            if cover[s] == FREE:
                break
            last = uncovered.pop()
            if k < len(uncovered):
                uncovered[k] = last
        a, b = reps[s]
        ta, tb = tri[a], tri[b]
        cpool = []
        for c in range(n):
            if c == a or c == b:
                continue
            sac = slot_of[ta + c] if a < c else slot_of[tri[c] + a]
            if sac < 0:
                continue
            sbc = slot_of[tb + c] if b < c else slot_of[tri[c] + b]
            if sbc < 0:
                continue
            oac = cover[sac]
            obc = cover[sbc]
            if oac == FREE:
                cpool.append((c, obc))
            elif obc == FREE:
                cpool.append((c, oac))
        if not cpool:
            continue
        c, c_owner = cpool[below(len(cpool))]
        tc = tri[c]
        dpool = []
        for d in range(n):
            if d == a or d == b or d == c:
                continue
            sad = slot_of[ta + d] if a < d else slot_of[tri[d] + a]
            if sad < 0:
                continue
            sbd = slot_of[tb + d] if b < d else slot_of[tri[d] + b]
            if sbd < 0:
                continue
            scd = slot_of[tc + d] if c < d else slot_of[tri[d] + c]
            if scd < 0:
                continue
            owner = c_owner
            ok = True
            for st in (cover[sad], cover[sbd], cover[scd]):
                if st >= 0:
                    if owner < 0 or owner == st:
                        owner = st
                    else:
                        ok = False
                        break
            if ok:
                dpool.append((d, owner))
        while dpool:
            k = below(len(dpool))
            d, owner = dpool[k]
            pts = (a, b, c, d)
            new_slots = space.block_slots(pts)
            if new_slots is not None and all(
                    cover[t] == FREE or cover[t] == owner for t in new_slots):
                break
            last = dpool.pop()
            if k < len(dpool):
                dpool[k] = last
        else:
            continue
        if owner >= 0:
            del blocks[owner]
            for t in slots_of_block.pop(owner):
                cover[t] = FREE
                uncovered.append(t)
                covered -= 1
            free_ids.append(owner)
        bid = free_ids.pop() if free_ids else next_id
        if bid == next_id:
            next_id += 1
        blocks[bid] = pts
        slots_of_block[bid] = new_slots
        for t in new_slots:
            cover[t] = bid
            covered += 1
    if covered < nslots:
        return None
    return list(blocks.values())


def candidate_base_blocks(space):
    """All 4-subsets whose orbit covers its slots exactly once, one
    representative per block orbit.

    Fast path: six distinct slots all of full orbit size force a free block
    (a nontrivial stabilizer would either repeat a slot or shrink one), so
    the orbit BFS is skipped.
    """
    n = space.n
    tri = space.tri
    slot_of = space.slot_of
    sizes = space.sizes
    full = max(sizes, default=1)
    out = []
    seen = set()
    for a in range(n - 3):
        ta = tri[a]
        for b in range(a + 1, n - 2):
            s1 = slot_of[ta + b]
            if s1 < 0:
                continue
            tb = tri[b]
            for c in range(b + 1, n - 1):
                s2 = slot_of[ta + c]
                if s2 < 0:
                    continue
                s3 = slot_of[tb + c]
                if s3 < 0:
                    continue
                tc = tri[c]
                for d in range(c + 1, n):
                    s4 = slot_of[ta + d]
                    if s4 < 0:
                        continue
                    s5 = slot_of[tb + d]
                    if s5 < 0:
                        continue
                    s6 = slot_of[tc + d]
                    if s6 < 0:
                        continue
                    block = (a, b, c, d)
                    if block in seen:
                        continue
                    if (s1 != s2 and s1 != s3 and s1 != s4 and s1 != s5
                            and s1 != s6 and s2 != s3 and s2 != s4
                            and s2 != s5 and s2 != s6 and s3 != s4
                            and s3 != s5 and s3 != s6 and s4 != s5
                            and s4 != s6 and s5 != s6
                            and sizes[s1] == full and sizes[s2] == full
                            and sizes[s3] == full and sizes[s4] == full
                            and sizes[s5] == full and sizes[s6] == full):
                        slots = (s1, s2, s3, s4, s5, s6)
                    else:
                        got = space.block_slots(block)
                        if got is None:
                            continue
                        slots = tuple(got)
                    if space.gens:
                        seen.update(space.block_orbit(block))
                    out.append((block, slots))
    return out


def _exact_cover(space, seed, node_budget=300_000, candidates=None,
                 slots=None):
    """Randomized Algorithm X over slot exact cover; complete up to budget.

    ``slots`` restricts the universe (candidates must stay inside it).
    Returns base blocks, or None (budget exhausted or no solution).
    """
    if candidates is None:
        candidates = candidate_base_blocks(space)
    rng = Xoshiro256(seed)
    if slots is None:
        slots = range(space.nslots)
    cols = {s: set() for s in slots}
    for rid, (_, row) in enumerate(candidates):
        for s in row:
            cols[s].add(rid)
    if any(not v for v in cols.values()):
        return None
    row_slots = [row for (_, row) in candidates]
    chosen = []
    budget = [node_budget]

    def cover(rid):
        removed = []
        for s in row_slots[rid]:
            rows = cols.pop(s)
            removed.append((s, rows))
            for r in rows:
                if r == rid:
                    continue
                for s2 in row_slots[r]:
                    other = cols.get(s2)
                    if other is not None and r in other:
                        other.discard(r)
        return removed

    def uncover(removed):
        for s, rows in reversed(removed):
            cols[s] = rows
            for r in rows:
                for s2 in row_slots[r]:
                    if s2 in cols and s2 != s:
                        cols[s2].add(r)

    def rec():
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        if not cols:
            return True
        col = min(cols, key=lambda k: len(cols[k]))
        cands = list(cols[col])
        if not cands:
            return False
        # randomized branching order
        for i in range(len(cands) - 1, 0, -1):
            j = rng.below(i + 1)
            cands[i], cands[j] = cands[j], cands[i]
        for rid in cands:
            removed = cover(rid)
            chosen.append(rid)
            if rec():
                return True
            chosen.pop()
            uncover(removed)
            if budget[0] <= 0:
                return False
        return False

    if rec():
        return [candidates[rid][0] for rid in chosen]
    return None


def _lns(space, seed, rounds=200_000, candidates=None):
    """Non-monotone block walk over explicit candidates.

    Greedy fill, then: anchor an uncovered slot, sample candidate blocks
    through it, place the one evicting fewest owners.  Single-owner swaps
    walk the plateau at constant coverage; when stalled, one two-owner
    eviction (a -6 dip) breaks out of the basin.  Returns base blocks or
    None when the round budget runs out.
    """
    if candidates is None:
        candidates = candidate_base_blocks(space)
    if not candidates:
        return None
    rng = Xoshiro256(seed)
    nrows = len(candidates)
    slot_rows = [[] for _ in range(space.nslots)]
    for rid, (_, row) in enumerate(candidates):
        for s in row:
            slot_rows[s].append(rid)
    if any(not rs for rs in slot_rows):
        return None

    owner = [-1] * space.nslots
    placed = set()

    def place(rid):
        for s in candidates[rid][1]:
            owner[s] = rid
        placed.add(rid)

    def remove(rid):
        for s in candidates[rid][1]:
            owner[s] = -1
        placed.discard(rid)

    order = list(range(nrows))
    for i in range(nrows - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    for rid in order:
        if all(owner[s] < 0 for s in candidates[rid][1]):
            place(rid)

    uncovered = [s for s in range(space.nslots) if owner[s] < 0]
    stall = 0
    for _ in range(rounds):
        while uncovered and owner[uncovered[-1]] >= 0:
            uncovered.pop()
        if not uncovered:
            return [candidates[rid][0] for rid in placed]
        # lazy stale sweep: swap a random entry to the back first
        i = rng.below(len(uncovered))
        uncovered[i], uncovered[-1] = uncovered[-1], uncovered[i]
        if owner[uncovered[-1]] >= 0:
            uncovered.pop()
            continue
        s0 = uncovered[-1]
        rows = slot_rows[s0]
        best = None
        best_owners = None
        for _ in range(12):
            rid = rows[rng.below(len(rows))]
            owners = {owner[t] for t in candidates[rid][1] if owner[t] >= 0}
            if best is None or len(owners) < len(best_owners):
                best, best_owners = rid, owners
                if not owners:
                    break
        cap = 2 if stall >= 250 else 1
        if len(best_owners) > cap:
            stall += 1
            continue
        if len(best_owners) == 2:
            stall = 0
        for rid in best_owners:
            remove(rid)
            for t in candidates[rid][1]:
                if owner[t] < 0:
                    uncovered.append(t)
        place(best)
    return None


def _run(space, seed, max_iters, attempts, candidates=None):
    """Solve the slot cover.

    Low-order quotients behave like tiny dense instances where the climber
    plateaus, so they go straight to exact cover.  Raw spaces of manageable
    size use ruin-and-recreate; high-compression quotients and big raw
    spaces climb, with exact cover as a small-quotient fallback.
    """
    small = space.gens and space.nslots <= 600
    dense = small and space.nslots <= 220 and max(space.sizes, default=1) < 6
    if dense:
        if candidates is None:
            candidates = candidate_base_blocks(space)
        for k in range(3):
            base = _exact_cover(space, seed + 0x9E37 * k, candidates=candidates)
            if base is not None:
                return base
    if not space.gens and space.n <= 54:
        if candidates is None:
            candidates = candidate_base_blocks(space)
        for k in range(attempts):
            base = _lns(space, seed + 0x9E37 * k, rounds=max_iters // 15,
                        candidates=candidates)
            if base is not None:
                return base
        return None
    for k in range(attempts):
        base = _climb(space, seed + 0x9E37 * k, max_iters)
        if base is not None:
            return base
    if small and not dense:
        if candidates is None:
            candidates = candidate_base_blocks(space)
        for k in range(3):
            base = _exact_cover(space, seed + 0x9E37 * k, candidates=candidates)
            if base is not None:
                return base
    return None


def hillclimb_packing(n, forbidden=(), seed=1, max_iters=DEFAULT_BUDGET,
                      sigma=None, attempts=8):
    """Pack all pairs outside ``forbidden`` into 4-sets, each exactly once.

    With sigma, searches for base blocks in the quotient and develops them.
    Returns a sorted list of 4-tuples, or None if the budget runs out.
    """
    space = PairSpace(n, sigma, forbidden)
    if space.nslots % 6 and sigma is None:
        raise ValueError("pair count %d is not divisible by 6" % space.nslots)
    base = _run(space, seed, max_iters, attempts)
    if base is None:
        return None
    return sorted(space.develop(base))


def forbidden_within(parts):
    out = []
    for part in parts:
        part = sorted(part)
        for i in range(len(part)):
            for j in range(i + 1, len(part)):
                out.append((part[i], part[j]))
    return out


def _contiguous_groups(sizes):
    groups = []
    at = 0
    for s in sizes:
        groups.append(tuple(range(at, at + s)))
        at += s
    return groups


def perm_from_cycle_list(n, cycles):
    """Permutation from explicit cycles given as point sequences."""
    images = list(range(n))
    seen = set()
    for cyc in cycles:
        if seen & set(cyc):
            raise ValueError("cycles are not disjoint")
        seen |= set(cyc)
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            images[a] = b
    return Permutation(tuple(images))


def group_rotation(groups):
    """Full rotation of each group in place: order lcm of the sizes."""
    n = max(p for g in groups for p in g) + 1
    return perm_from_cycle_list(n, [tuple(g) for g in groups])


def group_rotation3(groups):
    """Order-3 rotation: each group split into consecutive 3-cycles.

    None unless every group size is a multiple of 3.
    """
    if any(len(g) % 3 for g in groups):
        return None
    n = max(p for g in groups for p in g) + 1
    cycles = []
    for g in groups:
        cycles.extend(tuple(g[i:i + 3]) for i in range(0, len(g), 3))
    return perm_from_cycle_list(n, cycles)


def _rotate_third(cyc):
    """3-cycles rotating one leave cycle by a third of its length."""
    t = len(cyc) // 3
    return [(cyc[i], cyc[i + t], cyc[i + 2 * t]) for i in range(t)]


def leave_sigma_candidates(leave):
    """Symmetries of a labeled leave worth searching under, strongest first.

    Tried in order: the full rotation stepping every cycle at once (smallest
    quotient), an order-3 rotation by a third of each length, an order-3
    carousel of equal-length cycles, and the simultaneous mirror.  Later
    entries survive on leaves whose cycle lengths break the earlier rules.
    """
    if leave.extra_edges or sum(len(c) for c in leave.cycles) != leave.n:
        return []
    out = [perm_from_cycle_list(leave.n, [tuple(c) for c in leave.cycles])]
    if all(len(c) % 3 == 0 for c in leave.cycles):
        out.append(perm_from_cycle_list(
            leave.n, [t for c in leave.cycles for t in _rotate_third(c)]))
    # carry equal-length cycles around in threes, rotate the rest
    by_len = {}
    for i, c in enumerate(leave.cycles):
        by_len.setdefault(len(c), []).append(i)
    tripled = set()
    point_cycles = []
    for idxs in by_len.values():
        for j in range(0, len(idxs) - 2, 3):
            a, b, c = (leave.cycles[t] for t in idxs[j:j + 3])
            point_cycles.extend((a[i], b[i], c[i]) for i in range(len(a)))
            tripled.update(idxs[j:j + 3])
    if tripled:
        rest = [c for i, c in enumerate(leave.cycles) if i not in tripled]
        if all(len(c) % 3 == 0 for c in rest):
            for c in rest:
                point_cycles.extend(_rotate_third(c))
            out.append(perm_from_cycle_list(leave.n, point_cycles))
    # pin one triangle, rotate everything else; no free fixed pairs remain
    pinned = next((i for i, c in enumerate(leave.cycles) if len(c) == 3), None)
    if pinned is not None and len(leave.cycles) > 1:
        out.append(perm_from_cycle_list(
            leave.n,
            [tuple(c) for i, c in enumerate(leave.cycles) if i != pinned]))
    mirror = []
    for c in leave.cycles:
        mirror.extend((c[i], c[-i]) for i in range(1, (len(c) + 1) // 2))
    out.append(perm_from_cycle_list(leave.n, mirror))
    # same, but reflect even cycles about an edge midpoint instead
    mixed = []
    for c in leave.cycles:
        m = len(c)
        if m % 2:
            mixed.extend((c[i], c[-i]) for i in range(1, (m + 1) // 2))
        else:
            mixed.extend((c[i], c[(1 - i) % m]) for i in range(1, m // 2 + 1))
    out.append(perm_from_cycle_list(leave.n, mixed))
    seen = set()
    uniq = []
    for sg in out:
        if sg.images not in seen:
            seen.add(sg.images)
            uniq.append(sg)
    return uniq


def leave_rotation(leave):
    """First-choice order-3 symmetry of a labeled leave, or None."""
    cands = leave_sigma_candidates(leave)
    return cands[0] if cands else None


def hillclimb_gdd(sizes, seed=1, max_iters=DEFAULT_BUDGET, sigma="auto"):
    """Search a 4-GDD with the given group sizes on consecutive points."""
    groups = _contiguous_groups(sizes)
    n = sum(sizes)
    forb = forbidden_within(groups)
    trials = []
    if sigma == "auto":
        trials.append(group_rotation(groups))
        r3 = group_rotation3(groups)
        if r3 is not None and r3.images != trials[0].images:
            trials.append(r3)
        trials.append(None)
    else:
        trials.append(sigma)
    for sg in trials:
        try:
            rows = hillclimb_packing(n, forb, seed, max_iters, sigma=sg)
        except ValueError:
            continue
        if rows is not None:
            return Design(n, as_block_array(rows), Kind.GDD, tuple(groups))
    return None


def hillclimb_leave(n, leave, seed=1, max_iters=DEFAULT_BUDGET, sigma="auto"):
    """Search a packing of K_n whose leave is exactly the labeled graph.

    Cheap exact-cover probe of every admissible symmetry first, then a
    thorough pass, then a raw search with no symmetry.
    """
    forb = list(leave.edges())
    if (n * (n - 1) // 2 - len(forb)) % 6:
        return None
    if sigma == "auto":
        sigmas = leave_sigma_candidates(leave)
    elif sigma is None:
        sigmas = []
    else:
        sigmas = [sigma]
    pools = []
    for sg in sigmas:
        try:
            space = PairSpace(n, sg, forb)
        except ValueError:
            continue
        pools.append([space, None])
    for pool in pools:
        space = pool[0]
        if space.nslots <= 600:
            pool[1] = candidate_base_blocks(space)
            base = _exact_cover(space, seed, node_budget=120_000,
                                candidates=pool[1])
            if base is not None:
                return Design(n, as_block_array(sorted(space.develop(base))))
    for space, cands in pools:
        base = _run(space, seed + 0x9E37, max_iters, 2, candidates=cands)
        if base is not None:
            return Design(n, as_block_array(sorted(space.develop(base))))
    if sigma == "auto" or sigma is None:
        space = PairSpace(n, None, forb)
        base = _run(space, seed, max_iters, 8)
        if base is not None:
            return Design(n, as_block_array(sorted(base)))
    return None


def portfolio(run, seeds, *args, **kwargs):
    """Try seeds in order; return (seed, result) for the first success."""
    for seed in seeds:
        result = run(*args, seed=seed, **kwargs)
        if result is not None:
            return seed, result
    return None, None
