"""Recursive constructions: weighting, weight-3 double GDDs, group filling.

The weighting construction replaces each point of a master GDD by a cluster
of new points and each block by an ingredient GDD on its clusters.  The
weight-3 template turns a transversal design with a parallel class into a
double GDD whose holes are the tripled parallel blocks.  Group filling
pastes small packings into the groups of a GDD and assembles the leave.
"""

import itertools

from .model import (Design, Kind, LabeledLeave, as_block_array, iter_blocks)


def _as_design(obj):
    return obj.design if hasattr(obj, "design") else obj


def normalize_weights(weights, n):
    if callable(weights):
        return [int(weights(p)) for p in range(n)]
    if isinstance(weights, dict):
        return [int(weights.get(p, 0)) for p in range(n)]
    out = [int(w) for w in weights]
    if len(out) != n:
        raise ValueError("weight list length != point count")
    return out


def _match_groups_by_size(ing, want_sizes):
    """Ingredient group indices aligned to the wanted size list."""
    pool = {}
    for gi, g in enumerate(ing.groups):
        pool.setdefault(len(g), []).append(gi)
    picked = []
    for s in want_sizes:
        avail = pool.get(s)
        if not avail:
            raise ValueError("ingredient groups %s do not fit %s"
                             % (ing.group_type(), want_sizes))
        picked.append(avail.pop())
    return picked


def _place_ingredient(ing, clusters):
    """Blocks of `ing` relabeled so its groups land on the given clusters."""
    ing = _as_design(ing)
    order = _match_groups_by_size(ing, [len(c) for c in clusters])
    image = {}
    for gi, cluster in zip(order, clusters):
        for src, dst in zip(ing.groups[gi], cluster):
            image[src] = dst
    return [tuple(image[p] for p in blk) for blk in iter_blocks(ing.blocks)]


def wfc(master, weights, ingredients):
    """Weighting construction: replace points by clusters, blocks by GDDs.

    `ingredients` is a callable taking a tuple of positive cluster sizes
    (in block-point order) and returning a 4-GDD with groups of those sizes.
    """
    master = _as_design(master)
    w = normalize_weights(weights, master.n)
    if any(x < 0 for x in w):
        raise ValueError("negative weight")
    offset = [0] * (master.n + 1)
    for p in range(master.n):
        offset[p + 1] = offset[p] + w[p]
    cluster = [tuple(range(offset[p], offset[p + 1])) for p in range(master.n)]
    blocks = []
    for blk in iter_blocks(master.blocks):
        live = [p for p in blk if w[p] > 0]
        if len(live) <= 1:
            continue
        ing = ingredients(tuple(w[p] for p in live))
        blocks.extend(_place_ingredient(ing, [cluster[p] for p in live]))
    groups = []
    for g in master.groups:
        pts = tuple(q for p in g for q in cluster[p])
        if pts:
            groups.append(pts)
    return Design(offset[-1], as_block_array(sorted(blocks)), Kind.GDD,
                  groups)


def weight3_dgdd(td, keep_last, ingredients):
    """Weight-3 double GDD from an idempotent transversal design.

    Truncates the last group to `keep_last` points, gives every surviving
    point weight 3, replaces every block outside the parallel class by a
    4-GDD of type 3^k or 3^(k-1), and turns the tripled parallel blocks
    into holes.  Every group-hole intersection has size 0 or 3.
    """
    if not td.parallel:
        raise ValueError("needs a distinguished parallel class")
    d = td.design
    k = len(d.groups)
    n = len(d.groups[0])
    if not 0 <= keep_last <= n:
        raise ValueError("keep_last out of range")
    dropped = set(d.groups[-1][keep_last:])
    relab = {}
    for p in range(d.n):
        if p not in dropped:
            relab[p] = len(relab)

    def triple(p):
        base = 3 * relab[p]
        return (base, base + 1, base + 2)

    groups = [tuple(q for p in g if p not in dropped for q in triple(p))
              for g in d.groups]
    if keep_last == 0:
        groups.pop()
    par = set(td.parallel)
    holes = []
    blocks = []
    for bi, blk in enumerate(iter_blocks(d.blocks)):
        kept = [p for p in blk if p not in dropped]
        if bi in par:
            holes.append(tuple(q for p in kept for q in triple(p)))
            continue
        ing = ingredients((3,) * len(kept))
        blocks.extend(_place_ingredient(ing, [triple(p) for p in kept]))
    for g in groups:
        for h in holes:
            if len(set(g) & set(h)) not in (0, 3):
                raise AssertionError("group-hole intersection not 0 or 3")
    return Design(3 * len(relab), as_block_array(sorted(blocks)), Kind.DGDD,
                  groups, holes)


def hgdd3(g, h, ingredients):
    """4-HGDD with h groups of size 3g and g holes of size 3h (g,h >= 4)."""
    from .algebra import idempotent_td

    if g < 4 or h < 4:
        raise ValueError("holey GDD needs both parameters >= 4")
    return weight3_dgdd(idempotent_td(h, g), g, ingredients)


def embed_with_leave(ing_design, ing_leave, targets, placements=()):
    """Image list mapping an ingredient packing onto `targets` so that each
    placement pins one leave cycle through given points consecutively.

    A placement is (length, through): some leave cycle of that length must
    visit the `through` points consecutively, in order.  Distinct placements
    consume distinct cycles.  Unconstrained points map in sorted order.
    """
    ing_design = _as_design(ing_design)
    targets = sorted(targets)
    if len(targets) != ing_design.n:
        raise ValueError("target size != ingredient size")
    cycles = {i: tuple(c) for i, c in enumerate(ing_leave.cycles)}
    image = {}
    used_targets = set()
    for length, through in placements:
        through = tuple(through)
        if len(through) > length:
            raise ValueError("%d pins exceed cycle length %d"
                             % (len(through), length))
        if any(t not in targets or t in used_targets for t in through):
            raise ValueError("pinned points unavailable in the target group")
        pick = next((i for i, c in cycles.items() if len(c) == length), None)
        if pick is None:
            raise ValueError("no free leave cycle of length %d" % length)
        cyc = cycles.pop(pick)
        for pos, t in enumerate(through):
            image[cyc[pos]] = t
            used_targets.add(t)
    rest_targets = [t for t in targets if t not in used_targets]
    rest_points = [p for p in range(ing_design.n) if p not in image]
    image.update(zip(rest_points, rest_targets))
    return [image[p] for p in range(ing_design.n)]


def fill_groups(host, fills, declared=()):
    """Paste packings into the groups of a GDD; groups become leave parts.

    fills: {group_index: (packing, leave, images-or-None)}.  An images list
    maps ingredient point p to a host point (see embed_with_leave); None
    means sorted order.  Unfilled groups of size 3 become leave triangles,
    sizes 1-2 contribute their pairs; larger ones must appear in `declared`,
    contributing their whole clique to the leave.
    """
    host = _as_design(host)
    blocks = [tuple(b) for b in iter_blocks(host.blocks)]
    cycles = []
    extra = []
    for gi, g in enumerate(host.groups):
        if gi in fills:
            ing, leave, images = fills[gi]
            ing = _as_design(ing)
            if images is None:
                if ing.n != len(g):
                    raise ValueError("group %d size %d != packing on %d"
                                     % (gi, len(g), ing.n))
                images = sorted(g)
            if sorted(images) != sorted(g):
                raise ValueError("embedding is not a bijection onto group %d"
                                 % gi)
            blocks.extend(tuple(images[p] for p in blk)
                          for blk in iter_blocks(ing.blocks))
            if leave is not None:
                cycles.extend(tuple(images[p] for p in c)
                              for c in leave.cycles)
                extra.extend((images[a], images[b])
                             for a, b in leave.extra_edges)
        elif gi in declared:
            extra.extend(itertools.combinations(sorted(g), 2))
        elif len(g) == 3:
            cycles.append(tuple(g))
        elif len(g) <= 2:
            extra.extend(itertools.combinations(sorted(g), 2))
        else:
            raise ValueError("group %d of size %d left unfilled"
                             % (gi, len(g)))
    leave = LabeledLeave.from_parts(host.n, cycles, extra)
    return Design(host.n, as_block_array(sorted(blocks))), leave
