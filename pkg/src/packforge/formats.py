"""Text formats for designs and base-block scripts.

pack v1 carries a fully expanded design with optional structure:

    %PACK v1
    n=15
    kind=packing
    cycle: 0 1 2 3 4
    edge: 3 7
    block: 0 2 5 10

``group:`` and ``hole:`` lines appear for the group-divisible kinds.  Files
are emitted canonically, so equal designs serialize to identical bytes.

bb v1 carries base blocks plus a developing permutation:

    %BB v1
    n=15
    alpha=(0,1,2,3,4)(5,6,7,8,9)(10,11,12,13,14)
    leave=5^3
    block: 0 2 5 10
    block*: 0 6 9 12

A trailing ``*`` marks a block whose orbit is shorter than the order of
alpha; the developer validates the marks.
"""

from __future__ import annotations

from .model import (
    BaseBlockScript,
    Design,
    Kind,
    LabeledLeave,
    Permutation,
    as_block_array,
    canonical_type,
    iter_blocks,
    parse_leave_spec,
)

PACK_MAGIC = "%PACK v1"
BB_MAGIC = "%BB v1"


class FormatError(ValueError):
    pass


def _canonical_cycle(cycle):
    """Rotate to the least point and orient toward its smaller neighbor."""
    k = cycle.index(min(cycle))
    rot = cycle[k:] + cycle[:k]
    if rot[-1] < rot[1]:
        rot = rot[:1] + rot[1:][::-1]
    return tuple(rot)


def emit_pack(design, leave=None):
    """Serialize a design (and optionally its leave) canonically."""
    out = [PACK_MAGIC, "n=%d" % design.n, "kind=%s" % design.kind.value]
    if design.groups:
        out.append("type=%s" % canonical_type(len(g) for g in design.groups))
        for g in sorted(design.groups):
            out.append("group: " + " ".join(map(str, g)))
    for h in sorted(design.holes):
        out.append("hole: " + " ".join(map(str, h)))
    if leave is not None:
        cycles = sorted(
            (_canonical_cycle(list(c)) for c in leave.cycles),
            key=lambda c: (len(c), c),
        )
        for c in cycles:
            out.append("cycle: " + " ".join(map(str, c)))
        for a, b in sorted(leave.extra_edges):
            out.append("edge: %d %d" % (a, b))
    rows = sorted(iter_blocks(design.blocks))
    for row in rows:
        out.append("block: " + " ".join(map(str, row)))
    return "\n".join(out) + "\n"


def parse_pack(text):
    """Parse pack v1; returns (Design, LabeledLeave or None)."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != PACK_MAGIC:
        raise FormatError("missing %r header" % PACK_MAGIC)
    n = None
    kind = Kind.PACKING
    groups, holes, cycles, edges, blocks = [], [], [], [], []
    for ln in lines[1:]:
        if ln.startswith("n="):
            n = int(ln[2:])
        elif ln.startswith("kind="):
            try:
                kind = Kind(ln[5:])
            except ValueError:
                raise FormatError("unknown kind %r" % ln[5:])
        elif ln.startswith("type="):
            pass  # informational; recomputed from the group lines
        elif ln.startswith("group:"):
            groups.append(tuple(int(t) for t in ln[6:].split()))
        elif ln.startswith("hole:"):
            holes.append(tuple(int(t) for t in ln[5:].split()))
        elif ln.startswith("cycle:"):
            cycles.append(tuple(int(t) for t in ln[6:].split()))
        elif ln.startswith("edge:"):
            a, b = (int(t) for t in ln[5:].split())
            edges.append((a, b))
        elif ln.startswith("block:"):
            blocks.append(tuple(int(t) for t in ln[6:].split()))
        else:
            raise FormatError("bad line %r" % ln)
    if n is None:
        raise FormatError("missing n=")
    design = Design(n, as_block_array(blocks), kind, tuple(groups), tuple(holes))
    leave = None
    if cycles or edges:
        leave = LabeledLeave.from_parts(n, cycles, edges)
    return design, leave


def emit_bb(script):
    out = [BB_MAGIC, "n=%d" % script.n]
    out.append("alpha=%s" % script.alpha.to_text())
    out.append("leave=%s" % script.leave.to_text())
    for block, star in zip(script.blocks, script.starred):
        tag = "block*:" if star else "block:"
        out.append(tag + " " + " ".join(map(str, block)))
    return "\n".join(out) + "\n"


def parse_bb(text, ident=""):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != BB_MAGIC:
        raise FormatError("missing %r header" % BB_MAGIC)
    n = alpha = leave = None
    blocks, starred = [], []
    for ln in lines[1:]:
        if ln.startswith("n="):
            n = int(ln[2:])
        elif ln.startswith("alpha="):
            if n is None:
                raise FormatError("alpha= before n=")
            alpha = Permutation.from_cycles(n, ln[6:])
        elif ln.startswith("leave="):
            leave = parse_leave_spec(ln[6:])
        elif ln.startswith("block*:"):
            blocks.append(tuple(int(t) for t in ln[7:].split()))
            starred.append(True)
        elif ln.startswith("block:"):
            blocks.append(tuple(int(t) for t in ln[6:].split()))
            starred.append(False)
        else:
            raise FormatError("bad line %r" % ln)
    if n is None or alpha is None or leave is None:
        raise FormatError("incomplete script header")
    return BaseBlockScript(
        n, alpha, tuple(blocks), tuple(starred), leave, ident=ident
    )
