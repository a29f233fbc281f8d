"""The four sub-graph optimizations and the recipe enumeration engine.

All passes are function-preserving and accept-only-improving: balance
never increases depth; rewrite, refactor and resubstitute never increase
the node count.  Zero-gain replacements are rejected (except refactor's
documented depth tiebreak), which is what makes those guarantees
invariants rather than tendencies.

Rewrite, refactor and resubstitute share one in-place editing kernel:
candidate structures are first *counted* against the live graph (strash
hits outside the root's MFFC are free, everything else costs a node) and
only built when the MFFC-freed-minus-added gain is positive.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .aig import CONST0, CONST1, Aig, lit, lit_neg, lit_node, lit_not, tt_var
from .errors import EmptyOptionsError
from .npn import default_library, extend_tt, npn_canon


class TransformId(Enum):
    BALANCE = "ba"
    REFACTOR = "rf"
    REWRITE = "rw"
    RESUB = "rs"

    @property
    def symbol(self) -> str:
        return {
            TransformId.BALANCE: "B_a",
            TransformId.REFACTOR: "R_f",
            TransformId.REWRITE: "R_w",
            TransformId.RESUB: "R_s",
        }[self]


_CANONICAL_ORDER = [
    TransformId.BALANCE,
    TransformId.REFACTOR,
    TransformId.REWRITE,
    TransformId.RESUB,
]


def parse_transform(text: str) -> TransformId:
    key = text.strip().lower()
    for t in TransformId:
        if key in (t.value, t.symbol.lower(), t.name.lower()):
            return t
    raise ValueError(f"unknown transformation {text!r}")


@dataclass(frozen=True)
class Recipe:
    steps: tuple[TransformId, ...]

    def __post_init__(self):
        if not 1 <= len(self.steps) <= 4:
            raise ValueError("recipe length must be between 1 and 4")
        if len(set(self.steps)) != len(self.steps):
            raise ValueError("recipe steps must be distinct")

    def __str__(self):
        return ",".join(t.value for t in self.steps)

    @classmethod
    def parse(cls, text: str) -> "Recipe":
        return cls(tuple(parse_transform(p) for p in text.split(",") if p.strip()))


@dataclass
class RecipeSpace:
    option_count: int
    recipes: list[Recipe] = field(default_factory=list)


def enumerate_recipes(options) -> RecipeSpace:
    """All permutations of all non-empty subsets, size-major lexicographic."""
    opts = sorted(set(options), key=_CANONICAL_ORDER.index)
    if not opts:
        raise EmptyOptionsError("at least one transformation is required")
    recipes = [
        Recipe(perm)
        for r in range(1, len(opts) + 1)
        for perm in itertools.permutations(opts, r)
    ]
    return RecipeSpace(option_count=len(opts), recipes=recipes)


def apply_recipe(g: Aig, recipe: Recipe) -> Aig:
    for step in recipe.steps:
        g = PASSES[step](g)
    return g


# ----------------------------------------------------------------------
# balance


def balance(g: Aig) -> Aig:
    """Collapse AND supergates and rebuild them as balanced trees.

    Supergates extend through non-complemented, single-fanout internal
    edges; operands are combined lowest-level-first, so depth never
    exceeds the input's.
    """
    fanouts = g.ensure_fanouts()
    out = Aig()
    for name in g.input_names:
        out.add_input(name)
    mapping: dict[int, int] = {CONST0: CONST0}
    out_levels: dict[int, int] = {}  # level of every node built in ``out``
    for n in range(1, g.num_inputs + 1):
        mapping[n] = lit(n)

    def gather(node: int) -> list[int]:
        """Supergate operand edges of ``node`` (old-graph literals)."""
        operands: list[int] = []
        stack = [g.fanin0[node], g.fanin1[node]]
        while stack:
            e = stack.pop()
            en = lit_node(e)
            if not lit_neg(e) and g.is_and(en) and len(fanouts[en]) == 1:
                stack.append(g.fanin0[en])
                stack.append(g.fanin1[en])
            else:
                operands.append(e)
        return operands

    # demand-driven, iterative to survive deep chains
    for root_lit in g.outputs:
        stack = [lit_node(root_lit)]
        while stack:
            node = stack[-1]
            if node in mapping:
                stack.pop()
                continue
            pending = [
                en
                for en in {lit_node(e) for e in gather(node)}
                if en not in mapping
            ]
            if pending:
                stack.extend(sorted(pending))
                continue
            resolved = sorted(
                {mapping[lit_node(e)] ^ lit_neg(e) for e in gather(node)}
            )
            mapping[node] = _balanced_and(out, resolved, out_levels)
            stack.pop()
    for o, name in zip(g.outputs, g.output_names):
        out.add_output(mapping[lit_node(o)] ^ lit_neg(o), name)
    return out


def _balanced_and(out: Aig, operands: list[int], out_levels: dict[int, int]) -> int:
    """Huffman-style combine: always pair the two lowest-level operands."""
    opset = set(operands)
    for a in operands:
        if lit_not(a) in opset or a == CONST0:
            return CONST0
    operands = [a for a in operands if a != CONST1]
    if not operands:
        return CONST1
    heap = [(out_levels.get(lit_node(a), 0), a) for a in operands]
    heapq.heapify(heap)
    while len(heap) > 1:
        la, a = heapq.heappop(heap)
        lb, b = heapq.heappop(heap)
        r = out.strash_and(a, b)
        rn = lit_node(r)
        if rn not in out_levels and out.is_and(rn):
            out_levels[rn] = 1 + max(la, lb)
        heapq.heappush(heap, (out_levels.get(rn, 0), r))
    return heap[0][1]


# ----------------------------------------------------------------------
# shared counting / building context for cone replacement


class _Counter:
    """Evaluates what a candidate structure would cost without building it.

    Strash hits on live nodes outside ``banned`` (the root's MFFC) are
    free; anything else counts as one added node.  Tracks hypothetical
    levels for refactor's depth tiebreak.
    """

    def __init__(self, g: Aig, banned: set[int]):
        self.g = g
        self.banned = banned
        self.new: dict[tuple[int, int], int] = {}
        self.levels: dict[int, int] = {}
        self.count = 0
        self._next = len(g.fanin0)

    def level_of(self, l: int) -> int:
        node = lit_node(l)
        if node in self.levels:
            return self.levels[node]
        return self.g.levels()[node]

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == CONST0:
            return CONST0
        if a == CONST1:
            return b
        if a == b:
            return a
        if (a ^ b) == 1:
            return CONST0
        key = (a, b)
        if key in self.new:
            return self.new[key]
        if max(lit_node(a), lit_node(b)) < len(self.g.fanin0):
            hit = self.g.strash.get(key)
            if hit is not None and self.g.alive[hit] and hit not in self.banned:
                return lit(hit)
        node = self._next
        self._next += 1
        self.count += 1
        self.levels[node] = 1 + max(self.level_of(a), self.level_of(b))
        self.new[key] = lit(node)
        return lit(node)


class _Builder:
    """Really builds the accepted structure via structural hashing."""

    def __init__(self, g: Aig):
        self.g = g

    def and_(self, a: int, b: int) -> int:
        return self.g.strash_and(a, b)


def _apply_entry(entry, leaf_lits: list[int], perm, phase: int, out_neg: int, ctx):
    """Instantiate a library structure over actual leaf literals.

    Structure variable j feeds ``leaf[perm[j]] ^ phase_j``; leaves beyond
    the cut width are constants (the canonical function ignores them).
    """
    vals = [CONST0, CONST1]
    for v in range(4):
        base = leaf_lits[perm[v]] if perm[v] < len(leaf_lits) else CONST0
        base ^= (phase >> v) & 1
        vals.append(base)
        vals.append(lit_not(base))
    for a, b in entry.nodes:
        r = ctx.and_(vals[a], vals[b])
        vals.append(r)
        vals.append(lit_not(r))
    return vals[entry.out_lit] ^ out_neg


# ----------------------------------------------------------------------
# rewrite


def rewrite(g: Aig, cut_cap: int = 16) -> Aig:
    """DAG-aware rewriting against the precomputed NPN structure library."""
    g = g.copy()
    g.ensure_fanouts()
    lib = default_library()
    cuts_table = g._all_cuts(4, cut_cap)
    snapshot = list(g.topo_order())
    for node in snapshot:
        if not g.alive[node]:
            continue
        mffc_set = g.mffc(node)
        saved = len(mffc_set)
        best = None
        for _, leaves in cuts_table[node]:
            if len(leaves) == 1 or any(not g.alive[l] for l in leaves):
                continue
            nvars = len(leaves)
            masks = {leaf: tt_var(i, nvars) for i, leaf in enumerate(leaves)}
            tt = g._cone_eval(node, masks, nvars, limit=64)
            if tt is None:
                continue  # cut went stale after an earlier replacement
            canon, perm, phase, out_neg = npn_canon(extend_tt(tt, nvars))
            entry = lib.lookup(canon)
            if entry is None:
                continue
            counter = _Counter(g, mffc_set)
            leaf_lits = [lit(l) for l in leaves]
            out = _apply_entry(entry, leaf_lits, perm, phase, out_neg, counter)
            if lit_node(out) == node:
                continue
            gain = saved - counter.count
            if best is None or gain > best[0]:
                best = (gain, leaves, entry, perm, phase, out_neg)
        if best is not None and best[0] > 0:
            _, leaves, entry, perm, phase, out_neg = best
            builder = _Builder(g)
            leaf_lits = [lit(l) for l in leaves]
            out = _apply_entry(entry, leaf_lits, perm, phase, out_neg, builder)
            if lit_node(out) != node:
                g.replace(node, out)
    return g.compact()


# ----------------------------------------------------------------------
# refactor


def refactor(g: Aig, max_leaves: int = 8, cone_limit: int = 400) -> Aig:
    """Collapse each node's largest cut to a truth table and re-synthesize
    it from an irredundant SOP via literal factoring."""
    g = g.copy()
    g.ensure_fanouts()
    snapshot = list(g.topo_order())
    for node in snapshot:
        if not g.alive[node]:
            continue
        leaves = _reconv_cut(g, node, max_leaves)
        if len(leaves) < 2:
            continue
        nvars = len(leaves)
        masks = {leaf: tt_var(i, nvars) for i, leaf in enumerate(leaves)}
        tt = g._cone_eval(node, masks, nvars, limit=cone_limit)
        if tt is None:
            continue
        cubes = isop(tt, nvars)
        mffc_set = g.mffc(node)
        saved = len(mffc_set)
        counter = _Counter(g, mffc_set)
        leaf_lits = [lit(l) for l in leaves]
        out = _factor(cubes, leaf_lits, counter)
        if lit_node(out) == node:
            continue
        gain = saved - counter.count
        accept = gain > 0
        if gain == 0:
            old_level = g.levels()[node]
            accept = counter.level_of(out) < old_level
        if accept:
            builder = _Builder(g)
            out = _factor(cubes, leaf_lits, builder)
            if lit_node(out) != node:
                g.replace(node, out)
    return g.compact()


def _reconv_cut(g: Aig, node: int, max_leaves: int) -> tuple[int, ...]:
    """Grow a cut greedily, preferring reconvergent (non-widening) expansions."""
    leaves = {lit_node(g.fanin0[node]), lit_node(g.fanin1[node])}
    leaves.discard(CONST0)
    while True:
        expanded = False
        for leaf in sorted(leaves, reverse=True):
            if not g.is_and(leaf):
                continue
            fan = {lit_node(g.fanin0[leaf]), lit_node(g.fanin1[leaf])}
            fan.discard(CONST0)
            new_leaves = (leaves - {leaf}) | fan
            if len(new_leaves) <= max_leaves:
                leaves = new_leaves
                expanded = True
                break
        if not expanded:
            return tuple(sorted(leaves))


def isop(tt: int, nvars: int) -> list[tuple[tuple[int, int], ...]]:
    """Irredundant sum-of-products (Minato-Morreale interval ISOP).

    Returns cubes as tuples of (var, polarity); an empty cube list means
    constant false, a single empty cube constant true.
    """
    full = (1 << (1 << nvars)) - 1

    def var_mask(v):
        return tt_var(v, nvars)

    def cof(f, v):
        m1 = var_mask(v)
        m0 = m1 ^ full
        shift = 1 << v
        f0 = f & m0
        f0 |= f0 << shift
        f1 = f & m1
        f1 |= f1 >> shift
        return f0 & full, f1 & full

    def rec(lower, upper, start):
        if lower == 0:
            return [], 0
        if upper == full:
            return [()], full
        for v in range(start, nvars):
            l0, l1 = cof(lower, v)
            u0, u1 = cof(upper, v)
            if l0 != l1 or u0 != u1:
                break
        else:
            raise AssertionError("interval depends on no variable")
        c0, f0 = rec(l0 & ~u1 & full, u0, v + 1)
        c1, f1 = rec(l1 & ~u0 & full, u1, v + 1)
        lnew = (l0 & ~f0 | l1 & ~f1) & full
        cstar, fstar = rec(lnew, u0 & u1, v + 1)
        xm = var_mask(v)
        cubes = (
            [c + ((v, 0),) for c in c0]
            + [c + ((v, 1),) for c in c1]
            + cstar
        )
        f = (f0 & ~xm | f1 & xm | fstar) & full
        return cubes, f

    cubes, f = rec(tt, tt, 0)
    assert f == tt, "ISOP does not reproduce the function"
    return cubes


def _factor(cubes, leaf_lits, ctx):
    """Quick-factor an SOP: divide by the most frequent literal."""
    if not cubes:
        return CONST0
    if any(len(c) == 0 for c in cubes):
        return CONST1

    def cube_and(cube):
        literals = sorted(leaf_lits[v] ^ (1 - p) for v, p in cube)
        acc = literals[0]
        for x in literals[1:]:
            acc = ctx.and_(acc, x)
        return acc

    def build_or(parts):
        parts = sorted(parts)
        acc = parts[0]
        for x in parts[1:]:
            acc = lit_not(ctx.and_(lit_not(acc), lit_not(x)))
        return acc

    def go(cubes):
        if not cubes:
            return CONST0
        if any(len(c) == 0 for c in cubes):
            return CONST1
        if len(cubes) == 1:
            return cube_and(cubes[0])
        freq: dict[tuple[int, int], int] = {}
        for c in cubes:
            for litp in c:
                freq[litp] = freq.get(litp, 0) + 1
        best_lit, best_n = min(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        if best_n <= 1:
            return build_or([cube_and(c) for c in cubes])
        quotient = [tuple(x for x in c if x != best_lit) for c in cubes if best_lit in c]
        remainder = [c for c in cubes if best_lit not in c]
        v, p = best_lit
        divided = ctx.and_(leaf_lits[v] ^ (1 - p), go(quotient))
        if not remainder:
            return divided
        return build_or([divided, go(remainder)])

    return go(cubes)


# ----------------------------------------------------------------------
# resubstitution


def resubstitute(
    g: Aig,
    max_leaves: int = 8,
    window_cap: int = 150,
    divisor_cap: int = 48,
) -> Aig:
    """Replace nodes with existing logic: a bare divisor (0-resub) or a
    single AND of two divisors (1-resub), in any polarity."""
    g = g.copy()
    fanouts = g.ensure_fanouts()
    snapshot = list(g.topo_order())
    for node in snapshot:
        if not g.alive[node]:
            continue
        leaves = _reconv_cut(g, node, max_leaves)
        if not leaves or any(not g.alive[l] for l in leaves):
            continue
        window = _collect_window(g, fanouts, leaves, window_cap)
        if node not in window:
            continue
        nvars = len(leaves)
        full = (1 << (1 << nvars)) - 1
        tts = {leaf: tt_var(i, nvars) for i, leaf in enumerate(leaves)}
        tts[CONST0] = 0
        todo = sorted(w for w in window if w not in tts)
        while todo:
            rest = []
            for w in todo:
                f0, f1 = g.fanin0[w], g.fanin1[w]
                if lit_node(f0) in tts and lit_node(f1) in tts:
                    v0 = tts[lit_node(f0)] ^ (full if lit_neg(f0) else 0)
                    v1 = tts[lit_node(f1)] ^ (full if lit_neg(f1) else 0)
                    tts[w] = v0 & v1
                else:
                    rest.append(w)
            if len(rest) == len(todo):
                raise AssertionError("resub window is not closed")
            todo = rest
        target = tts[node]
        mffc_set = g.mffc(node)
        tfo = _tfo_in_window(g, fanouts, node, window)
        divisors = [
            d
            for d in sorted(set(window) | set(leaves))
            if d != node and d not in mffc_set and d not in tfo
        ]
        # 0-resub: an existing node already computes this function
        done = False
        for d in divisors:
            if tts[d] == target:
                g.replace(node, lit(d))
                done = True
                break
            if tts[d] == (target ^ full):
                g.replace(node, lit(d, 1))
                done = True
                break
        if done:
            continue
        saved = len(mffc_set)
        if saved <= 1:
            continue  # a fresh AND would make the gain non-positive
        cands = divisors[:divisor_cap]
        for i, d1 in enumerate(cands):
            t1 = tts[d1]
            for d2 in cands[i + 1 :]:
                t2 = tts[d2]
                hit = None
                for pa in (0, full):
                    for pb in (0, full):
                        v = (t1 ^ pa) & (t2 ^ pb)
                        if v == target:
                            hit = (pa, pb, 0)
                        elif v == (target ^ full):
                            hit = (pa, pb, 1)
                        if hit:
                            break
                    if hit:
                        break
                if hit:
                    pa, pb, neg = hit
                    out = g.strash_and(
                        lit(d1, 1 if pa else 0), lit(d2, 1 if pb else 0)
                    )
                    g.replace(node, out ^ neg)
                    done = True
                    break
            if done:
                break
    return g.compact()


def _collect_window(g, fanouts, leaves, cap):
    """Closure of nodes whose fanins stay inside leaves+window."""
    inside = set(leaves)
    window: set[int] = set()
    work = deque()
    for leaf in sorted(leaves):
        work.extend(f for f in fanouts[leaf] if f > 0)
    seen = set()
    while work:
        cand = work.popleft()
        if cand in seen or not g.alive[cand]:
            continue
        seen.add(cand)
        f0 = lit_node(g.fanin0[cand])
        f1 = lit_node(g.fanin1[cand])
        if (f0 in inside or f0 == CONST0) and (f1 in inside or f1 == CONST0):
            window.add(cand)
            inside.add(cand)
            if len(window) >= cap:
                break
            work.extend(f for f in fanouts[cand] if f > 0)
    return window


def _tfo_in_window(g, fanouts, node, window):
    tfo = set()
    stack = [node]
    while stack:
        n = stack.pop()
        for f in fanouts[n]:
            if f > 0 and f in window and f not in tfo:
                tfo.add(f)
                stack.append(f)
    return tfo


PASSES = {
    TransformId.BALANCE: balance,
    TransformId.REFACTOR: refactor,
    TransformId.REWRITE: rewrite,
    TransformId.RESUB: resubstitute,
}
