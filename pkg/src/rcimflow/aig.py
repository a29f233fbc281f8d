"""And-inverter graph with structural hashing.

Literals follow the AIGER convention: ``lit = 2 * node + complement``.
Node 0 is constant false, so literal 0 is false and literal 1 is true.
Input nodes come first (ids 1..I); AND nodes are appended in build order,
which keeps fanin ids below node ids for freshly built graphs.

Optimization passes mutate a graph in place through :meth:`Aig.replace`,
which redirects fanouts, re-hashes affected nodes and cascades merges so
that no two live AND nodes ever share a fanin pair.  In-place replacement
may point an old node at a younger one, so iteration inside passes uses
:meth:`Aig.topo_order` instead of raw id order; :meth:`Aig.compact`
restores dense, topologically sorted ids afterwards.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ShapeError

CONST0 = 0
CONST1 = 1


def lit(node: int, neg: int = 0) -> int:
    return 2 * node + (neg & 1)


def lit_node(l: int) -> int:
    return l >> 1


def lit_neg(l: int) -> int:
    return l & 1


def lit_not(l: int) -> int:
    return l ^ 1


@dataclass(frozen=True)
class Cut:
    """A k-feasible cut: a complete input boundary of the cone at ``root``."""

    root: int
    leaves: tuple[int, ...]

    def __len__(self):
        return len(self.leaves)


@dataclass(frozen=True)
class TruthTable:
    """Truth table over ``nvars`` ordered variables, packed into an int.

    Bit ``i`` holds the function value for the input assignment whose
    variable ``v`` equals bit ``v`` of ``i``.
    """

    bits: int
    nvars: int

    def __post_init__(self):
        mask = (1 << (1 << self.nvars)) - 1
        if self.bits & ~mask:
            raise ValueError("truth table wider than 2^nvars bits")

    @property
    def width(self) -> int:
        return 1 << self.nvars

    def value(self, assignment: int) -> int:
        return (self.bits >> assignment) & 1


def tt_var(v: int, nvars: int) -> int:
    """Packed truth table of variable ``v`` in an ``nvars``-variable space."""
    width = 1 << nvars
    block = 1 << v
    pattern = ((1 << block) - 1) << block  # 2*block wide: low half 0, high half 1
    out = 0
    for start in range(0, width, 2 * block):
        out |= pattern << start
    return out


class Aig:
    """Mutable and-inverter graph with hash-consed AND nodes."""

    def __init__(self, num_inputs: int = 0):
        self.fanin0: list[int | None] = [None]  # node 0 = const0
        self.fanin1: list[int | None] = [None]
        self.alive: list[bool] = [True]
        self.outputs: list[int] = []
        self.strash: dict[tuple[int, int], int] = {}
        self.num_inputs = 0
        self.input_names: list[str] = []
        self.output_names: list[str] = []
        self._fanouts: list[list[int]] | None = None
        self._levels: list[int] | None = None
        self._topo: list[int] | None = None
        self._cut_cache = None
        self._protect: dict[int, int] | None = None
        for _ in range(num_inputs):
            self.add_input()

    # ------------------------------------------------------------------
    # construction

    def add_input(self, name: str | None = None) -> int:
        if len(self.fanin0) != self.num_inputs + 1:
            raise ValueError("inputs must be added before AND nodes")
        node = len(self.fanin0)
        self.fanin0.append(None)
        self.fanin1.append(None)
        self.alive.append(True)
        self.num_inputs += 1
        self.input_names.append(name if name is not None else f"i{node - 1}")
        return node

    def add_output(self, l: int, name: str | None = None) -> None:
        self.outputs.append(l)
        self.output_names.append(name if name is not None else f"o{len(self.outputs) - 1}")
        self._invalidate()

    def is_input(self, node: int) -> bool:
        return 1 <= node <= self.num_inputs

    def is_and(self, node: int) -> bool:
        return node > self.num_inputs

    def num_nodes(self) -> int:
        """Live AND node count."""
        return sum(
            1 for n in range(self.num_inputs + 1, len(self.fanin0)) if self.alive[n]
        )

    def strash_and(self, a: int, b: int) -> int:
        """AND of two literals with constant folding and hash lookup."""
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
        hit = self.strash.get(key)
        if hit is not None:
            return lit(hit)
        node = len(self.fanin0)
        self.fanin0.append(a)
        self.fanin1.append(b)
        self.alive.append(True)
        self.strash[key] = node
        if self._fanouts is not None:
            self._fanouts.append([])
            self._fanouts[lit_node(a)].append(node)
            self._fanouts[lit_node(b)].append(node)
        self._invalidate(keep_fanouts=True)
        return lit(node)

    def and_lit(self, a, b):
        return self.strash_and(a, b)

    def or_lit(self, a, b):
        return lit_not(self.strash_and(lit_not(a), lit_not(b)))

    def xor_lit(self, a, b):
        # standard 3-AND decomposition
        n1 = self.strash_and(a, lit_not(b))
        n2 = self.strash_and(lit_not(a), b)
        return self.or_lit(n1, n2)

    def mux_lit(self, s, t, e):
        return self.or_lit(self.strash_and(s, t), self.strash_and(lit_not(s), e))

    # ------------------------------------------------------------------
    # caches

    def _invalidate(self, keep_fanouts: bool = False):
        self._levels = None
        self._topo = None
        self._cut_cache = None
        if not keep_fanouts:
            self._fanouts = None

    def topo_order(self) -> list[int]:
        """Live AND nodes, every node after both of its fanins."""
        if self._topo is not None:
            return self._topo
        n_total = len(self.fanin0)
        indeg = [0] * n_total
        consumers: list[list[int]] = [[] for _ in range(n_total)]
        for n in range(self.num_inputs + 1, n_total):
            if not self.alive[n]:
                continue
            f0, f1 = lit_node(self.fanin0[n]), lit_node(self.fanin1[n])
            deps = {f0, f1} - {CONST0}
            deps = {d for d in deps if self.is_and(d)}
            indeg[n] = len(deps)
            for d in deps:
                consumers[d].append(n)
        order = []
        ready = [
            n
            for n in range(self.num_inputs + 1, n_total)
            if self.alive[n] and indeg[n] == 0
        ]
        while ready:
            node = ready.pop()
            order.append(node)
            for c in consumers[node]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.num_nodes():
            raise AssertionError("cycle detected in AIG")
        order.sort(key=self._rank_for_topo(order))
        self._topo = order
        return order

    def _rank_for_topo(self, order):
        # stable deterministic order: by level, then id
        levels = self.levels()
        return lambda n: (levels[n], n)

    def levels(self) -> list[int]:
        if self._levels is not None:
            return self._levels
        n_total = len(self.fanin0)
        levels = [0] * n_total
        # levels() is used by topo_order's sort; compute without it
        if self._topo is None:
            pending = [
                n for n in range(self.num_inputs + 1, n_total) if self.alive[n]
            ]
            # iterative longest-path via worklist over dependency-complete nodes
            done = [False] * n_total
            for n in range(self.num_inputs + 1):
                done[n] = True
            stack = list(pending)
            while stack:
                n = stack.pop()
                if done[n]:
                    continue
                f0, f1 = lit_node(self.fanin0[n]), lit_node(self.fanin1[n])
                need = [f for f in (f0, f1) if not done[f]]
                if need:
                    stack.append(n)
                    stack.extend(need)
                else:
                    levels[n] = 1 + max(levels[f0], levels[f1])
                    done[n] = True
        else:
            for n in self._topo:
                f0, f1 = lit_node(self.fanin0[n]), lit_node(self.fanin1[n])
                levels[n] = 1 + max(levels[f0], levels[f1])
        self._levels = levels
        return levels

    def depth(self) -> int:
        levels = self.levels()
        return max((levels[lit_node(o)] for o in self.outputs), default=0)

    # ------------------------------------------------------------------
    # fanouts, reference counts and in-place replacement

    def ensure_fanouts(self) -> list[list[int]]:
        """Fanout node lists; output fanouts are encoded as -(index+1)."""
        if self._fanouts is not None:
            return self._fanouts
        fo: list[list[int]] = [[] for _ in range(len(self.fanin0))]
        for n in range(self.num_inputs + 1, len(self.fanin0)):
            if not self.alive[n]:
                continue
            fo[lit_node(self.fanin0[n])].append(n)
            fo[lit_node(self.fanin1[n])].append(n)
        for i, o in enumerate(self.outputs):
            fo[lit_node(o)].append(-(i + 1))
        self._fanouts = fo
        return fo

    def nref(self, node: int) -> int:
        return len(self.ensure_fanouts()[node])

    def _free_cone(self, node: int) -> int:
        """Remove a fanout-free AND node and recursively its MFFC. Returns count."""
        if not self.is_and(node) or not self.alive[node]:
            return 0
        fo = self.ensure_fanouts()
        protect = getattr(self, "_protect", None) or {}
        if fo[node] or protect.get(node):
            return 0
        freed = 0
        stack = [node]
        while stack:
            n = stack.pop()
            if not self.alive[n] or fo[n] or protect.get(n):
                continue
            self.alive[n] = False
            freed += 1
            key = self._key(n)
            if self.strash.get(key) == n:
                del self.strash[key]
            for f in (self.fanin0[n], self.fanin1[n]):
                fn = lit_node(f)
                fo[fn].remove(n)
                if self.is_and(fn) and not fo[fn]:
                    stack.append(fn)
            self.fanin0[n] = self.fanin1[n] = None
        self._invalidate(keep_fanouts=True)
        return freed

    def _key(self, node: int) -> tuple[int, int]:
        return (self.fanin0[node], self.fanin1[node])

    def replace(self, node: int, new_lit: int) -> None:
        """Transfer all fanouts of ``node`` onto ``new_lit`` and free its cone.

        Cascades: if redirecting a consumer makes it structurally identical
        to an existing node (or degenerate), that consumer is replaced too.
        Nodes whose fanout transfer is still pending are protected from
        garbage collection until their turn.
        """
        if not self.is_and(node):
            raise ValueError("only AND nodes can be replaced")
        fo = self.ensure_fanouts()
        protect: dict[int, int] = {}
        self._protect = protect

        def shield(l: int):
            protect[lit_node(l)] = protect.get(lit_node(l), 0) + 1

        def unshield(l: int):
            n = lit_node(l)
            protect[n] -= 1
            if not protect[n]:
                del protect[n]

        redirect: dict[int, int] = {}  # dissolved node -> its literal
        pending = [(node, new_lit)]
        shield(new_lit)
        while pending:
            old, nl = pending.pop()
            unshield(nl)
            while lit_node(nl) in redirect:
                nl = redirect[lit_node(nl)] ^ lit_neg(nl)
            if lit_node(nl) == old:
                continue
            if not self.alive[lit_node(nl)]:
                raise AssertionError("replacement literal died during cascade")
            for consumer in list(fo[old]):
                if consumer < 0:
                    idx = -consumer - 1
                    out = self.outputs[idx]
                    self.outputs[idx] = nl ^ lit_neg(out)
                    fo[old].remove(consumer)
                    fo[lit_node(nl)].append(consumer)
                    continue
                if not self.alive[consumer]:
                    continue  # freed by an earlier sibling's cone cleanup
                f0, f1 = self.fanin0[consumer], self.fanin1[consumer]
                nf0 = (nl ^ lit_neg(f0)) if lit_node(f0) == old else f0
                nf1 = (nl ^ lit_neg(f1)) if lit_node(f1) == old else f1
                if nf0 > nf1:
                    nf0, nf1 = nf1, nf0
                # detach consumer from its current fanins
                key = self._key(consumer)
                if self.strash.get(key) == consumer:
                    del self.strash[key]
                fo[lit_node(f0)].remove(consumer)
                fo[lit_node(f1)].remove(consumer)
                # degenerate pairs fold to a literal
                folded = None
                if nf0 == CONST0:
                    folded = CONST0
                elif nf0 == CONST1:
                    folded = nf1
                elif nf0 == nf1:
                    folded = nf0
                elif (nf0 ^ nf1) == 1:
                    folded = CONST0
                if folded is None:
                    hit = self.strash.get((nf0, nf1))
                    if hit is not None and hit != consumer and self.alive[hit]:
                        folded = lit(hit)
                if folded is not None:
                    # consumer dissolves; its fanouts move to the folded literal
                    self.alive[consumer] = False
                    self.fanin0[consumer] = self.fanin1[consumer] = None
                    redirect[consumer] = folded
                    shield(folded)
                    pending.append((consumer, folded))
                    for detached in (f0, f1):
                        dn = lit_node(detached)
                        if dn != old:
                            self._free_cone(dn)
                    continue
                self.fanin0[consumer] = nf0
                self.fanin1[consumer] = nf1
                self.strash[(nf0, nf1)] = consumer
                fo[lit_node(nf0)].append(consumer)
                fo[lit_node(nf1)].append(consumer)
                for detached in (f0, f1):
                    dn = lit_node(detached)
                    if dn != old and dn not in (lit_node(nf0), lit_node(nf1)):
                        self._free_cone(dn)
            if self.alive[old]:
                self._free_cone(old)
        self._protect = None
        self._invalidate(keep_fanouts=True)

    def mffc(self, node: int) -> set[int]:
        """Maximum fanout-free cone of an AND node (always contains it)."""
        if not self.is_and(node) or not self.alive[node]:
            raise ValueError("mffc is defined for live AND nodes")
        self.ensure_fanouts()
        remaining: dict[int, int] = {}
        cone: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            cone.add(n)
            for f in (self.fanin0[n], self.fanin1[n]):
                fn = lit_node(f)
                if not self.is_and(fn):
                    continue
                left = remaining.get(fn, self.nref(fn)) - 1
                remaining[fn] = left
                if left == 0:
                    stack.append(fn)
        return cone

    # ------------------------------------------------------------------
    # compaction / copying

    def compact(self) -> "Aig":
        """Output-reachable logic rebuilt with dense topologically ordered ids."""
        reach = set()
        stack = [lit_node(o) for o in self.outputs]
        while stack:
            n = stack.pop()
            if n in reach or not self.is_and(n):
                continue
            reach.add(n)
            stack.append(lit_node(self.fanin0[n]))
            stack.append(lit_node(self.fanin1[n]))
        out = Aig()
        for name in self.input_names:
            out.add_input(name)
        mapping = {CONST0: CONST0}
        for n in range(1, self.num_inputs + 1):
            mapping[n] = n
        for n in self.topo_order():
            if n not in reach:
                continue
            f0, f1 = self.fanin0[n], self.fanin1[n]
            a = lit(mapping[lit_node(f0)]) ^ lit_neg(f0)
            b = lit(mapping[lit_node(f1)]) ^ lit_neg(f1)
            mapping[n] = lit_node(out.strash_and(a, b))
        for o, name in zip(self.outputs, self.output_names):
            out.add_output(lit(mapping[lit_node(o)]) ^ lit_neg(o), name)
        return out

    def copy(self) -> "Aig":
        out = Aig()
        out.fanin0 = list(self.fanin0)
        out.fanin1 = list(self.fanin1)
        out.alive = list(self.alive)
        out.outputs = list(self.outputs)
        out.strash = dict(self.strash)
        out.num_inputs = self.num_inputs
        out.input_names = list(self.input_names)
        out.output_names = list(self.output_names)
        return out

    # ------------------------------------------------------------------
    # simulation

    def simulate(self, input_masks: list[int], width: int) -> list[int]:
        """Bit-parallel evaluation of ``width`` vectors packed into ints.

        ``input_masks[i]`` bit ``v`` is the value of input ``i`` in vector
        ``v``; the result carries one mask per output.
        """
        if len(input_masks) != self.num_inputs:
            raise ShapeError(
                f"expected {self.num_inputs} input masks, got {len(input_masks)}"
            )
        full = (1 << width) - 1
        vals = [0] * len(self.fanin0)
        for i, m in enumerate(input_masks):
            vals[1 + i] = m & full
        for n in self.topo_order():
            f0, f1 = self.fanin0[n], self.fanin1[n]
            v0 = vals[lit_node(f0)] ^ (full if lit_neg(f0) else 0)
            v1 = vals[lit_node(f1)] ^ (full if lit_neg(f1) else 0)
            vals[n] = v0 & v1
        outs = []
        for o in self.outputs:
            v = vals[lit_node(o)] ^ (full if lit_neg(o) else 0)
            outs.append(v & full)
        return outs

    def simulate_patterns(self, patterns: list[list[int]]) -> list[list[int]]:
        """Evaluate explicit 0/1 vectors; returns one row of output bits per vector."""
        width = len(patterns)
        masks = [0] * self.num_inputs
        for v, pat in enumerate(patterns):
            if len(pat) != self.num_inputs:
                raise ShapeError("pattern width mismatch")
            for i, bit in enumerate(pat):
                if bit:
                    masks[i] |= 1 << v
        outs = self.simulate(masks, width)
        return [[(m >> v) & 1 for m in outs] for v in range(width)]

    # ------------------------------------------------------------------
    # cuts and local functions

    def enumerate_cuts(self, node: int, k: int, cap: int = 16) -> list[Cut]:
        """All k-feasible cuts of ``node`` (dominance-pruned, capped)."""
        if not 2 <= k <= 8:
            raise ValueError("cut size must be in [2, 8]")
        table = self._all_cuts(k, cap)
        return [Cut(node, leaves) for (_, leaves) in table[node]]

    def _all_cuts(self, k: int, cap: int):
        if self._cut_cache is not None and self._cut_cache[0] == (k, cap):
            return self._cut_cache[1]
        table: list[list[tuple[int, tuple[int, ...]]]] = [
            [] for _ in range(len(self.fanin0))
        ]
        for n in range(1, self.num_inputs + 1):
            table[n] = [(1 << n, (n,))]
        for n in self.topo_order():
            f0 = lit_node(self.fanin0[n])
            f1 = lit_node(self.fanin1[n])
            cuts0 = table[f0] if f0 != CONST0 else [(0, ())]
            cuts1 = table[f1] if f1 != CONST0 else [(0, ())]
            seen: dict[int, tuple[int, ...]] = {}
            for m0, l0 in cuts0:
                for m1, l1 in cuts1:
                    mask = m0 | m1
                    if mask.bit_count() > k or mask in seen:
                        continue
                    seen[mask] = tuple(sorted(set(l0) | set(l1)))
            # dominance pruning: drop any cut that is a superset of another
            masks = sorted(seen, key=lambda m: (m.bit_count(), seen[m]))
            kept: list[int] = []
            for m in masks:
                if any(m | km == m for km in kept):
                    continue
                kept.append(m)
                if len(kept) >= cap - 1:
                    break
            merged = [(1 << n, (n,))] + [(m, seen[m]) for m in kept]
            table[n] = merged
        self._cut_cache = ((k, cap), table)
        return table

    def cut_truth_table(self, cut: Cut) -> TruthTable:
        """Function of ``cut.root`` over its leaves (sorted leaf order)."""
        if len(cut.leaves) > 8:
            raise ValueError("cut too wide for truth table")
        nvars = len(cut.leaves)
        masks = {leaf: tt_var(i, nvars) for i, leaf in enumerate(cut.leaves)}
        tt = self._cone_eval(cut.root, masks, nvars)
        if tt is None:
            raise ValueError("leaves do not form a complete boundary")
        return TruthTable(tt, nvars)

    def _cone_eval(self, root, leaf_masks, nvars, limit=None):
        """Evaluate root over leaf masks; None if the cone escapes the leaves
        or visits more than ``limit`` nodes."""
        full = (1 << (1 << nvars)) - 1
        memo = dict(leaf_masks)
        memo[CONST0] = 0
        stack = [root]
        while stack:
            n = stack[-1]
            if n in memo:
                stack.pop()
                continue
            if not self.is_and(n) or not self.alive[n]:
                return None  # reached a PI (or dead node) outside the leaf set
            if limit is not None and len(memo) > limit + len(leaf_masks):
                return None
            f0, f1 = self.fanin0[n], self.fanin1[n]
            need = [f for f in (lit_node(f0), lit_node(f1)) if f not in memo]
            if need:
                stack.extend(need)
                continue
            v0 = memo[lit_node(f0)] ^ (full if lit_neg(f0) else 0)
            v1 = memo[lit_node(f1)] ^ (full if lit_neg(f1) else 0)
            memo[n] = v0 & v1
            stack.pop()
        return memo[root] & full

    # ------------------------------------------------------------------
    # integrity check (used by the test suite)

    def check(self) -> None:
        seen_pairs = {}
        for n in range(self.num_inputs + 1, len(self.fanin0)):
            if not self.alive[n]:
                continue
            f0, f1 = self.fanin0[n], self.fanin1[n]
            assert f0 <= f1, f"node {n} fanins not ordered"
            assert f0 > CONST1, f"node {n} has a constant fanin"
            assert self.alive[lit_node(f0)] and self.alive[lit_node(f1)], (
                f"node {n} references a dead node"
            )
            assert (f0, f1) not in seen_pairs, (
                f"nodes {seen_pairs[(f0, f1)]} and {n} share a fanin pair"
            )
            seen_pairs[(f0, f1)] = n
            assert self.strash.get((f0, f1)) == n, f"node {n} missing from strash"
        for o in self.outputs:
            assert self.alive[lit_node(o)], "output references a dead node"
        self.topo_order()  # raises on cycles


def random_vectors(num_inputs: int, n_vectors: int, seed: int) -> list[int]:
    """Seeded per-input bit masks for ``n_vectors`` random vectors."""
    rng = random.Random(seed)
    return [rng.getrandbits(n_vectors) for _ in range(num_inputs)]


def exhaustive_masks(num_inputs: int) -> list[int]:
    """Input masks covering all 2^n assignments (input i toggles with period 2^i)."""
    return [tt_var(i, num_inputs) for i in range(num_inputs)]


def equivalent(g1: Aig, g2: Aig, n_vectors: int = 1000, seed: int = 2024) -> bool:
    """Functional equivalence: exhaustive up to 12 inputs, else random vectors."""
    if g1.num_inputs != g2.num_inputs or len(g1.outputs) != len(g2.outputs):
        return False
    if g1.num_inputs <= 12:
        masks = exhaustive_masks(g1.num_inputs)
        width = 1 << g1.num_inputs
    else:
        masks = random_vectors(g1.num_inputs, n_vectors, seed)
        width = n_vectors
    return g1.simulate(masks, width) == g2.simulate(masks, width)
