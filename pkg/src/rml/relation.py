"""Relations over a finite string universe, represented as BDDs.

Every attribute occupies a block of ``universe.bits`` consecutive BDD
levels (big-endian within the block, so unsigned bit order matches index
order), and blocks are laid out in attribute order; attribute blocks are
never interleaved.  A Relation is a BDD root plus a mapping from
attribute names to block indices; stored relations use the internal
attributes i1..in in blocks 0..n-1.

All satisfying assignments of a Relation's root encode universe indices
in every attribute block (the domain-restricted representation), which
makes satisfying-assignment counting equal to cardinality and makes BDD
root equality coincide with relation equality.
"""

from __future__ import annotations

import re

from . import bdd
from .bdd import FALSE, TRUE, BddManager
from .errors import RmlRuntimeError

_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


def number_from_string(s: str) -> float:
    """The NUMBER conversion: 0.0 unless s is a numeric literal with an
    optional sign."""
    if _NUMBER_RE.match(s):
        return float(s)
    return 0.0


class Universe:
    """Immutable, lexicographically sorted set of strings with per-string
    quote flags; fixes the bit encoding of every relation."""

    __slots__ = ("strings", "index", "quoted", "bits")

    def __init__(self, strings_with_flags):
        flags: dict[str, bool] = {}
        for s, q in strings_with_flags:
            flags[s] = flags.get(s, False) or q
        self.strings = tuple(sorted(flags))
        self.index = {s: i for i, s in enumerate(self.strings)}
        self.quoted = flags
        n = len(self.strings)
        self.bits = max(1, (n - 1).bit_length()) if n > 1 else 1

    def __len__(self):
        return len(self.strings)

    def __contains__(self, s):
        return s in self.index


class Relation:
    """Arity, attribute-to-block mapping and a BDD root.

    The root is protected against garbage collection for the lifetime of
    the object."""

    __slots__ = ("mgr", "root", "attr_blocks", "__weakref__")

    def __init__(self, mgr: BddManager, root: int, attr_blocks: dict[str, int]):
        self.mgr = mgr
        self.root = root
        self.attr_blocks = dict(attr_blocks)
        mgr.protect(root)

    def __del__(self):
        try:
            self.mgr.release(self.root)
        except Exception:
            pass

    @property
    def arity(self) -> int:
        return len(self.attr_blocks)

    def names_in_block_order(self) -> list[str]:
        return sorted(self.attr_blocks, key=self.attr_blocks.get)

    def blocks(self) -> list[int]:
        return sorted(self.attr_blocks.values())

    def is_true(self) -> bool:
        return self.root == TRUE


def stored_attrs(arity: int) -> dict[str, int]:
    """Internal attribute layout i1..in in blocks 0..n-1."""
    return {f"i{k + 1}": k for k in range(arity)}


class Engine:
    """All relational operators over one universe and one BDD manager."""

    def __init__(self, mgr: BddManager, universe: Universe):
        self.mgr = mgr
        self.uni = universe
        self._domain_cache: dict[int, int] = {}

    # ------------------------------------------------------------------
    # encodings

    def block_levels(self, block: int) -> range:
        b = self.uni.bits
        return range(block * b, block * b + b)

    def eq_const(self, block: int, index: int) -> int:
        """Block equals the given universe index; a chain of `bits` nodes."""
        mgr = self.mgr
        b = self.uni.bits
        base = block * b

        def build():
            acc = TRUE
            for k in range(b - 1, -1, -1):
                if (index >> (b - 1 - k)) & 1:
                    acc = mgr.make_node(base + k, FALSE, acc)
                else:
                    acc = mgr.make_node(base + k, acc, FALSE)
            return acc

        return mgr.run_protected(build)

    def _less_const(self, block: int, bound: int) -> int:
        """Block value strictly below bound (0 <= bound <= 2^bits)."""
        mgr = self.mgr
        b = self.uni.bits
        base = block * b
        if bound >= (1 << b):
            return TRUE

        def build():
            acc = FALSE
            for k in range(b - 1, -1, -1):
                if (bound >> (b - 1 - k)) & 1:
                    acc = mgr.make_node(base + k, TRUE, acc)
                else:
                    acc = mgr.make_node(base + k, acc, FALSE)
            return acc

        return mgr.run_protected(build)

    def domain_constraint(self, block: int) -> int:
        """Exactly the indices 0..|universe|-1 in the block."""
        root = self._domain_cache.get(block)
        if root is None:
            root = self._less_const(block, len(self.uni))
            self.mgr.protect(root)  # cached refs must survive collections
            self._domain_cache[block] = root
        return root

    def _domain_all(self, blocks) -> int:
        mgr = self.mgr
        with mgr.keep() as keep:
            root = TRUE
            for block in sorted(blocks, reverse=True):
                root = keep(mgr.apply_and(self.domain_constraint(block), root))
            return root

    def _bit_pair(self, la: int, lb: int, kind: str) -> int:
        """Two-level gadget over bit levels la of A and lb of B:
        'eq' (a==b) or 'lt' (a<b).  Works for either level order."""
        mgr = self.mgr

        def build():
            if kind == "eq":
                top, bot = min(la, lb), max(la, lb)
                return mgr.make_node(
                    top,
                    mgr.make_node(bot, TRUE, FALSE),
                    mgr.make_node(bot, FALSE, TRUE))
            if la < lb:
                return mgr.make_node(la, mgr.make_node(lb, FALSE, TRUE), FALSE)
            return mgr.make_node(lb, FALSE, mgr.make_node(la, TRUE, FALSE))

        return mgr.run_protected(build)

    def eq_blocks(self, block_a: int, block_b: int) -> int:
        """Equality of two attribute blocks.  O(2^bits) nodes since the
        blocks are not interleaved."""
        if block_a == block_b:
            return TRUE
        mgr = self.mgr
        b = self.uni.bits
        with mgr.keep() as keep:
            acc = TRUE
            for k in range(b - 1, -1, -1):
                pair = keep(self._bit_pair(block_a * b + k, block_b * b + k, "eq"))
                acc = keep(mgr.apply_and(pair, acc))
            return acc

    def less_blocks(self, block_a: int, block_b: int) -> int:
        """Unsigned comparison block_a < block_b."""
        if block_a == block_b:
            return FALSE
        mgr = self.mgr
        b = self.uni.bits
        with mgr.keep() as keep:
            acc = FALSE
            for k in range(b - 1, -1, -1):
                la = block_a * b + k
                lb = block_b * b + k
                lt = keep(self._bit_pair(la, lb, "lt"))
                eq = keep(self._bit_pair(la, lb, "eq"))
                carry = keep(mgr.apply_and(eq, acc))
                acc = keep(mgr.apply_or(lt, carry))
            return acc

    def _from_vectors(self, vectors, width: int, base: int = 0) -> int:
        """BDD accepting exactly the given bit vectors (ints of `width`
        bits) over levels base..base+width-1."""
        mgr = self.mgr
        vectors = sorted(set(vectors))

        def build():
            def rec(lo, hi, bit):
                if lo == hi:
                    return FALSE
                if bit == width:
                    return TRUE
                split = lo
                mask = 1 << (width - 1 - bit)
                while split < hi and not (vectors[split] & mask):
                    split += 1
                return mgr.make_node(
                    base + bit, rec(lo, split, bit + 1), rec(split, hi, bit + 1))

            return rec(0, len(vectors), 0)

        return mgr.run_protected(build)

    def relation_from_tuples(self, tuples, arity: int) -> Relation:
        """Stored relation from string tuples; every element must be in
        the universe."""
        b = self.uni.bits
        index = self.uni.index
        width = arity * b
        vectors = []
        for t in tuples:
            v = 0
            for s in t:
                v = (v << b) | index[s]
            vectors.append(v)
        if arity == 0:
            root = TRUE if tuples else FALSE
        else:
            root = self._from_vectors(vectors, width)
        return Relation(self.mgr, root, stored_attrs(arity))

    # ------------------------------------------------------------------
    # atomic expressions

    def empty(self, attr_blocks: dict[str, int]) -> Relation:
        return Relation(self.mgr, FALSE, attr_blocks)

    def full(self, attr_blocks: dict[str, int]) -> Relation:
        if not attr_blocks:
            return Relation(self.mgr, TRUE, {})
        return Relation(self.mgr, self._domain_all(attr_blocks.values()),
                        attr_blocks)

    def atom(self, stored: Relation, positions) -> Relation:
        """Look up a stored relation with the given term list.

        positions is one descriptor per stored block:
          ('attr', name, target_block)  first occurrence of an attribute
          ('dup', first_position)       repeated attribute, forces equality
          ('const', index or None)      string constant (None: not in universe)
          ('any',)                      anonymous term
        """
        mgr = self.mgr
        b = self.uni.bits
        attrs = {p[1]: p[2] for p in positions if p[0] == "attr"}
        if any(p[0] == "const" and p[1] is None for p in positions):
            return self.empty(attrs)
        with mgr.keep() as keep:
            root = keep(stored.root)
            dead = []
            for i, p in enumerate(positions):
                tag = p[0]
                if tag == "const":
                    root = keep(mgr.apply_and(root, keep(self.eq_const(i, p[1]))))
                    dead.append(i)
                elif tag == "dup":
                    root = keep(mgr.apply_and(root, keep(self.eq_blocks(p[1], i))))
                    dead.append(i)
                elif tag == "any":
                    dead.append(i)
            if dead:
                levels = [l for i in dead for l in self.block_levels(i)]
                root = keep(mgr.exists(levels, root))
            level_map = {}
            for i, p in enumerate(positions):
                if p[0] == "attr" and p[2] != i:
                    for k in range(b):
                        level_map[i * b + k] = p[2] * b + k
            if level_map:
                root = mgr.rename(root, level_map)
            return Relation(mgr, root, attrs)

    def regex_select(self, pattern: str, term) -> Relation:
        """Universe strings containing a match of the POSIX-ERE-style
        pattern; term is ('attr', name, block), ('const', string) or
        ('any',)."""
        try:
            rx = re.compile(pattern)
        except re.error as exc:
            raise RmlRuntimeError(
                f'invalid regular expression "{pattern}": {exc}')
        if term[0] == "const":
            ok = term[1] in self.uni and rx.search(term[1]) is not None
            return Relation(self.mgr, TRUE if ok else FALSE, {})
        matches = [i for i, s in enumerate(self.uni.strings) if rx.search(s)]
        if term[0] == "any":
            return Relation(self.mgr, TRUE if matches else FALSE, {})
        name, block = term[1], term[2]
        root = self._from_vectors(matches, self.uni.bits, block * self.uni.bits)
        return Relation(self.mgr, root, {name: block})

    def lexicographic(self, op: str, t1, t2) -> Relation:
        """Predefined order relation over terms; each term is
        ('attr', name, block) or ('const', string).  Restricted to the
        universe, so a constant outside it yields the empty relation."""
        consts = [t[1] for t in (t1, t2) if t[0] == "const"]
        if any(s not in self.uni for s in consts):
            attrs = {t[1]: t[2] for t in (t1, t2) if t[0] == "attr"}
            return self.empty(attrs)
        if t1[0] == "const" and t2[0] == "const":
            return self.full({}) if _str_cmp(op, t1[1], t2[1]) else self.empty({})
        mgr = self.mgr
        if t1[0] == "attr" and t2[0] == "attr" and t1[1] == t2[1]:
            attrs = {t1[1]: t1[2]}
            if op in ("=", "<=", ">="):
                return self.full(attrs)
            return self.empty(attrs)
        with mgr.keep() as keep:
            if t1[0] == "attr" and t2[0] == "attr":
                a_block, b_block = t1[2], t2[2]
                attrs = {t1[1]: a_block, t2[1]: b_block}
                if op == "=":
                    core = keep(self.eq_blocks(a_block, b_block))
                elif op == "!=":
                    core = keep(mgr.apply_not(keep(self.eq_blocks(a_block, b_block))))
                elif op == "<":
                    core = keep(self.less_blocks(a_block, b_block))
                elif op == ">":
                    core = keep(self.less_blocks(b_block, a_block))
                elif op == "<=":
                    core = keep(mgr.apply_not(keep(self.less_blocks(b_block, a_block))))
                else:
                    core = keep(mgr.apply_not(keep(self.less_blocks(a_block, b_block))))
                root = keep(mgr.apply_and(core, keep(self._domain_all(attrs.values()))))
                return Relation(mgr, root, attrs)
            # one attribute, one constant
            if t1[0] == "attr":
                name, block = t1[1], t1[2]
                idx = self.uni.index[t2[1]]
                flipped = False
            else:
                name, block = t2[1], t2[2]
                idx = self.uni.index[t1[1]]
                flipped = True
            attrs = {name: block}
            effective = _flip_op(op) if flipped else op
            if effective == "=":
                core = keep(self.eq_const(block, idx))
            elif effective == "!=":
                core = keep(mgr.apply_not(keep(self.eq_const(block, idx))))
            elif effective == "<":
                core = keep(self._less_const(block, idx))
            elif effective == "<=":
                core = keep(self._less_const(block, idx + 1))
            elif effective == ">":
                core = keep(mgr.apply_not(keep(self._less_const(block, idx + 1))))
            else:
                core = keep(mgr.apply_not(keep(self._less_const(block, idx))))
            root = keep(mgr.apply_and(core, self.domain_constraint(block)))
            return Relation(mgr, root, attrs)

    # ------------------------------------------------------------------
    # boolean combinations

    def combine(self, op: str, a: Relation, b: Relation) -> Relation:
        """&, |, -> or <-> of two relations; attribute lists may differ,
        the union is taken and the result is re-restricted to the
        universe domain."""
        mgr = self.mgr
        attrs = dict(a.attr_blocks)
        for name, block in b.attr_blocks.items():
            if attrs.setdefault(name, block) != block:
                raise RmlRuntimeError(
                    f"attribute {name} evaluated at two different positions")
        with mgr.keep() as keep:
            if op == "&":
                root = keep(mgr.apply_and(a.root, b.root))
                return Relation(mgr, root, attrs)
            if op == "|":
                raw = keep(mgr.apply_or(a.root, b.root))
            elif op == "->":
                raw = keep(mgr.apply_or(keep(mgr.apply_not(a.root)), b.root))
            elif op == "<->":
                fwd = keep(mgr.apply_or(keep(mgr.apply_not(a.root)), b.root))
                bwd = keep(mgr.apply_or(keep(mgr.apply_not(b.root)), a.root))
                raw = keep(mgr.apply_and(fwd, bwd))
            else:
                raise ValueError(op)
            root = keep(mgr.apply_and(raw, keep(self._domain_all(attrs.values()))))
            return Relation(mgr, root, attrs)

    def negate(self, a: Relation) -> Relation:
        """Complement within the universe domain; attributes unchanged."""
        mgr = self.mgr
        with mgr.keep() as keep:
            root = keep(mgr.apply_not(a.root))
            if a.attr_blocks:
                dom = keep(self._domain_all(a.attr_blocks.values()))
                root = keep(mgr.apply_and(root, dom))
            return Relation(mgr, root, a.attr_blocks)

    def quantify_exists(self, a: Relation, names) -> Relation:
        # quantifying an attribute that is not free is tolerated as a no-op
        mgr = self.mgr
        present = [n for n in names if n in a.attr_blocks]
        attrs = {n: blk for n, blk in a.attr_blocks.items() if n not in set(present)}
        levels = [l for n in present for l in self.block_levels(a.attr_blocks[n])]
        root = mgr.exists(levels, a.root)
        return Relation(mgr, root, attrs)

    def quantify_forall(self, a: Relation, names) -> Relation:
        return self.negate(self.quantify_exists(self.negate(a), names))

    # ------------------------------------------------------------------
    # transitive closures

    def _pair_blocks(self, a: Relation) -> tuple[int, int]:
        if a.arity != 2:
            raise RmlRuntimeError("transitive closure needs a binary relation")
        p, q = sorted(a.attr_blocks.values())
        return p, q

    def transitive_closure(self, a: Relation) -> Relation:
        """TC: a variant of the Warshall algorithm, iterating over the
        elements occurring in the domain or range and adding
        result | (result-into-pivot x result-out-of-pivot).  Uses only
        unary and binary intermediates."""
        mgr = self.mgr
        b = self.uni.bits
        p, q = self._pair_blocks(a)
        p_base, q_base = p * b, q * b
        with mgr.keep() as keep:
            into = keep(mgr.exists(self.block_levels(q), a.root))
            out = keep(mgr.exists(self.block_levels(p), a.root))
            pivots = set()
            for bits in mgr.iter_assignments(into, self.block_levels(p)):
                pivots.add(_bits_to_int(bits))
            for bits in mgr.iter_assignments(out, self.block_levels(q)):
                pivots.add(_bits_to_int(bits))
            result = keep(a.root)
            for e in sorted(pivots):
                u = keep(mgr.restrict_block(result, q_base, b, e))
                if u == FALSE:
                    continue
                w = keep(mgr.restrict_block(result, p_base, b, e))
                if w == FALSE:
                    continue
                added = keep(mgr.apply_and(u, w))
                result = keep(mgr.apply_or(result, added))
            return Relation(mgr, result, a.attr_blocks)

    def transitive_closure_squaring(self, a: Relation) -> Relation:
        """TCFAST: repeated self-composition up to the fixed point; uses a
        ternary intermediate (faster, hungrier than TC)."""
        mgr = self.mgr
        b = self.uni.bits
        p, q = self._pair_blocks(a)
        s = q + 1
        shift_map = {}
        back_map = {}
        for k in range(b):
            shift_map[p * b + k] = q * b + k
            shift_map[q * b + k] = s * b + k
            back_map[s * b + k] = q * b + k
        with mgr.keep() as keep:
            result = keep(a.root)
            while True:
                second = keep(mgr.rename(result, shift_map))
                mid = keep(mgr.apply_and(result, second))
                hop = keep(mgr.exists(self.block_levels(q), mid))
                hop = keep(mgr.rename(hop, back_map))
                new = keep(mgr.apply_or(result, hop))
                if new == result:
                    return Relation(mgr, result, a.attr_blocks)
                result = new

    # ------------------------------------------------------------------
    # comparisons, counting, enumeration

    def compare(self, op: str, a: Relation, b: Relation) -> bool:
        """Relational comparison over total attribute assignments.  With
        equal attribute sets, equality is a root identity check."""
        mgr = self.mgr
        with mgr.keep() as keep:
            left, right = a.root, b.root
            if set(a.attr_blocks) != set(b.attr_blocks):
                only_a = [blk for n, blk in a.attr_blocks.items()
                          if n not in b.attr_blocks]
                only_b = [blk for n, blk in b.attr_blocks.items()
                          if n not in a.attr_blocks]
                if only_b:
                    left = keep(mgr.apply_and(left, keep(self._domain_all(only_b))))
                if only_a:
                    right = keep(mgr.apply_and(right, keep(self._domain_all(only_a))))
            if op == "=":
                return left == right
            if op == "!=":
                return left != right
            if op in ("<", "<="):
                sub = keep(mgr.apply_and(left, keep(mgr.apply_not(right)))) == FALSE
                return sub and (op == "<=" or left != right)
            if op in (">", ">="):
                sup = keep(mgr.apply_and(right, keep(mgr.apply_not(left)))) == FALSE
                return sup and (op == ">=" or left != right)
            raise ValueError(op)

    def cardinality(self, a: Relation) -> int:
        levels = [l for blk in a.attr_blocks.values()
                  for l in self.block_levels(blk)]
        return self.mgr.sat_count(a.root, levels)

    def iter_tuples(self, a: Relation):
        """Tuples of universe strings, columns in block order, rows in
        ascending encoded-index (= lexicographic) order."""
        b = self.uni.bits
        strings = self.uni.strings
        blocks = a.blocks()
        levels = [l for blk in blocks for l in self.block_levels(blk)]
        for bits in self.mgr.iter_assignments(a.root, levels):
            row = []
            for i in range(len(blocks)):
                row.append(strings[_bits_to_int(bits[i * b:(i + 1) * b])])
            yield tuple(row)

    def members(self, a: Relation) -> list[str]:
        """Elements of a unary relation in lexicographic order."""
        if a.arity != 1:
            raise RmlRuntimeError("expected a unary relation")
        return [t[0] for t in self.iter_tuples(a)]

    def aggregate(self, kind: str, a: Relation) -> float:
        """MIN/MAX/SUM/AVG of NUMBER(s) over a non-empty unary relation."""
        values = [number_from_string(s) for s in self.members(a)]
        if not values:
            raise RmlRuntimeError(f"{kind} applied to an empty relation")
        if kind == "MIN":
            return min(values)
        if kind == "MAX":
            return max(values)
        if kind == "SUM":
            return sum(values)
        if kind == "AVG":
            return sum(values) / len(values)
        raise ValueError(kind)

    # ------------------------------------------------------------------
    # assignment

    def assign(self, old: Relation | None, lhs, value: Relation) -> Relation:
        """Store `value` under the left-hand side term list `lhs`
        (('attr', name) or ('const', string) per position), normalized to
        the internal attributes i1..in in left-hand-side order.

        Positions holding constants perform a partial update: tuples of
        the old relation that differ from the constants at some constant
        position survive."""
        mgr = self.mgr
        b = self.uni.bits
        n = len(lhs)
        first_pos: dict[str, int] = {}
        dups = []
        consts = []
        level_map = {}
        for i, term in enumerate(lhs):
            if term[0] == "attr":
                name = term[1]
                if name in first_pos:
                    dups.append((first_pos[name], i))
                else:
                    first_pos[name] = i
                    src = value.attr_blocks[name]
                    if src != i:
                        for k in range(b):
                            level_map[src * b + k] = i * b + k
            else:
                consts.append((i, self.uni.index[term[1]]))
        with mgr.keep() as keep:
            root = keep(value.root)
            if level_map:
                root = keep(mgr.rename(root, level_map))
            for i, j in dups:
                root = keep(mgr.apply_and(root, keep(self.eq_blocks(i, j))))
            for i, idx in consts:
                root = keep(mgr.apply_and(root, keep(self.eq_const(i, idx))))
            if consts:
                if old is not None and old.arity != n:
                    raise RmlRuntimeError(
                        "partial update with mismatched arity "
                        f"({old.arity} stored, {n} on the left-hand side)")
                old_root = old.root if old is not None else FALSE
                match = TRUE
                for i, idx in consts:
                    match = keep(mgr.apply_and(keep(self.eq_const(i, idx)), match))
                survivors = keep(mgr.apply_and(
                    old_root, keep(mgr.apply_not(match))))
                root = keep(mgr.apply_or(root, survivors))
            return Relation(mgr, root, stored_attrs(n))


def _bits_to_int(bits) -> int:
    v = 0
    for bit in bits:
        v = (v << 1) | bit
    return v


def _str_cmp(op: str, a: str, b: str) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _flip_op(op: str) -> str:
    return {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}[op]
