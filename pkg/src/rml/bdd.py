"""Reduced ordered binary decision diagrams with a fixed node budget.

Node references are plain ints; 0 and 1 are the FALSE and TRUE terminals.
Structurally identical nodes are hash-consed in a unique table, so two
diagrams denote the same boolean function iff their root refs are equal.

The arena is sized once, from a memory budget in megabytes, and never
grows.  When an allocation does not fit, a mark-and-sweep collection over
the externally protected roots runs and the interrupted operation is
restarted once; if it still does not fit, BddOutOfMemoryError is raised.
Operation caches are cleared on every collection (correctness over speed
at the memory boundary) and are otherwise unbounded."""

from __future__ import annotations

from .errors import BddInternalError, BddOutOfMemoryError

FALSE = 0
TRUE = 1

# Terminals sort below every decision level.
TERMINAL_LEVEL = 1 << 30

# Rough per-node cost of the arena, unique table and cache shares.
NODE_BYTES = 24


class _TableFull(Exception):
    """Internal: arena exhausted; collect and retry before giving up."""


class _Keep:
    """Protects intermediate refs for the duration of a with-block."""

    __slots__ = ("_mgr", "_refs")

    def __init__(self, mgr):
        self._mgr = mgr
        self._refs = []

    def __call__(self, ref):
        self._mgr.protect(ref)
        self._refs.append(ref)
        return ref

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        release = self._mgr.release
        for ref in self._refs:
            release(ref)
        return False


class BddManager:
    """Fixed-capacity hash-consed node store with operation caches."""

    def __init__(self, memory_mb: int = 50):
        if memory_mb < 1:
            raise ValueError("memory budget must be at least 1 MB")
        self.memory_mb = memory_mb
        self.capacity = (memory_mb << 20) // NODE_BYTES
        self._level = [TERMINAL_LEVEL, TERMINAL_LEVEL]
        self._low = [0, 1]
        self._high = [0, 1]
        self._table: dict = {}
        self._free: list[int] = []
        # ref -> protection count; protected refs are the GC roots
        self._protected: dict[int, int] = {FALSE: 1, TRUE: 1}
        self._shift = self.capacity.bit_length() + 1
        self._and_cache: dict = {}
        self._or_cache: dict = {}
        self._not_cache: dict = {}
        self._exists_cache: dict = {}
        self.gc_count = 0

    # ------------------------------------------------------------------
    # arena

    @property
    def allocated(self) -> int:
        """Internal nodes currently in use (terminals excluded)."""
        return len(self._level) - 2 - len(self._free)

    def free_node_stats(self) -> tuple[int, int, int]:
        """(free, total, percent) of the arena, percent floored."""
        total = self.capacity
        free = total - self.allocated
        return free, total, (100 * free) // total

    def make_node(self, level: int, low: int, high: int) -> int:
        if low == high:
            return low
        if level >= self._level[low] or level >= self._level[high]:
            raise BddInternalError(
                f"BDD ordering violated at level {level}")
        key = (level << self._shift * 2) | (low << self._shift) | high
        ref = self._table.get(key)
        if ref is not None:
            return ref
        if self._free:
            ref = self._free.pop()
            self._level[ref] = level
            self._low[ref] = low
            self._high[ref] = high
        elif len(self._level) < self.capacity:
            ref = len(self._level)
            self._level.append(level)
            self._low.append(low)
            self._high.append(high)
        else:
            raise _TableFull()
        self._table[key] = ref
        return ref

    def level_of(self, ref: int) -> int:
        return self._level[ref]

    def children(self, ref: int) -> tuple[int, int]:
        return self._low[ref], self._high[ref]

    # ------------------------------------------------------------------
    # root protection and garbage collection

    def protect(self, ref: int) -> int:
        self._protected[ref] = self._protected.get(ref, 0) + 1
        return ref

    def release(self, ref: int) -> None:
        count = self._protected.get(ref, 0)
        if count <= 1:
            self._protected.pop(ref, None)
        else:
            self._protected[ref] = count - 1

    def keep(self) -> _Keep:
        return _Keep(self)

    def collect_garbage(self) -> None:
        """Mark-and-sweep from the protected roots; clears all caches."""
        self.gc_count += 1
        level = self._level
        low = self._low
        high = self._high
        marked = set()
        stack = [r for r in self._protected if r > 1]
        while stack:
            ref = stack.pop()
            if ref in marked:
                continue
            marked.add(ref)
            child = low[ref]
            if child > 1 and child not in marked:
                stack.append(child)
            child = high[ref]
            if child > 1 and child not in marked:
                stack.append(child)
        table = {}
        free = []
        shift = self._shift
        for ref in range(2, len(level)):
            if ref in marked:
                key = (level[ref] << shift * 2) | (low[ref] << shift) | high[ref]
                table[key] = ref
            else:
                free.append(ref)
        self._table = table
        self._free = free
        self._and_cache.clear()
        self._or_cache.clear()
        self._not_cache.clear()
        self._exists_cache.clear()

    def run_protected(self, fn, *roots: int):
        """Run fn, with roots protected; on arena exhaustion collect once
        and retry, then fail with the out-of-memory error."""
        for ref in roots:
            self.protect(ref)
        try:
            try:
                return fn()
            except _TableFull:
                self.collect_garbage()
                try:
                    return fn()
                except _TableFull:
                    raise BddOutOfMemoryError() from None
        finally:
            for ref in roots:
                self.release(ref)

    # ------------------------------------------------------------------
    # boolean operations

    def apply_and(self, a: int, b: int) -> int:
        return self.run_protected(lambda: self._and(a, b), a, b)

    def apply_or(self, a: int, b: int) -> int:
        return self.run_protected(lambda: self._or(a, b), a, b)

    def apply_not(self, a: int) -> int:
        return self.run_protected(lambda: self._not(a), a)

    def _and(self, a: int, b: int) -> int:
        cache = self._and_cache
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        shift = self._shift

        def rec(x, y):
            if x == 0 or y == 0:
                return 0
            if x == 1:
                return y
            if y == 1 or x == y:
                return x
            if x > y:
                x, y = y, x
            key = (x << shift) | y
            r = cache.get(key)
            if r is not None:
                return r
            lx = level[x]
            ly = level[y]
            if lx < ly:
                r = make(lx, rec(low[x], y), rec(high[x], y))
            elif ly < lx:
                r = make(ly, rec(x, low[y]), rec(x, high[y]))
            else:
                r = make(lx, rec(low[x], low[y]), rec(high[x], high[y]))
            cache[key] = r
            return r

        return rec(a, b)

    def _or(self, a: int, b: int) -> int:
        cache = self._or_cache
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        shift = self._shift

        def rec(x, y):
            if x == 1 or y == 1:
                return 1
            if x == 0:
                return y
            if y == 0 or x == y:
                return x
            if x > y:
                x, y = y, x
            key = (x << shift) | y
            r = cache.get(key)
            if r is not None:
                return r
            lx = level[x]
            ly = level[y]
            if lx < ly:
                r = make(lx, rec(low[x], y), rec(high[x], y))
            elif ly < lx:
                r = make(ly, rec(x, low[y]), rec(x, high[y]))
            else:
                r = make(lx, rec(low[x], low[y]), rec(high[x], high[y]))
            cache[key] = r
            return r

        return rec(a, b)

    def _not(self, a: int) -> int:
        cache = self._not_cache
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node

        def rec(x):
            if x == 0:
                return 1
            if x == 1:
                return 0
            r = cache.get(x)
            if r is not None:
                return r
            r = make(level[x], rec(low[x]), rec(high[x]))
            cache[x] = r
            return r

        return rec(a)

    # ------------------------------------------------------------------
    # quantification

    def exists(self, levels, a: int) -> int:
        """Existential quantification of a set of levels."""
        levels = frozenset(levels)
        if not levels:
            return a
        return self.run_protected(lambda: self._exists(levels, a), a)

    def forall(self, levels, a: int) -> int:
        levels = frozenset(levels)
        if not levels:
            return a
        return self.run_protected(
            lambda: self._not(self._exists(levels, self._not(a))), a)

    def _exists(self, levels: frozenset, a: int) -> int:
        cache = self._exists_cache
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        disj = self._or
        deepest = max(levels)

        def rec(x):
            if x <= 1:
                return x
            lx = level[x]
            if lx > deepest:
                return x
            key = (x, levels)
            r = cache.get(key)
            if r is not None:
                return r
            if lx in levels:
                r = disj(rec(low[x]), rec(high[x]))
            else:
                r = make(lx, rec(low[x]), rec(high[x]))
            cache[key] = r
            return r

        return rec(a)

    # ------------------------------------------------------------------
    # structure

    def support(self, a: int) -> set[int]:
        """Levels occurring in a."""
        level = self._level
        low = self._low
        high = self._high
        seen = set()
        result = set()
        stack = [a]
        while stack:
            ref = stack.pop()
            if ref <= 1 or ref in seen:
                continue
            seen.add(ref)
            result.add(level[ref])
            stack.append(low[ref])
            stack.append(high[ref])
        return result

    def node_count(self, a: int) -> int:
        """Distinct internal nodes reachable from a (terminals excluded)."""
        low = self._low
        high = self._high
        seen = set()
        stack = [a]
        while stack:
            ref = stack.pop()
            if ref <= 1 or ref in seen:
                continue
            seen.add(ref)
            stack.append(low[ref])
            stack.append(high[ref])
        return len(seen)

    # ------------------------------------------------------------------
    # renaming

    def rename(self, a: int, level_map: dict[int, int]) -> int:
        """Move each occurring level l to level_map[l] (injective on the
        support).  Order-preserving maps are a single rebuild; any other
        map falls back to successive adjacent-level swaps, which can be
        expensive."""
        support = sorted(self.support(a))
        effective = {l: level_map.get(l, l) for l in support}
        if all(s == t for s, t in effective.items()):
            return a
        targets = [effective[l] for l in support]
        if len(set(targets)) != len(targets):
            raise BddInternalError("rename map is not injective")
        if all(x < y for x, y in zip(targets, targets[1:])):
            return self.run_protected(
                lambda: self._rename_monotone(a, effective), a)
        return self.run_protected(
            lambda: self._rename_swapping(a, effective), a)

    def _rename_monotone(self, a: int, level_map: dict[int, int]) -> int:
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        memo = {}

        def rec(x):
            if x <= 1:
                return x
            r = memo.get(x)
            if r is not None:
                return r
            lx = level[x]
            r = make(level_map.get(lx, lx), rec(low[x]), rec(high[x]))
            memo[x] = r
            return r

        return rec(a)

    def _rename_swapping(self, a: int, level_map: dict[int, int]) -> int:
        # Realize the level permutation as adjacent transpositions.
        positions = sorted(set(level_map) | set(level_map.values()))
        width = positions[-1] + 1
        taken = set(level_map.values())
        spare = iter(p for p in range(width) if p not in taken)
        target = {}
        for p in range(width):
            if p in level_map:
                target[p] = level_map[p]
            else:
                target[p] = next(spare)
        content = list(range(width))
        root = a
        changed = True
        while changed:
            changed = False
            for j in range(width - 1):
                if target[content[j]] > target[content[j + 1]]:
                    root = self._swap_adjacent(root, j)
                    content[j], content[j + 1] = content[j + 1], content[j]
                    changed = True
        return root

    def _swap_adjacent(self, a: int, l: int) -> int:
        """Exchange the roles of levels l and l+1."""
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        memo = {}

        def cof(x, at, bit):
            if x > 1 and level[x] == at:
                return high[x] if bit else low[x]
            return x

        def rec(x):
            if x <= 1:
                return x
            lx = level[x]
            if lx > l + 1:
                return x
            r = memo.get(x)
            if r is not None:
                return r
            if lx < l:
                r = make(lx, rec(low[x]), rec(high[x]))
            else:
                f00 = cof(cof(x, l, 0), l + 1, 0)
                f01 = cof(cof(x, l, 0), l + 1, 1)
                f10 = cof(cof(x, l, 1), l + 1, 0)
                f11 = cof(cof(x, l, 1), l + 1, 1)
                r = make(l, make(l + 1, f00, f10), make(l + 1, f01, f11))
            memo[x] = r
            return r

        return rec(a)

    # ------------------------------------------------------------------
    # restriction and counting

    def restrict_block(self, a: int, base: int, bits: int, value: int) -> int:
        """Cofactor of a with the levels base..base+bits-1 fixed to the
        big-endian bits of value; the result no longer depends on them."""
        return self.run_protected(
            lambda: self._restrict_block(a, base, bits, value), a)

    def _restrict_block(self, a: int, base: int, bits: int, value: int) -> int:
        level = self._level
        low = self._low
        high = self._high
        make = self.make_node
        last = base + bits - 1
        memo = {}

        def rec(x):
            if x <= 1:
                return x
            lx = level[x]
            if lx > last:
                return x
            r = memo.get(x)
            if r is not None:
                return r
            if base <= lx:
                bit = (value >> (last - lx)) & 1
                r = rec(high[x] if bit else low[x])
            else:
                r = make(lx, rec(low[x]), rec(high[x]))
            memo[x] = r
            return r

        return rec(a)

    def sat_count(self, a: int, levels) -> int:
        """Number of assignments to `levels` satisfying a; levels must
        cover the support of a."""
        levels = sorted(levels)
        total = len(levels)
        if a == 0:
            return 0
        if a == 1:
            return 1 << total
        rank = {l: i for i, l in enumerate(levels)}
        level = self._level
        low = self._low
        high = self._high
        memo = {}

        def rank_of(x):
            return total if x <= 1 else rank[level[x]]

        def count(x):
            # assignments to levels from rank_of(x) on
            if x == 0:
                return 0
            if x == 1:
                return 1
            r = memo.get(x)
            if r is not None:
                return r
            here = rank[level[x]]
            lo, hi = low[x], high[x]
            r = (count(lo) << (rank_of(lo) - here - 1)) + \
                (count(hi) << (rank_of(hi) - here - 1))
            memo[x] = r
            return r

        try:
            return count(a) << rank_of(a)
        except KeyError:
            raise BddInternalError(
                "sat_count levels do not cover the BDD support") from None

    def iter_assignments(self, a: int, levels):
        """Yield bit tuples over `levels` (ascending), in ascending order
        of the bit string; levels must cover the support of a."""
        levels = sorted(levels)
        level = self._level
        low = self._low
        high = self._high
        n = len(levels)
        bits = [0] * n

        def rec(x, i):
            if x == 0:
                return
            if i == n:
                yield tuple(bits)
                return
            lx = level[x]
            if lx == levels[i]:
                bits[i] = 0
                yield from rec(low[x], i + 1)
                bits[i] = 1
                yield from rec(high[x], i + 1)
            elif lx > levels[i]:
                bits[i] = 0
                yield from rec(x, i + 1)
                bits[i] = 1
                yield from rec(x, i + 1)
            else:
                raise BddInternalError(
                    "assignment levels do not cover the BDD support")

        yield from rec(a, 0)
