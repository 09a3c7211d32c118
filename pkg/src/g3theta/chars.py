"""Exact arithmetic and combinatorics of theta characteristics.

A characteristic in degree ``g`` is a class in (1/2 Z^g x 1/2 Z^g) modulo
(Z^g x Z^g).  We store twice the canonical representative, i.e. two bit
vectors ``top`` and ``bottom`` of length ``g``; the representative itself is
``(top/2, bottom/2)`` in {0, 1/2}^{2g}.  The group law is coordinatewise XOR
and every sign below is computed with integer arithmetic only, so all results
in this module are exact.

Canonical ordering: characteristics are ordered by the 2g-bit big-endian
integer ``top || bottom``.  Every search in this module walks that order, so
results are deterministic and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Optional

from .errors import (
    BadCharacteristic,
    CoverageFailure,
    DimensionMismatch,
    NoDecomposition,
    NonDistinct,
    SearchFailed,
    WrongCount,
)


@dataclass(frozen=True)
class Characteristic:
    """A theta characteristic class, stored as two bit vectors.

    ``top`` holds 2a' mod 2 and ``bottom`` holds 2a'' mod 2.
    """

    top: tuple
    bottom: tuple

    def __post_init__(self):
        top = tuple(int(b) for b in self.top)
        bottom = tuple(int(b) for b in self.bottom)
        if len(top) != len(bottom):
            raise DimensionMismatch("top and bottom must have equal length")
        if not all(b in (0, 1) for b in top + bottom):
            raise BadCharacteristic("entries must be bits in {0, 1}")
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)

    @property
    def g(self) -> int:
        return len(self.top)

    @property
    def index(self) -> int:
        """Position in the canonical order: big-endian ``top || bottom``."""
        idx = 0
        for b in self.top + self.bottom:
            idx = (idx << 1) | b
        return idx

    @classmethod
    def from_index(cls, g: int, idx: int) -> "Characteristic":
        if not 0 <= idx < 4**g:
            raise BadCharacteristic(f"index {idx} out of range for g={g}")
        bits = [(idx >> (2 * g - 1 - i)) & 1 for i in range(2 * g)]
        return cls(tuple(bits[:g]), tuple(bits[g:]))

    @classmethod
    def zero(cls, g: int) -> "Characteristic":
        return cls((0,) * g, (0,) * g)

    @classmethod
    def from_string(cls, text: str) -> "Characteristic":
        """Parse the textual form ``t1..tg/b1..bg``, e.g. ``"100/100"``."""
        try:
            top, bottom = text.strip().split("/")
        except ValueError:
            raise BadCharacteristic(f"malformed characteristic string {text!r}")
        if len(top) != len(bottom) or not top:
            raise BadCharacteristic(f"malformed characteristic string {text!r}")
        if set(top + bottom) - {"0", "1"}:
            raise BadCharacteristic(f"malformed characteristic string {text!r}")
        return cls(tuple(int(c) for c in top), tuple(int(c) for c in bottom))

    def __str__(self) -> str:
        return "".join(map(str, self.top)) + "/" + "".join(map(str, self.bottom))

    @property
    def is_zero(self) -> bool:
        return not any(self.top) and not any(self.bottom)


@dataclass(frozen=True)
class HalfIntVector:
    """A half-integer vector of length 2g, stored exactly as 2x its value."""

    twice: tuple

    def __post_init__(self):
        object.__setattr__(self, "twice", tuple(int(v) for v in self.twice))

    @property
    def g(self) -> int:
        return len(self.twice) // 2


def add(a: Characteristic, b: Characteristic) -> Characteristic:
    """Group law on characteristic classes: coordinatewise XOR."""
    if a.g != b.g:
        raise DimensionMismatch(f"degree mismatch: {a.g} vs {b.g}")
    return Characteristic(
        tuple(x ^ y for x, y in zip(a.top, b.top)),
        tuple(x ^ y for x, y in zip(a.bottom, b.bottom)),
    )


def product(chars: Iterable[Characteristic]) -> Characteristic:
    """XOR of a nonempty iterable of characteristics."""
    chars = list(chars)
    out = chars[0]
    for c in chars[1:]:
        out = add(out, c)
    return out


def parity_sign(a: Characteristic) -> int:
    """The sign (a) = exp(4 pi i a'^T a''); +1 means even, -1 odd."""
    return -1 if sum(x * y for x, y in zip(a.top, a.bottom)) % 2 else 1


def pair_sign(a: Characteristic, b: Characteristic) -> int:
    """The one-sided sign (a,b) = exp(4 pi i a''^T b')."""
    if a.g != b.g:
        raise DimensionMismatch(f"degree mismatch: {a.g} vs {b.g}")
    return -1 if sum(x * y for x, y in zip(a.bottom, b.top)) % 2 else 1


def double_pair_sign(a: Characteristic, b: Characteristic) -> int:
    """The symmetric sign ((a,b)) = (a,b)(b,a)."""
    return pair_sign(a, b) * pair_sign(b, a)


def triple_sign(a: Characteristic, b: Characteristic, c: Characteristic) -> int:
    """The sign (((a,b,c))) = ((b,c))((c,a))((a,b)); -1 means azygetic.

    Raises NonDistinct if two of the three classes coincide.
    """
    if a == b or b == c or a == c:
        raise NonDistinct("triple sign requires pairwise distinct classes")
    return double_pair_sign(b, c) * double_pair_sign(c, a) * double_pair_sign(a, b)


@lru_cache(maxsize=8)
def enumerate_all(g: int):
    return tuple(Characteristic.from_index(g, i) for i in range(4**g))


@lru_cache(maxsize=8)
def enumerate_by_parity(g: int):
    """All classes in degree g split into (even list, odd list), canonical order."""
    if g < 1:
        raise DimensionMismatch("g must be >= 1")
    even = tuple(a for a in enumerate_all(g) if parity_sign(a) == 1)
    odd = tuple(a for a in enumerate_all(g) if parity_sign(a) == -1)
    return even, odd


def difference_representation_count(a: Characteristic) -> int:
    """Number of pairs (o, e), o odd and e even, with o + e = a."""
    even, odd = enumerate_by_parity(a.g)
    even_set = frozenset(even)
    return sum(1 for o in odd if add(o, a) in even_set)


def is_fundamental_system(members) -> tuple:
    """Check 8 distinct classes with all 56 triples azygetic.

    Returns ``(ok, diagnostics)`` where diagnostics names the first failure,
    or is None on success.  Raises WrongCount unless exactly 8 members are
    given.
    """
    members = list(members)
    if len(members) != 8:
        raise WrongCount(f"a fundamental system has 8 members, got {len(members)}")
    for i, j in combinations(range(8), 2):
        if members[i] == members[j]:
            return False, f"repeated class {members[i]} at positions {i}, {j}"
    for i, j, k in combinations(range(8), 3):
        if triple_sign(members[i], members[j], members[k]) != -1:
            return False, (
                f"syzygetic triple ({members[i]}, {members[j]}, {members[k]})"
            )
    return True, None


@dataclass(frozen=True)
class FundamentalSystem:
    """An ordered 8-tuple of characteristics, every triple azygetic.

    ``j`` is half the sum of the eight fixed representatives (exact), ``k``
    the class sum of the odd members, and ``odd_count`` their number.
    """

    members: tuple
    j: HalfIntVector
    k: Characteristic
    odd_count: int

    @classmethod
    def from_members(cls, members) -> "FundamentalSystem":
        members = tuple(members)
        ok, diag = is_fundamental_system(members)
        if not ok:
            raise BadCharacteristic(f"not a fundamental system: {diag}")
        g = members[0].g
        popcount = [sum(m.top[i] for m in members) for i in range(g)]
        popcount += [sum(m.bottom[i] for m in members) for i in range(g)]
        if any(p % 2 for p in popcount):
            raise SearchFailed("representative sum is not half-integral")
        j = HalfIntVector(tuple(p // 2 for p in popcount))
        odd = [m for m in members if parity_sign(m) == -1]
        if len(odd) not in (3, 7):
            raise SearchFailed(f"odd member count {len(odd)} not in {{3, 7}}")
        k = product(odd)
        if parity_sign(k) != 1:
            raise SearchFailed("sum of odd members is not even")
        return cls(members, j, k, len(odd))

    @property
    def g(self) -> int:
        return self.members[0].g

    def translate(self, a: Characteristic) -> "FundamentalSystem":
        return FundamentalSystem.from_members(tuple(add(m, a) for m in self.members))


def j_pair_sign(j: HalfIntVector, a: Characteristic) -> int:
    """The sign (j,a) = exp(4 pi i j''^T a'), evaluated on fixed representatives.

    With j'' stored as ``twice/2`` the exponent reduces to
    pi*i * sum(twice'' * top), so the sign is exact.
    """
    g = a.g
    s = sum(j.twice[g + i] * a.top[i] for i in range(g))
    return -1 if s % 2 else 1


@lru_cache(maxsize=1)
def _pairing_bits():
    """64x64 table of bits p with ((a,b)) = (-1)^p, for g=3."""
    chars = enumerate_all(3)
    return tuple(
        tuple(0 if double_pair_sign(a, b) == 1 else 1 for b in chars) for a in chars
    )


@lru_cache(maxsize=1)
def build_fundamental_system() -> FundamentalSystem:
    """Deterministic backtracking for the lexicographically first system (g=3).

    Members are produced in increasing canonical order; the azygetic
    condition is enforced after each added member, so the search is heavily
    pruned.  Failure is fatal (cannot happen).
    """
    chars = enumerate_all(3)
    pb = _pairing_bits()
    chosen: list = []

    def backtrack(start: int) -> bool:
        if len(chosen) == 8:
            return True
        for c in range(start, 64):
            ok = True
            for x, y in combinations(chosen, 2):
                if (pb[x][y] + pb[x][c] + pb[y][c]) % 2 != 1:
                    ok = False
                    break
            if not ok:
                continue
            chosen.append(c)
            if backtrack(c + 1):
                return True
            chosen.pop()
        return False

    if not backtrack(0):
        raise SearchFailed("no fundamental system found in degree three")
    return FundamentalSystem.from_members(tuple(chars[c] for c in chosen))


@dataclass(frozen=True)
class PencilStatistics:
    translates: tuple
    seven_odd_count: int
    three_odd_count: int
    k_class: Characteristic


def pencil_statistics(system: FundamentalSystem) -> PencilStatistics:
    """The 64 translates of a fundamental system, each revalidated."""
    translates = tuple(system.translate(a) for a in enumerate_all(system.g))
    seven = sum(1 for t in translates if t.odd_count == 7)
    three = sum(1 for t in translates if t.odd_count == 3)
    ks = {t.k for t in translates}
    if len(ks) != 1:
        raise SearchFailed("k is not constant through the pencil")
    return PencilStatistics(translates, seven, three, system.k)


def pencil_representatives(system: FundamentalSystem):
    """One fundamental system per pencil: 36 systems with distinct even k.

    From the base system {alpha..nu} with odd-sum k, each four-subset with
    product a yields the derived system {alpha*a, .., delta*a, kappa..nu}
    with odd-sum k*a; walking all four-subsets covers every even class once.
    """
    reps = {system.k.index: system}
    for idxs in combinations(range(8), 4):
        a = product([system.members[i] for i in idxs])
        expected_k = add(system.k, a)
        if expected_k.index in reps:
            continue
        members = tuple(
            add(m, a) if i in idxs else m for i, m in enumerate(system.members)
        )
        derived = FundamentalSystem.from_members(members)
        if derived.k != expected_k:
            raise CoverageFailure("derived system has unexpected odd-sum")
        reps[derived.k.index] = derived
    even, _ = enumerate_by_parity(system.g)
    if sorted(reps) != sorted(e.index for e in even):
        raise CoverageFailure(
            f"representatives cover {len(reps)} pencils, expected {len(even)}"
        )
    return tuple(reps[idx] for idx in sorted(reps))


@dataclass(frozen=True)
class Decomposition:
    """A fundamental system split as {alpha..delta} u {kappa..nu} with
    alpha*beta*gamma*delta = a."""

    system: FundamentalSystem
    four: tuple
    rest: tuple
    j: HalfIntVector


def decompose_for(a: Characteristic, k: Characteristic, reps) -> Decomposition:
    """Split the representative with odd-sum ``k`` into a 4-subset of product
    ``a`` plus its complement.

    Preconditions: ``a`` nonzero, ``k`` even, ``k + a`` even.  The search walks
    the 70 four-subsets in a fixed order; absence of a decomposition is fatal.
    """
    if a.is_zero:
        raise BadCharacteristic("a must be nonzero")
    if parity_sign(k) != 1:
        raise BadCharacteristic("k must be even")
    if parity_sign(add(k, a)) != 1:
        raise BadCharacteristic("k + a must be even")
    system = None
    for rep in reps:
        if rep.k == k:
            system = rep
            break
    if system is None:
        raise NoDecomposition(f"no representative with odd-sum {k}")
    for idxs in combinations(range(8), 4):
        four = tuple(system.members[i] for i in idxs)
        if product(four) == a:
            rest = tuple(m for i, m in enumerate(system.members) if i not in idxs)
            return Decomposition(system, four, rest, system.j)
    raise NoDecomposition(f"no 4-subset of the system for {k} has product {a}")
