"""Exact counting for +-1 bridge walks and their rotations.

Everything here is exact: enumeration produces step tuples, probabilities
are fractions, and the closed-form first-return pmf is compared against
enumeration without any floating point.  Enumeration is capped at n = 24;
the closed-form pmf itself scales far beyond that.

A "bridge" is a walk of length n conditioned to end at a fixed endpoint a.
For a < 0, rotating a bridge at its first minimum produces a path that
first returns to -1 at an odd time Z, splits there into two first-passage
pieces, and remembers the rotation offset K; those three objects carry all
the distributional structure checked by the test suite.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .paths import LatticeWalk

__all__ = [
    "ENUMERATION_CAP",
    "BridgeEnsemble",
    "ExactPmf",
    "enumerate_bridges",
    "count_first_passage",
    "z_pmf",
    "empirical_z_pmf",
    "conditional_piece_laws",
    "helper_distribution",
    "bijection_check",
    "helper_uniform_check",
    "factorization_check",
    "rotate_at_min",
    "first_hit_index",
]

ENUMERATION_CAP = 24


class ExactPmf:
    """A probability mass function with Fraction masses summing to one."""

    __slots__ = ("_masses",)

    def __init__(self, masses: dict):
        ms = {k: Fraction(v) for k, v in masses.items() if v != 0}
        total = sum(ms.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        self._masses = ms

    @property
    def support(self) -> tuple:
        return tuple(sorted(self._masses))

    def mass(self, key) -> Fraction:
        return self._masses.get(key, Fraction(0))

    def items(self):
        return sorted(self._masses.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactPmf):
            return NotImplemented
        return self._masses == other._masses

    def __hash__(self):
        return hash(frozenset(self._masses.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self.items())
        return f"ExactPmf({{{inner}}})"


@dataclass(frozen=True)
class BridgeEnsemble:
    """All +-1 walks of length n ending at `endpoint`, as step tuples."""

    n: int
    endpoint: int
    walks: tuple[tuple[int, ...], ...]


def _check_parity(n: int, a: int) -> None:
    if n < 1:
        raise ValueError("walk length must be at least 1")
    if (n + a) % 2 or abs(a) > n:
        raise ValueError(f"no walks of length {n} end at {a} (parity or range)")


def enumerate_bridges(n: int, a: int) -> BridgeEnsemble:
    """Enumerate every walk of length n ending at a, with budget pruning."""
    _check_parity(n, a)
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumeration capped at n = {ENUMERATION_CAP}")
    walks: list[tuple[int, ...]] = []
    buf = [0] * n

    def rec(i: int, s: int) -> None:
        r = n - i
        d = a - s
        if abs(d) > r or (r - d) % 2:
            return
        if i == n:
            walks.append(tuple(buf))
            return
        for step in (1, -1):
            buf[i] = step
            rec(i + 1, s + step)

    rec(0, 0)
    return BridgeEnsemble(n=n, endpoint=a, walks=tuple(walks))


def _values(steps: tuple[int, ...]) -> list[int]:
    out = [0]
    for s in steps:
        out.append(out[-1] + s)
    return out


def rotate_at_min(steps: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Step-tuple version of the Vervaat rotation; returns (rotated, K).

    The rotation point is the first argmin of the partial sums over 1..n,
    and the rotated walk is the plain cyclic shift steps[tau:] + steps[:tau].
    """
    vals = _values(steps)
    n = len(steps)
    tau = 1
    for i in range(2, n + 1):
        if vals[i] < vals[tau]:
            tau = i
    return steps[tau:] + steps[:tau], n - tau


def first_hit_index(steps: tuple[int, ...], level: int) -> int | None:
    """First index j >= 1 with partial sum equal to level."""
    s = 0
    for j, step in enumerate(steps, start=1):
        s += step
        if s == level:
            return j
    return None


def count_first_passage(m: int, k: int) -> int:
    """Walks of length m from 0 whose first visit to -k happens at time m.

    Cycle lemma count (k/m) * C(m, (m+k)/2).  Parity violations and
    out-of-range levels give a zero count rather than an error; k = 0 is
    the empty-walk convention (1 if m == 0 else 0) needed by the pmf at
    endpoint -1.
    """
    if k == 0:
        return 1 if m == 0 else 0
    if k < 0 or m < 1 or k > m or (m - k) % 2:
        return 0
    num = k * comb(m, (m + k) // 2)
    q, r = divmod(num, m)
    assert r == 0, "cycle lemma count must be an integer"
    return q


def z_pmf(n: int, a: int) -> ExactPmf:
    """Exact law of the first return to -1 of a rotated bridge, endpoint a < 0.

    P(Z = l) = C(l, (l+1)/2) * count_first_passage(n-l, |a|-1) / C(n, (n+|a|)/2)
    on odd l: each rotated path with first return l has exactly l walk
    preimages, and the two pieces are counted by the cycle lemma.
    """
    _check_parity(n, a)
    if a >= 0:
        raise ValueError("first-return law needs a negative endpoint")
    total = comb(n, (n + abs(a)) // 2)
    masses = {}
    for l in range(1, n + 1, 2):
        ways = comb(l, (l + 1) // 2) * count_first_passage(n - l, abs(a) - 1)
        if ways:
            masses[l] = Fraction(ways, total)
    return ExactPmf(masses)


def empirical_z_pmf(n: int, a: int) -> ExactPmf:
    """Same law as z_pmf, but tallied by exhaustive enumeration."""
    ens = enumerate_bridges(n, a)
    counts: Counter = Counter()
    for steps in ens.walks:
        rotated, _ = rotate_at_min(steps)
        z = first_hit_index(rotated, -1)
        assert z is not None, "a rotated negative-endpoint bridge must reach -1"
        counts[z] += 1
    total = len(ens.walks)
    return ExactPmf({z: Fraction(c, total) for z, c in counts.items()})


def conditional_piece_laws(
    n: int, a: int, l: int
) -> tuple[ExactPmf, ExactPmf, bool]:
    """Joint law of the two rotation pieces given first return at l.

    Splits every rotated bridge with Z = l into its pre-return and
    post-return step tuples, and reports the two marginal laws together
    with a flag saying whether the joint law factorizes exactly into their
    product over the full support rectangle.
    """
    ens = enumerate_bridges(n, a)
    joint: Counter = Counter()
    for steps in ens.walks:
        rotated, _ = rotate_at_min(steps)
        if first_hit_index(rotated, -1) == l:
            joint[(rotated[:l], rotated[l:])] += 1
    if not joint:
        raise ValueError(f"first return at {l} has zero probability for ({n}, {a})")
    total = sum(joint.values())
    first: Counter = Counter()
    second: Counter = Counter()
    for (p1, p2), c in joint.items():
        first[p1] += c
        second[p2] += c
    pmf1 = ExactPmf({k: Fraction(c, total) for k, c in first.items()})
    pmf2 = ExactPmf({k: Fraction(c, total) for k, c in second.items()})
    exact = all(
        Fraction(joint.get((p1, p2), 0), total) == pmf1.mass(p1) * pmf2.mass(p2)
        for p1 in pmf1.support
        for p2 in pmf2.support
    )
    return pmf1, pmf2, exact


def helper_distribution(n: int, a: int) -> dict[tuple[int, ...], dict[int, Fraction]]:
    """Conditional law of the rotation offset K given the rotated image."""
    ens = enumerate_bridges(n, a)
    buckets: defaultdict = defaultdict(list)
    for steps in ens.walks:
        rotated, k = rotate_at_min(steps)
        buckets[rotated].append(k)
    out = {}
    for image, ks in buckets.items():
        m = len(ks)
        counts = Counter(ks)
        out[image] = {k: Fraction(c, m) for k, c in sorted(counts.items())}
    return out


def helper_uniform_check(n: int, a: int) -> bool:
    """K is uniform over exactly Z(image) distinct values, for every image."""
    for image, law in helper_distribution(n, a).items():
        z = first_hit_index(image, -1)
        if z is None:
            return False
        if len(law) != z:
            return False
        if any(mass != Fraction(1, z) for mass in law.values()):
            return False
    return True


def bijection_check(n: int, a: int) -> bool:
    """The map w -> (V(w), K) is a bijection onto its characterized range.

    Injectivity: all (image, K) pairs over the ensemble are distinct.
    Surjectivity: the pairs equal the full set of (v, k) with v a bridge to
    a, v(j) >= 0 for j <= k, and v(j) > a for k <= j < n.
    """
    ens = enumerate_bridges(n, a)
    pairs = set()
    for steps in ens.walks:
        pairs.add(rotate_at_min(steps))
    if len(pairs) != len(ens.walks):
        return False
    target = set()
    for v in ens.walks:
        vals = _values(v)
        for k in range(n):
            if all(vals[j] >= 0 for j in range(k + 1)) and all(
                vals[j] > a for j in range(k, n)
            ):
                target.add((v, k))
    return pairs == target


def factorization_check(n: int, a: int) -> bool:
    """Exact factorization of the piece laws at every attainable return time."""
    for l in z_pmf(n, a).support:
        _, _, exact = conditional_piece_laws(n, a, l)
        if not exact:
            return False
    return True


def walk_of(steps: tuple[int, ...]) -> LatticeWalk:
    """Wrap a raw step tuple into a LatticeWalk."""
    return LatticeWalk(steps)
