"""Finite-window set families over the integers.

Every set lives inside an explicit closed window ``[lo, hi]``.  Nothing here
decides a property of an infinite set; results are what the window shows.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Tuple

__all__ = [
    "IndexSet",
    "as_window",
    "common_difference_set",
    "difference_set",
    "sg_d",
    "sg_d_bruteforce",
    "consecutive_sums",
    "ip_finite_sums",
    "syndetic_gap",
    "banach_density_estimate",
]


def as_window(window) -> Tuple[int, int]:
    """Normalize ``(lo, hi)``, ``range`` or ``"LO:HI"`` into an int pair."""
    if isinstance(window, IndexSet):
        return window.lo, window.hi
    if isinstance(window, range):
        if window.step != 1 or len(window) == 0:
            raise ValueError("window range must be nonempty with step 1")
        return window.start, window.stop - 1
    if isinstance(window, str):
        lo, sep, hi = window.partition(":")
        if not sep:
            raise ValueError(f"window must look like LO:HI, got {window!r}")
        window = (int(lo), int(hi))
    lo, hi = window
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    return lo, hi


@dataclass(frozen=True)
class IndexSet:
    """Sorted, duplicate-free integers inside ``[lo, hi]``.

    Members outside the window are dropped on construction, which is what
    "window-clipped" means everywhere in this package.
    """

    lo: int
    hi: int
    members: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")
        clipped = sorted({int(m) for m in self.members if self.lo <= m <= self.hi})
        object.__setattr__(self, "members", tuple(clipped))

    @classmethod
    def full(cls, window) -> "IndexSet":
        lo, hi = as_window(window)
        return cls(lo, hi, range(lo, hi + 1))

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi

    def __contains__(self, n) -> bool:
        return n in self._set

    @property
    def _set(self):
        # cached lazily; frozen dataclass so go through __dict__
        s = self.__dict__.get("_member_set")
        if s is None:
            s = frozenset(self.members)
            self.__dict__["_member_set"] = s
        return s

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __le__(self, other: "IndexSet") -> bool:
        return self._set <= other._set

    def __and__(self, other: "IndexSet") -> "IndexSet":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return IndexSet(lo, hi, self._set & other._set)

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(min(self.lo, other.lo), max(self.hi, other.hi),
                        self._set | other._set)

    def clip(self, window) -> "IndexSet":
        lo, hi = as_window(window)
        return IndexSet(lo, hi, self.members)

    def as_set(self) -> frozenset:
        return self._set


def difference_set(S: IndexSet) -> IndexSet:
    """``S - S`` clipped to the window of ``S``."""
    members = S.members
    return IndexSet(S.lo, S.hi, {a - b for a in members for b in members})


def common_difference_set(S: IndexSet, d: int) -> IndexSet:
    """Differences ``n`` of ``(d+1)``-term progressions ``m, m+n, ..., m+dn`` in ``S``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    members = S.as_set()
    out = []
    for n in range(S.lo, S.hi + 1):
        for m in S.members:
            if all(m + i * n in members for i in range(1, d + 1)):
                out.append(n)
                break
    return IndexSet(S.lo, S.hi, out)


def _default_window(P: Sequence[int], window):
    if window is not None:
        return as_window(window)
    return 0, max(sum(P), 0)


def _check_P(P) -> Tuple[int, ...]:
    P = tuple(int(p) for p in P)
    if any(p < 1 for p in P):
        raise ValueError("sequence entries must be positive integers")
    return P


def sg_d(P: Sequence[int], d: int, window=None) -> IndexSet:
    """Sums with gaps: ``sum eps_i p_i`` with every run of zeros between two
    ones shorter than ``d``.

    Dynamic programme over the index of the last selected term: a sum that
    ends at ``i`` extends one that ended at ``j`` whenever ``i - j - 1 < d``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    P = _check_P(P)
    lo, hi = _default_window(P, window)
    ending = []
    for i, p in enumerate(P):
        sums = {p}
        for j in range(max(0, i - d), i):
            sums.update(s + p for s in ending[j])
        ending.append(sums)
    return IndexSet(lo, hi, set().union(*ending))


def sg_d_bruteforce(P: Sequence[int], d: int, window=None) -> IndexSet:
    """Enumerate every 0/1 string; reference oracle for :func:`sg_d`."""
    P = _check_P(P)
    lo, hi = _default_window(P, window)
    out = set()
    for eps in product((0, 1), repeat=len(P)):
        ones = [i for i, e in enumerate(eps) if e]
        if not ones:
            continue
        if all(b - a - 1 < d for a, b in zip(ones, ones[1:])):
            out.add(sum(P[i] for i in ones))
    return IndexSet(lo, hi, out)


def consecutive_sums(P: Sequence[int], window=None) -> IndexSet:
    """``p_m + ... + p_n`` over all ``m <= n``."""
    P = _check_P(P)
    lo, hi = _default_window(P, window)
    out = set()
    for m in range(len(P)):
        acc = 0
        for p in P[m:]:
            acc += p
            out.add(acc)
    return IndexSet(lo, hi, out)


def ip_finite_sums(P: Sequence[int], window=None) -> IndexSet:
    """All nonempty sums with increasing indices."""
    P = _check_P(P)
    lo, hi = _default_window(P, window)
    sums = set()
    for p in P:
        sums |= {s + p for s in sums}
        sums.add(p)
    return IndexSet(lo, hi, sums)


def syndetic_gap(S: IndexSet) -> Optional[int]:
    """Largest gap of ``S`` in its window, or ``None`` for an empty set.

    Window edges count: the first member contributes ``m0 - lo + 1`` and the
    last ``hi - m_last + 1``, as if ``lo - 1`` and ``hi + 1`` were members.
    This overstates gaps near the edges, so a small value is conservative.
    """
    if not S.members:
        return None
    m = S.members
    gaps = [m[0] - S.lo + 1, S.hi - m[-1] + 1]
    gaps.extend(b - a for a, b in zip(m, m[1:]))
    return max(gaps)


def banach_density_estimate(S: IndexSet, L: int) -> Tuple[Fraction, Fraction]:
    """``(max, min)`` of ``|S & I| / L`` over length-``L`` intervals ``I`` in the window."""
    width = S.hi - S.lo + 1
    if not 1 <= L <= width:
        raise ValueError(f"block length must be in [1, {width}]")
    flags = [0] * width
    for m in S.members:
        flags[m - S.lo] = 1
    count = sum(flags[:L])
    best = worst = count
    for start in range(1, width - L + 1):
        count += flags[start + L - 1] - flags[start - 1]
        best = max(best, count)
        worst = min(worst, count)
    return Fraction(best, L), Fraction(worst, L)

