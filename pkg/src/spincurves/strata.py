"""Finite combinatorics of the graded curve classes.

Words over the three-letter representative set {aba, cba, eta} label the
strata of a product of two open simplices cut by the coincidence
hyperplanes t_{0,i} = t_{1,j}.  Removing the hyperplanes one at a time
glues strata back in triples; the schedule of those merges mirrors the
contraction argument, and the sphere dimensions collected per central
endpoint reproduce the bouquet lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import spin4
from .weyl import (
    ETA,
    M_BULLET,
    M_LETTERS,
    MuVector,
    Permutation,
    Word,
    mu,
    perm_from_word,
    word_name,
)

__all__ = [
    "TPoint",
    "BouquetSpec",
    "NonTripleMerge",
    "point_to_word",
    "strata_enumerate",
    "i_equivalence",
    "contraction_schedule",
    "substitute",
    "bouquet",
]

_ABA = perm_from_word("aba")
_CBA = perm_from_word("cba")
_BACB = perm_from_word("bacb")
_BCB = perm_from_word("bcb")


class NonTripleMerge(RuntimeError):
    """A hyperplane removal merged something other than a (-,0,+) triple."""


@dataclass(frozen=True)
class TPoint:
    """A point of the product of two ordered simplices."""

    t0: tuple
    t1: tuple

    def __post_init__(self):
        for tup in (self.t0, self.t1):
            if any(not (0 < x < 1) for x in tup):
                raise ValueError("coordinates must lie in (0, 1)")
            if any(a >= b for a, b in zip(tup, tup[1:])):
                raise ValueError("coordinates must be strictly increasing")


def point_to_word(p: TPoint) -> Word:
    """Merge the two coordinate tuples; coincidences fuse to the top letter."""
    events: list[tuple[float, int]] = [(x, 0) for x in p.t0] + [(x, 1) for x in p.t1]
    events.sort()
    out: list[Permutation] = []
    k = 0
    while k < len(events):
        if k + 1 < len(events) and events[k][0] == events[k + 1][0]:
            if events[k][1] == events[k + 1][1]:
                raise ValueError("coincidence within one coordinate tuple")
            out.append(ETA)
            k += 2
        else:
            out.append(_ABA if events[k][1] == 0 else _CBA)
            k += 1
    return tuple(out)


def strata_enumerate(mu0: int, mu1: int) -> list[tuple[Word, int]]:
    """All representative words with the given grading, each with the number
    of top letters (= stratum codimension in the parameter polytope)."""
    out: list[tuple[Word, int]] = []

    def rec(prefix: tuple[Permutation, ...], m0: int, m1: int):
        if m0 == 0 and m1 == 0:
            out.append((prefix, sum(1 for s in prefix if s == ETA)))
            return
        if m0 > 0:
            rec(prefix + (_ABA,), m0 - 1, m1)
        if m1 > 0:
            rec(prefix + (_CBA,), m0, m1 - 1)
        if m0 > 0 and m1 > 0:
            rec(prefix + (ETA,), m0 - 1, m1 - 1)

    rec((), mu0, mu1)
    out.sort(key=lambda pair: (pair[1], word_name(pair[0])))
    return out


def _canonical_point(word: Word, mu0: int, mu1: int) -> TPoint:
    """Exact rational sample point of the stratum labeled by the word."""
    L = len(word)
    t0, t1 = [], []
    for k, s in enumerate(word):
        x = Fraction(k + 1, L + 1)
        if s == _ABA:
            t0.append(x)
        elif s == _CBA:
            t1.append(x)
        elif s == ETA:
            t0.append(x)
            t1.append(x)
        else:
            raise ValueError("word must be over the representative letters")
    if len(t0) != mu0 or len(t1) != mu1:
        raise ValueError("word grading does not match (mu0, mu1)")
    return TPoint(tuple(t0), tuple(t1))


def _sign_vector(word: Word, mu0: int, mu1: int) -> dict[tuple[int, int], int]:
    p = _canonical_point(word, mu0, mu1)
    out = {}
    for i in range(mu0):
        for j in range(mu1):
            d = p.t0[i] - p.t1[j]
            out[(i + 1, j + 1)] = 0 if d == 0 else (1 if d > 0 else -1)
    return out


def i_equivalence(I, mu0: int, mu1: int) -> list[frozenset[Word]]:
    """Partition of the strata: words are equivalent when no retained
    hyperplane separates their strata (equal sign on every (i,j) in I)."""
    I = frozenset(tuple(ij) for ij in I)
    words = [w for w, _ in strata_enumerate(mu0, mu1)]
    classes: dict[tuple, set[Word]] = {}
    for w in words:
        sv = _sign_vector(w, mu0, mu1)
        key = tuple(sorted((ij, sv[ij]) for ij in I))
        classes.setdefault(key, set()).add(w)
    return sorted((frozenset(v) for v in classes.values()),
                  key=lambda cl: sorted(word_name(w) for w in cl))


@dataclass(frozen=True)
class MergeEvent:
    hyperplane: tuple[int, int]
    lower: frozenset[Word]
    middle: frozenset[Word]
    upper: frozenset[Word]

    def to_json(self) -> dict:
        return {
            "hyperplane": list(self.hyperplane),
            "lower": sorted(word_name(w) for w in self.lower),
            "middle": sorted(word_name(w) for w in self.middle),
            "upper": sorted(word_name(w) for w in self.upper),
        }


def contraction_schedule(mu0: int, mu1: int) -> list[tuple[tuple[int, int], list[MergeEvent]]]:
    """Remove the coincidence hyperplanes one at a time (lexicographically)
    and record the strata classes glued back at each step.

    Every merge must be a proper (-,0,+) triple; the final partition is a
    single class.  Raises NonTripleMerge otherwise."""
    words = [w for w, _ in strata_enumerate(mu0, mu1)]
    all_h = sorted((i + 1, j + 1) for i in range(mu0) for j in range(mu1))
    signs = {w: _sign_vector(w, mu0, mu1) for w in words}

    def classes_for(I: frozenset) -> list[frozenset[Word]]:
        buckets: dict[tuple, set[Word]] = {}
        for w in words:
            key = tuple(sorted((ij, signs[w][ij]) for ij in I))
            buckets.setdefault(key, set()).add(w)
        return [frozenset(v) for v in buckets.values()]

    schedule = []
    remaining = list(all_h)
    current = classes_for(frozenset(remaining))
    while remaining:
        h = remaining.pop(0)
        coarser = classes_for(frozenset(remaining))
        events = []
        for W in coarser:
            parts = [C for C in current if C <= W]
            if len(parts) == 1:
                continue
            if len(parts) != 3:
                raise NonTripleMerge(
                    f"removing {h} merged {len(parts)} classes: "
                    f"{[sorted(word_name(w) for w in p) for p in parts]}"
                )
            by_sign = {}
            for C in parts:
                s_vals = {signs[w][h] for w in C}
                if len(s_vals) != 1:
                    raise NonTripleMerge(f"class not on one side of {h}")
                by_sign[s_vals.pop()] = C
            if sorted(by_sign) != [-1, 0, 1]:
                raise NonTripleMerge(f"merge across {h} is not a (-,0,+) triple")
            events.append(MergeEvent(h, by_sign[-1], by_sign[0], by_sign[1]))
        schedule.append((h, events))
        current = coarser
    if len(current) != 1:
        raise NonTripleMerge("hyperplane removal did not end in a single class")
    return schedule


def substitute(w: Word, k: int, which: str) -> Word:
    """Replace the k-th (1-based) letter of the aba-class: '+' keeps it,
    '0' substitutes bacb, '-' substitutes bcb."""
    if which not in {"+", "0", "-"}:
        raise ValueError("which must be '+', '0' or '-'")
    klass = {_ABA, _BACB, _BCB}
    positions = [i for i, s in enumerate(w) if s in klass]
    if not 1 <= k <= len(positions):
        raise IndexError(f"word has {len(positions)} aba-class letters, asked for #{k}")
    if which == "+":
        return w
    i = positions[k - 1]
    repl = _BACB if which == "0" else _BCB
    return w[:i] + (repl,) + w[i + 1 :]


@dataclass(frozen=True)
class BouquetSpec:
    """Wedge summands attached to the based loop space of S^3 x S^3."""

    z1: str
    spheres: tuple[int, ...]

    def to_json(self) -> dict:
        return {"z1": self.z1, "base": "Omega(S3xS3)", "spheres": list(self.spheres)}


_CENTER_NAMES = {"1": "1", "+1": "1", "-1": "-1", "ac": "ac", "-ac": "-ac"}


def bouquet(z1: str | spin4.ExactSpinPoint, dim_cap: int = 16) -> BouquetSpec:
    """Sphere dimensions 2(mu0+mu1) over all gradings whose forced central
    endpoint equals z1, up to dim_cap.

    The endpoint is computed in the exact group for every grading; no
    parity shortcut is hard-coded."""
    centers = spin4.center_elements()
    if isinstance(z1, str):
        name = _CENTER_NAMES.get(z1)
        if name is None:
            raise ValueError(f"unknown central element {z1!r}")
        target = centers[name]
    else:
        target = z1
        name = next((k for k, v in centers.items() if v.key() == z1.key()), None)
        if name is None:
            raise ValueError("element is not central")
    from .weyl import endpoint_class

    dims = []
    half = dim_cap // 2
    for m0 in range(half + 1):
        for m1 in range(half + 1 - m0):
            if endpoint_class(MuVector(m0, m1)).key() == target.key():
                d = 2 * (m0 + m1)
                if d <= dim_cap:
                    dims.append(d)
    return BouquetSpec(name, tuple(sorted(dims)))


def equivalence_class_size(w: Word) -> int:
    """Number of words letterwise mu-equivalent to w: 3 to the number of
    aba-class letters."""
    klass = {_ABA, _BACB, _BCB}
    return 3 ** sum(1 for s in w if s in klass)


def expand_equivalence_class(w: Word) -> frozenset[Word]:
    """All words letterwise mu-equivalent to a representative word."""
    klass = (_ABA, _BACB, _BCB)
    out: list[Word] = [()]
    for s in w:
        if s in klass:
            out = [pref + (r,) for pref in out for r in klass]
        else:
            out = [pref + (s,) for pref in out]
    return frozenset(out)
