"""Combinatorics of S4 and of itinerary words.

Words over the nontrivial permutations label strata of the space of
locally convex curves: a word's weight ``dim_word`` is the stratum
codimension and the additive grading ``mu`` sorts the five-letter set M
into the classes that force each central endpoint.

The letter-refinement tables record, for each letter sigma in the
palindromic-alphabet set, the finite list of words whose stratum meets
every neighborhood of the sigma-stratum.  The tables for aba, bcb, cba,
abc and ac are complete; for bacb and the top letter only the entries
with all letters in M are certain, and `provisional_refinements` lists
the remaining candidates that survive the multiplicity screen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from . import _perm, spin4

__all__ = [
    "Permutation",
    "IDENTITY",
    "GEN_A",
    "GEN_B",
    "GEN_C",
    "ETA",
    "Word",
    "MuVector",
    "NotInM",
    "UnsupportedLetter",
    "AmbiguousOrder",
    "inv",
    "reduced_words",
    "bruhat_leq",
    "bruhat_leq_oracle",
    "dim_word",
    "mu",
    "m_star_words",
    "endpoint_class",
    "M_LETTERS",
    "M_BULLET",
    "refines_letter",
    "refines_word",
    "letter_multiplicity",
    "lemma_refinement_pairs",
    "word_from_names",
    "word_name",
]


class NotInM(ValueError):
    """A letter outside the five-letter set M was given to mu()."""


class UnsupportedLetter(ValueError):
    """Refinement queried for a letter without a stored table."""


class AmbiguousOrder(RuntimeError):
    """Germ order fit did not settle on an integer."""


@dataclass(frozen=True, order=True)
class Permutation:
    """Element of S4 in one-line notation: images[k-1] = image of k."""

    images: tuple[int, int, int, int]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(_perm.compose(self.images, other.images))

    def inverse(self) -> "Permutation":
        return Permutation(_perm.inverse(self.images))

    def inversions(self) -> int:
        return _perm.inv_count(self.images)

    @property
    def name(self) -> str:
        return _perm.word_name(self.images)

    def matrix(self) -> np.ndarray:
        P = np.zeros((4, 4))
        for j, img in enumerate(self.images):
            P[j, img - 1] = 1.0
        return P

    def __repr__(self) -> str:
        return f"Permutation({self.images})"


IDENTITY = Permutation(_perm.IDENTITY)
GEN_A = Permutation(_perm.GENERATORS["a"])
GEN_B = Permutation(_perm.GENERATORS["b"])
GEN_C = Permutation(_perm.GENERATORS["c"])
ETA = Permutation(_perm.TOP)

Word = tuple[Permutation, ...]


def perm_from_word(word: str) -> Permutation:
    return Permutation(_perm.from_word(word))


def word_from_names(names: Iterable[str]) -> Word:
    return tuple(perm_from_word(n) for n in names)


def word_name(w: Word) -> str:
    """Compact rendering: single generators bare, longer letters bracketed."""
    out = []
    for p in w:
        n = p.name
        out.append(n if len(n) == 1 else f"[{n}]")
    return "".join(out) if out else "()"


def inv(sigma: Permutation) -> int:
    """Number of inversions = length of any reduced word."""
    return sigma.inversions()


def reduced_words(sigma: Permutation) -> frozenset[str]:
    return _perm.reduced_words(sigma.images)


def bruhat_leq(s0: Permutation, s1: Permutation) -> bool:
    """Strong Bruhat order via the subword criterion.

    s0 <= s1 iff one fixed reduced word of s1 contains some reduced word
    of s0 as a subword.
    """
    if inv(s0) > inv(s1):
        return False
    w1 = min(reduced_words(s1))
    target = s0.images
    ell = inv(s0)
    n = len(w1)
    # all subsequences; n <= 6 so this is at most 64 products
    for mask in range(1 << n):
        if mask.bit_count() != ell:
            continue
        p = _perm.IDENTITY
        for k in range(n):
            if mask >> k & 1:
                p = _perm.compose(p, _perm.GENERATORS[w1[k]])
        if p == target:
            return True
    return False


@lru_cache(maxsize=1)
def _bruhat_closure() -> frozenset[tuple[_perm.PermTuple, _perm.PermTuple]]:
    """Transitive closure of the covering relation (reduced-word deletion)."""
    perms = _perm.all_perms()
    cover = set()
    for p in perms:
        for w in _perm.reduced_words(p):
            for k in range(len(w)):
                sub = w[:k] + w[k + 1 :]
                q = _perm.from_word(sub)
                if _perm.inv_count(q) == len(w) - 1:
                    cover.add((q, p))
    rel = {(p, p) for p in perms} | cover
    changed = True
    while changed:
        changed = False
        for (x, y) in list(rel):
            for (y2, z) in list(rel):
                if y == y2 and (x, z) not in rel:
                    rel.add((x, z))
                    changed = True
    return frozenset(rel)


def bruhat_leq_oracle(s0: Permutation, s1: Permutation) -> bool:
    """Independent order oracle: closure of the covering relation."""
    return (s0.images, s1.images) in _bruhat_closure()


def dim_word(w: Word) -> int:
    """Codimension of the stratum of curves with this itinerary."""
    return sum(inv(s) - 1 for s in w)


class MuVector(NamedTuple):
    mu0: int
    mu1: int

    def __add__(self, other):  # type: ignore[override]
        return MuVector(self.mu0 + other[0], self.mu1 + other[1])


# the five-letter set M and its mu grading
_ABA = perm_from_word("aba")
_BACB = perm_from_word("bacb")
_BCB = perm_from_word("bcb")
_CBA = perm_from_word("cba")
_AC = perm_from_word("ac")
_ABC = perm_from_word("abc")

M_LETTERS: dict[Permutation, MuVector] = {
    _ABA: MuVector(1, 0),
    _BACB: MuVector(1, 0),
    _BCB: MuVector(1, 0),
    _CBA: MuVector(0, 1),
    ETA: MuVector(1, 1),
}

# one representative per mu-class: aba, cba, eta
M_BULLET: tuple[Permutation, ...] = (_ABA, _CBA, ETA)


def mu(w: Word) -> MuVector:
    """Letterwise additive grading; defined only for words over M."""
    total = MuVector(0, 0)
    for s in w:
        if s not in M_LETTERS:
            raise NotInM(f"letter {s.name or 'e'} is not in M")
        total = total + M_LETTERS[s]
    return total


def m_star_words(target: MuVector, *args) -> frozenset[Word]:
    """All words over M with the given grading."""
    if args:
        target = MuVector(int(target), int(args[0]))  # type: ignore[arg-type]
    target = MuVector(*target)
    out: set[Word] = set()

    def rec(prefix: tuple[Permutation, ...], m0: int, m1: int):
        if m0 == 0 and m1 == 0:
            out.add(prefix)
            return
        for letter, d in M_LETTERS.items():
            if d.mu0 <= m0 and d.mu1 <= m1:
                rec(prefix + (letter,), m0 - d.mu0, m1 - d.mu1)

    rec((), target.mu0, target.mu1)
    return frozenset(out)


def endpoint_class(mv: MuVector) -> spin4.ExactSpinPoint:
    """Central endpoint forced by the grading: (-1)^(mu0+1) (hat_a hat_c)^(mu1+1).

    Computed in the exact group, not by a parity shortcut.
    """
    minus_one = -spin4.EXACT_ONE
    ac = spin4.HAT_A * spin4.HAT_C
    z = spin4.EXACT_ONE
    for _ in range(mv[0] + 1):
        z = z * minus_one
    for _ in range(mv[1] + 1):
        z = z * ac
    return z


# ---------------------------------------------------------------------------
# letter refinement tables
# ---------------------------------------------------------------------------


def _words(*names: tuple[str, ...]) -> frozenset[Word]:
    return frozenset(word_from_names(n) for n in names)


_TABLE_ABA = _words(
    ("aba",),
    ("a", "a"),
    ("a", "ba"),
    ("a", "b", "a", "b"),
    ("ab", "b"),
    ("b", "b"),
    ("b", "ab"),
    ("b", "a", "b", "a"),
    ("ba", "a"),
)

# mirror of the aba table under the diagram flip a <-> c
_TABLE_BCB = _words(
    ("bcb",),
    ("c", "c"),
    ("c", "bc"),
    ("c", "b", "c", "b"),
    ("cb", "b"),
    ("b", "b"),
    ("b", "cb"),
    ("b", "c", "b", "c"),
    ("bc", "c"),
)

_TABLE_CBA = _words(
    ("cba",),
    ("a", "c"),
    ("ac",),
    ("c", "a"),
    ("c", "ba"),
    ("c", "b", "a", "b"),
    ("c", "b", "a", "cb"),
    ("c", "b", "a", "c", "b", "c"),
    ("c", "b", "ac", "b", "c"),
    ("c", "b", "c", "a", "b", "c"),
    ("cb", "a", "b", "c"),
    ("b", "a", "b", "c"),
    ("ba", "c"),
)

_TABLE_ABC = _words(
    ("abc",),
    ("c", "a"),
    ("ac",),
    ("a", "c"),
    ("a", "bc"),
    ("a", "b", "c", "b"),
    ("a", "b", "c", "ab"),
    ("a", "b", "c", "a", "b", "a"),
    ("a", "b", "ac", "b", "a"),
    ("a", "b", "a", "c", "b", "a"),
    ("ab", "c", "b", "a"),
    ("b", "c", "b", "a"),
    ("bc", "a"),
)

_TABLE_AC = _words(("ac",), ("a", "c"), ("c", "a"))

# only the entries with all letters in M are known to be complete
_TABLE_BACB = _words(("bacb",), ("aba",), ("bcb",))
_TABLE_ETA = _words(("abacba",), ("aba", "cba"), ("cba", "aba"))

REFINEMENT_TABLE: dict[Permutation, frozenset[Word]] = {
    _ABA: _TABLE_ABA,
    _BCB: _TABLE_BCB,
    _CBA: _TABLE_CBA,
    _ABC: _TABLE_ABC,
    _AC: _TABLE_AC,
    _BACB: _TABLE_BACB,
    ETA: _TABLE_ETA,
}

TABULATED_LETTERS: frozenset[Permutation] = frozenset(REFINEMENT_TABLE)

# letters whose stored table is only complete within M-words
_PARTIAL_TABLES: frozenset[Permutation] = frozenset({_BACB, ETA})


def refines_letter(w: Word, sigma: Permutation) -> bool:
    """Whether the stratum of w meets every neighborhood of the sigma-stratum.

    For bacb and the top letter the stored table is complete only for
    words over M; queries outside M against those letters return False
    (see `provisional_refinements` for the unconfirmed candidates).
    """
    if sigma not in REFINEMENT_TABLE:
        raise UnsupportedLetter(f"no refinement table for {sigma.name or 'e'}")
    return w in REFINEMENT_TABLE[sigma]


def refines_word(w0: Word, w1: Word) -> bool:
    """Blockwise refinement: w0 splits into consecutive nonempty blocks,
    the k-th refining the k-th letter of w1."""
    n, m = len(w0), len(w1)
    if m == 0:
        return n == 0
    # reach[i] = True when w0[:i] factors over w1[:k] for some split bookkeeping
    # handled by DP over (position, letter index)
    reach = np.zeros((n + 1, m + 1), dtype=bool)
    reach[0, 0] = True
    for k in range(m):
        for i in range(n + 1):
            if not reach[i, k]:
                continue
            for j in range(i + 1, n + 1):
                if refines_letter(w0[i:j], w1[k]):
                    reach[j, k + 1] = True
    return bool(reach[n, m])


def lemma_refinement_pairs(max_len: int = 4) -> set[tuple[Word, Permutation]]:
    """All (w, sigma) with w a word over M refining the single letter sigma,
    w != (sigma,).  Enumerates table contents, so it reproduces the stored
    refinement data."""
    out = set()
    for sigma, table in REFINEMENT_TABLE.items():
        for w in table:
            if w == (sigma,):
                continue
            if all(s in M_LETTERS for s in w) and len(w) <= max_len:
                out.add((w, sigma))
    return out


# ---------------------------------------------------------------------------
# germ multiplicity oracle
# ---------------------------------------------------------------------------


def _random_cell_rotation(rho: Permutation, rng: np.random.Generator) -> np.ndarray:
    """Random SO4-point of the (unsigned) cell labeled rho."""
    def up():
        U = np.triu(rng.uniform(-1.0, 1.0, (4, 4)))
        np.fill_diagonal(U, rng.uniform(0.5, 1.5, 4))
        return U

    A = up() @ rho.matrix() @ up()
    Q, R = np.linalg.qr(A)
    return Q @ np.diag(np.sign(np.diag(R)))


def _corner_minors(Q: np.ndarray) -> np.ndarray:
    m1 = Q[3, 0]
    m2 = Q[2, 0] * Q[3, 1] - Q[2, 1] * Q[3, 0]
    m3 = np.linalg.det(Q[1:, :3])
    return np.array([m1, m2, m3])


def letter_multiplicity(
    sigma: Permutation,
    rng: np.random.Generator | None = None,
    samples: int = 10,
) -> tuple[int, int, int]:
    """Orders of vanishing at t=0 of the three lower-left minors along a
    convex germ through a generic point of the cell labeled eta*sigma.

    Fitted from log-log slopes over germ scales 10^-2 .. 10^-3; raises
    AmbiguousOrder when a slope strays from an integer by more than 0.1
    or when samples disagree.
    """
    if sigma == IDENTITY:
        raise ValueError("multiplicity is defined for nontrivial letters")
    if rng is None:
        rng = np.random.default_rng(20240901)
    from scipy.linalg import expm

    rho = ETA * sigma
    L = spin4.dpi_matrix(spin4.LAMBDA)
    ts = 10.0 ** (-2.0 - 0.2 * np.arange(6))
    flows = [expm(t * L) for t in ts]
    results = set()
    for _ in range(samples):
        Q = _random_cell_rotation(rho, rng)
        vals = np.array([np.abs(_corner_minors(Q @ F)) for F in flows])
        orders = []
        for k in range(3):
            v = np.maximum(vals[:, k], 1e-300)
            slope = np.polyfit(np.log(ts), np.log(v), 1)[0]
            r = round(float(slope))
            if abs(slope - r) > 0.1:
                raise AmbiguousOrder(
                    f"slope {slope:.3f} for minor {k + 1} of letter {sigma.name}"
                )
            orders.append(int(r))
        results.add(tuple(orders))
    if len(results) != 1:
        raise AmbiguousOrder(f"samples disagree for {sigma.name}: {sorted(results)}")
    return results.pop()  # type: ignore[return-value]


def multiplicity_screen(w: Word, sigma: Permutation, **kw) -> bool:
    """Necessary condition for w to refine sigma: componentwise, the summed
    letter orders are bounded by sigma's orders and agree with them mod 2."""
    target = np.array(letter_multiplicity(sigma, **kw))
    total = np.zeros(3, dtype=int)
    for s in w:
        total += np.array(letter_multiplicity(s, **kw))
    return bool(np.all(total <= target) and np.all((target - total) % 2 == 0))


def provisional_refinements(sigma: Permutation, max_orders=None) -> set[Word]:
    """Candidate refinements of a partially-tabulated letter: words over the
    nontrivial letters whose multiplicity sums pass the screen.  These are
    not confirmed; they bound the unknown part of the table."""
    if sigma not in _PARTIAL_TABLES:
        raise UnsupportedLetter("provisional candidates only for bacb and the top letter")
    target = np.array(letter_multiplicity(sigma))
    # letters worth considering: every nontrivial sigma with orders <= target
    alphabet = []
    for p in _perm.all_perms():
        if p == _perm.IDENTITY:
            continue
        P = Permutation(p)
        o = np.array(letter_multiplicity(P, samples=4))
        if np.all(o <= target):
            alphabet.append((P, o))
    out: set[Word] = set()

    def rec(prefix: Word, left: np.ndarray):
        if np.all(left % 2 == 0) and prefix:
            out.add(prefix)
        for P, o in alphabet:
            if np.all(o <= left):
                rec(prefix + (P,), left - o)

    rec((), target)
    return out - REFINEMENT_TABLE[sigma]


def dump_refinement_table(path) -> None:
    data = {}
    for sigma, words in REFINEMENT_TABLE.items():
        data[sigma.name] = {
            "complete": sigma not in _PARTIAL_TABLES,
            "words": sorted([list(p.name for p in w) for w in words]),
        }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)


def load_refinement_table(path) -> dict[str, frozenset[Word]]:
    with open(path) as fh:
        data = json.load(fh)
    return {
        name: frozenset(word_from_names(names) for names in entry["words"])
        for name, entry in data.items()
    }
