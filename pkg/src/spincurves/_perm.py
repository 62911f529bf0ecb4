"""Tuple-level helpers for permutations of {1,2,3,4}.

Permutations are stored in one-line notation as 4-tuples ``p`` with
``p[k-1] = k^p`` (the image of ``k``).  Composition acts on the right:
``(p * q)(k) = (k^p)^q``, so that the map to permutation matrices
``P[j, j^p] = 1`` is a homomorphism.

This module is intentionally free of project imports so that both the
quaternion layer and the word-combinatorics layer can use it.
"""

from __future__ import annotations

from functools import lru_cache

PermTuple = tuple[int, int, int, int]

IDENTITY: PermTuple = (1, 2, 3, 4)

# adjacent transpositions (12), (23), (34)
GENERATORS: dict[str, PermTuple] = {
    "a": (2, 1, 3, 4),
    "b": (1, 3, 2, 4),
    "c": (1, 2, 4, 3),
}

GENERATOR_ORDER = "abc"


def compose(p: PermTuple, q: PermTuple) -> PermTuple:
    """Product p*q acting k -> (k^p)^q."""
    return (q[p[0] - 1], q[p[1] - 1], q[p[2] - 1], q[p[3] - 1])


def inverse(p: PermTuple) -> PermTuple:
    out = [0, 0, 0, 0]
    for k in range(4):
        out[p[k] - 1] = k + 1
    return tuple(out)  # type: ignore[return-value]


def inv_count(p: PermTuple) -> int:
    return sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])


def from_word(word: str) -> PermTuple:
    p = IDENTITY
    for ch in word:
        p = compose(p, GENERATORS[ch])
    return p


TOP: PermTuple = from_word("abacba")  # (4, 3, 2, 1)


@lru_cache(maxsize=1)
def _lex_least_names() -> dict[PermTuple, str]:
    """Lexicographically least reduced word for every element of S4."""
    names = {IDENTITY: ""}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for p in sorted(frontier, key=names.__getitem__):
            for ch in GENERATOR_ORDER:
                q = compose(p, GENERATORS[ch])
                cand = names[p] + ch
                if q not in names:
                    names[q] = cand
                    nxt.append(q)
                elif len(cand) == len(names[q]) and cand < names[q]:
                    names[q] = cand
        frontier = nxt
    return names


def word_name(p: PermTuple) -> str:
    """Canonical (lex-least reduced word) name; '' for the identity."""
    return _lex_least_names()[p]


@lru_cache(maxsize=32)
def reduced_words(p: PermTuple) -> frozenset[str]:
    """All reduced words for p, as strings over 'a', 'b', 'c'."""
    if p == IDENTITY:
        return frozenset({""})
    ell = inv_count(p)
    out = set()
    for ch in GENERATOR_ORDER:
        g = GENERATORS[ch]
        q = compose(p, g)
        if inv_count(q) == ell - 1:
            out.update(w + ch for w in reduced_words(q))
    return frozenset(out)


def all_perms() -> list[PermTuple]:
    import itertools

    return [tuple(p) for p in itertools.permutations((1, 2, 3, 4))]  # type: ignore[misc]
