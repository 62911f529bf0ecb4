"""Arithmetic in Spin(4) = S^3 x S^3 realised as pairs of unit quaternions.

A pair ``z = (z_l, z_r)`` acts on R^4 = H (basis 1, i, j, k) through the
double cover ``Pi(z) w = z_l w z_r^{-1}``.  The module provides

* floating-point quaternion/spin arithmetic and the covering map,
* the frame generators of the tangent algebra and their one-parameter
  subgroups,
* an exact layer over Q(sqrt 2) used to enumerate the finite subgroups:
  the order-16 group generated by the half-turn lifts and the order-384
  preimage of the positive signed permutation matrices.

Finite-group elements are stored exactly so that cell representatives,
multiplication tables and centre computations carry no rounding error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import cos, sin, sqrt

import numpy as np

from . import _perm

__all__ = [
    "Quaternion",
    "SpinPoint",
    "SpinTangent",
    "A1",
    "A2",
    "A3",
    "LAMBDA",
    "spin_mul",
    "pi_matrix",
    "dpi_matrix",
    "alpha",
    "exp_tangent",
    "spin_from_matrix",
    "ExactReal",
    "ExactQuaternion",
    "ExactSpinPoint",
    "FiniteSpinGroup",
    "quat4_group",
    "btilde_group",
    "acute_of",
]


# ---------------------------------------------------------------------------
# floating-point layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    """Quaternion w + x i + y j + z k with the standard product (ij = k)."""

    w: float
    x: float
    y: float
    z: float

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def scale(self, c: float) -> "Quaternion":
        return Quaternion(c * self.w, c * self.x, c * self.y, c * self.z)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quaternion":
        return self.scale(1.0 / self.norm())

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @staticmethod
    def from_array(v) -> "Quaternion":
        return Quaternion(float(v[0]), float(v[1]), float(v[2]), float(v[3]))

    @staticmethod
    def exp(v: "Quaternion") -> "Quaternion":
        """Exponential of an imaginary quaternion."""
        th = sqrt(v.x**2 + v.y**2 + v.z**2)
        if th < 1e-300:
            return Quaternion(1.0, 0.0, 0.0, 0.0)
        s = sin(th) / th
        return Quaternion(cos(th), s * v.x, s * v.y, s * v.z)


ONE_Q = Quaternion(1.0, 0.0, 0.0, 0.0)
I_Q = Quaternion(0.0, 1.0, 0.0, 0.0)
J_Q = Quaternion(0.0, 0.0, 1.0, 0.0)
K_Q = Quaternion(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SpinPoint:
    """A point of S^3 x S^3; both components are expected to be unit."""

    left: Quaternion
    right: Quaternion

    def __mul__(self, other: "SpinPoint") -> "SpinPoint":
        return SpinPoint(self.left * other.left, self.right * other.right)

    def __neg__(self) -> "SpinPoint":
        return SpinPoint(-self.left, -self.right)

    def inverse(self) -> "SpinPoint":
        return SpinPoint(self.left.conjugate(), self.right.conjugate())

    def renormalized(self) -> "SpinPoint":
        return SpinPoint(self.left.normalized(), self.right.normalized())

    def unit_defect(self) -> float:
        return max(abs(self.left.norm() - 1.0), abs(self.right.norm() - 1.0))

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.left.to_array(), self.right.to_array()])

    @staticmethod
    def from_array(v) -> "SpinPoint":
        return SpinPoint(Quaternion.from_array(v[:4]), Quaternion.from_array(v[4:]))

    def distance(self, other: "SpinPoint") -> float:
        return float(np.linalg.norm(self.to_array() - other.to_array()))


SPIN_ONE = SpinPoint(ONE_Q, ONE_Q)


def spin_mul(a: SpinPoint, b: SpinPoint) -> SpinPoint:
    """Componentwise group law, renormalized to stay on S^3 x S^3."""
    return (a * b).renormalized()


@dataclass(frozen=True)
class SpinTangent:
    """Element of the tangent algebra: a pair of imaginary quaternions."""

    left: Quaternion
    right: Quaternion

    def __post_init__(self):
        if self.left.w != 0.0 or self.right.w != 0.0:
            raise ValueError("tangent components must be imaginary")

    def __add__(self, other: "SpinTangent") -> "SpinTangent":
        return SpinTangent(self.left + other.left, self.right + other.right)

    def scale(self, c: float) -> "SpinTangent":
        return SpinTangent(self.left.scale(c), self.right.scale(c))


# frame generators: rotations in the (e1,e2), (e2,e3), (e3,e4) planes.
A1 = SpinTangent(Quaternion(0, 0.5, 0, 0), Quaternion(0, -0.5, 0, 0))
A2 = SpinTangent(Quaternion(0, 0, 0, 0.5), Quaternion(0, 0, 0, 0.5))
A3 = SpinTangent(Quaternion(0, 0.5, 0, 0), Quaternion(0, 0.5, 0, 0))
TANGENT_BASIS = (A1, A2, A3)
LAMBDA = A1 + A2 + A3


def pi_matrix(z: SpinPoint) -> np.ndarray:
    """Matrix of w -> z_l w z_r^{-1} in the basis (1, i, j, k)."""
    zl, zr_c = z.left, z.right.conjugate()
    cols = []
    for e in (ONE_Q, I_Q, J_Q, K_Q):
        cols.append((zl * e * zr_c).to_array())
    return np.stack(cols, axis=1)


def dpi_matrix(v: SpinTangent) -> np.ndarray:
    """Derivative of the cover at the identity: w -> v_l w - w v_r."""
    cols = []
    for e in (ONE_Q, I_Q, J_Q, K_Q):
        cols.append((v.left * e + (-(e * v.right))).to_array())
    return np.stack(cols, axis=1)


def exp_tangent(v: SpinTangent, t: float = 1.0) -> SpinPoint:
    """Componentwise quaternion exponential of t*v."""
    return SpinPoint(Quaternion.exp(v.left.scale(t)), Quaternion.exp(v.right.scale(t)))


def alpha(j: int, theta: float) -> SpinPoint:
    """One-parameter subgroup exp(theta * a_j), j in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise ValueError("generator index must be 1, 2 or 3")
    return exp_tangent(TANGENT_BASIS[j - 1], theta)


# ---------------------------------------------------------------------------
# recovering the quaternion pair from a rotation matrix
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _structure_tensor() -> np.ndarray:
    """T[i,a,j,b] = <e_i, e_a e_j conj(e_b)>; Pi(p,q) = sum p_a q_b T[:,a,:,b].

    The tensor satisfies sum_{ij} T[i,a,j,b] T[i,a',j,b'] = 4 delta delta,
    which turns the pair extraction into a single contraction.
    """
    basis = (ONE_Q, I_Q, J_Q, K_Q)
    T = np.zeros((4, 4, 4, 4))
    for a, ea in enumerate(basis):
        for j, ej in enumerate(basis):
            for b, eb in enumerate(basis):
                T[:, a, j, b] = (ea * ej * eb.conjugate()).to_array()
    return T


def spin_from_matrix(R: np.ndarray) -> tuple[SpinPoint, SpinPoint]:
    """The two preimages (z, -z) of a rotation R in SO(4).

    Raises ValueError when R is not close to a rotation (residual of the
    reconstructed cover exceeds 1e-6).
    """
    B = np.einsum("ij,iajb->ab", R, _structure_tensor()) / 4.0
    a0, b0 = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    p = B[:, b0]
    q = B[a0, :]
    p = p / np.linalg.norm(p)
    q = q / np.linalg.norm(q)
    if p[a0] * q[b0] * B[a0, b0] < 0:
        q = -q
    z = SpinPoint(Quaternion.from_array(p), Quaternion.from_array(q))
    if np.max(np.abs(pi_matrix(z) - R)) > 1e-6:
        raise ValueError("matrix is not a rotation within tolerance")
    return z, -z


# ---------------------------------------------------------------------------
# exact layer over Q(sqrt 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactReal:
    """Number r + s*sqrt(2) with rational r, s."""

    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)

    def __add__(self, o: "ExactReal") -> "ExactReal":
        return ExactReal(self.r + o.r, self.s + o.s)

    def __sub__(self, o: "ExactReal") -> "ExactReal":
        return ExactReal(self.r - o.r, self.s - o.s)

    def __mul__(self, o: "ExactReal") -> "ExactReal":
        return ExactReal(self.r * o.r + 2 * self.s * o.s, self.r * o.s + self.s * o.r)

    def __neg__(self) -> "ExactReal":
        return ExactReal(-self.r, -self.s)

    def __float__(self) -> float:
        return float(self.r) + float(self.s) * sqrt(2.0)

    def is_zero(self) -> bool:
        return self.r == 0 and self.s == 0

    def sign(self) -> int:
        # r + s*sqrt2 = 0 only when r = s = 0 (sqrt 2 irrational)
        if self.is_zero():
            return 0
        f = float(self)
        if abs(f) > 1e-9:
            return 1 if f > 0 else -1
        raise ArithmeticError("sign of exact value too close to zero")

    def __str__(self) -> str:
        if self.s == 0:
            return str(self.r)
        root = f"{self.s}*sqrt2" if abs(self.s) != 1 else ("sqrt2" if self.s > 0 else "-sqrt2")
        if self.r == 0:
            return root
        sign = "+" if self.s > 0 else ""
        return f"{self.r}{sign}{root if self.s > 0 else root}"


EX_ZERO = ExactReal()
EX_ONE = ExactReal(Fraction(1))
EX_HALF_SQRT2 = ExactReal(Fraction(0), Fraction(1, 2))  # 1/sqrt(2)


@dataclass(frozen=True)
class ExactQuaternion:
    w: ExactReal
    x: ExactReal
    y: ExactReal
    z: ExactReal

    def __mul__(self, o: "ExactQuaternion") -> "ExactQuaternion":
        a, b = self, o
        return ExactQuaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __neg__(self) -> "ExactQuaternion":
        return ExactQuaternion(-self.w, -self.x, -self.y, -self.z)

    def conjugate(self) -> "ExactQuaternion":
        return ExactQuaternion(self.w, -self.x, -self.y, -self.z)

    def to_float(self) -> Quaternion:
        return Quaternion(float(self.w), float(self.x), float(self.y), float(self.z))

    def coords(self) -> tuple[ExactReal, ExactReal, ExactReal, ExactReal]:
        return (self.w, self.x, self.y, self.z)

    def __str__(self) -> str:
        parts = []
        for c, u in zip(self.coords(), ("", "i", "j", "k")):
            if not c.is_zero():
                parts.append(f"({c}){u}" if u else f"({c})")
        return " + ".join(parts) if parts else "0"


def _exq(w=0, x=0, y=0, z=0) -> ExactQuaternion:
    def conv(v):
        if isinstance(v, ExactReal):
            return v
        return ExactReal(Fraction(v))

    return ExactQuaternion(conv(w), conv(x), conv(y), conv(z))


@dataclass(frozen=True)
class ExactSpinPoint:
    left: ExactQuaternion
    right: ExactQuaternion

    def __mul__(self, o: "ExactSpinPoint") -> "ExactSpinPoint":
        return ExactSpinPoint(self.left * o.left, self.right * o.right)

    def __neg__(self) -> "ExactSpinPoint":
        return ExactSpinPoint(-self.left, -self.right)

    def inverse(self) -> "ExactSpinPoint":
        # unit quaternions: inverse = conjugate
        return ExactSpinPoint(self.left.conjugate(), self.right.conjugate())

    def to_float(self) -> SpinPoint:
        return SpinPoint(self.left.to_float(), self.right.to_float())

    def key(self):
        return tuple(
            (c.r, c.s) for c in (*self.left.coords(), *self.right.coords())
        )

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


EXACT_ONE = ExactSpinPoint(_exq(1), _exq(1))

# half-turn lifts (hat elements) and quarter-turn lifts (acute elements)
HAT_A = ExactSpinPoint(_exq(0, 1), _exq(0, -1))
HAT_B = ExactSpinPoint(_exq(0, 0, 0, 1), _exq(0, 0, 0, 1))
HAT_C = ExactSpinPoint(_exq(0, 1), _exq(0, 1))

_h = EX_HALF_SQRT2
ACUTE_A = ExactSpinPoint(ExactQuaternion(_h, _h, EX_ZERO, EX_ZERO), ExactQuaternion(_h, -_h, EX_ZERO, EX_ZERO))
ACUTE_B = ExactSpinPoint(ExactQuaternion(_h, EX_ZERO, EX_ZERO, _h), ExactQuaternion(_h, EX_ZERO, EX_ZERO, _h))
ACUTE_C = ExactSpinPoint(ExactQuaternion(_h, _h, EX_ZERO, EX_ZERO), ExactQuaternion(_h, _h, EX_ZERO, EX_ZERO))

ACUTE_GENERATORS = {"a": ACUTE_A, "b": ACUTE_B, "c": ACUTE_C}
HAT_GENERATORS = {"a": HAT_A, "b": HAT_B, "c": HAT_C}


def exact_signed_permutation(z: ExactSpinPoint) -> tuple[_perm.PermTuple, tuple[int, int, int, int]]:
    """Signed permutation data of Pi(z) for a finite-group element.

    Returns (sigma, signs) with row i of Pi(z) equal to signs[i] * e_{i^sigma}.
    Raises ValueError when Pi(z) is not a signed permutation matrix.
    """
    basis = (
        _exq(1),
        _exq(0, 1),
        _exq(0, 0, 1),
        _exq(0, 0, 0, 1),
    )
    zl, zrc = z.left, z.right.conjugate()
    img = [0, 0, 0, 0]
    signs = [0, 0, 0, 0]
    for j, ej in enumerate(basis):
        col = (zl * ej * zrc).coords()
        nz = [(i, c) for i, c in enumerate(col) if not c.is_zero()]
        if len(nz) != 1:
            raise ValueError("element does not map to a signed permutation matrix")
        i, c = nz[0]
        if not (c - EX_ONE).is_zero() and not (c + EX_ONE).is_zero():
            raise ValueError("nonunit entry in signed permutation matrix")
        img[i] = j + 1
        signs[i] = c.sign()
    return tuple(img), tuple(signs)  # type: ignore[return-value]


class FiniteSpinGroup:
    """A finite subgroup of Spin(4) with exact elements and cached tables."""

    def __init__(self, elements: list[ExactSpinPoint]):
        self.elements = elements
        self._index = {z.key(): i for i, z in enumerate(elements)}
        self.perms: list[_perm.PermTuple] = []
        self.signs: list[tuple[int, int, int, int]] = []
        for z in elements:
            p, s = exact_signed_permutation(z)
            self.perms.append(p)
            self.signs.append(s)
        # canonical lift: among {z, -z} the one with larger coordinate key
        self.lifts: list[int] = []
        for z in elements:
            self.lifts.append(0 if z.key() > (-z).key() else 1)
        self.float_array = np.stack([z.to_float().to_array() for z in elements])
        self._by_label = {
            (self.perms[i], self.signs[i], self.lifts[i]): i for i in range(len(elements))
        }

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, z: ExactSpinPoint) -> int:
        return self._index[z.key()]

    def __contains__(self, z: ExactSpinPoint) -> bool:
        return z.key() in self._index

    def mul(self, i: int, j: int) -> int:
        return self.index(self.elements[i] * self.elements[j])

    def neg(self, i: int) -> int:
        return self.index(-self.elements[i])

    def inverse(self, i: int) -> int:
        return self.index(self.elements[i].inverse())

    def by_label(self, perm: _perm.PermTuple, signs, lift: int) -> int:
        return self._by_label[(perm, tuple(signs), lift)]

    def nearest(self, z: SpinPoint, tol: float = 1e-6) -> int:
        """Index of the group element closest to a floating spin point."""
        d = np.linalg.norm(self.float_array - z.to_array(), axis=1)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise ValueError(f"no group element within {tol} (closest at {d[i]:.3g})")
        return i

    def center(self) -> list[int]:
        n = len(self.elements)
        out = []
        for i in range(n):
            if all(self.mul(i, j) == self.mul(j, i) for j in range(n)):
                out.append(i)
        return out

    def export_json(self) -> list[dict]:
        rows = []
        for i, z in enumerate(self.elements):
            rows.append(
                {
                    "id": i,
                    "left": str(z.left),
                    "right": str(z.right),
                    "perm": list(self.perms[i]),
                    "signs": list(self.signs[i]),
                    "lift": self.lifts[i],
                }
            )
        return rows

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.export_json(), fh, indent=1)


def _closure(generators: list[ExactSpinPoint]) -> list[ExactSpinPoint]:
    seen = {EXACT_ONE.key(): EXACT_ONE}
    frontier = [EXACT_ONE]
    while frontier:
        nxt = []
        for z in frontier:
            for g in generators:
                w = z * g
                if w.key() not in seen:
                    seen[w.key()] = w
                    nxt.append(w)
        frontier = nxt
    return sorted(seen.values(), key=lambda z: z.key())


@lru_cache(maxsize=1)
def quat4_group() -> FiniteSpinGroup:
    """Order-16 group generated by the three half-turn lifts."""
    elems = _closure([HAT_A, HAT_B, HAT_C])
    g = FiniteSpinGroup(elems)
    if len(g) != 16:
        raise AssertionError(f"half-turn closure has {len(g)} elements, expected 16")
    return g


@lru_cache(maxsize=1)
def btilde_group() -> FiniteSpinGroup:
    """Order-384 preimage of the positive signed permutation group."""
    elems = _closure([ACUTE_A, ACUTE_B, ACUTE_C])
    g = FiniteSpinGroup(elems)
    if len(g) != 384:
        raise AssertionError(f"quarter-turn closure has {len(g)} elements, expected 384")
    return g


def acute_of(sigma) -> ExactSpinPoint:
    """Quarter-turn lift of a permutation: product of acute generators along
    a reduced word.  Independent of the chosen reduced word.

    Accepts a word string over 'abc', a one-line 4-tuple, or any object
    with an ``images`` attribute holding the tuple.
    """
    if isinstance(sigma, str):
        word = sigma
    else:
        images = getattr(sigma, "images", sigma)
        word = min(_perm.reduced_words(tuple(images)))
    z = EXACT_ONE
    for ch in word:
        z = z * ACUTE_GENERATORS[ch]
    return z


def verify_acute_well_defined() -> bool:
    """Check acute_of agrees across every reduced word of all 24 permutations."""
    for p in _perm.all_perms():
        vals = {(acute_of(w)).key() for w in _perm.reduced_words(p)}
        if len(vals) != 1:
            return False
    return True


# exact center of the half-turn group: {(+-1, +-1)}
def center_elements() -> dict[str, ExactSpinPoint]:
    plus = EXACT_ONE
    minus = -EXACT_ONE
    ac = HAT_A * HAT_C  # (-1, +1)
    return {"1": plus, "-1": minus, "ac": ac, "-ac": -ac}
