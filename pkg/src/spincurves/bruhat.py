"""Signed Bruhat cells in SO(4) and their lifts to Spin(4).

A rotation Q factors as U_l * Q' * U_r with U_l, U_r upper triangular with
positive diagonal and Q' a signed permutation matrix; the factor Q' labels
the signed cell.  The permutation part comes from the rank pattern of the
lower-left submatrices, the signs from a triangular elimination, and the
spin lift bit from tracking the factor path through the double cover.

`chop` and `adv` give the open cells occupied by a convex germ just before
and just after it passes through a positive-codimension cell; they are
computed by probing the canonical germ z*exp(t*Lambda) at two scales.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _perm, spin4
from .weyl import ETA, IDENTITY, Permutation

__all__ = [
    "RankAmbiguous",
    "StepTooLarge",
    "OutsideChart",
    "FactorizationFailed",
    "NotConvergent",
    "SignedRep",
    "CellFactorization",
    "classify_perm",
    "classify_cell",
    "spin_lift_rep",
    "rep_element",
    "chop",
    "adv",
    "chart_L",
    "chart_Q",
    "pos_generate",
    "pos_test",
    "open_cell_reps",
]


class RankAmbiguous(RuntimeError):
    """A singular value fell inside the guard band around the rank threshold."""


class StepTooLarge(RuntimeError):
    """Path lifting jumped farther than the deck-transformation gap allows."""


class OutsideChart(ValueError):
    """Point not in the triangular chart around the identity."""


class FactorizationFailed(RuntimeError):
    """Totally-positive factorization hit a boundary (division by ~0)."""


class NotConvergent(RuntimeError):
    """Germ probes at different scales disagree."""


@dataclass(frozen=True)
class SignedRep:
    """Label of a signed Bruhat cell: permutation, row signs, and (for spin
    points) the lift bit distinguishing the two preimages of the signed
    permutation matrix.  lift is None when only the SO(4) cell is known."""

    perm: Permutation
    signs: tuple[int, int, int, int]
    lift: int | None = None

    def matrix(self) -> np.ndarray:
        Q = np.zeros((4, 4))
        for i, (img, s) in enumerate(zip(self.perm.images, self.signs)):
            Q[i, img - 1] = float(s)
        return Q

    def serialize(self) -> str:
        signs = "".join("+" if s > 0 else "-" for s in self.signs)
        lift = "?" if self.lift is None else str(self.lift)
        return f"{''.join(map(str, self.perm.images))}:{signs}:{lift}"

    @staticmethod
    def parse(text: str) -> "SignedRep":
        imgs, signs, lift = text.split(":")
        return SignedRep(
            Permutation(tuple(int(c) for c in imgs)),  # type: ignore[arg-type]
            tuple(1 if c == "+" else -1 for c in signs),  # type: ignore[arg-type]
            None if lift == "?" else int(lift),
        )


@dataclass
class CellFactorization:
    rho: Permutation
    rep: SignedRep
    U_left: np.ndarray
    U_right: np.ndarray
    margin: float
    residual: float


def _block_rank_pattern(Q: np.ndarray, tol: float):
    """Ranks of all lower-left blocks Q[i:, :j], with the guard-band check."""
    r = np.zeros((5, 5), dtype=int)
    margin = np.inf
    for i in range(4):
        for j in range(1, 5):
            sv = np.linalg.svd(Q[i:, :j], compute_uv=False)
            inside = (sv > tol / 10) & (sv < tol * 10)
            if inside.any():
                raise RankAmbiguous(
                    f"singular value {sv[inside][0]:.3e} in guard band around {tol:.1e}"
                )
            keep = sv > tol
            if keep.any():
                margin = min(margin, float(sv[keep].min()))
            r[i, j] = int(keep.sum())
    return r, margin


def classify_perm(Q: np.ndarray, tol: float = 1e-8) -> Permutation:
    """Permutation part of the cell of Q from the rank pattern alone."""
    r, _ = _block_rank_pattern(Q, tol)
    img = [0, 0, 0, 0]
    for i in range(4):
        for j in range(1, 5):
            if r[i, j] - r[i + 1, j] - r[i, j - 1] + r[i + 1, j - 1] == 1:
                img[i] = j
    return Permutation(tuple(img))  # type: ignore[arg-type]


def classify_cell(Q: np.ndarray, tol: float = 1e-8) -> CellFactorization:
    """Full signed classification Q = U_l * Q' * U_r.

    Row/column elimination follows the pivot pattern dictated by the rank
    structure; only positive row scalings and unit upper-triangular
    operations are used, so the cell is preserved throughout.
    """
    r, margin = _block_rank_pattern(Q, tol)
    img = [0, 0, 0, 0]
    for i in range(4):
        for j in range(1, 5):
            if r[i, j] - r[i + 1, j] - r[i, j - 1] + r[i + 1, j - 1] == 1:
                img[i] = j
    rho = Permutation(tuple(img))  # type: ignore[arg-type]

    A = Q.copy()
    EL = np.eye(4)  # accumulated left operations: EL @ Q @ ER = Q'
    ER = np.eye(4)
    col_of_row = {i: img[i] - 1 for i in range(4)}
    # process columns left to right with the pivot rows from the pattern
    row_of_col = {v: k for k, v in col_of_row.items()}
    for j in range(4):
        i = row_of_col[j]
        piv = A[i, j]
        # positive scaling of the pivot row
        c = 1.0 / abs(piv)
        A[i, :] *= c
        EL[i, :] *= c
        piv = A[i, j]
        # clear the rest of column j with row operations (lower row to upper rows)
        for i2 in range(4):
            if i2 == i:
                continue
            f = A[i2, j] / piv
            if i2 < i:
                A[i2, :] -= f * A[i, :]
                EL[i2, :] -= f * EL[i, :]
        # clear the rest of pivot row i with column operations (col j to later cols)
        for j2 in range(j + 1, 4):
            f = A[i, j2] / piv
            A[:, j2] -= f * A[:, j]
            ER[:, j2] -= f * ER[:, j]
    signs = tuple(int(np.sign(A[i, col_of_row[i]])) for i in range(4))
    mask = np.zeros((4, 4), dtype=bool)
    for i in range(4):
        mask[i, col_of_row[i]] = True
    residual = float(np.max(np.abs(A[~mask]))) if (~mask).any() else 0.0
    if residual > 1e-3 * max(1.0, float(np.max(np.abs(A)))):
        raise RankAmbiguous(f"elimination residual {residual:.3e} inconsistent with pattern")
    rep = SignedRep(rho, signs, None)
    U_left = np.linalg.inv(EL)
    U_right = np.linalg.inv(ER)
    return CellFactorization(rho, rep, U_left, U_right, margin, residual)


def _track_lift(path_mats, z_start: spin4.SpinPoint, max_depth: int = 22) -> spin4.SpinPoint:
    """Lift a discrete SO(4) path through the cover, starting at z_start.

    Consecutive lifts must move by < 0.1; intervals are bisected until they
    do.  A persistent jump beyond 0.5 raises StepTooLarge."""
    z = z_start
    stack = list(reversed(path_mats))
    prev = None
    depth = 0
    while stack:
        R = stack.pop()
        zp, zm = spin4.spin_from_matrix(R)
        cand = zp if z.distance(zp) <= z.distance(zm) else zm
        d = z.distance(cand)
        if d >= 0.1 and prev is not None and depth < max_depth:
            # refine between the previous accepted matrix and this one
            mid = 0.5 * (prev + R)
            Qm, Rm = np.linalg.qr(mid)
            mid = Qm @ np.diag(np.sign(np.diag(Rm)))
            stack.append(R)
            stack.append(mid)
            depth += 1
            continue
        if d > 0.5:
            raise StepTooLarge(f"lift jumped by {d:.3f}")
        depth = 0
        prev = R
        z = cand
    return z


def _factor_path(fact: CellFactorization, steps: int = 24):
    """Matrices along s -> orth(U_l(s) Q' U_r(s)), s from 1 to 0."""
    Qp = fact.rep.matrix()
    mats = []
    for s in np.linspace(1.0, 0.0, steps):
        Ul = np.eye(4) + s * (fact.U_left - np.eye(4))
        Ur = np.eye(4) + s * (fact.U_right - np.eye(4))
        A = Ul @ Qp @ Ur
        Q, R = np.linalg.qr(A)
        mats.append(Q @ np.diag(np.sign(np.diag(R))))
    return mats


def spin_lift_rep(z: spin4.SpinPoint, tol: float = 1e-8) -> SignedRep:
    """Signed cell of a spin point, including the lift bit.

    Classifies Pi(z), then lifts the triangular factor path back to the
    exact representative; the endpoint decides between the two preimages.
    """
    Q = pi = spin4.pi_matrix(z)
    fact = classify_cell(pi, tol)
    mats = _factor_path(fact)
    end = _track_lift(mats, z)
    bt = spin4.btilde_group()
    idx = bt.nearest(end, tol=1e-5)
    return SignedRep(Permutation(bt.perms[idx]), bt.signs[idx], bt.lifts[idx])


def rep_element(rep: SignedRep) -> spin4.ExactSpinPoint:
    """Exact group element for a signed representative (lift required)."""
    if rep.lift is None:
        raise ValueError("representative has no lift bit")
    bt = spin4.btilde_group()
    return bt.elements[bt.by_label(rep.perm.images, rep.signs, rep.lift)]


@lru_cache(maxsize=1)
def open_cell_reps() -> frozenset[SignedRep]:
    """The 16 representatives of the open cells (permutation part = top)."""
    bt = spin4.btilde_group()
    out = set()
    for i in range(len(bt)):
        if bt.perms[i] == _perm.TOP:
            out.add(SignedRep(Permutation(bt.perms[i]), bt.signs[i], bt.lifts[i]))
    return frozenset(out)


def _germ_probe(rep: SignedRep, eps: float, tol: float) -> SignedRep:
    z = rep_element(rep).to_float()
    g = z * spin4.exp_tangent(spin4.LAMBDA, eps)
    out = spin_lift_rep(g, tol=tol)
    if out.perm != ETA:
        raise NotConvergent(f"germ at scale {eps:.2e} landed in cell {out.perm.name}")
    return out


@lru_cache(maxsize=1024)
def _chop_adv_cached(rep: SignedRep, forward: bool) -> SignedRep:
    sign = 1.0 if forward else -1.0
    probes = set()
    for eps in (0.3, 0.03):
        probes.add(_germ_probe(rep, sign * eps, tol=1e-10))
    if len(probes) != 1:
        raise NotConvergent(f"probe scales disagree for {rep.serialize()}: {probes}")
    return probes.pop()


def chop(rep: SignedRep) -> SignedRep:
    """Open cell occupied immediately before passing through rep's cell."""
    if rep.perm == ETA:
        raise ValueError("chop is defined on positive-codimension cells")
    return _chop_adv_cached(rep, forward=False)


def adv(rep: SignedRep) -> SignedRep:
    """Open cell occupied immediately after passing through rep's cell."""
    if rep.perm == ETA:
        raise ValueError("adv is defined on positive-codimension cells")
    return _chop_adv_cached(rep, forward=True)


# ---------------------------------------------------------------------------
# the triangular chart around the identity
# ---------------------------------------------------------------------------


def _lu_unit_lower(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q = L U with L unit lower triangular and U upper; pivots on U's diagonal."""
    n = Q.shape[0]
    L = np.eye(n)
    U = Q.astype(float).copy()
    for k in range(n):
        piv = U[k, k]
        if abs(piv) < 1e-13:
            raise OutsideChart("vanishing pivot in triangular factorization")
        for i in range(k + 1, n):
            f = U[i, k] / piv
            L[i, k] = f
            U[i, :] -= f * U[k, :]
    return L, U


def chart_Q(L: np.ndarray, steps: int = 16) -> spin4.SpinPoint:
    """Image of a unit lower triangular matrix in the chart around 1.

    Orthonormalizes L and lifts along the linear path from the identity,
    which stays inside the chart."""
    L = np.asarray(L, dtype=float)
    if np.max(np.abs(np.triu(L, 1))) > 0 or np.max(np.abs(np.diag(L) - 1.0)) > 0:
        raise ValueError("argument must be unit lower triangular")
    mats = []
    for s in np.linspace(0.0, 1.0, steps):
        A = np.eye(4) + s * (L - np.eye(4))
        Q, R = np.linalg.qr(A)
        mats.append(Q @ np.diag(np.sign(np.diag(R))))
    return _track_lift(mats, spin4.SPIN_ONE)


def chart_L(z: spin4.SpinPoint) -> np.ndarray:
    """Inverse chart: unit lower triangular coordinates of z.

    Requires Pi(z) to factor as L*U with positive pivots and z to be on
    the identity sheet; raises OutsideChart otherwise."""
    Q = spin4.pi_matrix(z)
    L, U = _lu_unit_lower(Q)
    if np.any(np.diag(U) <= 0):
        raise OutsideChart("negative pivot: point is outside the chart")
    zc = chart_Q(L)
    if zc.distance(z) > 1e-6:
        if zc.distance(-z) <= 1e-6:
            raise OutsideChart("point is on the opposite sheet of the cover")
        raise OutsideChart("chart round trip failed to reproduce the point")
    return L


# ---------------------------------------------------------------------------
# total positivity in the translated chart
# ---------------------------------------------------------------------------


def _elementary(i: int, t: float) -> np.ndarray:
    """Unitriangular generator I + t E_{i+1,i} (1-based i in {1,2,3})."""
    E = np.eye(4)
    E[i, i - 1] = t
    return E


def _pos_base(y1: float, y2: float) -> np.ndarray:
    return np.array(
        [
            [y1, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, y2, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )


def pos_generate(y1: float, y2: float, t1: float, t2: float, t3: float, t4: float) -> np.ndarray:
    """Totally positive point of the translated chart: base * l2(t1) l1(t2) l3(t3) l2(t4)."""
    if min(t1, t2, t3, t4) <= 0:
        raise ValueError("parameters t1..t4 must be positive")
    return _pos_base(y1, y2) @ _elementary(2, t1) @ _elementary(1, t2) @ _elementary(3, t3) @ _elementary(2, t4)


def pos_test(M: np.ndarray, boundary_tol: float = 1e-11) -> str:
    """Invert the elementary factorization; 'Pos' when all parameters are
    positive, 'Neg' when all are negative, 'Neither' otherwise.

    Raises FactorizationFailed on the boundary (vanishing denominators)."""
    M = np.asarray(M, dtype=float)
    # chart entries
    x1, x2 = M[2, 0], M[2, 1]
    x3, x4 = M[3, 0], M[3, 1]
    y1p, y2p = M[0, 0], M[2, 2]
    if abs(x3) < boundary_tol:
        raise FactorizationFailed("x3 ~ 0: boundary of the factorization")
    y2 = x1 / x3
    t3 = y2 - y2p
    if abs(t3) < boundary_tol:
        raise FactorizationFailed("t3 ~ 0: boundary of the factorization")
    t4 = (y2 * x4 - x2) / t3
    t1 = x4 - t4
    if abs(t1) < boundary_tol:
        raise FactorizationFailed("t1 ~ 0: boundary of the factorization")
    t2 = x3 / t1
    ts = np.array([t1, t2, t3, t4])
    if np.all(ts > 0):
        return "Pos"
    if np.all(ts < 0):
        return "Neg"
    return "Neither"


def pos_parameters(M: np.ndarray) -> tuple[float, float, float, float, float, float]:
    """Recover (y1, y2, t1..t4) from a chart matrix; see pos_test."""
    M = np.asarray(M, dtype=float)
    x1, x2 = M[2, 0], M[2, 1]
    x3, x4 = M[3, 0], M[3, 1]
    y1p, y2p = M[0, 0], M[2, 2]
    y2 = x1 / x3
    t3 = y2 - y2p
    t4 = (y2 * x4 - x2) / t3
    t1 = x4 - t4
    t2 = x3 / t1
    y1 = y1p + t2
    return y1, y2, t1, t2, t3, t4
