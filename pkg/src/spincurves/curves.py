"""Locally convex curves in Spin(4): integration from curvature data,
Frenet lifting, singular sets, itineraries, and two explicit families.

A curve is represented by a dense `CurveSample` carrying an evaluator, so
singular times can be refined well below the grid spacing.  Membership in
the open cell is detected through the three lower-left minors of the
covering matrix; their zeros are the singular times, and classifying the
cell at each zero produces the itinerary word.

The quartic transversal family (`transversal_*`) and the normal form of
the top-letter neighborhood (`eta_normal_form`, `eta_family_curve`) are
implemented with exact polynomial frames where possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import spin4
from .bruhat import SignedRep, adv, chart_Q, chop, classify_perm, spin_lift_rep
from .spin4 import Quaternion, SpinPoint
from .weyl import ETA, MuVector, NotInM, Permutation, Word, mu, word_name

__all__ = [
    "NotLocallyConvex",
    "StepRejected",
    "BoundarySingular",
    "CurvatureProfile",
    "CurveSample",
    "SingularPoint",
    "Itinerary",
    "integrate",
    "frenet_lift",
    "singular_set",
    "itinerary",
    "is_convex",
    "TransversalPoint",
    "transversal_frame",
    "transversal_minors",
    "q_polynomials",
    "transversal_itinerary",
    "scan_sphere",
    "verify_transversal_identities",
    "EtaNormalForm",
    "eta_normal_form",
    "eta_family_curve",
    "phi_map",
    "v_map",
]


class NotLocallyConvex(ValueError):
    """Frame determinant dropped to zero or below."""


class StepRejected(RuntimeError):
    """Renormalization drift exceeded the integrator's budget."""


class BoundarySingular(RuntimeError):
    """A singular time collided with the end of the parameter window."""


# ---------------------------------------------------------------------------
# curvature profiles
# ---------------------------------------------------------------------------


@dataclass
class CurvatureProfile:
    """Three positive curvature functions on a parameter window."""

    kappas: tuple[Callable[[float], float], ...]
    start: SpinPoint = spin4.SPIN_ONE
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if len(self.kappas) != 3:
            raise ValueError("expected three curvature functions")
        ts = np.linspace(*self.domain, 257)
        for k, f in enumerate(self.kappas):
            vals = np.array([f(t) for t in ts])
            if vals.min() <= 0:
                raise ValueError(f"curvature {k + 1} is not positive on the window")

    @staticmethod
    def constant(values: Sequence[float], start: SpinPoint = spin4.SPIN_ONE,
                 domain=(0.0, 1.0)) -> "CurvatureProfile":
        v = tuple(float(x) for x in values)
        return CurvatureProfile(tuple((lambda t, c=c: c) for c in v), start, domain)

    @staticmethod
    def random_trig(rng: np.random.Generator, n_modes: int = 2,
                    base_range=(3.0, 9.0), amp: float = 1.0,
                    start: SpinPoint = spin4.SPIN_ONE, domain=(0.0, 1.0)) -> "CurvatureProfile":
        """Seeded positive trigonometric-polynomial profile."""
        fns = []
        for _ in range(3):
            a = rng.uniform(-amp, amp, n_modes)
            b = rng.uniform(-amp, amp, n_modes)
            c0 = rng.uniform(*base_range) + np.sum(np.abs(a)) + np.sum(np.abs(b))

            def f(t, a=a, b=b, c0=c0):
                ang = 2 * np.pi * np.arange(1, len(a) + 1) * t
                return float(c0 + np.dot(a, np.cos(ang)) + np.dot(b, np.sin(ang)))

            fns.append(f)
        return CurvatureProfile(tuple(fns), start, domain)

    @staticmethod
    def from_json(data: dict) -> "CurvatureProfile":
        """Profiles as JSON: three entries, each a list of polynomial pieces
        [{"range": [t0, t1], "coeffs": [c0, c1, ...]}, ...] (ascending)."""
        fns = []
        for entry in data["kappas"]:
            pieces = [(tuple(p["range"]), np.array(p["coeffs"], dtype=float))
                      for p in entry["pieces"]]

            def f(t, pieces=pieces):
                for (t0, t1), coeffs in pieces:
                    if t0 <= t <= t1:
                        return float(np.polynomial.polynomial.polyval(t, coeffs))
                raise ValueError(f"t={t} outside every piece")

            fns.append(f)
        domain = tuple(data.get("domain", (0.0, 1.0)))
        start = SpinPoint.from_array(data["start"]) if "start" in data else spin4.SPIN_ONE
        return CurvatureProfile(tuple(fns), start, domain)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# integration of the frame equation
# ---------------------------------------------------------------------------


def _tangent_pair(profile: CurvatureProfile, t: float) -> tuple[np.ndarray, np.ndarray]:
    k1, k2, k3 = (f(t) for f in profile.kappas)
    # left = (k1+k3)/2 i + k2/2 k ; right = (k3-k1)/2 i + k2/2 k
    ul = np.array([0.0, 0.5 * (k1 + k3), 0.0, 0.5 * k2])
    ur = np.array([0.0, 0.5 * (k3 - k1), 0.0, 0.5 * k2])
    return ul, ur


def _qmul_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    x = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    y = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    z = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]
    return np.array([w, x, y, z])


def _ode_rhs(profile: CurvatureProfile, t: float, y: np.ndarray) -> np.ndarray:
    ul, ur = _tangent_pair(profile, t)
    return np.concatenate([_qmul_arr(y[:4], ul), _qmul_arr(y[4:], ur)])


def _rk4_step(profile: CurvatureProfile, t: float, y: np.ndarray, h: float,
              drift_tol: float = 1e-6) -> np.ndarray:
    k1 = _ode_rhs(profile, t, y)
    k2 = _ode_rhs(profile, t + h / 2, y + h / 2 * k1)
    k3 = _ode_rhs(profile, t + h / 2, y + h / 2 * k2)
    k4 = _ode_rhs(profile, t + h, y + h * k3)
    y1 = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    nl = np.linalg.norm(y1[:4])
    nr = np.linalg.norm(y1[4:])
    if abs(nl - 1) > drift_tol or abs(nr - 1) > drift_tol:
        raise StepRejected(f"renormalization drift {max(abs(nl - 1), abs(nr - 1)):.2e} at t={t:.6f}")
    y1[:4] /= nl
    y1[4:] /= nr
    return y1


@dataclass
class CurveSample:
    """Densely sampled curve in Spin(4) with an off-grid evaluator."""

    times: np.ndarray
    points: list[SpinPoint]
    order: str
    _eval: Callable[[float], SpinPoint]

    def at(self, t: float) -> SpinPoint:
        return self._eval(float(t))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])


def integrate(profile: CurvatureProfile, steps: int = 2000,
              verify: bool = True) -> CurveSample:
    """Fourth-order integration of the frame equation, renormalizing the
    quaternion pair each step."""
    t0, t1 = profile.domain
    times = np.linspace(t0, t1, steps + 1)
    h = (t1 - t0) / steps
    ys = np.empty((steps + 1, 8))
    ys[0] = profile.start.to_array()
    for k in range(steps):
        ys[k + 1] = _rk4_step(profile, times[k], ys[k], h)
    points = [SpinPoint.from_array(y) for y in ys]

    def evaluate(t: float) -> SpinPoint:
        t = min(max(t, t0), t1)
        k = min(int((t - t0) / h), steps)
        tk = times[k]
        if t < tk:
            k = max(k - 1, 0)
            tk = times[k]
        y = ys[k].copy()
        rem = t - tk
        n_sub = max(1, int(np.ceil(abs(rem) / h * 2)))
        hs = rem / n_sub
        tt = tk
        for _ in range(n_sub):
            if abs(hs) < 1e-300:
                break
            y = _rk4_step(profile, tt, y, hs)
            tt += hs
        return SpinPoint.from_array(y)

    sample = CurveSample(times, points, "rk4", evaluate)
    if verify:
        _verify_logdiff(profile, sample)
    return sample


def _verify_logdiff(profile: CurvatureProfile, sample: CurveSample,
                    n_check: int = 9, tol: float = 1e-6) -> None:
    t0, t1 = profile.domain
    delta = (t1 - t0) * 1e-6
    for t in np.linspace(t0 + 10 * delta, t1 - 10 * delta, n_check):
        zm = sample.at(t - delta).to_array()
        zp = sample.at(t + delta).to_array()
        z = sample.at(t)
        dz = (zp - zm) / (2 * delta)
        logl = _qmul_arr(z.left.conjugate().to_array(), dz[:4])
        logr = _qmul_arr(z.right.conjugate().to_array(), dz[4:])
        ul, ur = _tangent_pair(profile, t)
        err = max(np.max(np.abs(logl - ul)), np.max(np.abs(logr - ur)))
        if err > tol:
            raise StepRejected(f"frame equation defect {err:.2e} at t={t:.6f}")


# ---------------------------------------------------------------------------
# Frenet lifting of curves on the 3-sphere
# ---------------------------------------------------------------------------

# 7-point central difference stencils on a uniform grid
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60])
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
_D3 = np.array([1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8])


def _frame_from_jet(g, g1, g2, g3) -> np.ndarray:
    B = np.stack([g, g1, g2, g3], axis=1)
    if np.linalg.det(B) <= 0:
        raise NotLocallyConvex("frame determinant is not positive")
    Q, R = np.linalg.qr(B)
    return Q @ np.diag(np.sign(np.diag(R)))


def frenet_lift(times: np.ndarray, gamma: np.ndarray,
                start: SpinPoint | None = None) -> CurveSample:
    """Frame a sampled curve on S^3 and lift it through the double cover.

    `gamma` has unit rows on the uniform grid `times`; derivatives come
    from 7-point central differences, so the returned sample lives on the
    interior grid times[3:-3].  The lift starts at the preimage of the
    first frame nearest to `start` (default: lexicographically positive).
    """
    times = np.asarray(times, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    n = len(times)
    if n < 9:
        raise ValueError("need at least 9 samples")
    h = times[1] - times[0]
    if np.max(np.abs(np.diff(times) - h)) > 1e-9 * max(abs(h), 1.0):
        raise ValueError("grid must be uniform")
    g1 = np.empty_like(gamma)
    g2 = np.empty_like(gamma)
    g3 = np.empty_like(gamma)
    for c in range(4):
        g1[:, c] = np.convolve(gamma[:, c], _D1[::-1], mode="same") / h
        g2[:, c] = np.convolve(gamma[:, c], _D2[::-1], mode="same") / h**2
        g3[:, c] = np.convolve(gamma[:, c], _D3[::-1], mode="same") / h**3
    lo, hi = 3, n - 3
    frames = [_frame_from_jet(gamma[k], g1[k], g2[k], g3[k]) for k in range(lo, hi)]
    zp, zm = spin4.spin_from_matrix(frames[0])
    if start is not None:
        z = zp if start.distance(zp) <= start.distance(zm) else zm
    else:
        z = zp if tuple(zp.to_array()) >= tuple(zm.to_array()) else zm
    points = [z]
    for F in frames[1:]:
        zp, zm = spin4.spin_from_matrix(F)
        z = zp if points[-1].distance(zp) <= points[-1].distance(zm) else zm
        points.append(z)
    sub_times = times[lo:hi]

    def evaluate(t: float) -> SpinPoint:
        k = int(np.clip(np.searchsorted(times, t) - 3, 3, n - 4))
        idx = np.arange(k - 3, k + 4)
        ts = times[idx] - t
        # degree-6 fit of the local jet, differentiated analytically
        co = [np.polynomial.polynomial.polyfit(ts, gamma[idx, c], 6) for c in range(4)]
        g = np.array([c[0] for c in co])
        d1 = np.array([c[1] for c in co])
        d2 = np.array([2 * c[2] for c in co])
        d3 = np.array([6 * c[3] for c in co])
        g = g / np.linalg.norm(g)
        F = _frame_from_jet(g, d1, d2, d3)
        zp, zm = spin4.spin_from_matrix(F)
        j = int(np.clip(np.searchsorted(sub_times, t), 0, len(points) - 1))
        ref = points[j]
        return zp if ref.distance(zp) <= ref.distance(zm) else zm

    return CurveSample(sub_times, points, "frenet-fd7", evaluate)


# ---------------------------------------------------------------------------
# singular sets and itineraries
# ---------------------------------------------------------------------------


def _minors_of_point(z: SpinPoint) -> np.ndarray:
    Q = spin4.pi_matrix(z)
    return np.array(
        [
            Q[3, 0],
            Q[2, 0] * Q[3, 1] - Q[2, 1] * Q[3, 0],
            np.linalg.det(Q[1:, :3]),
        ]
    )


@dataclass(frozen=True)
class SingularPoint:
    t: float
    vanishing: tuple[bool, bool, bool]


def singular_set(sample: CurveSample, tol: float = 1e-9,
                 merge_radius: float = 1e-9,
                 dip_rel: float = 1e-5) -> list[SingularPoint]:
    """Zeros of the three lower-left minors along the curve.

    Odd-order zeros come from sign-change bracketing; even-order zeros
    from screening parabolic dips of |m| and bisecting the derivative.
    Roots closer than `merge_radius` fuse into one singular time.  A root
    within two grid steps of the window boundary raises BoundarySingular.
    """
    times = sample.times
    vals = np.stack([_minors_of_point(p) for p in sample.points])
    h = float(times[1] - times[0])
    t0, t1 = sample.domain
    margin = 2 * h
    roots: list[float] = []

    for k in range(3):
        m = vals[:, k]
        scale = float(np.max(np.abs(m)))
        if scale == 0:
            raise BoundarySingular(f"minor {k + 1} vanishes identically on the grid")

        def f(t, k=k):
            return float(_minors_of_point(sample.at(t))[k])

        # odd-order zeros
        sign_change = np.nonzero(m[:-1] * m[1:] < 0)[0]
        for i in sign_change:
            r = brentq(f, times[i], times[i + 1], xtol=1e-12, rtol=8.9e-16)
            roots.append(float(r))
        # even-order zeros: interior dips of |m|
        absm = np.abs(m)
        for i in range(1, len(m) - 1):
            if not (absm[i] <= absm[i - 1] and absm[i] <= absm[i + 1]):
                continue
            if absm[i] > dip_rel * scale:
                continue
            if m[i - 1] * m[i] < 0 or m[i] * m[i + 1] < 0:
                continue  # already caught as a sign change
            a, b = times[i - 1], times[i + 1]
            delta = 1e-5 * max(1.0, abs(b - a))

            def df(t, k=k):
                return float(
                    _minors_of_point(sample.at(t + delta))[k]
                    - _minors_of_point(sample.at(t - delta))[k]
                )

            if df(a) * df(b) < 0:
                r = brentq(df, a, b, xtol=1e-12, rtol=8.9e-16)
            else:
                r = times[i]
            if abs(f(r)) < max(1e-8 * scale, tol * scale):
                roots.append(float(r))

    merged: list[list[float]] = []
    for r in sorted(roots):
        if merged and r - merged[-1][-1] < merge_radius:
            merged[-1].append(r)
        else:
            merged.append([r])
    out = []
    for grp in merged:
        t = float(np.mean(grp))
        if t - t0 < margin or t1 - t < margin:
            raise BoundarySingular(f"singular time {t:.6f} within the boundary margin")
        mv = np.abs(_minors_of_point(sample.at(t)))
        scale = np.maximum(np.max(np.abs(vals), axis=0), 1e-300)
        vanish = tuple(bool(mv[k] < 1e-6 * scale[k]) for k in range(3))
        out.append(SingularPoint(t, vanish))  # type: ignore[arg-type]
    return out


@dataclass
class Itinerary:
    word: Word
    times: tuple[float, ...]
    cells: tuple[SignedRep, ...]
    endpoint: SpinPoint
    mu: MuVector | None

    @property
    def word_str(self) -> str:
        return word_name(self.word)

    def to_json(self) -> dict:
        return {
            "word": [p.name for p in self.word],
            "times": list(self.times),
            "cells": [c.serialize() for c in self.cells],
            "endpoint": list(self.endpoint.to_array()),
            "mu": list(self.mu) if self.mu is not None else None,
        }


def itinerary(sample: CurveSample, tol: float = 1e-9,
              classify_tol: float = 1e-8, validate: bool = True) -> Itinerary:
    """Itinerary of a curve: the letters eta*rho_j read off the cells at the
    singular times.

    With validate=True the open-cell chain is checked: between consecutive
    letters the curve must sit in the cell that `adv` of the previous letter
    and `chop` of the next letter both name.
    """
    sing = singular_set(sample, tol=tol)
    letters: list[Permutation] = []
    cells: list[SignedRep] = []
    for sp in sing:
        z = sample.at(sp.t)
        rho = _classify_retry(classify_perm, spin4.pi_matrix(z), classify_tol)
        if rho == ETA:
            raise RuntimeError(f"open cell at a detected singular time {sp.t}")
        letters.append(ETA * rho)
        cells.append(_classify_retry(spin_lift_rep, z, classify_tol))
    if validate and sing:
        t0, t1 = sample.domain
        ts = [sp.t for sp in sing]
        gaps = [(t0, ts[0])] + list(zip(ts[:-1], ts[1:])) + [(ts[-1], t1)]
        for j, (a, b) in enumerate(gaps):
            mid_rep = _classify_retry(spin_lift_rep, sample.at((a + b) / 2), classify_tol)
            if mid_rep.perm != ETA:
                raise RuntimeError("midpoint between letters is not in the open cell")
            if j < len(cells) and mid_rep != chop(cells[j]):
                raise RuntimeError(f"chop mismatch before letter {j}")
            if j > 0 and mid_rep != adv(cells[j - 1]):
                raise RuntimeError(f"adv mismatch after letter {j - 1}")
    word = tuple(letters)
    try:
        grading = mu(word)
    except NotInM:
        grading = None
    return Itinerary(word, tuple(sp.t for sp in sing), tuple(cells),
                     sample.points[-1], grading)


def is_convex(sample: CurveSample, tol: float = 1e-9) -> bool:
    """A curve confined to one open cell has empty itinerary."""
    return len(singular_set(sample, tol=tol)) == 0


# ---------------------------------------------------------------------------
# the quartic transversal family
# ---------------------------------------------------------------------------

TransversalPoint = tuple[float, float, float]


def transversal_frame(p: TransversalPoint, t: float) -> np.ndarray:
    """Polynomial frame of the transversal family at parameter p = (x1,x2,x3).

    Gram-Schmidt of this matrix (det = 1 identically) gives the covering
    matrix of the curve."""
    x1, x2, x3 = p
    return np.array(
        [
            [t, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [t**3 / 6 + x2 * t + x1, t**2 / 2 + x2, t, 1.0],
            [t**2 / 2 + x3, t, 1.0, 0.0],
        ]
    )


def transversal_minors(p: TransversalPoint, t) -> tuple:
    """Closed forms of the three lower-left minors along the family."""
    x1, x2, x3 = p
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else t
    ma = t**2 / 2 + x3
    mb = -(t**4) / 12 + (x2 - x3) * t**2 / 2 + x1 * t - x2 * x3
    mc = -(t**2) / 2 + x2
    return ma, mb, mc


def q_polynomials(p: TransversalPoint) -> dict[str, float]:
    """The five region polynomials of the family.

    q_ba and q_bc are the factors of the exact resultant/discriminant
    identities (see verify_transversal_identities); q_ac is a square.
    """
    x1, x2, x3 = p
    return {
        "q_ab": x3,
        "q_ba": 9 * x1**2 + 18 * x2**2 * x3 - 12 * x2 * x3**2 + 2 * x3**3,
        "q_ac": (x2 + x3) ** 2,
        "q_bc": -9 * x1**2 + 2 * x2**3 - 12 * x2**2 * x3 + 18 * x2 * x3**2,
        "q_cb": x2,
    }


def _transversal_roots(p: TransversalPoint, imag_tol: float = 1e-6,
                       cluster: float = 1e-6) -> list[float]:
    x1, x2, x3 = p
    roots: list[float] = []
    if x3 <= 0:
        r = np.sqrt(-2 * x3)
        roots.extend([-r, r] if r > 0 else [0.0, 0.0])
    if x2 >= 0:
        r = np.sqrt(2 * x2)
        roots.extend([-r, r] if r > 0 else [0.0, 0.0])
    quartic = np.array([-1 / 12, 0.0, (x2 - x3) / 2, x1, -x2 * x3])
    for z in np.roots(quartic):
        if abs(z.imag) < imag_tol:
            roots.append(float(z.real))
    merged: list[list[float]] = []
    for r in sorted(roots):
        if merged and r - merged[-1][-1] < cluster:
            merged[-1].append(r)
        else:
            merged.append([r])
    return [float(np.mean(g)) for g in merged]


def transversal_itinerary(p: TransversalPoint, tol: float = 1e-8
                          ) -> tuple[Word, list[float]]:
    """Itinerary of the family curve over a window containing every root."""
    times = _transversal_roots(p)
    letters = []
    for t in times:
        M = transversal_frame(p, t)
        Q, R = np.linalg.qr(M)
        Q = Q @ np.diag(np.sign(np.diag(R)))
        rho = classify_perm(Q, tol=tol)
        letters.append(ETA * rho)
    return tuple(letters), times


def scan_sphere(radius: float = 1.0, nlat: int = 101, nlon: int = 201,
                tol: float = 1e-8) -> list[dict]:
    """Itineraries and region signs over a latitude-longitude sphere grid.

    Longitude 0 points at the positive x2 axis; latitude +90 degrees is the
    negative x1 pole.  Classification of the singular frames is batched.
    """
    lats = np.linspace(-90.0, 90.0, nlat)
    lons = np.linspace(0.0, 360.0, nlon, endpoint=False) if nlon > 1 else np.array([0.0])
    pts = []
    for la in lats:
        for lo in lons:
            la_r, lo_r = np.deg2rad(la), np.deg2rad(lo)
            x1 = -radius * np.sin(la_r)
            x2 = radius * np.cos(la_r) * np.cos(lo_r)
            x3 = -radius * np.cos(la_r) * np.sin(lo_r)
            pts.append((x1, x2, x3))

    jobs: list[tuple[int, float]] = []  # (point index, singular time)
    times_per_pt: list[list[float]] = []
    for i, p in enumerate(pts):
        ts = _transversal_roots(p)
        times_per_pt.append(ts)
        jobs.extend((i, t) for t in ts)

    frames = np.empty((len(jobs), 4, 4))
    for j, (i, t) in enumerate(jobs):
        frames[j] = transversal_frame(pts[i], t)
    Q, R = np.linalg.qr(frames)
    signs = np.sign(np.einsum("nii->ni", R))
    Q = Q * signs[:, None, :]

    perms = _batched_perms(Q, tol)
    words: list[list[Permutation]] = [[] for _ in pts]
    for (i, _t), rho in zip(jobs, perms):
        words[i].append(ETA * rho)

    rows = []
    for i, p in enumerate(pts):
        q = q_polynomials(p)
        rows.append(
            {
                "x1": p[0],
                "x2": p[1],
                "x3": p[2],
                "word": [s.name for s in words[i]],
                "word_str": word_name(tuple(words[i])),
                "times": times_per_pt[i],
                "q_signs": {k: float(np.sign(v)) if abs(v) > 1e-12 else 0.0
                            for k, v in q.items()},
                "q_values": q,
            }
        )
    return rows


def _batched_perms(Q: np.ndarray, tol: float) -> list[Permutation]:
    """Rank-pattern classification of a stack of rotations."""
    n = Q.shape[0]
    r = np.zeros((n, 5, 5), dtype=int)
    for i in range(4):
        for j in range(1, 5):
            sv = np.linalg.svd(Q[:, i:, :j], compute_uv=False)
            r[:, i, j] = (sv > tol).sum(axis=1)
    d = r[:, :4, 1:] - r[:, 1:, 1:] - r[:, :4, :4] + r[:, 1:, :4]
    out = []
    for k in range(n):
        img = [0, 0, 0, 0]
        ii, jj = np.nonzero(d[k] == 1)
        for i, j in zip(ii, jj):
            img[i] = j + 1
        out.append(Permutation(tuple(img)))  # type: ignore[arg-type]
    return out


def verify_transversal_identities(n_random: int = 1000, seed: int = 0) -> dict:
    """The six resultant/discriminant factorizations of the family minors.

    Returns exact booleans (rational arithmetic) and the worst relative
    error of a numerical spot check at random parameter points.
    """
    import sympy as sp

    t, x1, x2, x3 = sp.symbols("t x1 x2 x3")
    ma = t**2 / sp.Integer(2) + x3
    mb = -(t**4) / sp.Integer(12) + (x2 - x3) * t**2 / sp.Integer(2) + x1 * t - x2 * x3
    mc = -(t**2) / sp.Integer(2) + x2
    q_ab, q_cb = x3, x2
    q_ac = (x2 + x3) ** 2
    q_ba = 9 * x1**2 + 18 * x2**2 * x3 - 12 * x2 * x3**2 + 2 * x3**3
    q_bc = -9 * x1**2 + 2 * x2**3 - 12 * x2**2 * x3 + 18 * x2 * x3**2
    checks = {
        "res_ab": sp.expand(sp.resultant(ma, mb, t) - q_ab * q_ba / 72) == 0,
        "res_bc": sp.expand(sp.resultant(mb, mc, t) - q_bc * q_cb / 72) == 0,
        "res_ac": sp.expand(sp.resultant(ma, mc, t) - q_ac / 4) == 0,
        "disc_a": sp.expand(sp.discriminant(ma, t) + 2 * q_ab) == 0,
        "disc_c": sp.expand(sp.discriminant(mc, t) - 2 * q_cb) == 0,
        "disc_b": sp.expand(sp.discriminant(mb, t) - q_ba * q_bc / 432) == 0,
    }

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_random):
        x = rng.uniform(-2, 2, 3)
        q = q_polynomials(tuple(x))
        ca = np.array([0.5, 0.0, x[2]])
        cb = np.array([-1 / 12, 0.0, (x[1] - x[2]) / 2, x[0], -x[1] * x[2]])
        cc = np.array([-0.5, 0.0, x[1]])
        pairs = [
            (_num_resultant(ca, cb), q["q_ab"] * q["q_ba"] / 72),
            (_num_resultant(cb, cc), q["q_bc"] * q["q_cb"] / 72),
            (_num_resultant(ca, cc), q["q_ac"] / 4),
            (_num_discriminant(ca), -2 * q["q_ab"]),
            (_num_discriminant(cc), 2 * q["q_cb"]),
            (_num_discriminant(cb), q["q_ba"] * q["q_bc"] / 432),
        ]
        for lhs, rhs in pairs:
            rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)
            worst = max(worst, rel)
    return {"exact": checks, "max_rel_err": worst}


def _num_resultant(f: np.ndarray, g: np.ndarray) -> float:
    """Resultant via the Sylvester determinant (coefficients highest first)."""
    f = np.trim_zeros(np.asarray(f, dtype=float), "f")
    g = np.trim_zeros(np.asarray(g, dtype=float), "f")
    m, n = len(f) - 1, len(g) - 1
    S = np.zeros((m + n, m + n))
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    return float(np.linalg.det(S))


def _num_discriminant(f: np.ndarray) -> float:
    f = np.trim_zeros(np.asarray(f, dtype=float), "f")
    m = len(f) - 1
    df = np.polyder(f)
    sign = (-1) ** (m * (m - 1) // 2)
    return sign * _num_resultant(f, df) / f[0]


# ---------------------------------------------------------------------------
# the normal form around the top letter
# ---------------------------------------------------------------------------


def _gauss_nodes(n: int = 48):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _quad(f, a: float, b: float, nodes=None) -> float:
    if a == b:
        return 0.0
    x, w = nodes if nodes is not None else _gauss_nodes()
    mid, half = (a + b) / 2, (b - a) / 2
    return float(half * np.dot(w, [f(mid + half * xi) for xi in x]))


@dataclass
class EtaNormalForm:
    """Solution of the slice equations: the second zero time of the (3,1)
    entry and the unique (x43, x42) values putting the curve back on the
    codimension-4 stratum."""

    x32: float
    t31: float
    z2: float
    z3: float


def eta_normal_form(beta1, beta2, beta3, x32: float,
                    bracket_scale: float = 4.0) -> EtaNormalForm:
    """Normal-form data for curves in the slice with vanishing (3,1) and
    (4,1) entries at time zero.

    The averaged entry h31(t) = int_0^1 beta1(st) g32(st) ds has a unique
    zero t31 with sign(t31) = -sign(x32); the returned z3, z2 solve the
    two remaining entry equations (z3 enters affinely).
    """
    for name, f in (("beta1", beta1), ("beta2", beta2), ("beta3", beta3)):
        for t in np.linspace(-1.5, 1.5, 31):
            if f(t) <= 0:
                raise ValueError(f"{name} must be positive on the working window")

    def B2(t):
        return _quad(beta2, 0.0, t)

    def g32(t):
        return x32 + B2(t)

    def h31(t):
        return _quad(lambda s: beta1(s * t) * g32(s * t), 0.0, 1.0)

    if x32 == 0.0:
        return EtaNormalForm(0.0, 0.0, 0.0, 0.0)

    direction = -np.sign(x32)
    T = abs(x32)
    while np.sign(h31(direction * T)) == np.sign(x32):
        T *= 2.0
        if T > bracket_scale:
            raise RuntimeError("failed to bracket the zero of h31")
    lo, hi = (direction * T, 0.0) if direction < 0 else (0.0, direction * T)
    t31 = float(brentq(h31, lo, hi, xtol=1e-14, rtol=8.9e-16))

    def B3(t):
        return _quad(beta3, 0.0, t)

    def g42_0(t):
        return _quad(lambda u: beta2(u) * B3(u), t31, t)

    g41_0_at0 = _quad(lambda u: beta1(u) * g42_0(u), t31, 0.0)
    H = _quad(lambda u: beta1(u) * (B2(u) - B2(t31)), t31, 0.0)
    z3 = -g41_0_at0 / H
    z2 = g42_0(0.0) + z3 * (-B2(t31))
    return EtaNormalForm(float(x32), t31, float(z2), float(z3))


def phi_map(nf: EtaNormalForm, x43: float, x42: float) -> tuple[float, float]:
    """Defect of a slice curve from the stratum: (x43 - z3, x42 - z2)."""
    return (x43 - nf.z3, x42 - nf.z2)


def v_map(x1: float, x2: float, x3: float) -> tuple[float, float]:
    """Fold map whose zero set is the origin plus the two coordinate
    half-lines x2 > 0 and x3 > 0."""
    return (x1, x2 + x3 - abs(x2 - x3))


def eta_family_curve(x32: float, x43: float, x42: float,
                     betas=None, window: tuple[float, float] = (-0.6, 0.6),
                     steps: int = 2400) -> CurveSample:
    """Slice curve with the given initial entries, mapped into Spin(4).

    The unit lower triangular frame solves L' = L * N(t) with N the
    subdiagonal matrix of the betas; x31 and x41 start at zero.  The spin
    curve is the lift of the orthonormalized frame through the chart.
    """
    if betas is None:
        betas = (lambda t: 1.0, lambda t: 1.0, lambda t: 1.0)
    t0, t1 = window
    L0 = np.eye(4)
    L0[2, 1] = x32
    L0[3, 1] = x42
    L0[3, 2] = x43

    def rhs(t, L):
        N = np.zeros((4, 4))
        N[1, 0] = betas[0](t)
        N[2, 1] = betas[1](t)
        N[3, 2] = betas[2](t)
        return L @ N

    def rk4(L, t, h):
        k1 = rhs(t, L)
        k2 = rhs(t + h / 2, L + h / 2 * k1)
        k3 = rhs(t + h / 2, L + h / 2 * k2)
        k4 = rhs(t + h, L + h * k3)
        return L + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    times = np.linspace(t0, t1, steps + 1)
    h = (t1 - t0) / steps
    i0 = int(np.argmin(np.abs(times)))
    Ls = np.empty((steps + 1, 4, 4))
    Ls[i0] = L0 if times[i0] == 0 else rk4(L0, 0.0, times[i0])
    for k in range(i0, steps):
        Ls[k + 1] = rk4(Ls[k], times[k], h)
    for k in range(i0, 0, -1):
        Ls[k - 1] = rk4(Ls[k], times[k], -h)

    def orth(L):
        Q, R = np.linalg.qr(L)
        return Q @ np.diag(np.sign(np.diag(R)))

    z = chart_Q(Ls[0])
    points = [z]
    for k in range(1, steps + 1):
        zp, zm = spin4.spin_from_matrix(orth(Ls[k]))
        z = zp if points[-1].distance(zp) <= points[-1].distance(zm) else zm
        points.append(z)

    def evaluate(t: float) -> SpinPoint:
        t = min(max(t, t0), t1)
        k = int(np.clip(round((t - t0) / h), 0, steps))
        L = Ls[k]
        tt = times[k]
        rem = t - tt
        n_sub = max(1, int(np.ceil(abs(rem) / h * 2)))
        for _ in range(n_sub):
            if rem == 0:
                break
            L = rk4(L, tt, rem / n_sub)
            tt += rem / n_sub
        zp, zm = spin4.spin_from_matrix(orth(L))
        ref = points[k]
        return zp if ref.distance(zp) <= ref.distance(zm) else zm

    return CurveSample(times, points, "lower-chart-rk4", evaluate)
