"""Spherical symmetrization on polar sets whose weighted measures are exact.

A polar set is cut into shells r_k < r < r_{k+1}. In each shell the set
occupies a fixed union of angular intervals:

* n = 2: arcs (phi_a, phi_b) of the unit circle, any representative
  (wrap-around through pi is allowed and normalized);
* n = 3: zonal bands theta_a < theta < theta_b of polar angle about the
  axis xi. A cap of half-angle alpha is the band (0, alpha).

Boundaries are then spherical pieces at the shell radii plus radial segments
(n = 2) or cones (n = 3) at the interval endpoints, so volume, potential and
perimeter reduce to one-dimensional radial integrals. Directions are given in
the frame where xi is the first axis (n = 2) or the polar axis (n = 3).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .radial import integrate_radial
from .weights import WeightPair

TWO_PI = 2 * math.pi
_MERGE_TOL = 1e-13


def _normalize_arcs(intervals) -> tuple[tuple[float, float], ...]:
    """Disjoint sorted arcs inside [-pi, pi] covering the given circle intervals."""
    pieces = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if not b > a:
            raise DomainError(f"empty or reversed interval ({a}, {b})")
        if b - a > TWO_PI + _MERGE_TOL:
            raise DomainError(f"interval ({a}, {b}) exceeds one period")
        if b - a >= TWO_PI - _MERGE_TOL:
            return ((-math.pi, math.pi),)
        if -math.pi <= a and b <= math.pi:
            pieces.append((a, b))
            continue
        a0 = (a + math.pi) % TWO_PI - math.pi
        b0 = a0 + (b - a)
        if b0 > math.pi:
            pieces += [(a0, math.pi), (-math.pi, b0 - TWO_PI)]
        else:
            pieces.append((a0, b0))
    return _merge(pieces, overlap_error=True)


def _merge(pieces, overlap_error=False):
    pieces = sorted(pieces)
    out: list[list[float]] = []
    for a, b in pieces:
        if out and a <= out[-1][1] + _MERGE_TOL:
            if overlap_error and a < out[-1][1] - _MERGE_TOL:
                raise DomainError("angular intervals overlap")
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _normalize_bands(intervals) -> tuple[tuple[float, float], ...]:
    bands = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if not 0 <= a < b <= math.pi:
            raise DomainError(f"band ({a}, {b}) must satisfy 0 <= a < b <= pi")
        bands.append((a, b))
    return _merge(bands, overlap_error=True)


@dataclass(frozen=True)
class PolarSet:
    n: int
    radii: tuple[float, ...]
    shells: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError("polar sets exist for n = 2 and n = 3")
        r = np.asarray(self.radii, dtype=float)
        if r.size < 2 or r[0] < 0 or np.any(np.diff(r) <= 0):
            raise DomainError("shell radii must be nonnegative and strictly increasing")
        if len(self.shells) != r.size - 1:
            raise DomainError("need one interval list per shell")

    @classmethod
    def build(cls, n: int, radii, shells) -> "PolarSet":
        norm = _normalize_arcs if n == 2 else _normalize_bands
        return cls(n, tuple(float(x) for x in radii), tuple(norm(s) if len(s) else () for s in shells))

    @classmethod
    def caps(cls, n: int, radii, alphas) -> "PolarSet":
        """Set whose slice in shell k is the cap of half-angle alphas[k] about xi."""
        shells = []
        for a in alphas:
            if not 0 <= a <= math.pi:
                raise DomainError("cap angles lie in [0, pi]")
            if a == 0:
                shells.append(())
            else:
                shells.append(((-a, a),) if n == 2 else ((0.0, a),))
        return cls.build(n, radii, shells)

    def angular_measure(self, k: int) -> float:
        if self.n == 2:
            return sum(b - a for a, b in self.shells[k])
        return sum(TWO_PI * (math.cos(a) - math.cos(b)) for a, b in self.shells[k])

    def endpoints(self, k: int) -> list[float]:
        """Interval endpoints in shell k that are genuine boundary points."""
        pts = [x for iv in self.shells[k] for x in iv]
        if self.n == 2:
            if self.shells[k] == ((-math.pi, math.pi),):
                return []
            # arcs touching across the cut at +-pi are one arc
            if self.shells[k] and self.shells[k][0][0] == -math.pi and self.shells[k][-1][1] == math.pi:
                pts = pts[1:-1]
            return pts
        return [x for x in pts if 0 < x < math.pi]

    def to_text(self) -> str:
        return json.dumps({"n": self.n, "radii": list(self.radii), "shells": [list(map(list, s)) for s in self.shells]})

    @classmethod
    def from_text(cls, text: str) -> "PolarSet":
        d = json.loads(text)
        return cls.build(int(d["n"]), d["radii"], [[tuple(iv) for iv in s] for s in d["shells"]])


def _shell_index(ps: PolarSet, r: float) -> int:
    if not ps.radii[0] <= r <= ps.radii[-1]:
        raise DomainError(f"r = {r} lies outside [{ps.radii[0]}, {ps.radii[-1]}]")
    return min(int(np.searchsorted(ps.radii, r, side="right")) - 1, len(ps.shells) - 1)


def slice_area(ps: PolarSet, r: float) -> float:
    """Unweighted (n-1)-measure of the slice of the set by the sphere of radius r."""
    return r ** (ps.n - 1) * ps.angular_measure(_shell_index(ps, r))


def cap_angle_inverse(n: int, a: float) -> float:
    """Half-angle of the cap with area a on the unit sphere."""
    total = TWO_PI if n == 2 else 2 * TWO_PI
    if not 0 <= a <= total * (1 + 1e-14):
        raise DomainError(f"cap area {a} outside [0, {total}]")
    if n == 2:
        return min(a / 2, math.pi)
    if n == 3:
        return math.acos(max(-1.0, 1 - a / TWO_PI))
    raise DomainError("cap angles are defined for n = 2 and n = 3")


def _is_symmetric(ps: PolarSet) -> bool:
    for s in ps.shells:
        if len(s) > 1:
            return False
        if s and (s[0][0] != -s[0][1] if ps.n == 2 else s[0][0] != 0.0):
            return False
    return True


def symmetrize(ps: PolarSet) -> PolarSet:
    """Replace every shell slice by the cap about xi with the same area."""
    if _is_symmetric(ps):
        return ps
    alphas = [cap_angle_inverse(ps.n, ps.angular_measure(k)) for k in range(len(ps.shells))]
    return PolarSet.caps(ps.n, ps.radii, alphas)


def _overlap(A, B) -> float:
    i = j = 0
    total = 0.0
    while i < len(A) and j < len(B):
        lo, hi = max(A[i][0], B[j][0]), min(A[i][1], B[j][1])
        if hi > lo:
            total += hi - lo
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return total


def _band_overlap(A, B) -> float:
    total = 0.0
    for a0, a1 in A:
        for b0, b1 in B:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                total += TWO_PI * (math.cos(lo) - math.cos(hi))
    return total


def _symmetric_difference(ps: PolarSet, A, B) -> float:
    """Measure on the unit sphere of the symmetric difference of two slices."""
    if ps.n == 2:
        mA = sum(b - a for a, b in A)
        mB = sum(b - a for a, b in B)
        return mA + mB - 2 * _overlap(A, B)
    mA = _band_overlap(A, A)
    mB = _band_overlap(B, B)
    return mA + mB - 2 * _band_overlap(A, B)


class Measures(NamedTuple):
    volume: float
    potential: float
    perimeter: float

    @property
    def energy(self) -> float:
        return self.perimeter + self.potential


def measures(pair: WeightPair, ps: PolarSet) -> Measures:
    if pair.n != ps.n:
        raise DomainError("weight pair and polar set dimensions differ")
    n = ps.n
    knots = pair.knots

    def radial(func, a, b):
        return integrate_radial(func, a, b, knots)

    vol = pot = per = 0.0
    K = len(ps.shells)
    for k in range(K):
        a, b = ps.radii[k], ps.radii[k + 1]
        m = ps.angular_measure(k)
        if m > 0:
            vol += m * radial(lambda s: s ** (n - 1) * math.exp(pair.psi(s)), a, b)
            pot += m * radial(lambda s: s ** (n - 1) * pair.g(s) * math.exp(pair.psi(s)), a, b)
        ends = ps.endpoints(k)
        if ends:
            lateral = radial(lambda s: s ** (n - 2) * math.exp(pair.psi(s)), a, b)
            per += lateral * sum(1.0 if n == 2 else TWO_PI * math.sin(t) for t in ends)
    for k in range(K + 1):
        inner = ps.shells[k - 1] if k > 0 else ()
        outer = ps.shells[k] if k < K else ()
        r = ps.radii[k]
        if r > 0:
            per += r ** (n - 1) * math.exp(pair.psi(r)) * _symmetric_difference(ps, inner, outer)
    return Measures(vol, pot, per)


def random_polar_set(rng: np.random.Generator, n: int, shells: int = 4, max_intervals: int = 3, r_max: float = 2.0) -> PolarSet:
    """Random polar set with a few shells and up to ``max_intervals`` intervals per shell."""
    radii = np.sort(rng.uniform(0.0, r_max, shells - 1))
    radii = np.concatenate([[0.0], radii, [r_max]])
    radii = np.unique(np.round(radii, 12))
    slices = []
    for _ in range(len(radii) - 1):
        m = int(rng.integers(0, max_intervals + 1))
        if n == 2:
            cuts = np.sort(rng.uniform(-math.pi, math.pi, 2 * m))
            shift = rng.uniform(0, TWO_PI)
            slices.append([(cuts[2 * i] + shift, cuts[2 * i + 1] + shift) for i in range(m) if cuts[2 * i + 1] > cuts[2 * i]])
        else:
            cuts = np.sort(rng.uniform(0.0, math.pi, 2 * m))
            slices.append([(cuts[2 * i], cuts[2 * i + 1]) for i in range(m) if cuts[2 * i + 1] > cuts[2 * i]])
    return PolarSet.build(n, radii, slices)
