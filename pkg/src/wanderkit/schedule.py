"""Integer visit schedules and their density arithmetic.

A schedule is two integer sequences indexed from 1: ``n_j`` counts the
iterates a stage spends inside the core disk, ``m_j`` the iterates it then
spends walking along the unit-translate bands. ``N_j`` is the running total
of both. Iterate ``n`` lies in the core exactly when some ``p >= 0`` gives
``N_p < n <= N_p + n_{p+1}``; otherwise it sits in a band. All densities are
exact rationals; the float layer never leaks in here.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

from .errors import CenterOutOfRange


def _as_int(value, what, j):
    try:
        i = int(value)
    except (TypeError, ValueError):
        raise ValueError(f"{what}({j}) = {value!r} is not an integer") from None
    if i != value:
        raise ValueError(f"{what}({j}) = {value!r} is not an integer")
    return i


class Schedule:
    """Lazy, cached view of the sequences (n_j) and (m_j), j >= 1.

    Values are validated as they are first requested: n_j must be a
    non-negative integer, m_j a positive integer, and m strictly increasing.
    A first band of length 1 is legal here but only warned about; the
    construction driver refuses it outright.
    """

    def __init__(self, n_of, m_of, label: str = ""):
        self._n_of = n_of
        self._m_of = m_of
        self.label = label
        self._n: list[int] = []
        self._m: list[int] = []
        self._N: list[int] = [0]  # N_0 = 0
        m1 = _as_int(m_of(1), "m", 1)
        if m1 < 1:
            raise ValueError(f"m(1) = {m1} must be a positive integer")
        if m1 == 1:
            warnings.warn(
                "first band has length 1; the construction driver requires m(1) >= 2",
                UserWarning,
                stacklevel=2,
            )
        self._m.append(m1)

    def __repr__(self):
        return f"Schedule({self.label or 'custom'})"

    def _extend(self, j: int) -> None:
        while len(self._n) < j:
            i = len(self._n) + 1
            v = _as_int(self._n_of(i), "n", i)
            if v < 0:
                raise ValueError(f"n({i}) = {v} must be non-negative")
            self._n.append(v)
        while len(self._m) < j:
            i = len(self._m) + 1
            v = _as_int(self._m_of(i), "m", i)
            if v <= self._m[-1]:
                raise ValueError(f"m({i}) = {v} breaks strict monotonicity (m({i-1}) = {self._m[-1]})")
            self._m.append(v)
        while len(self._N) <= min(len(self._n), len(self._m)):
            k = len(self._N)
            self._N.append(self._N[-1] + self._n[k - 1] + self._m[k - 1])

    def n(self, j: int) -> int:
        if j < 1:
            raise ValueError("stage index must be >= 1")
        self._extend(j)
        return self._n[j - 1]

    def m(self, j: int) -> int:
        if j < 1:
            raise ValueError("stage index must be >= 1")
        self._extend(j)
        return self._m[j - 1]

    def N(self, j: int) -> int:
        if j < 0:
            raise ValueError("cumulative index must be >= 0")
        self._extend(j)
        return self._N[j]

    def prefix(self, count: int):
        """First ``count`` (n_j, m_j) pairs, for reports and manifests."""
        return [(self.n(j), self.m(j)) for j in range(1, count + 1)]


def cumulative_N(s: Schedule, j: int) -> int:
    """N_j, the number of iterates consumed by the first j stages."""
    return s.N(j)


def locate(s: Schedule, n: int):
    """Classify iterate n as ('core', stage, offset) or ('band', stage, offset).

    Offsets are 1-based within their block, so a band offset i means the
    iterate sits in the band translate shifted by i - 1.
    """
    if n < 1:
        raise ValueError("iterate index must be >= 1")
    N = 0
    j = 1
    while True:
        nj = s.n(j)
        if n <= N + nj:
            return ("core", j, n - N)
        N += nj + s.m(j)
        if n <= N:
            return ("band", j, n - (N - s.m(j)))
        j += 1


def in_D(s: Schedule, n: int) -> bool:
    """True iff iterate n falls inside a core-visit block."""
    return locate(s, n)[0] == "core"


def in_band(s: Schedule, n: int) -> bool:
    """Complement of in_D: iterate n walks along the translate bands."""
    return locate(s, n)[0] == "band"


def density(s: Schedule, k: int) -> Fraction:
    """Exact fraction of iterates 1..k that fall inside the core."""
    if k < 1:
        raise ValueError("k must be >= 1")
    count = 0
    N = 0
    j = 1
    while N < k:
        nj = s.n(j)
        count += min(k - N, nj)
        N += nj + s.m(j)
        j += 1
    return Fraction(count, k)


def density_bounds(s: Schedule, k: int):
    """Sandwich (lower, upper) around density(s, k) from the stage structure.

    With p chosen so that N_p <= k < N_{p+1}:
      lower = (sum of n_j, j <= p)   / N_{p+1}
      upper = (sum of n_j, j <= p+1) / (N_p + n_{p+1})
    """
    if k < s.N(1):
        raise ValueError(f"k = {k} must be at least N_1 = {s.N(1)}")
    p = 0
    N_p = 0
    sum_n = 0
    n_next, m_next = s.n(1), s.m(1)
    while N_p + n_next + m_next <= k:
        N_p += n_next + m_next
        sum_n += n_next
        p += 1
        n_next, m_next = s.n(p + 1), s.m(p + 1)
    lower = Fraction(sum_n, N_p + n_next + m_next)
    upper = Fraction(sum_n + n_next, N_p + n_next)
    return lower, upper


def lambda_schedule(lam: float, m_offset: int = 0) -> Schedule:
    """The one-parameter family with limit density lam.

    n_j is j^2 when lam = 1 and ceil(lam/(1-lam) * j) otherwise; m_j is
    j + m_offset. The offset defaults to 0; the driver passes 1 so its first
    band has length at least 2.
    """
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    if m_offset < 0:
        raise ValueError("m_offset must be non-negative")
    if lam == 1:
        n_of = lambda j: j * j
    else:
        # Recover the intended rational from the float so that ceil never
        # flips at integer boundary values (e.g. lam = 0.3 -> 3/7 * 7 = 3).
        ratio = Fraction(lam).limit_denominator(10**9)
        ratio = ratio / (1 - ratio)
        n_of = lambda j: math.ceil(ratio * j)
    return Schedule(n_of, lambda j: j + m_offset, label=f"lambda={lam}" + (f"+m{m_offset}" if m_offset else ""))


def shifted_schedule(s: Schedule, C: int) -> Schedule:
    """Move up to C iterates of every core block into the following band.

    n_j drops to max(0, n_j - C) and m_j grows by min(n_j, C), so each
    stage's total length, and hence every N_j, is preserved exactly.
    """
    if C < 0:
        raise ValueError("shift must be non-negative")
    return Schedule(
        lambda j: max(0, s.n(j) - C),
        lambda j: s.m(j) + min(s.n(j), C),
        label=f"{s.label or 'custom'}>>{C}",
    )


class MultiCenterSchedule:
    """Cyclic schedule over p cores: per round j, visit core l for
    ceil(lambda_l * j^2) iterates then walk j band iterates, l = 1..p."""

    def __init__(self, lambdas):
        lams = [float(v) for v in lambdas]
        if not lams:
            raise ValueError("need at least one center")
        if any(v < 0 for v in lams):
            raise ValueError("weights must be non-negative")
        if sum(lams) > 1 + 1e-12:
            raise ValueError(f"weights sum to {sum(lams)} > 1")
        self.lambdas = lams
        self.p = len(lams)
        self._fracs = [Fraction(v).limit_denominator(10**9) for v in lams]

    def n(self, l: int, j: int) -> int:
        self._check_center(l)
        return math.ceil(self._fracs[l - 1] * j * j)

    def m(self, l: int, j: int) -> int:
        self._check_center(l)
        return j

    def _check_center(self, l: int) -> None:
        if not 1 <= l <= self.p:
            raise CenterOutOfRange(f"center {l} not in 1..{self.p}")


def _multi_center_count(ms: MultiCenterSchedule, k: int, want) -> int:
    """Iterates among 1..k inside blocks selected by want(center_or_None)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    count = 0
    pos = 0
    j = 1
    while pos < k:
        for c in range(1, ms.p + 1):
            n_block = ms.n(c, j)
            if want(c):
                count += max(0, min(k - pos, n_block))
            pos += n_block
            m_block = ms.m(c, j)
            if want(None):
                count += max(0, min(k - pos, m_block))
            pos += m_block
        j += 1
    return count


def multi_center_density(ms: MultiCenterSchedule, l: int, k: int) -> Fraction:
    """Exact fraction of iterates 1..k spent inside core l."""
    ms._check_center(l)
    return Fraction(_multi_center_count(ms, k, lambda c: c == l), k)


def multi_center_band_fraction(ms: MultiCenterSchedule, k: int) -> Fraction:
    """Exact fraction of iterates 1..k spent outside every core."""
    return Fraction(_multi_center_count(ms, k, lambda c: c is None), k)
