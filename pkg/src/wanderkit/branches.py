"""Inverse branches of stage maps and the pullback constructions built on them.

A stage map is univalent on the core disk and on each band piece, so its
restriction to any one of those regions has a well-defined inverse. This
module realizes those inverses numerically (damped Newton with path
continuation along transported boundaries), composes them into the two
chains the construction needs, and uses the chains to produce the deep
preimage ladder inside the core disk and the seed compact that the next
stage's gate contraction will target.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import (
    CertificationFailed,
    ChainDomainEmpty,
    EmptyIntersection,
    NoBranch,
    NoRoomForX,
    TooCloseToCurve,
)
from .geometry import (
    Constants,
    Disk,
    PolygonalHull,
    interior_grid,
    region_distance,
    winding_number,
)

NEWTON_TOL = 1e-10
TRANSPORT_TOL = 1e-8
MAX_HALVINGS = 40
_MAX_NEWTON_STEPS = 64


def _eval1(f, z):
    v = f(np.asarray([z], dtype=complex))
    return complex(np.ravel(np.asarray(v))[0])


def _eval1d(f, z):
    v, dv = f.eval_with_derivative(np.asarray([z], dtype=complex))
    return complex(np.ravel(v)[0]), complex(np.ravel(dv)[0])


def invert_branch(f, domain, w, seed, *, tol: float = NEWTON_TOL) -> complex:
    """Solve f(z) = w inside ``domain`` by damped Newton from ``seed``.

    The caller vouches for univalence of f on the domain; under that
    certificate the returned point is the only preimage there. A step that
    would leave the domain or fails to shrink the residual is halved, up to
    MAX_HALVINGS times; running out of halvings or iterations raises
    NoBranch, which signals that w is not in the image of the restriction.
    """
    z = complex(seed)
    if float(domain.clearance(z)) < -1e-12:
        raise NoBranch(f"seed {z} lies outside the branch domain")
    w = complex(w)
    v, dv = _eval1d(f, z)
    r = abs(v - w)
    for _ in range(_MAX_NEWTON_STEPS):
        if r <= tol:
            return z
        if dv == 0.0:
            raise NoBranch(f"derivative vanishes at {z}")
        step = (v - w) / dv
        t = 1.0
        for _ in range(MAX_HALVINGS):
            zn = z - t * step
            if float(domain.clearance(zn)) >= -1e-12:
                vn, dvn = _eval1d(f, zn)
                rn = abs(vn - w)
                if rn < r:
                    z, v, dv, r = zn, vn, dvn, rn
                    break
            t *= 0.5
        else:
            raise NoBranch(
                f"no productive step toward {w}; the point may lie outside the image"
            )
    raise NoBranch(f"stalled at residual {r:.2e} inverting toward {w}")


def _pull_points(f, domain, pts, *, tol: float = NEWTON_TOL, first_seed=None):
    """Invert every point of ``pts``, seeding each solve with the previous
    preimage (path continuation). Returns (preimages, success mask)."""
    pts = np.asarray(pts, dtype=complex).ravel()
    out = np.empty(pts.shape, dtype=complex)
    ok = np.zeros(pts.shape, dtype=bool)
    base = domain.centroid()
    rad = 0.6 * max(float(domain.inradius()), 0.0)
    ring = [base + rad * np.exp(2j * np.pi * t / 8.0) for t in range(8)] if rad > 0 else []
    cur = None
    for i, w in enumerate(pts):
        seeds = []
        if cur is not None:
            seeds.append(cur)
        if first_seed is not None:
            seeds.append(complex(first_seed))
        seeds.append(base)
        seeds.extend(ring)
        z = None
        for s in seeds:
            try:
                z = invert_branch(f, domain, complex(w), s, tol=tol)
                break
            except NoBranch:
                continue
        if z is None:
            cur = None
            continue
        out[i] = z
        ok[i] = True
        cur = z
    return out, ok


@dataclasses.dataclass(frozen=True)
class BranchResult:
    """Transported points with their hull, the measured forward residual
    bound, and the chain of region names the transport passed through."""

    points: np.ndarray
    hull: PolygonalHull | None
    residual: float
    chain: tuple

    def to_dict(self) -> dict:
        return {
            "points": [[z.real, z.imag] for z in self.points],
            "residual": self.residual,
            "chain": list(self.chain),
        }


def transport_region(f, domain, target, *, samples: int = 257, name: str = "inverse") -> BranchResult:
    """Pull a whole region back through one univalent restriction.

    Boundary samples of the target are inverted one by one; samples outside
    the image simply fail and are dropped, so the hull covers the invertible
    portion of the target. Nothing invertible raises EmptyIntersection.
    """
    pts = np.asarray(target.sample_boundary_points(max(16, int(samples)) | 1))
    out, ok = _pull_points(f, domain, pts)
    if not np.any(ok):
        raise EmptyIntersection("no boundary sample of the target could be pulled back")
    good = out[ok]
    fwd = np.asarray(f(good))
    residual = float(np.max(np.abs(fwd - pts[ok])))
    hull = PolygonalHull(good) if good.size >= 3 else None
    return BranchResult(points=good, hull=hull, residual=max(residual, 0.0), chain=(name,))


# ---------------------------------------------------------------------------
# Composable handles
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class BranchHandle:
    """Composition of restriction inverses; steps[0] is applied first.

    Each step is (region, name): one inversion of ``fmap`` landing inside
    that region. Point application and whole-boundary transport both tighten
    the per-step Newton tolerance so the round trip through the full chain
    stays within chain-length * NEWTON_TOL even after forward amplification.
    """

    steps: tuple
    fmap: object
    label: str = ""

    @property
    def chain_length(self) -> int:
        return len(self.steps)

    def chain_names(self) -> tuple:
        return tuple(nm for _, nm in self.steps)

    def __call__(self, w) -> complex:
        out, ok = self.transport_points(np.asarray([w], dtype=complex))
        if not ok[0]:
            raise NoBranch(f"chain {self.label or self.chain_names()} has no preimage of {w}")
        return complex(out[0])

    def transport_points(self, pts):
        """Pull an array of points through the whole chain; mask marks survivors."""
        pts = np.asarray(pts, dtype=complex).ravel()
        cur = pts.copy()
        alive = np.ones(pts.shape, dtype=bool)
        for dom, _ in self.steps:
            nxt, good = _pull_points(self.fmap, dom, cur[alive], tol=1e-13)
            idx = np.flatnonzero(alive)
            alive[idx[~good]] = False
            cur[idx[good]] = nxt[good]
        return cur, alive

    def transport(self, target, *, samples: int = 257) -> BranchResult:
        """Transport a region's boundary (or an explicit point array)."""
        if hasattr(target, "sample_boundary_points"):
            pts = np.asarray(target.sample_boundary_points(max(16, int(samples)) | 1))
        else:
            pts = np.asarray(target, dtype=complex).ravel()
        if pts.size == 0:
            raise ChainDomainEmpty(f"chain {self.label!r} was given an empty domain")
        cur, alive = self.transport_points(pts)
        if not np.any(alive):
            raise NoBranch(f"chain {self.label!r} lost every sample")
        got = cur[alive]
        fwd = got.copy()
        for _ in range(len(self.steps)):
            fwd = np.asarray(self.fmap(fwd))
        residual = float(np.max(np.abs(fwd - pts[alive]))) if len(self.steps) else 0.0
        hull = PolygonalHull(got) if got.size >= 3 else None
        return BranchResult(points=got, hull=hull, residual=residual, chain=self.chain_names())


@dataclasses.dataclass
class StageView:
    """The slice of a finished stage that the pullback constructions read.

    fmap is the stage map. bands[l] is the region carrying the map's l-th
    band piece: band 0 is the exit sector, deeper entries are the small
    transported image hulls. mseq is the band-shift ladder (m_0, ..., m_j)
    under the convention m_0 = 1. n_next is the tripling count the following
    stage will use. bhat is the compact window around the last tube image;
    tube_hull_e and tube_hull_b0 are forward images of the previous seed
    compact at the window level and at the exit-sector level, the two sets
    the selected disk X must avoid.
    """

    fmap: object
    constants: Constants
    mseq: tuple
    n_next: int
    bands: tuple
    bhat: object = None
    tube_hull_e: object = None
    tube_hull_b0: object = None


def branch_G(stage, n: int) -> BranchHandle:
    """n-fold inverse of the stage map pulling the exit sector into the core.

    Every step inverts into the core disk, where the map's derivative stays
    above 3/2 and the inverse is a contraction; n = 0 is the identity.
    """
    if n < 0:
        raise ValueError("inverse depth must be nonnegative")
    core = stage.constants.core_disk()
    steps = tuple((core, "core") for _ in range(n))
    return BranchHandle(steps=steps, fmap=stage.fmap, label=f"G^{n}")


def branch_F(stage, j: int | None = None) -> BranchHandle:
    """Composed band-restriction inverses walking the deep band zone down
    to the exit sector.

    The chain inverts once through every band copy the schedule opens:
    pairs (l, k) with l < j and k < m_{l+1} - m_l, deepest band first.
    """
    j = len(stage.bands) if j is None else int(j)
    if j < 0 or len(stage.bands) < j:
        raise ChainDomainEmpty(f"stage carries {len(stage.bands)} bands, chain needs {j}")
    m = tuple(int(x) for x in stage.mseq)
    if len(m) < j + 1:
        raise ValueError(f"band ladder {m} too short for a depth-{j} chain")
    pairs = [(l, k) for l in range(j) for k in range(m[l + 1] - m[l])]
    steps = []
    for l, k in reversed(pairs):
        dom = stage.bands[l]
        if dom is None:
            raise ChainDomainEmpty(f"band {l} is missing from the stage")
        if k:
            dom = dom.shifted(complex(k))
        steps.append((dom, f"band{l}+{k}"))
    return BranchHandle(steps=tuple(steps), fmap=stage.fmap, label=f"F_{j}")


# ---------------------------------------------------------------------------
# Preimage ladder
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class PreimageLadder:
    """Radii and hulls of the nested exit-sector preimages inside the core."""

    radii: tuple
    hulls: tuple
    residual: float

    def ratios(self) -> tuple:
        return tuple(b / a for a, b in zip(self.radii, self.radii[1:]))

    def max_ratio(self) -> float:
        r = self.ratios()
        return max(r) if r else 0.0

    def to_dict(self) -> dict:
        return {
            "radii": [float(r) for r in self.radii],
            "hulls": [[[z.real, z.imag] for z in h.vertices] for h in self.hulls],
            "residual": self.residual,
        }


def ladder_slack(eps: float) -> float:
    # the inverse contracts at 1/(3 - O(eps)); 2*eps swallows the correction
    return 2.0 * float(eps)


def build_preimage_ladder(f, c: Constants, depth: int, *, samples: int = 257) -> PreimageLadder:
    """Pull the exit sector back through f repeatedly, staying in the core.

    Level n is the transported hull of level n-1 (level 0 being the sector
    itself); its radius is the farthest transported point from the origin.
    Radii must shrink strictly and the hulls must stay pairwise disjoint.
    """
    core = c.core_disk()
    target = c.exit_sector()
    radii, hulls = [], []
    residual = 0.0
    for n in range(1, int(depth) + 1):
        res = transport_region(f, core, target, samples=samples, name=f"level{n}")
        if res.hull is None:
            raise NoBranch(f"level {n} pullback degenerated to {res.points.size} points")
        radii.append(float(np.max(np.abs(res.points))))
        hulls.append(res.hull)
        residual = max(residual, res.residual)
        target = res.hull
    for a, b in zip(radii, radii[1:]):
        if not b < a:
            raise CertificationFailed(f"preimage radii must shrink strictly, got {a} then {b}")
    for i in range(len(hulls)):
        for k in range(i + 1, len(hulls)):
            if region_distance(hulls[i], hulls[k]) <= 0.0:
                raise CertificationFailed(f"preimage components {i + 1} and {k + 1} touch")
    return PreimageLadder(radii=tuple(radii), hulls=tuple(hulls), residual=residual)


# ---------------------------------------------------------------------------
# Seed-compact construction for the next stage
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class PullbackTrace:
    """Intermediate sets of the seed-compact pullback, kept for audit.

    E is the forward image of the deepest band copy; X the selected disk
    inside it; FX and C the transports of X down to the exit sector and on
    into the core. checks holds the measured margins and residuals."""

    E: PolygonalHull
    X: Disk
    FX: BranchResult
    C: BranchResult
    chain: tuple
    checks: dict

    def to_dict(self) -> dict:
        return {
            "E": [[z.real, z.imag] for z in self.E.vertices],
            "X": {"center": [self.X.center.real, self.X.center.imag], "radius": self.X.radius},
            "FX": self.FX.to_dict(),
            "C": self.C.to_dict(),
            "chain": list(self.chain),
            "checks": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in self.checks.items()},
        }


def _exclusion_regions(V):
    if V is None:
        return []
    if hasattr(V, "clearance"):
        return [V]
    return [r for r in V if r is not None]


def _distance_outside(region, pts):
    """Distance from each point to the region, zero for points inside it."""
    c = np.asarray(region.clearance(pts))
    return np.where(c >= 0.0, 0.0, -c)


def construct_Cj(
    stage,
    Q,
    V,
    *,
    x_floor: float = 1e-4,
    grid: int = 48,
    samples: int = 257,
) -> PullbackTrace:
    """Build the next stage's seed compact by the three-step pullback.

    Forward-image the deepest band copy to get E; grid-search E (clipped to
    the stage window) for the largest disk clear of the gate disk, the
    landing disks, and the tube image, and shrink it 20 percent to get X;
    pull X down the band chain (checking it lands in the exit sector away
    from the tube's sector-level image) and then n_next times into the core.
    """
    j = len(stage.bands)
    if j == 0:
        raise ChainDomainEmpty("stage has no bands to pull back through")
    m = tuple(int(x) for x in stage.mseq)
    k_last = m[j] - m[j - 1] - 1
    src = stage.bands[j - 1]
    if k_last:
        src = src.shifted(complex(k_last))
    bpts = np.asarray(src.sample_boundary_points(max(64, int(samples)) | 1))
    epts = np.asarray(stage.fmap(bpts))
    E = PolygonalHull(epts)
    if E.area() <= 0.0:
        raise NoRoomForX("the deepest band image has no interior")

    cand = interior_grid(E, int(grid))
    if cand.size == 0:
        raise NoRoomForX("the deepest band image has no interior at grid resolution")
    room = np.asarray(E.clearance(cand)).astype(float)
    if stage.bhat is not None:
        room = np.minimum(room, np.asarray(stage.bhat.clearance(cand)).astype(float))
    for reg in [Q] + _exclusion_regions(V) + _exclusion_regions(stage.tube_hull_e):
        if reg is not None:
            room = np.minimum(room, _distance_outside(reg, cand))
    i = int(np.argmax(room))
    best = float(room[i])
    if best < float(x_floor):
        raise NoRoomForX(f"largest clear disk has radius {best:.3e}, floor is {x_floor:g}")
    X = Disk(complex(cand[i]), 0.8 * best)

    F = branch_F(stage, j)
    fx = F.transport(X, samples=samples)
    sector = stage.constants.exit_sector()
    fx_margin = float(np.min(np.asarray(sector.clearance(fx.points))))
    if fx_margin <= 0.0:
        raise CertificationFailed(f"band pullback of X leaves the exit sector (margin {fx_margin:.3e})")
    excl_margin = float("inf")
    if stage.tube_hull_b0 is not None:
        excl_margin = float(np.min(_distance_outside(stage.tube_hull_b0, fx.points)))
        if excl_margin <= 0.0:
            raise CertificationFailed("band pullback of X meets the tube's sector-level image")

    G = branch_G(stage, stage.n_next)
    # one combined chain so the recorded residual is a true X round trip
    full = BranchHandle(steps=F.steps + G.steps, fmap=stage.fmap, label=f"G^{stage.n_next}*F_{j}")
    cres = full.transport(X, samples=samples)
    if cres.hull is None:
        raise NoBranch("seed-compact pullback degenerated below 3 points")
    core = stage.constants.core_disk()
    c_margin = float(np.min(np.asarray(core.clearance(cres.points))))
    if c_margin <= 0.0:
        raise CertificationFailed(f"seed compact leaves the core disk (margin {c_margin:.3e})")
    total = stage.n_next + m[j] - m[0]
    if cres.residual > total * NEWTON_TOL:
        raise CertificationFailed(
            f"round trip residual {cres.residual:.3e} exceeds {total} * {NEWTON_TOL:g}"
        )

    # forward replay: the first n_next steps must stay in the core, and the
    # full chain must land back at X-level inside the window, clear of the
    # gate disk and the landing disks
    pts = np.concatenate([cres.points, [cres.hull.centroid()]])
    itinerary_ok = True
    for step in range(total):
        if step < stage.n_next and float(np.min(np.asarray(core.clearance(pts)))) <= 0.0:
            itinerary_ok = False
        pts = np.asarray(stage.fmap(pts))
    if not itinerary_ok:
        raise CertificationFailed("seed compact escapes the core before its tripling count")
    final = pts[:-1]
    window_margin = float("inf")
    if stage.bhat is not None:
        window_margin = float(np.min(np.asarray(stage.bhat.clearance(final))))
    gap_gate = float(np.min(_distance_outside(Q, final))) if Q is not None else float("inf")
    gap_landing = float("inf")
    for reg in _exclusion_regions(V):
        gap_landing = min(gap_landing, float(np.min(_distance_outside(reg, final))))
    if min(window_margin, gap_gate, gap_landing) <= 0.0:
        raise CertificationFailed(
            f"forward image of the seed compact is not compactly clear of the window "
            f"walls ({window_margin:.3e}), gate ({gap_gate:.3e}) or landings ({gap_landing:.3e})"
        )
    boundary_dev = float(np.max(np.abs(np.abs(final - X.center) - X.radius)))
    try:
        simple_cover = winding_number(final, X.center) == 1
    except TooCloseToCurve:
        simple_cover = False

    checks = {
        "x_radius": X.radius,
        "x_clear": best,
        "fx_sector_margin": fx_margin,
        "fx_tube_gap": excl_margin,
        "core_margin": c_margin,
        "round_trip": cres.residual,
        "window_margin": window_margin,
        "gate_gap": gap_gate,
        "landing_gap": gap_landing,
        "itinerary_ok": itinerary_ok,
        "boundary_dev": boundary_dev,
        "simple_cover": simple_cover,
    }
    return PullbackTrace(
        E=E,
        X=X,
        FX=fx,
        C=cres,
        chain=full.chain_names(),
        checks=checks,
    )
