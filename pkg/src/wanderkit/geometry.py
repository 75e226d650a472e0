"""Planar regions, boundary sampling, winding numbers, containment margins.

Points are complex numbers throughout. Region membership is a closed-set
test (boundary points count as inside). Every region also reports a
conservative signed ``clearance``:

* ``clearance(z) > 0``  means z is inside and the distance from z to the
  region's boundary is at least that value;
* ``clearance(z) < 0``  means z is outside and the distance from z to the
  region is at least the absolute value.

Clearances are lower bounds, never exact for sectors and unions, which is
the safe direction for every containment certificate built on top of them.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import OverlapDetected, TooCloseToCurve

TWO_PI = 2.0 * math.pi


def _as_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _scalarize(values, scalar):
    if scalar:
        return values[()] if isinstance(values, np.ndarray) else values
    return values


# ---------------------------------------------------------------------------
# Region variants
# ---------------------------------------------------------------------------


class Region:
    """Base class; concrete variants implement the four geometric services."""

    def contains(self, z):
        raise NotImplementedError

    def clearance(self, z):
        raise NotImplementedError

    def sample_boundary_points(self, count: int) -> np.ndarray:
        """Ordered boundary samples (counterclockwise for single loops)."""
        raise NotImplementedError

    def perimeter(self) -> float:
        raise NotImplementedError

    def bbox(self):
        """Axis-aligned bounding box as (lo, hi) complex corners."""
        raise NotImplementedError

    def shifted(self, offset: complex) -> "Region":
        return Translate(self, offset)

    def to_dict(self) -> dict:
        raise NotImplementedError

    # Convenience used all over the driver.
    def centroid(self) -> complex:
        lo, hi = self.bbox()
        return 0.5 * (lo + hi)

    def inradius(self) -> float:
        """Clearance at the centroid; 0 if the centroid is not inside."""
        c = self.centroid()
        return float(max(0.0, self.clearance(c)))


@dataclasses.dataclass(frozen=True)
class Disk(Region):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, z):
        arr, scalar = _as_array(z)
        return _scalarize(np.abs(arr - self.center) <= self.radius, scalar)

    def clearance(self, z):
        arr, scalar = _as_array(z)
        return _scalarize(self.radius - np.abs(arr - self.center), scalar)

    def sample_boundary_points(self, count):
        t = np.arange(count) * (TWO_PI / count)
        return self.center + self.radius * np.exp(1j * t)

    def perimeter(self):
        return TWO_PI * self.radius

    def bbox(self):
        r = self.radius * (1 + 1j)
        return self.center - r, self.center + r

    def shifted(self, offset):
        return Disk(self.center + offset, self.radius)

    def centroid(self):
        return self.center

    def to_dict(self):
        return {
            "kind": "disk",
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
        }


@dataclasses.dataclass(frozen=True)
class AnnularSector(Region):
    """{z : r_inner <= |z| <= r_outer, |arg z| <= half_angle}, axis-symmetric."""

    r_inner: float
    r_outer: float
    half_angle: float

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("need 0 < r_inner < r_outer")
        if not (0 < self.half_angle <= math.pi):
            raise ValueError("half-angle must lie in (0, pi]")

    def contains(self, z):
        arr, scalar = _as_array(z)
        rho = np.abs(arr)
        theta = np.abs(np.angle(arr))
        ok = (rho >= self.r_inner) & (rho <= self.r_outer) & (theta <= self.half_angle)
        return _scalarize(ok, scalar)

    def clearance(self, z):
        arr, scalar = _as_array(z)
        rho = np.abs(arr)
        theta = np.abs(np.angle(arr))
        inside = (rho >= self.r_inner) & (rho <= self.r_outer) & (theta <= self.half_angle)
        # Inside: min over the four wall distances; edge walls via the full
        # line through the origin, which under-estimates and stays safe.
        d_in = np.minimum(rho - self.r_inner, self.r_outer - rho)
        if self.half_angle < math.pi:
            d_in = np.minimum(d_in, rho * np.sin(np.clip(self.half_angle - theta, 0.0, 0.5 * math.pi)))
        # Outside: max over violated separating constraints, each a true
        # lower bound on the distance to the sector.
        v_rad = np.maximum(self.r_inner - rho, rho - self.r_outer)
        v_ang = rho * np.sin(np.clip(theta - self.half_angle, 0.0, 0.5 * math.pi))
        d_out = np.maximum(v_rad, np.where(theta > self.half_angle, v_ang, 0.0))
        out = np.where(inside, d_in, -d_out)
        return _scalarize(out, scalar)

    def _corner(self, r, sign):
        return r * math.cos(self.half_angle) + 1j * sign * r * math.sin(self.half_angle)

    def sample_boundary_points(self, count):
        a = self.half_angle
        arc_out = 2 * a * self.r_outer
        arc_in = 2 * a * self.r_inner
        edge = self.r_outer - self.r_inner
        total = arc_out + arc_in + 2 * edge
        n_out = max(2, int(round(count * arc_out / total)))
        n_in = max(2, int(round(count * arc_in / total)))
        n_edge = max(2, (count - n_out - n_in) // 2)
        # Counterclockwise loop: outer arc, edge at +a inward, inner arc
        # backward, edge at -a outward. Endpoints shared between pieces are
        # dropped from the follower to avoid duplicates.
        t_out = np.linspace(-a, a, n_out)
        outer = self.r_outer * np.exp(1j * t_out)
        r_down = np.linspace(self.r_outer, self.r_inner, n_edge + 1)[1:]
        edge_top = r_down * np.exp(1j * a)
        t_in = np.linspace(a, -a, n_in + 1)[1:]
        inner = self.r_inner * np.exp(1j * t_in)
        r_up = np.linspace(self.r_inner, self.r_outer, n_edge + 1)[1:-1]
        edge_bot = r_up * np.exp(-1j * a)
        return np.concatenate([outer, edge_top, inner, edge_bot])

    def perimeter(self):
        return 2 * self.half_angle * (self.r_inner + self.r_outer) + 2 * (self.r_outer - self.r_inner)

    def bbox(self):
        pts = self.sample_boundary_points(256)
        return (
            complex(pts.real.min(), pts.imag.min()),
            complex(pts.real.max(), pts.imag.max()),
        )

    def centroid(self):
        # Exact centroid of the sector of an annulus symmetric about the axis.
        a = self.half_angle
        r1, r2 = self.r_inner, self.r_outer
        area = a * (r2**2 - r1**2)
        cx = (2.0 / 3.0) * math.sin(a) * (r2**3 - r1**3) / area
        return complex(cx, 0.0)

    def to_dict(self):
        return {
            "kind": "annular_sector",
            "r_inner": self.r_inner,
            "r_outer": self.r_outer,
            "half_angle": self.half_angle,
        }


@dataclasses.dataclass(frozen=True)
class Translate(Region):
    base: Region
    offset: complex

    def contains(self, z):
        arr, scalar = _as_array(z)
        return _scalarize(self.base.contains(arr - self.offset), scalar)

    def clearance(self, z):
        arr, scalar = _as_array(z)
        return _scalarize(self.base.clearance(arr - self.offset), scalar)

    def sample_boundary_points(self, count):
        return self.base.sample_boundary_points(count) + self.offset

    def perimeter(self):
        return self.base.perimeter()

    def bbox(self):
        lo, hi = self.base.bbox()
        return lo + self.offset, hi + self.offset

    def shifted(self, offset):
        return Translate(self.base, self.offset + offset)

    def centroid(self):
        return self.base.centroid() + self.offset

    def to_dict(self):
        return {
            "kind": "translate",
            "offset": [self.offset.real, self.offset.imag],
            "base": self.base.to_dict(),
        }


class PolygonalHull(Region):
    """Simple closed polygon given by its vertices (auto-oriented CCW)."""

    def __init__(self, vertices):
        verts = np.asarray(vertices, dtype=complex).ravel()
        if verts.size < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if abs(verts[0] - verts[-1]) < 1e-300:
            verts = verts[:-1]
        area2 = float(np.sum(verts.real * np.roll(verts, -1).imag - np.roll(verts, -1).real * verts.imag))
        if area2 < 0:
            verts = verts[::-1]
            area2 = -area2
        self.vertices = verts
        self._area = 0.5 * area2

    def __repr__(self):
        return f"PolygonalHull({len(self.vertices)} vertices)"

    def area(self):
        return self._area

    def _edges(self):
        v = self.vertices
        return v, np.roll(v, -1)

    def _seg_dist(self, z):
        """Min distance from each z to the polygon boundary (exact)."""
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        a, b = self._edges()
        d = b - a  # (E,)
        zz = arr[:, None] - a[None, :]
        denom = (d.real**2 + d.imag**2)[None, :]
        t = np.clip((zz.real * d.real[None, :] + zz.imag * d.imag[None, :]) / np.maximum(denom, 1e-300), 0.0, 1.0)
        proj = a[None, :] + t * d[None, :]
        return np.min(np.abs(arr[:, None] - proj), axis=1)

    def contains(self, z):
        arr, scalar = _as_array(z)
        flat = np.atleast_1d(arr)
        a, b = self._edges()
        x, y = flat.real[:, None], flat.imag[:, None]
        ax, ay = a.real[None, :], a.imag[None, :]
        bx, by = b.real[None, :], b.imag[None, :]
        cond = (ay <= y) != (by <= y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = ax + (y - ay) * (bx - ax) / (by - ay)
        crossings = np.sum(cond & (x < xi), axis=1)
        inside = (crossings % 2) == 1
        on_edge = self._seg_dist(flat) <= 1e-13 * max(1.0, float(np.max(np.abs(self.vertices))))
        out = inside | on_edge
        return _scalarize(out.reshape(arr.shape) if arr.shape else out[0], scalar)

    def clearance(self, z):
        arr, scalar = _as_array(z)
        flat = np.atleast_1d(arr)
        d = self._seg_dist(flat)
        inside = np.atleast_1d(self.contains(flat))
        out = np.where(inside, d, -d)
        return _scalarize(out.reshape(arr.shape) if arr.shape else out[0], scalar)

    def sample_boundary_points(self, count):
        v, w = self._edges()
        lengths = np.abs(w - v)
        total = float(lengths.sum())
        pts = []
        for i in range(len(v)):
            n_i = max(1, int(round(count * lengths[i] / total)))
            t = np.arange(n_i) / n_i
            pts.append(v[i] + t * (w[i] - v[i]))
        return np.concatenate(pts)

    def perimeter(self):
        v, w = self._edges()
        return float(np.abs(w - v).sum())

    def bbox(self):
        v = self.vertices
        return (
            complex(v.real.min(), v.imag.min()),
            complex(v.real.max(), v.imag.max()),
        )

    def shifted(self, offset):
        return PolygonalHull(self.vertices + offset)

    def centroid(self):
        v, w = self._edges()
        cross = v.real * w.imag - w.real * v.imag
        if abs(self._area) < 1e-300:
            return complex(np.mean(v))
        cx = float(np.sum((v.real + w.real) * cross)) / (6.0 * self._area)
        cy = float(np.sum((v.imag + w.imag) * cross)) / (6.0 * self._area)
        return complex(cx, cy)

    def to_dict(self):
        return {
            "kind": "polygonal_hull",
            "vertices": [[p.real, p.imag] for p in self.vertices],
        }


class FiniteUnion(Region):
    """Disjoint finite union; construction rejects overlapping members."""

    def __init__(self, members, check=True):
        if not members:
            raise ValueError("union needs at least one member")
        self.members = list(members)
        if check and len(self.members) > 1:
            self._check_disjoint()

    def _check_disjoint(self):
        for i, a in enumerate(self.members):
            for b in self.members[i + 1:]:
                pa = a.sample_boundary_points(128)
                pb = b.sample_boundary_points(128)
                if np.any(b.contains(pa)) or np.any(a.contains(pb)):
                    raise OverlapDetected(f"union members {i} overlap: {a} / {b}")

    def contains(self, z):
        arr, scalar = _as_array(z)
        out = np.zeros(np.shape(arr), dtype=bool)
        for m in self.members:
            out = out | np.asarray(m.contains(arr))
        return _scalarize(out, scalar)

    def clearance(self, z):
        arr, scalar = _as_array(z)
        flat = np.atleast_1d(arr)
        cl = np.stack([np.atleast_1d(m.clearance(flat)) for m in self.members])
        inside_any = np.any(cl >= 0, axis=0)
        # Inside: distance to the union's boundary is at least the minimum of
        # member boundary distances (the union boundary is a subset of the
        # member boundaries). Outside: distance to the union is the min over
        # members of the distance to each member.
        d_in = np.min(np.abs(cl), axis=0)
        d_out = np.min(-cl, axis=0)
        out = np.where(inside_any, d_in, -d_out)
        return _scalarize(out.reshape(np.shape(arr)) if np.shape(arr) else out[0], scalar)

    def sample_boundary_points(self, count):
        total = self.perimeter()
        pts = []
        for m in self.members:
            n_m = max(8, int(round(count * m.perimeter() / total)))
            pts.append(m.sample_boundary_points(n_m))
        return np.concatenate(pts)

    def perimeter(self):
        return sum(m.perimeter() for m in self.members)

    def bbox(self):
        boxes = [m.bbox() for m in self.members]
        lo = complex(min(b[0].real for b in boxes), min(b[0].imag for b in boxes))
        hi = complex(max(b[1].real for b in boxes), max(b[1].imag for b in boxes))
        return lo, hi

    def shifted(self, offset):
        return FiniteUnion([m.shifted(offset) for m in self.members], check=False)

    def to_dict(self):
        return {"kind": "finite_union", "members": [m.to_dict() for m in self.members]}


def region_from_dict(d: dict) -> Region:
    kind = d["kind"]
    if kind == "disk":
        return Disk(complex(d["center"][0], d["center"][1]), d["radius"])
    if kind == "annular_sector":
        return AnnularSector(d["r_inner"], d["r_outer"], d["half_angle"])
    if kind == "translate":
        return Translate(region_from_dict(d["base"]), complex(d["offset"][0], d["offset"][1]))
    if kind == "polygonal_hull":
        return PolygonalHull([complex(p[0], p[1]) for p in d["vertices"]])
    if kind == "finite_union":
        return FiniteUnion([region_from_dict(m) for m in d["members"]], check=False)
    raise ValueError(f"unknown region kind {kind!r}")


# ---------------------------------------------------------------------------
# Constants of the pullback configuration
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Constants:
    """The radii r1 < 1/9 < r2 < r3 < 1/3 and the working tolerance eps.

    Defaults: r2 = 5/27 and r3 = 7/27 are forced by the construction; r1 is
    free in (7/81, 1/9) and defaults to 0.108; eps must stay below r2/2 and
    below 3*r1 - r3 so the tripled core disk still swallows the exit sector
    after an eps-perturbation.
    """

    r1: float = 0.108
    r2: float = 5.0 / 27.0
    r3: float = 7.0 / 27.0
    eps: float = 0.04

    def __post_init__(self):
        problems = [name for name, ok, _ in self.checks() if not ok]
        if problems:
            raise ValueError("invalid constants: " + ", ".join(problems))

    def checks(self):
        """Named feasibility checks with margins, for reports and tests."""
        c = []
        c.append(("r1_positive", self.r1 > 0, self.r1))
        c.append(("r1_below_ninth", self.r1 < 1 / 9, 1 / 9 - self.r1))
        c.append(("ninth_below_r2", 1 / 9 < self.r2, self.r2 - 1 / 9))
        c.append(("r2_below_r3", self.r2 < self.r3, self.r3 - self.r2))
        c.append(("r3_below_third", self.r3 < 1 / 3, 1 / 3 - self.r3))
        c.append(("eps_below_half_r2", 0 < self.eps < self.r2 / 2, self.r2 / 2 - self.eps))
        c.append(("sector_inside_tripled_core", self.r3 < 3 * self.r1, 3 * self.r1 - self.r3))
        c.append(("eps_below_expansion_slack", self.eps < 3 * self.r1 - self.r3, 3 * self.r1 - self.r3 - self.eps))
        return c

    def core_disk(self) -> Disk:
        return Disk(0j, self.r1)

    def exit_sector(self) -> AnnularSector:
        return AnnularSector(self.r2, self.r3, math.pi / 4)

    def attractor_disk(self) -> Disk:
        return Disk(-0.25 + 0j, 1.0 / 9.0)

    def to_dict(self):
        return {"r1": self.r1, "r2": self.r2, "r3": self.r3, "eps": self.eps}


# ---------------------------------------------------------------------------
# Point clouds
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class PointCloud:
    """Finite point set with the spacing bound it was generated under."""

    points: np.ndarray
    spacing: float

    def __len__(self):
        return len(self.points)

    def to_list(self):
        return [[p.real, p.imag] for p in self.points]


# ---------------------------------------------------------------------------
# Module operations
# ---------------------------------------------------------------------------


def winding_number(curve: np.ndarray, w: complex) -> int:
    """Discrete winding number of a sampled closed curve about w.

    Requires w to sit farther from the curve than twice the largest gap
    between consecutive samples, which keeps each turn increment below pi.
    """
    pts = np.asarray(curve, dtype=complex)
    if pts.size < 3:
        raise ValueError("curve needs at least 3 samples")
    gaps = np.abs(np.roll(pts, -1) - pts)
    dist = float(np.min(np.abs(pts - w)))
    if dist <= 2.0 * float(np.max(gaps)):
        raise TooCloseToCurve(f"probe at distance {dist:.3g} vs max gap {np.max(gaps):.3g}")
    rel = pts - w
    turns = np.angle(np.roll(rel, -1) / rel)
    total = float(np.sum(turns)) / TWO_PI
    n = int(round(total))
    if abs(total - n) > 0.25:
        raise TooCloseToCurve(f"winding sum {total:.4f} is not near an integer")
    return n


def sample_boundary(r: Region, count: int) -> PointCloud:
    """Ordered boundary samples with gap at most 2*perimeter/count."""
    if count < 4:
        raise ValueError("count must be at least 4")
    pts = r.sample_boundary_points(count)
    return PointCloud(points=pts, spacing=2.0 * r.perimeter() / count)


def dense_boundary_subset(r: Region, delta: float) -> PointCloud:
    """A delta-dense subset of the boundary (arc spacing at most delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    count = max(3, int(math.ceil(r.perimeter() / delta)))
    pts = r.sample_boundary_points(count)
    return PointCloud(points=pts, spacing=delta)


def compactly_contained(inner: Region, outer: Region, margin: float, base_count: int = 1024) -> bool:
    """True iff every boundary sample of inner sits in outer with clearance
    at least margin. Sampling density doubles until two successive verdicts
    agree (cheap adaptive certification, not an interval proof)."""
    if margin <= 0:
        raise ValueError("margin must be positive")

    # Grace absorbs float noise in boundary samples (|e^{it}| = 1 +- ulp)
    # so that exact-equality margins behave as stated. It is orders of
    # magnitude below any margin the construction uses.
    grace = 1e-12 * max(1.0, margin)

    def verdict(count):
        pts = inner.sample_boundary_points(count)
        cl = np.asarray(outer.clearance(pts))
        return bool(np.all(cl >= margin - grace))

    prev = verdict(base_count)
    count = base_count
    for _ in range(3):
        count *= 2
        cur = verdict(count)
        if cur == prev:
            return cur
        prev = cur
    return prev and verdict(2 * count)


def convex_hull(points) -> PolygonalHull:
    """Convex hull of a point set (monotone chain)."""
    pts = np.unique(np.asarray(points, dtype=complex).ravel())
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    if pts.size < 3:
        # Degenerate clouds get a tiny triangle around their mean so that
        # downstream hull services stay well-defined.
        c = complex(np.mean(pts))
        eps = 1e-14 * max(1.0, abs(c))
        return PolygonalHull([c + eps, c + eps * 1j, c - eps - eps * 1j])

    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        c = complex(np.mean(pts))
        eps = max(1e-14, 1e-12 * abs(c))
        return PolygonalHull([c + eps, c + eps * 1j, c - eps - eps * 1j])
    return PolygonalHull(hull)


def interior_grid(r: Region, n: int, inset: float = 0.0) -> np.ndarray:
    """Points of an n-by-n bounding-box grid lying inside r (clearance > inset)."""
    lo, hi = r.bbox()
    xs = np.linspace(lo.real, hi.real, n)
    ys = np.linspace(lo.imag, hi.imag, n)
    zz = (xs[None, :] + 1j * ys[:, None]).ravel()
    cl = np.asarray(r.clearance(zz))
    return zz[cl > inset]


def region_distance(a: Region, b: Region, count: int = 512) -> float:
    """Sampled separation between two regions; <= 0 when they touch/overlap.

    Distance is measured between boundary clouds and corrected by
    containment checks, so disjoint regions report a positive value.
    """
    pa = a.sample_boundary_points(count)
    pb = b.sample_boundary_points(count)
    if np.any(np.asarray(b.contains(pa))) or np.any(np.asarray(a.contains(pb))):
        return 0.0
    d = np.min(np.abs(pa[:, None] - pb[None, :]))
    return float(d)
