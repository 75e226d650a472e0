"""Piecewise model maps: tripling on the core, a constant attractor, unit
band shifts, and the affine contractions that send each gate disk into a
deep preimage rung.

A model is an ordered list of (region, map) pieces with pairwise disjoint
regions. Band pieces must surround the gate and landing disks without
touching them, so this module also provides ``Carved``, a host region with
moated disk holes removed.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import (
    InfeasibleContraction,
    OutsideDomain,
    OverlapDetected,
    UnresolvedPriorStage,
)
from .geometry import (
    Constants,
    Disk,
    Region,
    compactly_contained,
    region_distance,
    region_from_dict,
)

BOUNDARY_TOL = 1e-9


def _prior_callable(prev):
    """Extract a polynomial evaluator from a stage-like object."""
    if prev is None:
        raise UnresolvedPriorStage("prior stage reference is missing")
    if callable(prev):
        return prev
    for attr in ("evaluate", "polynomial"):
        fn = getattr(prev, attr, None)
        if callable(fn):
            return fn
    raise UnresolvedPriorStage(f"cannot evaluate prior stage object {prev!r}")


@dataclasses.dataclass(frozen=True)
class MapSpec:
    """One piece's map. Kinds: triple (z -> 3z), constant, shift (z -> z+1),
    affine (z -> value + scale*(z - center)), prior (earlier stage's map)."""

    kind: str
    value: complex = 0j
    center: complex = 0j
    scale: complex = 0j
    prior: object = None

    def __post_init__(self):
        if self.kind not in ("triple", "constant", "shift", "affine", "prior"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "affine":
            s = abs(self.scale)
            # contractions only; the construction never needs |s| >= 1
            if not 0 < s < 1:
                raise ValueError(f"affine scale |s| = {s} must lie in (0, 1)")
        if self.kind == "prior":
            _prior_callable(self.prior)

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "triple":
            return 3.0 * z
        if self.kind == "constant":
            return np.full(z.shape, self.value, dtype=complex) if z.ndim else complex(self.value)
        if self.kind == "shift":
            return z + 1.0
        if self.kind == "affine":
            return self.value + self.scale * (z - self.center)
        return np.asarray(_prior_callable(self.prior)(z), dtype=complex)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = [self.value.real, self.value.imag]
        elif self.kind == "affine":
            d["value"] = [self.value.real, self.value.imag]
            d["center"] = [self.center.real, self.center.imag]
            d["scale"] = [self.scale.real, self.scale.imag]
        return d


def triple_map() -> MapSpec:
    return MapSpec(kind="triple")


def constant_map(value: complex) -> MapSpec:
    return MapSpec(kind="constant", value=complex(value))


def shift_map() -> MapSpec:
    return MapSpec(kind="shift")


def prior_map(prev) -> MapSpec:
    return MapSpec(kind="prior", prior=prev)


class Carved(Region):
    """Host region minus disk holes, each padded by a moat.

    Points inside a padded hole are outside this region, so a band piece
    carved around gate and landing disks keeps a positive distance (the
    moat) to the disks themselves.
    """

    def __init__(self, host: Region, holes, moat: float):
        if moat <= 0:
            raise ValueError("moat must be positive")
        holes = list(holes)
        for h in holes:
            if not isinstance(h, Disk):
                raise ValueError("carved holes must be disks")
            if not bool(host.contains(h.center)):
                raise ValueError(f"hole at {h.center} lies outside the host region")
        self.host = host
        self.holes = holes
        self.moat = float(moat)

    def __repr__(self):
        return f"Carved({self.host!r}, {len(self.holes)} holes)"

    def _pad(self, h: Disk) -> float:
        return h.radius + self.moat

    def contains(self, z):
        arr = np.asarray(z, dtype=complex)
        ok = np.asarray(self.host.contains(arr), dtype=bool)
        for h in self.holes:
            ok = ok & (np.abs(arr - h.center) >= self._pad(h))
        return bool(ok) if arr.ndim == 0 else ok

    def clearance(self, z):
        arr = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(arr)
        cl = np.atleast_1d(np.asarray(self.host.clearance(flat), dtype=float))
        for h in self.holes:
            # signed distance to the padded hole circle, positive outside it
            cl = np.minimum(cl, np.abs(flat - h.center) - self._pad(h))
        if arr.ndim == 0:
            return float(cl[0])
        return cl.reshape(arr.shape)

    def sample_boundary_points(self, count):
        n_host = max(16, count // 2)
        host_pts = self.host.sample_boundary_points(n_host)
        if not self.holes:
            return host_pts
        per_hole = max(8, (count - n_host) // len(self.holes))
        rings = [Disk(h.center, self._pad(h)).sample_boundary_points(per_hole) for h in self.holes]
        return np.concatenate([host_pts] + rings)

    def perimeter(self):
        extra = sum(2 * math.pi * self._pad(h) for h in self.holes)
        return self.host.perimeter() + extra

    def bbox(self):
        return self.host.bbox()

    def centroid(self):
        return self.host.centroid()

    def shifted(self, offset):
        return Carved(
            self.host.shifted(offset),
            [Disk(h.center + offset, h.radius) for h in self.holes],
            self.moat,
        )

    def to_dict(self):
        return {
            "kind": "carved",
            "host": self.host.to_dict(),
            "holes": [h.to_dict() for h in self.holes],
            "moat": self.moat,
        }


def carve(host: Region, holes, moat: float) -> Carved:
    """Remove moated disk holes from a host region."""
    return Carved(host, holes, moat)


def carved_from_dict(d: dict) -> Carved:
    holes = [region_from_dict(h) for h in d["holes"]]
    return Carved(region_from_dict(d["host"]), holes, float(d["moat"]))


@dataclasses.dataclass(frozen=True)
class Piece:
    name: str
    region: Region
    spec: MapSpec


def _piece_distance(a: Region, b: Region) -> float:
    """Separation lower bound with exact fast paths for the common shapes."""
    if isinstance(a, Carved) and isinstance(b, Disk):
        for h in a.holes:
            if abs(b.center - h.center) <= h.radius + a.moat:
                # b sits in one of a's padded holes: exact gap to the ring,
                # negative if b pokes through it
                return (h.radius + a.moat) - (abs(b.center - h.center) + b.radius)
        # carved is a subset of its host, so the host distance is a lower bound
        return _piece_distance(a.host, b)
    if isinstance(b, Carved):
        return _piece_distance(b, a) if isinstance(a, Disk) else region_distance(a, b, count=256)
    if isinstance(a, Disk) and isinstance(b, Disk):
        return abs(a.center - b.center) - a.radius - b.radius
    return region_distance(a, b, count=256)


class PiecewiseModel:
    """Ordered disjoint pieces; evaluation dispatches to the first piece
    whose region contains the point (within BOUNDARY_TOL)."""

    def __init__(self, pieces, check=True):
        norm = []
        for p in pieces:
            if isinstance(p, Piece):
                norm.append(p)
            else:
                name, region, spec = p
                norm.append(Piece(name=name, region=region, spec=spec))
        if not norm:
            raise ValueError("model needs at least one piece")
        self.pieces = norm
        if check:
            self._check_disjoint()

    def __repr__(self):
        names = ", ".join(p.name for p in self.pieces[:6])
        more = "" if len(self.pieces) <= 6 else f", +{len(self.pieces)-6} more"
        return f"PiecewiseModel([{names}{more}])"

    def _check_disjoint(self):
        ps = self.pieces
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                if isinstance(a.region, Carved) and b.region in a.region.holes:
                    continue  # separation equals the moat by construction
                if isinstance(b.region, Carved) and a.region in b.region.holes:
                    continue
                d = _piece_distance(a.region, b.region)
                if d <= 0:
                    raise OverlapDetected(f"pieces {a.name!r} and {b.name!r} touch (gap {d:.3g})")

    def evaluate(self, z: complex) -> complex:
        for p in self.pieces:
            if p.region.clearance(z) >= -BOUNDARY_TOL:
                return complex(p.spec.apply(complex(z)))
        raise OutsideDomain(f"{z} is not in any piece")

    def evaluate_many(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        flat = zs.ravel()
        out = np.empty(flat.shape, dtype=complex)
        todo = np.ones(flat.shape, dtype=bool)
        for p in self.pieces:
            if not todo.any():
                break
            cl = np.atleast_1d(np.asarray(p.region.clearance(flat[todo]), dtype=float))
            hit = cl >= -BOUNDARY_TOL
            if hit.any():
                idx = np.flatnonzero(todo)[hit]
                out[idx] = p.spec.apply(flat[idx])
                todo[idx] = False
        if todo.any():
            z_bad = flat[np.argmax(todo)]
            raise OutsideDomain(f"{z_bad} is not in any piece")
        return out.reshape(zs.shape)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim == 0:
            return self.evaluate(complex(z))
        return self.evaluate_many(z)

    def piece_containing(self, z: complex):
        for p in self.pieces:
            if p.region.clearance(z) >= -BOUNDARY_TOL:
                return p
        return None

    def domain_regions(self):
        return [p.region for p in self.pieces]

    def to_dict(self):
        return {
            "pieces": [
                {"name": p.name, "region": p.region.to_dict(), "map": p.spec.to_dict()}
                for p in self.pieces
            ]
        }


def phi0(c: Constants, s) -> PiecewiseModel:
    """Stage-0 model: triple on the core disk, the attractor constant on its
    disk, and a unit shift on the first band sectors of the schedule."""
    m1 = s.m(1)
    if m1 < 2:
        raise ValueError(f"first band length m(1) = {m1} must be at least 2")
    pieces = [
        Piece("core", c.core_disk(), triple_map()),
        Piece("attractor", c.attractor_disk(), constant_map(-0.25)),
    ]
    sector = c.exit_sector()
    for k in range(m1 - 1):
        region = sector if k == 0 else sector.shifted(float(k))
        pieces.append(Piece(f"band+{k}", region, shift_map()))
    return PiecewiseModel(pieces)


def phi_j(prev, delta: Region, v_disks, q_region: Region, contraction: MapSpec, band_pieces) -> PiecewiseModel:
    """Stage-j model: prior map on the big disk, the attractor constant on
    the landing disks, the contraction on the gate disk, and unit shifts on
    carved band zones.

    band_pieces is an iterable of (name, region); regions must already be
    carved around any v/q disks they surround.
    """
    fn = _prior_callable(prev)
    if contraction.kind != "affine":
        raise ValueError("gate piece needs an affine contraction")
    pieces = [Piece("prior", delta, prior_map(fn))]
    for i, v in enumerate(v_disks):
        pieces.append(Piece(f"landing{i}", v, constant_map(-0.25)))
    pieces.append(Piece("gate", q_region, contraction))
    for name, region in band_pieces:
        pieces.append(Piece(name, region, shift_map()))
    return PiecewiseModel(pieces)


def _circumradius_about(region: Region, center: complex) -> float:
    if isinstance(region, Disk):
        return region.radius + abs(region.center - center)
    pts = region.sample_boundary_points(1024)
    return float(np.max(np.abs(pts - center)))


def build_contraction(q_region: Region, c_region: Region, scale=None) -> MapSpec:
    """Affine map sending the gate region's centroid to the target region's
    centroid, scaled so the gate's circumscribed disk lands inside the
    target with margin at least a quarter of the target's inradius."""
    q0 = q_region.centroid()
    c0 = c_region.centroid()
    inr = c_region.inradius()
    if inr <= 0:
        raise InfeasibleContraction("target region has no inradius at sampling resolution")
    circ = _circumradius_about(q_region, q0)
    if circ <= 0:
        raise InfeasibleContraction("gate region degenerates to a point")
    bound = 0.75 * inr / circ
    s = min(0.5, bound) if scale is None else float(scale)
    if not 0 < s < 1:
        raise InfeasibleContraction(f"scale {s} is not a contraction ratio")
    if s > bound * (1 + 1e-12):
        raise InfeasibleContraction(f"scale {s} exceeds the containment bound {bound:.3g}")
    margin = 0.25 * inr * (1 - 1e-9)
    image = Disk(c0, s * circ)
    if not compactly_contained(image, c_region, margin):
        raise InfeasibleContraction("contracted image fails the margin check")
    return MapSpec(kind="affine", value=c0, center=q0, scale=complex(s))


def evaluate(model: PiecewiseModel, z: complex) -> complex:
    return model.evaluate(z)
