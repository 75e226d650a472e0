"""Certified polynomial fits on unions of disjoint plates.

A fit is posed as an :class:`ApproximationTask`: a list of pairwise
disjoint plates, each carrying its own analytic target and sup-norm
tolerance, plus optional interior emphasis zones (extra demands inside a
plate, sampled and certified separately) and Hermite constraints (exact
value and first derivative at chosen points).

The solver builds an orthogonal basis adapted to the weighted boundary
samples (Gram-Schmidt on the Krylov sequence z^k, re-orthogonalized), so
it never forms ill-conditioned Vandermonde systems. Constraints are
eliminated exactly through an SVD; tolerance-driven reweighting then
polishes the worst plate. Certification happens on independent boundary
grids: every reported sup is measured on grids the fit never saw, grown
until two consecutive refinements agree, then inflated by a safety
factor. Targets are analytic on their plates, so boundary sups bound the
interior by the maximum principle.

Coefficients of the adapted basis stay O(sup of the data) at every
degree, unlike monomial coefficients which overflow float64 once plates
are small and far from the expansion point. The monomial form is kept as
the exact reference representation for low-degree use.
"""

from __future__ import annotations

import base64
import dataclasses
import math
import time

import numpy as np

from .errors import (
    CertificationFailed,
    ConstraintConflict,
    DegreeBudgetExceeded,
    NoFeasibleEpsilon,
    OverlapDetected,
)
from .geometry import Region, interior_grid, region_distance, winding_number

_CHUNK = 4096
_GOLD = 0.618033988749895


def _hex(x: float) -> str:
    return float(x).hex()


def _unhex(s: str) -> float:
    return float.fromhex(s)


def _pack_complex(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    raw = a.astype("<c16").tobytes()
    return {"shape": list(a.shape), "b64": base64.b64encode(raw).decode("ascii")}


def _unpack_complex(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["b64"])
    return np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(d["shape"])


# ---------------------------------------------------------------------------
# Polynomial value objects
# ---------------------------------------------------------------------------


class Polynomial:
    """Monomial coefficients, ascending powers, Horner evaluation.

    Exact and portable, but only usable at modest degree: adapted-basis
    fits are re-expressed in this form only when the coefficients stay
    representable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        # strip trailing zeros but keep at least the constant term
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1].copy() if len(nz) else c[:1].copy()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.coeffs[-1], dtype=complex)
        for a in self.coeffs[-2::-1]:
            out = out * z + a
        return out

    def eval_with_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        p = np.full(z.shape, self.coeffs[-1], dtype=complex)
        dp = np.zeros(z.shape, dtype=complex)
        for a in self.coeffs[-2::-1]:
            dp = dp * z + p
            p = p * z + a
        return p, dp

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, len(self.coeffs))
        return Polynomial(self.coeffs[1:] * k)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"Polynomial(degree={self.degree})"

    def to_dict(self) -> dict:
        return {
            "kind": "monomial",
            "coeffs": [[_hex(c.real), _hex(c.imag)] for c in self.coeffs],
        }

    @staticmethod
    def from_dict(d: dict) -> "Polynomial":
        return Polynomial([complex(_unhex(re), _unhex(im)) for re, im in d["coeffs"]])


class AdaptedPolynomial:
    """Polynomial held in a data-adapted orthogonal basis.

    The basis q_0, q_1, ... satisfies the packed Hessenberg recurrence

        q_{k+1}(zeta) = (zeta q_k(zeta) - sum_i H[i,k] q_i(zeta)) / H[k+1,k]

    in the rescaled variable zeta = (z - center) / scale. Evaluation
    replays the recurrence, costing O(degree^2) per point batch; values
    stay O(1) at every intermediate step, which is the whole point.
    """

    __slots__ = ("center", "scale", "hpack", "coeffs", "s0")

    def __init__(self, center: complex, scale: float, hpack, coeffs, s0: float):
        self.center = complex(center)
        self.scale = float(scale)
        self.hpack = np.asarray(hpack, dtype=complex)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.s0 = float(s0)
        expect = self.degree * (self.degree + 3) // 2
        if len(self.hpack) != expect:
            raise ValueError(f"packed recurrence length {len(self.hpack)}, expected {expect}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _replay(self, zeta, want_deriv):
        m = zeta.shape[0]
        n = self.degree
        q = np.empty((m, n + 1), dtype=complex)
        q[:, 0] = 1.0 / self.s0
        dq = None
        if want_deriv:
            dq = np.zeros((m, n + 1), dtype=complex)
        off = 0
        for k in range(n):
            h = self.hpack[off : off + k + 2]
            off += k + 2
            v = zeta * q[:, k] - q[:, : k + 1] @ h[: k + 1]
            q[:, k + 1] = v / h[k + 1]
            if want_deriv:
                dv = q[:, k] + zeta * dq[:, k] - dq[:, : k + 1] @ h[: k + 1]
                dq[:, k + 1] = dv / h[k + 1]
        return q, dq

    def _eval(self, z, want_deriv):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        vals = np.empty(flat.shape, dtype=complex)
        dvals = np.empty(flat.shape, dtype=complex) if want_deriv else None
        for lo in range(0, len(flat), _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            zeta = (flat[sl] - self.center) / self.scale
            q, dq = self._replay(zeta, want_deriv)
            vals[sl] = q @ self.coeffs
            if want_deriv:
                dvals[sl] = (dq @ self.coeffs) / self.scale
        vals = vals.reshape(z.shape)
        if want_deriv:
            return vals, dvals.reshape(z.shape)
        return vals

    def __call__(self, z):
        out = self._eval(z, False)
        return out[()] if out.ndim == 0 else out

    def eval_with_derivative(self, z):
        p, dp = self._eval(z, True)
        if p.ndim == 0:
            return p[()], dp[()]
        return p, dp

    def __repr__(self):
        return f"AdaptedPolynomial(degree={self.degree}, scale={self.scale:g})"

    def to_dict(self) -> dict:
        return {
            "kind": "adapted",
            "center": [_hex(self.center.real), _hex(self.center.imag)],
            "scale": _hex(self.scale),
            "s0": _hex(self.s0),
            "hpack": _pack_complex(self.hpack),
            "coeffs": _pack_complex(self.coeffs),
        }

    @staticmethod
    def from_dict(d: dict) -> "AdaptedPolynomial":
        return AdaptedPolynomial(
            complex(_unhex(d["center"][0]), _unhex(d["center"][1])),
            _unhex(d["scale"]),
            _unpack_complex(d["hpack"]),
            _unpack_complex(d["coeffs"]),
            _unhex(d["s0"]),
        )


class PolynomialSum:
    """Pointwise sum of polynomial stages, evaluated term by term.

    Stage maps accumulate as f_j = f_0 + g_1 + ... + g_j; re-expanding
    the sum in a single basis would lose the per-stage certificates, so
    the sum is kept symbolic.
    """

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise ValueError("empty sum")

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.parts)

    def __call__(self, z):
        out = self.parts[0](z)
        for p in self.parts[1:]:
            out = out + p(z)
        return out

    def eval_with_derivative(self, z):
        v, dv = self.parts[0].eval_with_derivative(z)
        for p in self.parts[1:]:
            v2, dv2 = p.eval_with_derivative(z)
            v = v + v2
            dv = dv + dv2
        return v, dv

    def __repr__(self):
        return f"PolynomialSum({len(self.parts)} parts, degree={self.degree})"

    def to_dict(self) -> dict:
        return {"kind": "sum", "parts": [p.to_dict() for p in self.parts]}


def polynomial_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "monomial":
        return Polynomial.from_dict(d)
    if kind == "adapted":
        return AdaptedPolynomial.from_dict(d)
    if kind == "sum":
        return PolynomialSum([polynomial_from_dict(p) for p in d["parts"]])
    raise ValueError(f"unknown polynomial kind {kind!r}")


# ---------------------------------------------------------------------------
# Task description
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Plate:
    """One demand: match ``target`` on ``region`` to within ``tol``.

    ``samples_per_degree`` and ``min_samples`` size the fit grid; the
    defaults suit small plates, large outer boundaries need
    samples_per_degree around 2.5 or the fit oscillates between samples.
    """

    name: str
    region: Region
    target: object  # vectorized callable, complex -> complex
    tol: float
    samples_per_degree: float = 0.0
    min_samples: int = 257

    def grid_size(self, degree: int, boost: float = 1.0) -> int:
        n = max(self.min_samples, int(math.ceil(self.samples_per_degree * degree)))
        n = int(math.ceil(n * boost))
        return n | 1  # odd counts avoid sample-grid resonance with the degree


@dataclasses.dataclass(frozen=True)
class Constraint:
    point: complex
    value: complex
    derivative: complex | None = None


@dataclasses.dataclass
class ApproximationTask:
    """Disjoint plates plus interior emphasis zones and constraints.

    Plates must be pairwise strictly disjoint. Emphasis zones are exempt
    from the disjointness check: they live inside a plate and tighten it
    locally (the classic use is a chain of small zones deep inside a big
    plate whose boundary tolerance alone would be far too loose there).
    """

    plates: list
    emphasis: list = dataclasses.field(default_factory=list)
    constraints: list = dataclasses.field(default_factory=list)
    label: str = ""

    def all_demands(self):
        return list(self.plates) + list(self.emphasis)

    def validate(self) -> None:
        names = [p.name for p in self.all_demands()]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate plate names in task {self.label!r}")
        for i, a in enumerate(self.plates):
            for b in self.plates[i + 1 :]:
                if region_distance(a.region, b.region) <= 0.0:
                    raise OverlapDetected(f"plates {a.name!r} and {b.name!r} touch or overlap")
        seen = {}
        for c in self.constraints:
            for pt, val in seen.items():
                if abs(c.point - pt) < 1e-14 and abs(c.value - val) > 1e-14:
                    raise ConstraintConflict(
                        f"constraints at {c.point} disagree: {c.value} vs {val}"
                    )
            seen[complex(c.point)] = complex(c.value)

    def frame(self):
        """Deterministic affine frame (center, scale) covering all plates."""
        los, his = [], []
        for p in self.all_demands():
            lo, hi = p.region.bbox()
            los.append(lo)
            his.append(hi)
        lo = complex(min(c.real for c in los), min(c.imag for c in los))
        hi = complex(max(c.real for c in his), max(c.imag for c in his))
        center = (lo + hi) / 2.0
        scale = max(hi.real - lo.real, hi.imag - lo.imag) / 2.0
        return center, max(scale, 1e-12)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ErrorCertificate:
    name: str
    sup_error: float  # stabilized grid sup times the safety factor
    raw_sup: float
    tol: float
    grid: int
    stable: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sup_error": _hex(self.sup_error),
            "raw_sup": _hex(self.raw_sup),
            "tol": _hex(self.tol),
            "grid": self.grid,
            "stable": self.stable,
            "passed": self.passed,
        }


@dataclasses.dataclass(frozen=True)
class UnivalenceCertificate:
    min_abs_derivative: float
    windings: tuple
    grid: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "min_abs_derivative": _hex(self.min_abs_derivative),
            "windings": list(self.windings),
            "grid": self.grid,
            "passed": self.passed,
        }


@dataclasses.dataclass
class CertifiedApproximation:
    polynomial: AdaptedPolynomial
    degree: int
    certificates: list
    constraint_residual: float
    samples: dict
    elapsed: float
    label: str = ""

    def certificate(self, name: str) -> ErrorCertificate:
        for c in self.certificates:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.certificates)


# ---------------------------------------------------------------------------
# Weighted orthogonal fit
# ---------------------------------------------------------------------------


def _orthobasis(zs: np.ndarray, w: np.ndarray, degree: int):
    """CGS2 on the weighted Krylov sequence; returns sample basis and recurrence."""
    m = len(zs)
    Q = np.empty((m, degree + 1), dtype=complex)
    H = np.zeros((degree + 2, degree + 1), dtype=complex)
    s0 = float(np.linalg.norm(w))
    Q[:, 0] = w / s0
    for k in range(degree):
        v = zs * Q[:, k]
        h1 = Q[:, : k + 1].conj().T @ v
        v -= Q[:, : k + 1] @ h1
        h2 = Q[:, : k + 1].conj().T @ v
        v -= Q[:, : k + 1] @ h2
        H[: k + 1, k] = h1 + h2
        nv = float(np.linalg.norm(v))
        if nv == 0.0:  # sample set cannot support this degree
            raise DegreeBudgetExceeded(f"basis degenerated at degree {k + 1} with {m} samples")
        H[k + 1, k] = nv
        Q[:, k + 1] = v / nv
    return Q, H, s0


def _pack_H(H: np.ndarray, degree: int) -> np.ndarray:
    cols = [H[: k + 2, k] for k in range(degree)]
    return np.concatenate(cols) if cols else np.zeros(0, dtype=complex)


def _basis_at_points(zs, H, s0, degree, want_deriv=False):
    """Replay the recurrence at arbitrary points (unweighted basis values)."""
    zs = np.asarray(zs, dtype=complex)
    m = len(zs)
    q = np.empty((m, degree + 1), dtype=complex)
    q[:, 0] = 1.0 / s0
    dq = np.zeros((m, degree + 1), dtype=complex) if want_deriv else None
    for k in range(degree):
        v = zs * q[:, k] - q[:, : k + 1] @ H[: k + 1, k]
        q[:, k + 1] = v / H[k + 1, k]
        if want_deriv:
            dv = q[:, k] + zs * dq[:, k] - dq[:, : k + 1] @ H[: k + 1, k]
            dq[:, k + 1] = dv / H[k + 1, k]
    return (q, dq) if want_deriv else q


def _solve(zs, ys, w, degree, constraints, tols, rounds):
    """IRLS loop around the constrained least-squares core; keeps the best round."""
    best = None
    w = w.copy()
    for it in range(rounds):
        Q, H, s0 = _orthobasis(zs, w, degree)
        c_ls = Q.conj().T @ (w * ys)
        if constraints:
            rows, rhs = [], []
            for con in constraints:
                qv, dv = _basis_at_points(
                    np.array([con.point]), H, s0, degree, want_deriv=True
                )
                rows.append(qv[0])
                rhs.append(con.value)
                if con.derivative is not None:
                    rows.append(dv[0])
                    rhs.append(con.derivative)
            C = np.array(rows)
            d = np.array(rhs, dtype=complex)
            U, S, Vh = np.linalg.svd(C, full_matrices=False)
            if S[-1] < 1e-13 * S[0]:
                raise ConstraintConflict("constraint rows are numerically dependent")
            c_part = Vh.conj().T @ ((U.conj().T @ d) / S)
            resid = c_ls - c_part
            c = c_part + resid - Vh.conj().T @ (Vh @ resid)
        else:
            c = c_ls
        r = np.abs(_basis_at_points(zs, H, s0, degree) @ c - ys)
        score = float(np.max(r / tols))
        if best is None or score < best[0]:
            best = (score, H, s0, c)
        if score <= 1.0 or it + 1 == rounds:
            break
        w = w * np.minimum(np.maximum(np.sqrt(r / tols), 1.0), 30.0)
    return best


@dataclasses.dataclass
class FitConfig:
    initial_degree: int = 64
    max_degree: int = 2048
    degree_growth: float = 1.35
    irls_rounds: int = 3
    check_factor: float = 2.3
    safety: float = 1.5
    max_boosts: int = 3
    certify_max_doublings: int = 5
    # called after each degree attempt with (label, degree, {name: sup}, elapsed)
    on_attempt: object = None


def _sample_demand(demand: Plate, degree: int, boost: float):
    n = demand.grid_size(degree, boost)
    return demand.region.sample_boundary_points(n)


def _sup_on_grid(values_fn, demand: Plate, n: int) -> float:
    pts = demand.region.sample_boundary_points(n | 1)
    return float(np.max(np.abs(values_fn(pts) - demand.target(pts))))


def approximate(task: ApproximationTask, config: FitConfig | None = None) -> CertifiedApproximation:
    """Fit one polynomial meeting every plate and emphasis demand, certified.

    Degree escalates geometrically from ``initial_degree``; a plate whose
    independent check grid disagrees badly with its fit residual is
    undersampled, so its grid is boosted and the degree retried before
    escalating. Raises DegreeBudgetExceeded with the best attempt's
    residual summary when ``max_degree`` is not enough.
    """

    cfg = config or FitConfig()
    task.validate()
    center, scale = task.frame()
    demands = task.all_demands()
    boosts = {d.name: 1.0 for d in demands}
    t0 = time.time()

    degree = cfg.initial_degree
    best_summary = None
    while True:
        pts_list = [_sample_demand(d, degree, boosts[d.name]) for d in demands]
        zs = np.concatenate(pts_list)
        ys = np.concatenate([d.target(p) for d, p in zip(demands, pts_list)])
        tols = np.concatenate([np.full(len(p), d.tol) for d, p in zip(demands, pts_list)])
        w = 1.0 / tols
        w /= np.linalg.norm(w) / math.sqrt(len(w))

        zeta = (zs - center) / scale
        cons = [
            Constraint(
                (c.point - center) / scale,
                c.value,
                None if c.derivative is None else c.derivative * scale,
            )
            for c in task.constraints
        ]
        score, H, s0, coef = _solve(zeta, ys, w, degree, cons, tols, cfg.irls_rounds)
        poly = AdaptedPolynomial(center, scale, _pack_H(H, degree), coef, s0)

        # independent check at a coprime-ish grid density
        fit_sups = {}
        lo = 0
        for d, p in zip(demands, pts_list):
            r = np.abs(poly(p) - d.target(p))
            fit_sups[d.name] = float(np.max(r))
            lo += len(p)
        check_sups = {
            d.name: _sup_on_grid(poly, d, int(d.grid_size(degree, boosts[d.name]) * cfg.check_factor))
            for d in demands
        }
        best_summary = {
            "degree": degree,
            "worst": max(check_sups[d.name] / d.tol for d in demands),
            "sups": dict(check_sups),
        }
        if cfg.on_attempt is not None:
            cfg.on_attempt(task.label, degree, dict(check_sups), time.time() - t0)

        failing = [d for d in demands if check_sups[d.name] > d.tol]
        if not failing:
            certs = []
            for d in demands:
                certs.append(
                    certify_error(
                        poly,
                        d.region,
                        d.target,
                        d.tol,
                        start=d.grid_size(degree, boosts[d.name]),
                        safety=cfg.safety,
                        max_doublings=cfg.certify_max_doublings,
                        name=d.name,
                    )
                )
            if all(c.passed for c in certs):
                cres = 0.0
                for con in task.constraints:
                    v, dv = poly.eval_with_derivative(con.point)
                    cres = max(cres, abs(v - con.value))
                    if con.derivative is not None:
                        cres = max(cres, abs(dv - con.derivative))
                return CertifiedApproximation(
                    polynomial=poly,
                    degree=degree,
                    certificates=certs,
                    constraint_residual=cres,
                    samples={d.name: len(p) for d, p in zip(demands, pts_list)},
                    elapsed=time.time() - t0,
                    label=task.label,
                )
            failing = [d for d in demands if not next(c for c in certs if c.name == d.name).passed]

        # blowup between samples shows as check sup far above the fit residual
        boosted = False
        for d in failing:
            if check_sups[d.name] > 4.0 * max(fit_sups[d.name], d.tol) and boosts[d.name] < 1.8 ** cfg.max_boosts:
                boosts[d.name] *= 1.8
                boosted = True
        if boosted:
            continue
        nxt = int(math.ceil(degree * cfg.degree_growth / 32.0)) * 32
        if nxt > cfg.max_degree:
            worst = ", ".join(
                f"{d.name}: {check_sups[d.name]:.2e}/{d.tol:.1e}" for d in failing
            )
            raise DegreeBudgetExceeded(
                f"task {task.label!r} still failing at degree {degree}: {worst}"
            )
        degree = nxt


# ---------------------------------------------------------------------------
# Stand-alone certification
# ---------------------------------------------------------------------------


def certify_error(
    poly,
    region: Region,
    target,
    tol: float,
    *,
    start: int = 257,
    safety: float = 1.5,
    max_doublings: int = 5,
    name: str = "",
) -> ErrorCertificate:
    """Boundary sup of |poly - target| on grids doubled until stable.

    Stability means the sup moved by less than 10 percent between the
    last two grids; the certificate then reports safety * sup. A
    certificate that never stabilized is reported failed regardless of
    the measured value.
    """

    n = max(64, int(start)) | 1
    sups = [_sup_on_grid(poly, Plate(name or "cert", region, target, tol), n)]
    stable = False
    for _ in range(max_doublings):
        n *= 2
        sups.append(_sup_on_grid(poly, Plate(name or "cert", region, target, tol), n))
        lo, hi = sorted(sups[-2:])
        if hi <= 1.10 * lo + 1e-17:
            stable = True
            break
    raw = max(sups[-2:])
    bound = safety * raw
    return ErrorCertificate(
        name=name,
        sup_error=bound,
        raw_sup=raw,
        tol=tol,
        grid=n,
        stable=stable,
        passed=bool(stable and bound <= tol),
    )


def certify_univalence(
    poly,
    region: Region,
    *,
    grid: int = 96,
    probes: int = 5,
) -> UnivalenceCertificate:
    """Certify injectivity evidence for ``poly`` on ``region``.

    Two checks: the derivative never vanishes on an interior grid plus
    boundary, and the boundary image winds exactly once around each of a
    handful of interior image points (the argument principle then counts
    one preimage). A vanishing derivative or any winding other than one
    raises CertificationFailed with the witness point.
    """

    inner = interior_grid(region, grid)
    bnd = region.sample_boundary_points(max(256, 8 * grid) | 1)
    pts = np.concatenate([inner, bnd]) if len(inner) else bnd
    _, dv = poly.eval_with_derivative(pts)
    k = int(np.argmin(np.abs(dv)))
    dmin = float(np.abs(dv[k]))
    if dmin == 0.0:
        raise CertificationFailed("derivative vanishes on the region", witness=pts[k])

    loop = poly(region.sample_boundary_points(max(1024, 16 * grid) | 1))
    windings = []
    # probe deep inside so the image point clears the image curve
    deep = interior_grid(region, max(8, grid // 4), inset=0.35 * region.inradius())
    if not len(deep):
        deep = np.array([region.centroid()])
    step = max(1, len(deep) // probes)
    targets = deep[::step][:probes]
    for z0 in targets:
        w0 = poly(np.array([z0]))[0]
        wn = winding_number(loop, w0)
        windings.append(int(wn))
        if wn != 1:
            raise CertificationFailed(
                f"boundary image winds {wn} times around an interior value", witness=complex(z0)
            )
    return UnivalenceCertificate(
        min_abs_derivative=dmin,
        windings=tuple(windings),
        grid=len(pts),
        passed=True,
    )


def epsilon_search(predicate, cap: float, *, floor: float = 1e-12) -> float:
    """Largest dyadic fraction of ``cap`` that the predicate accepts with room.

    ``predicate(eps)`` returns its worst margin at that tolerance; eps is
    accepted once the margin is at least 2 * eps, so the certified claim
    survives a full tolerance of slack on both sides. Halves from cap
    down to ``floor``, then raises NoFeasibleEpsilon.
    """

    eps = float(cap)
    while eps >= floor:
        margin = predicate(eps)
        if margin >= 2.0 * eps:
            return eps
        eps /= 2.0
    raise NoFeasibleEpsilon(f"no eps in [{floor:g}, {cap:g}] earns margin >= 2*eps")
