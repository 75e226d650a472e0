import numpy as np
import pytest

from wanderkit import approx as ap
from wanderkit import geometry as g
from wanderkit.errors import (
    CertificationFailed,
    ConstraintConflict,
    DegreeBudgetExceeded,
    NoFeasibleEpsilon,
    OverlapDetected,
)

RNG = np.random.default_rng(20260816)


def fit_triple_z(tol=5e-3):
    """Disk plate with target 3z and exact pinning at the origin."""
    task = ap.ApproximationTask(
        plates=[ap.Plate("core", g.Disk(0j, 0.12), lambda z: 3 * z, tol)],
        constraints=[ap.Constraint(0j, 0j, 3.0 + 0j)],
        label="triple",
    )
    return ap.approximate(task, ap.FitConfig(initial_degree=16, max_degree=128))


# ---------------------------------------------------------------------------
# plain polynomials
# ---------------------------------------------------------------------------


def test_horner_matches_polyval():
    coeffs = RNG.normal(size=6) + 1j * RNG.normal(size=6)
    p = ap.Polynomial(coeffs)
    z = RNG.normal(size=40) + 1j * RNG.normal(size=40)
    expect = np.polyval(coeffs[::-1], z)
    assert np.allclose(p(z), expect, rtol=0, atol=1e-12)


def test_polynomial_strips_trailing_zeros():
    p = ap.Polynomial([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1
    assert ap.Polynomial([0.0, 0.0]).degree == 0


def test_derivative_and_pair_evaluation_agree():
    p = ap.Polynomial([1.0, -2.0, 0.5j, 3.0])
    z = RNG.normal(size=25) + 1j * RNG.normal(size=25)
    v, dv = p.eval_with_derivative(z)
    assert np.allclose(v, p(z), atol=1e-14)
    assert np.allclose(dv, p.derivative()(z), atol=1e-14)


def test_monomial_roundtrip_is_bit_exact():
    p = ap.Polynomial(RNG.normal(size=9) + 1j * RNG.normal(size=9))
    q = ap.Polynomial.from_dict(p.to_dict())
    assert q == p


def test_scalar_evaluation_returns_scalar():
    p = ap.Polynomial([0.0, 3.0])
    out = p(0.25 + 0.5j)
    assert np.ndim(out) == 0
    assert out == pytest.approx(0.75 + 1.5j)


# ---------------------------------------------------------------------------
# task validation
# ---------------------------------------------------------------------------


def test_overlapping_plates_rejected():
    task = ap.ApproximationTask(
        plates=[
            ap.Plate("a", g.Disk(0j, 1.0), lambda z: z, 1e-3),
            ap.Plate("b", g.Disk(1.5 + 0j, 1.0), lambda z: z, 1e-3),
        ]
    )
    with pytest.raises(OverlapDetected):
        task.validate()


def test_emphasis_zones_exempt_from_disjointness():
    task = ap.ApproximationTask(
        plates=[ap.Plate("outer", g.Disk(0j, 1.0), lambda z: z, 1e-3)],
        emphasis=[ap.Plate("inner", g.Disk(0j, 0.1), lambda z: z, 1e-8)],
    )
    task.validate()  # no raise


def test_conflicting_constraints_rejected():
    task = ap.ApproximationTask(
        plates=[ap.Plate("a", g.Disk(0j, 1.0), lambda z: z, 1e-3)],
        constraints=[ap.Constraint(0j, 0j), ap.Constraint(0j, 1.0 + 0j)],
    )
    with pytest.raises(ConstraintConflict):
        task.validate()


def test_grid_sizes_are_odd_and_floored():
    plate = ap.Plate("p", g.Disk(0j, 1.0), lambda z: z, 1e-3, samples_per_degree=2.0)
    assert plate.grid_size(100) % 2 == 1
    assert plate.grid_size(10) >= 257
    assert plate.grid_size(300) >= 600


# ---------------------------------------------------------------------------
# fitting: frozen oracles
# ---------------------------------------------------------------------------


def test_linear_target_is_fit_exactly():
    fit = fit_triple_z()
    assert fit.ok
    assert fit.constraint_residual < 1e-12
    z = 0.05 * (RNG.normal(size=30) + 1j * RNG.normal(size=30))
    z = z[np.abs(z) < 0.1]
    assert np.abs(fit.polynomial(z) - 3 * z).max() < 1e-10


def test_two_plate_switch():
    # classic two-island jump: 0 on one disk, 1 on the other
    task = ap.ApproximationTask(
        plates=[
            ap.Plate("off", g.Disk(0j, 0.35), lambda z: np.zeros_like(z), 1e-3),
            ap.Plate("on", g.Disk(2.0 + 0j, 0.35), lambda z: np.ones_like(z), 1e-3),
        ],
        label="switch",
    )
    fit = ap.approximate(task, ap.FitConfig(initial_degree=48, max_degree=256))
    assert fit.ok
    assert abs(fit.polynomial(0j)) < 1e-3
    assert abs(fit.polynomial(2.0 + 0j) - 1.0) < 1e-3


def test_budget_exhaustion_raises():
    # the same switch but with a budget too small to reach it
    task = ap.ApproximationTask(
        plates=[
            ap.Plate("off", g.Disk(0j, 0.45), lambda z: np.zeros_like(z), 1e-12),
            ap.Plate("on", g.Disk(1.0 + 0j, 0.45), lambda z: np.ones_like(z), 1e-12),
        ]
    )
    with pytest.raises(DegreeBudgetExceeded):
        ap.approximate(task, ap.FitConfig(initial_degree=8, max_degree=16))


def test_fit_is_deterministic():
    a = fit_triple_z().polynomial.to_dict()
    b = fit_triple_z().polynomial.to_dict()
    assert a == b


def test_adapted_roundtrip_is_bit_exact():
    fit = fit_triple_z()
    clone = ap.polynomial_from_dict(fit.polynomial.to_dict())
    z = 0.08 * (RNG.normal(size=50) + 1j * RNG.normal(size=50))
    va, vb = fit.polynomial(z), clone(z)
    assert np.array_equal(va, vb)


def test_polynomial_sum_evaluates_parts():
    fit = fit_triple_z()
    bump = ap.Polynomial([0.0, 0.0, 1.0])  # z^2
    total = ap.PolynomialSum([fit.polynomial, bump])
    z = 0.05 + 0.02j
    assert total(z) == pytest.approx(fit.polynomial(z) + z * z)
    v, dv = total.eval_with_derivative(np.array([z]))
    _, d1 = fit.polynomial.eval_with_derivative(np.array([z]))
    assert dv[0] == pytest.approx(d1[0] + 2 * z)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def test_error_certificate_honest_failure():
    p = ap.Polynomial([0.0, 1.0])  # z, target wants 3z
    cert = ap.certify_error(p, g.Disk(0j, 0.5), lambda z: 3 * z, 1e-3, name="off")
    assert not cert.passed
    assert cert.raw_sup == pytest.approx(1.0, rel=1e-2)  # |z - 3z| = 2|z| at r=0.5


def test_error_certificate_safety_margin():
    p = ap.Polynomial([0.0, 3.0])
    cert = ap.certify_error(p, g.Disk(0j, 0.5), lambda z: 3 * z, 1e-9)
    assert cert.passed
    assert cert.sup_error >= cert.raw_sup


def test_univalence_accepts_linear():
    fit = fit_triple_z()
    cert = ap.certify_univalence(fit.polynomial, g.Disk(0j, 0.1))
    assert cert.passed
    assert cert.min_abs_derivative == pytest.approx(3.0, rel=1e-3)
    assert set(cert.windings) == {1}


def test_univalence_refuses_square():
    p = ap.Polynomial([0.0, 0.0, 1.0])  # z^2 folds the disk over itself
    with pytest.raises(CertificationFailed):
        ap.certify_univalence(p, g.Disk(0j, 1.0))


# ---------------------------------------------------------------------------
# tolerance search
# ---------------------------------------------------------------------------


def test_epsilon_search_takes_cap_when_easy():
    assert ap.epsilon_search(lambda e: 1.0, 0.04) == 0.04


def test_epsilon_search_halves_until_margin_clears():
    # fixed margin 0.01 forces eps down to 0.005
    assert ap.epsilon_search(lambda e: 0.01, 0.04) == pytest.approx(0.005)


def test_epsilon_search_exhausts():
    with pytest.raises(NoFeasibleEpsilon):
        ap.epsilon_search(lambda e: -1.0, 0.04, floor=1e-6)
