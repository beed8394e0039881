import math

import numpy as np
import pytest

from dfindex import jets
from dfindex.boundary import sample_boundary
from dfindex.estimator import (
    NO_CONSTRAINT,
    HBasis,
    boundary_margin,
    collect_sites,
    feasibility_search,
    geometric_margin,
    interior_check,
    poly_basis,
    vectorfield_margin,
    worm_reduction_basis,
)
from dfindex.fields import ScalarField
from dfindex.geometry import CTVector
from dfindex.worm import sgamma_points

Z_FIBER = CTVector.holo([0.0, 1.0])


def tan_profile_basis(k):
    """Single-field basis holding the extremal profile h with h' = tan(k x)."""
    fn = lambda zs: (-1.0 / k) * jets.log(jets.cos(jets.log(jets.abs2(zs[1])) * k))
    return HBasis(2, [ScalarField(2, fn, name="tan-profile")], "tan-profile")


def small_worm_sites(domain, basis, count=60, spread=0.95):
    wp = domain.params["worm"]
    sites, _ = collect_sites(domain, sgamma_points(wp, count, spread=spread), basis)
    return sites


def test_boundary_margin_riccati_equality_case(worm_euclid):
    eta = 0.45
    k = eta / (1.0 - eta)
    basis = tan_profile_basis(k)
    for x in (0.0, 0.7, -1.2):
        P = np.array([0.0, math.exp(x / 2.0)], dtype=complex)
        m = boundary_margin(worm_euclid, P, Z_FIBER, basis, [1.0], eta)
        assert m == pytest.approx(0.0, abs=1e-9)


def test_boundary_margin_with_zero_h(worm_euclid):
    eta = 0.45
    k = eta / (1.0 - eta)
    basis = tan_profile_basis(k)
    for z2 in (1.0, math.exp(0.3)):
        P = np.array([0.0, z2], dtype=complex)
        m = boundary_margin(worm_euclid, P, Z_FIBER, basis, [0.0], eta)
        assert m == pytest.approx(-k / abs(z2) ** 2, rel=1e-9)
    # eta = 0 with h = 0: both sides vanish (strong Oka borderline)
    m0 = boundary_margin(worm_euclid, np.array([0.0, 1.0], dtype=complex),
                         Z_FIBER, basis, [0.0], 0.0)
    assert m0 == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError, match="eta"):
        boundary_margin(worm_euclid, np.array([0.0, 1.0], dtype=complex),
                        Z_FIBER, basis, [0.0], 1.0)


def test_geometric_margin_values(worm_kahler):
    wp = worm_kahler.params["worm"]
    P = np.array([0.0, 1.0], dtype=complex)
    m = geometric_margin(worm_kahler, P, Z_FIBER, 0.4)
    assert m == pytest.approx(1.0 / wp.t - 0.4 / 0.6, rel=1e-9)
    m_threshold = geometric_margin(worm_kahler, P, Z_FIBER, 1.0 / (wp.t + 1.0))
    assert m_threshold == pytest.approx(0.0, abs=1e-10)


def test_geometric_margin_sentinel_on_strictly_pseudoconvex(ball):
    P = np.array([1.0, 0.0], dtype=complex)
    assert geometric_margin(ball, P, CTVector.holo([0.0, 1.0]), 0.5) == NO_CONSTRAINT
    assert vectorfield_margin(ball, P, CTVector.holo([0.0, 1.0]), 0.5) == NO_CONSTRAINT


def test_margins_agree_and_zero_vector(worm_kahler):
    for z2 in (1.0, math.exp(0.4) * np.exp(1.3j)):
        P = np.array([0.0, z2], dtype=complex)
        for eta in (0.0, 0.4):
            gm = geometric_margin(worm_kahler, P, Z_FIBER, eta)
            vm = vectorfield_margin(worm_kahler, P, Z_FIBER, eta)
            assert vm == pytest.approx(gm, abs=1e-8)
    zero = CTVector.holo([0.0, 0.0])
    P = np.array([0.0, 1.0], dtype=complex)
    assert vectorfield_margin(worm_kahler, P, zero, 0.4) == pytest.approx(0.0, abs=1e-12)


def test_margin_rejects_non_null_vector(worm_kahler):
    P = np.array([0.0, 1.0], dtype=complex)
    with pytest.raises(ValueError, match="null space"):
        geometric_margin(worm_kahler, P, CTVector.holo([1.0, 0.0]), 0.4)


def test_feasibility_without_null_sites_is_trivial(ball):
    basis = poly_basis(2, degree=2)
    pts = sample_boundary(ball, 10, 1)
    sites, min_pc = collect_sites(ball, pts, basis)
    assert len(sites) == 0
    assert min_pc == pytest.approx(1.0, abs=1e-9)
    for eta in (0.3, 0.99):
        cert = feasibility_search(ball, eta, basis, sites)
        assert cert.feasible and cert.status == "no_null_sites"
        assert np.all(cert.coeffs == 0.0)


def test_feasibility_decisions_on_worm(worm_euclid):
    basis = worm_reduction_basis(gamma=math.pi, degree=16, spread=0.95)
    sites = small_worm_sites(worm_euclid, basis, count=80)
    cert_low = feasibility_search(worm_euclid, 0.30, basis, sites)
    assert cert_low.feasible and cert_low.min_margin >= 1e-4
    cert_high = feasibility_search(worm_euclid, 0.70, basis, sites)
    assert not cert_high.feasible
    assert cert_high.status == "infeasible_certified"
    assert cert_high.upper_bound < 1e-4


def test_feasibility_monotone_in_eta(worm_euclid):
    # a certificate at eta2 certifies every eта1 < eta2 with the same h
    basis = worm_reduction_basis(gamma=math.pi, degree=16, spread=0.95)
    sites = small_worm_sites(worm_euclid, basis, count=80)
    cert = feasibility_search(worm_euclid, 0.40, basis, sites)
    assert cert.feasible
    for eta1 in (0.0, 0.2, 0.35):
        vals = sites.margins(cert.coeffs, eta1)
        assert vals.min() >= cert.min_margin - 1e-12


def test_scaling_invariance_of_feasible_set(worm_euclid):
    base = worm_reduction_basis(gamma=math.pi, degree=12, spread=0.95)
    scaled = HBasis(2, [ScalarField(2, lambda zs, f=f.fn: 3.0 * f(zs), name=f.name)
                        for f in base.fields], "scaled")
    sites_base = small_worm_sites(worm_euclid, base, count=50)
    sites_scaled = small_worm_sites(worm_euclid, scaled, count=50)
    for eta in (0.30, 0.70):
        a = feasibility_search(worm_euclid, eta, base, sites_base).feasible
        b = feasibility_search(worm_euclid, eta, scaled, sites_scaled).feasible
        assert a == b


def test_interior_check_ball_examples(ball):
    rep = interior_check(ball, None, 0.5, C=0.1, depths=np.geomspace(1e-4, 1e-1, 6), n_points=6)
    assert rep["positive"] and rep["min_eig"] > 0
    rep0 = interior_check(ball, None, 0.0, C=0.5, depths=np.geomspace(1e-4, 1e-1, 6), n_points=6)
    assert rep0["positive"]
    with pytest.raises(ValueError, match="rho >= 0"):
        interior_check(ball, None, 0.5, depths=[-1e-3], n_points=2)


def test_interior_identity_matches_direct_jets(ball):
    # expanded-identity matrix vs direct complex Hessian of -(-rho)^eta
    eta = 0.5
    h_field = ScalarField(2, lambda zs: (zs[0].real() * 0.2) ** 2 + zs[1].imag() * 0.1)

    def neg_rho_pow(zs):
        r = jets.abs2(zs[0]) + jets.abs2(zs[1]) - 1.0
        rho = r * jets.exp(-1.0 * h_field.fn(zs))
        return -jets.power(-1.0 * rho, eta)

    direct_field = ScalarField(2, neg_rho_pow)
    from dfindex.boundary import point_at_depth
    from dfindex.fields import complex_hessian

    p = sample_boundary(ball, 1, 21)[0]
    z = point_at_depth(ball, p, 0.05)
    direct = complex_hessian(direct_field, z)
    rho = np.real(ball.r(z)) * math.exp(-np.real(h_field.jet(z, 0).value))
    direct_scaled = direct / (eta * (-rho) ** eta)
    rep = interior_check(ball, h_field, eta, C=0.0, depths=[0.05], points=[z])
    assert rep["rows"][0]["min_eig"] == pytest.approx(
        float(np.linalg.eigvalsh(direct_scaled)[0]), rel=1e-7)


def test_certificate_serialization_roundtrip(worm_euclid):
    basis = worm_reduction_basis(gamma=math.pi, degree=12, spread=0.95)
    sites = small_worm_sites(worm_euclid, basis, count=40)
    cert = feasibility_search(worm_euclid, 0.3, basis, sites)
    blob = cert.to_json_dict(seed=7)
    assert blob["eta"] == 0.3
    assert blob["basis_id"] == basis.name
    assert len(blob["coeffs"]) == basis.m
    assert blob["seed"] == 7
    assert blob["n_sites"] == len(sites)
