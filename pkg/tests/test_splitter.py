import math

import numpy as np
import pytest

from semisplit import (
    CubeNoiseSemigroup,
    TriangleDomain,
    approximant,
    certificate_text,
    dimension_sweep,
    harmonic_measure,
    opnorm_lower,
    split,
    strip_damping,
)
from semisplit.errors import CostGuardError, DomainError, IllConditionedSplitError
from semisplit.splitter import PADDING

P = 1.5


def test_split_identity_case_eps_one(default_domain, default_measure, cube3):
    cert = split(cube3, default_domain, default_measure, P, 1.0, seed=0)
    assert cert.recon_error_pp <= 1e-7
    assert cert.bound_T0_ok and cert.bound_T1_ok
    # damping is identically one, so the two parts average the semigroup itself
    assert cert.norm_T0_pp <= cert.C0_measured * (1 + PADDING)


def test_split_small_cube_certifies(default_domain, default_measure):
    S = CubeNoiseSemigroup(1)
    cert = split(S, default_domain, default_measure, P, 1e-2, seed=0)
    assert cert.bound_T0_ok and cert.bound_T1_ok
    assert cert.recon_error_pp <= 1e-6
    assert cert.exponent == pytest.approx((cert.theta - 1) / cert.theta, rel=1e-14)
    assert cert.exponent < 0


def test_split_reconstruction_scales_with_scalar_error(default_domain, default_measure, cube3):
    # operator reconstruction inherits the scalar quadrature error of the
    # damped mean-value identity, up to a modest factor and the cancellation
    # floor of double precision at the damping's magnitude scale
    for eps in (1.0, 1e-1, 1e-2):
        psi = strip_damping(default_measure.theta, eps, default_measure._w_strip)
        scalar = abs(complex((psi * default_measure.weights).sum()) - 1.0)
        cert = split(cube3, default_domain, default_measure, P, eps, seed=0)
        floor = 1e-13 * eps ** cert.exponent
        assert cert.recon_error_pp <= 10 * scalar + floor


def test_split_bounds_padding_tracks_node_maxima(default_domain, default_measure, cube3):
    cert = split(cube3, default_domain, default_measure, P, 1e-3, seed=0)
    assert cert.norm_T0_pp <= cert.C0_measured * 1e-3 * (1 + PADDING)
    assert cert.norm_T1_p2 <= cert.C1_measured * 1e-3**cert.exponent * (1 + PADDING)


def test_split_rejects_bad_inputs(default_domain, default_measure, cube3):
    with pytest.raises(DomainError):
        split(cube3, default_domain, default_measure, 2.5, 1e-2)
    with pytest.raises(DomainError):
        split(cube3, default_domain, default_measure, P, 0.0)
    with pytest.raises(DomainError):
        split(cube3, default_domain, default_measure, P, 1.5)


def test_split_guards_degenerate_theta():
    # flat triangle with t deep in the apex wedge: theta ~ 1.7e-4, so the
    # damping magnitude for any interesting epsilon leaves double range
    V = TriangleDomain(0.3466, 0.3466, 0.1733, 0.1733)
    hm = harmonic_measure(V, 256)
    S = CubeNoiseSemigroup(1)
    with pytest.raises(IllConditionedSplitError):
        split(S, V, hm, P, 1e-2)


def test_eq1_chain_at_nodes(default_measure):
    # every slanted node past the shift splits as T(z) = T(w) T(a + i w')
    hm = default_measure
    V = hm.domain
    S = CubeNoiseSemigroup(2)
    tested = 0
    for bp in hm.nodes[:: 6]:
        if bp.part != "V0":
            continue
        w = bp.z.real - V.a
        if w <= 1e-6:
            continue
        lhs = opnorm_lower(S.evaluate(bp.z), P, P, restarts=8, seed=0).value
        rhs = (
            opnorm_lower(S.evaluate(w), P, P, restarts=8, seed=0).value
            * opnorm_lower(S.evaluate(complex(V.a, bp.z.imag)), P, P, restarts=8, seed=0).value
        )
        assert lhs <= rhs * (1 + 1e-3)
        tested += 1
    assert tested >= 10


def test_eq2_chain_at_nodes(default_measure):
    hm = default_measure
    V = hm.domain
    S = CubeNoiseSemigroup(2)
    s_norm = opnorm_lower(S.evaluate(V.s), P, 2.0, restarts=8, seed=0).value
    for bp in hm.nodes[:: 8]:
        if bp.part != "V1":
            continue
        lhs = opnorm_lower(S.evaluate(bp.z), P, 2.0, restarts=8, seed=0).value
        rhs = s_norm * opnorm_lower(S.evaluate(bp.z - V.s), P, P, restarts=8, seed=0).value
        assert lhs <= rhs * (1 + 1e-3)


def test_damping_power_relation_at_nodes(default_measure):
    # psi at level eps equals psi at level eps' raised to ln(eps)/ln(eps'),
    # through the analytic branch carried by the strip coordinate
    hm = default_measure
    eps, eps2 = 1e-2, 1e-3
    r = math.log(eps) / math.log(eps2)
    psi1 = strip_damping(hm.theta, eps, hm._w_strip)
    log_psi2 = (hm.theta - hm._w_strip) / hm.theta * math.log(eps2)
    np.testing.assert_allclose(psi1, np.exp(r * log_psi2), atol=1e-10)


def test_approximant_contract(default_domain, default_measure, cube3):
    for eps in (1.0, 1e-3):
        res = approximant(cube3, default_domain, default_measure, P, eps, seed=0)
        cert = split(cube3, default_domain, default_measure, P, eps, seed=0)
        budget = (1 - cert.theta) * cert.C0_measured * eps * (1 + PADDING)
        assert res.approx_error <= budget
        assert res.gamma2_norm <= (
            cert.theta * cert.C1_measured * eps**cert.exponent * (1 + PADDING)
        )
        assert res.unscaled_gap >= 0.0


def test_approximant_error_decreases_with_eps(default_domain, default_measure):
    S = CubeNoiseSemigroup(2)
    errs = [
        approximant(S, default_domain, default_measure, P, eps, seed=0).approx_error
        for eps in (1e-1, 1e-2, 1e-3)
    ]
    assert errs[0] >= errs[1] >= errs[2] * (1 - 1e-6)


def test_split_on_irregular_geometry():
    # irrational corner exponents exercise the non-integer grading path
    s = -0.5 * math.log(P - 1.0)
    sa = 1.2 * s
    V = TriangleDomain(s, 0.2 * s, 1.3 * sa, 0.85 * sa)
    hm = harmonic_measure(V, 64)
    S = CubeNoiseSemigroup(2)
    for eps in (1e-1, 1e-2):
        cert = split(S, V, hm, P, eps, seed=0, oracle_check=False)
        assert cert.recon_error_pp <= 1e-6
        assert cert.bound_T0_ok and cert.bound_T1_ok


def test_split_diagonal_semigroup(default_domain, default_measure):
    from semisplit import DiagonalMultiplierSemigroup, FiniteProbabilitySpace, OperatorMatrix

    rng = np.random.default_rng(3)
    d = 6
    sp = FiniteProbabilitySpace(rng.dirichlet(np.ones(d) * 5))
    basis, _ = np.linalg.qr(rng.standard_normal((d, d)))
    spectrum = np.sort(rng.uniform(0.0, 4.0, d))
    spectrum[0] = 0.0
    S = DiagonalMultiplierSemigroup(OperatorMatrix.on(sp, basis), spectrum)
    for eps in (1.0, 1e-2):
        cert = split(S, default_domain, default_measure, P, eps, seed=0, oracle_check=True)
        assert cert.recon_error_pp <= 1e-6
        assert cert.bound_T0_ok and cert.bound_T1_ok


def test_dimension_sweep_theta_constant():
    rows = dimension_sweep(P, 1e-2, [1, 2, 3], nodes_per_edge=48, restarts=12, seed=0)
    thetas = {r.theta for r in rows}
    assert max(thetas) - min(thetas) <= 1e-12
    assert [r.n for r in rows] == [1, 2, 3]


def test_dimension_sweep_cost_guard():
    with pytest.raises(CostGuardError):
        dimension_sweep(P, 1e-2, [2, 12])


def test_certificate_text_round_trip(default_domain, default_measure, cube3):
    cert = split(cube3, default_domain, default_measure, P, 1e-2, seed=0)
    text = certificate_text(cert)
    assert "epsilon: 0.01" in text
    assert "bound_T0_ok: true" in text
    assert "elided (8x8 complex)" in text
    full = certificate_text(cert, include_matrices=True)
    assert full.count("\n") > text.count("\n")
