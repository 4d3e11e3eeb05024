import math

import numpy as np
import pytest
from scipy.linalg import hadamard

from semisplit import (
    CubeNoiseSemigroup,
    FiniteProbabilitySpace,
    FunctionVector,
    build_projection,
    first_level_subspace,
    restricted_isomorphism_check,
)
from semisplit.errors import ConditioningError
from semisplit.subspaces import Subspace

P = 1.5


def test_eigenspace_restriction_is_scalar():
    n, t = 3, 0.3
    S = CubeNoiseSemigroup(n)
    X = first_level_subspace(n)
    lo, hi = restricted_isomorphism_check(S.evaluate(t), X, P, restarts=6, seed=0)
    assert lo == pytest.approx(math.exp(-t), abs=1e-6)
    assert hi == pytest.approx(math.exp(-t), abs=1e-6)


def test_full_space_identity_restriction():
    sp = FiniteProbabilitySpace.uniform(4)
    basis = tuple(FunctionVector(np.eye(4)[i], sp) for i in range(4))
    X = Subspace(basis)
    from semisplit import OperatorMatrix

    lo, hi = restricted_isomorphism_check(OperatorMatrix.identity(sp), X, P, restarts=6, seed=0)
    assert lo == pytest.approx(1.0, abs=1e-8)
    assert hi == pytest.approx(1.0, abs=1e-8)


def test_random_subspace_lower_bound():
    n, t = 4, 0.25
    S = CubeNoiseSemigroup(n)
    rng = np.random.default_rng(8)
    vecs = rng.standard_normal((2**n, 2)) + 1j * rng.standard_normal((2**n, 2))
    X = Subspace(tuple(FunctionVector(vecs[:, j], S.space) for j in range(2)))
    lo, hi = restricted_isomorphism_check(S.evaluate(t), X, P, restarts=10, seed=0)
    # the smallest multiplier on the cube bounds the restriction from below
    assert lo >= math.exp(-n * t) * (1 - 1e-6)
    assert hi <= 1.0 + 1e-9


def test_first_level_projection_is_walsh_projection():
    n = 3
    S = CubeNoiseSemigroup(n)
    X = first_level_subspace(n)
    Pmat, norm_pp = build_projection(S.evaluate(0.3), X, P, restarts=12, seed=0)
    H = hadamard(2**n)
    lvl = np.array([bin(i).count("1") == 1 for i in range(2**n)])
    rademacher = (H * lvl) @ H / 2**n
    np.testing.assert_allclose(Pmat.entries, rademacher, atol=1e-10)
    E = Pmat.entries
    assert np.abs(E @ E - E).max() <= 1e-9
    assert np.abs(E @ X.matrix - X.matrix).max() <= 1e-10
    assert norm_pp >= 1.0


def test_projection_on_random_admissible_subspace():
    n = 3
    S = CubeNoiseSemigroup(n)
    rng = np.random.default_rng(9)
    vecs = rng.standard_normal((2**n, 2)) + 1j * rng.standard_normal((2**n, 2))
    X = Subspace(tuple(FunctionVector(vecs[:, j], S.space) for j in range(2)))
    Pmat, _ = build_projection(S.evaluate(0.4), X, P, restarts=12, seed=0)
    E = Pmat.entries
    assert np.abs(E @ E - E).max() <= 1e-9
    assert np.abs(E @ X.matrix - X.matrix).max() <= 1e-9
    # range is X: applying to arbitrary vectors lands in the span
    g = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    img = E @ g
    coeff, *_ = np.linalg.lstsq(X.matrix, img, rcond=None)
    assert np.abs(X.matrix @ coeff - img).max() <= 1e-9


def test_projection_norm_monotone_toward_two():
    n = 4
    S = CubeNoiseSemigroup(n)
    X = first_level_subspace(n)
    T = S.evaluate(0.3)
    norms = [build_projection(T, X, p, restarts=12, seed=0)[1] for p in (1.5, 1.7, 1.9)]
    assert norms[0] >= norms[1] - 1e-9
    assert norms[1] >= norms[2] - 1e-9
    assert norms[0] <= 3.0


def test_degenerate_basis_raises():
    sp = FiniteProbabilitySpace.uniform(4)
    v = np.array([1.0, 2.0, -1.0, 0.5], dtype=complex)
    with pytest.raises(ConditioningError):
        Subspace((FunctionVector(v, sp), FunctionVector(v, sp)))


def test_singular_restriction_raises():
    n = 2
    S = CubeNoiseSemigroup(n)
    X = first_level_subspace(n)
    from semisplit import OperatorMatrix

    Z = OperatorMatrix.on(S.space, np.zeros((4, 4)))
    with pytest.raises(ConditioningError):
        build_projection(Z, X, P)
