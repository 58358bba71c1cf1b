import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcdae.errors import NewtonDivergence, SingularJacobian
from pcdae.nonlinear import NewtonConfig, newton_solve, solve_algebraic, solve_linear
from pcdae.core import FunctionDae


def test_solve_linear_identity(backend):
    np.testing.assert_array_equal(solve_linear(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_solve_linear_diagonal(backend):
    np.testing.assert_allclose(solve_linear([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0]), [1.0, 2.0])


def test_solve_linear_needs_pivot(backend):
    np.testing.assert_array_equal(solve_linear([[0.0, 1.0], [1.0, 0.0]], [5.0, 7.0]), [7.0, 5.0])


def test_solve_linear_singular(backend):
    with pytest.raises(SingularJacobian):
        solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_solve_linear_shape_mismatch():
    with pytest.raises(ValueError):
        solve_linear(np.eye(2), [1.0, 2.0, 3.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_solve_linear_residual_bound(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n) * 10.0
    if np.linalg.cond(a) > 1e8:
        return
    z = solve_linear(a, b)
    assert np.max(np.abs(a @ z - b)) <= 1e-10 * (1.0 + np.max(np.abs(b)))


def test_backends_agree_on_lu(rng):
    from pcdae import _pykernels
    from pcdae import kernels
    if not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    from pcdae import _kernels
    for n in (1, 2, 5, 17):
        a = rng.normal(size=(n, n))
        b = rng.normal(size=n)
        lu1, p1 = _pykernels.lu_factor(a)
        lu2, p2 = _kernels.lu_factor(a)
        np.testing.assert_array_equal(p1, p2)
        np.testing.assert_allclose(lu1, lu2, rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(_pykernels.lu_solve(lu1, p1, b),
                                   _kernels.lu_solve(lu2, p2, b), rtol=1e-12, atol=1e-13)


def test_newton_affine_one_iteration(backend):
    z, rep = newton_solve(lambda z: z - 5.0, lambda z: np.eye(1), np.array([0.0]))
    assert z[0] == 5.0
    assert rep.iterations == 1 and rep.converged


def test_newton_square_root(backend):
    # hand-iterated from 3: 2.16667, 2.00641, 2.00001, 2.0
    z, rep = newton_solve(lambda z: z * z - 4.0, lambda z: np.diag(2.0 * z), np.array([3.0]))
    assert abs(z[0] - 2.0) <= 1e-8
    assert rep.iterations <= 6
    assert rep.final_residual <= 1e-8


def test_newton_first_iterates_match_hand_values():
    z, _ = newton_solve(lambda z: z * z - 4.0, lambda z: np.diag(2.0 * z), np.array([3.0]),
                        fixed_iterations=1)
    assert z[0] == pytest.approx(13.0 / 6.0, rel=1e-15)
    z, _ = newton_solve(lambda z: z * z - 4.0, lambda z: np.diag(2.0 * z), np.array([3.0]),
                        fixed_iterations=2)
    assert z[0] == pytest.approx(2.0064102564102564, rel=1e-14)


def test_newton_no_real_root(backend):
    with pytest.raises(NewtonDivergence) as info:
        newton_solve(lambda z: z * z + 1.0, lambda z: np.diag(2.0 * z), np.array([1.0]))
    assert info.value.report is not None
    assert not info.value.report.converged


def test_newton_singular_at_guess_is_reported():
    with pytest.raises(SingularJacobian):
        newton_solve(lambda z: z * z + 1.0, lambda z: np.diag(2.0 * z), np.array([0.0]))


def test_newton_max_iter():
    cfg = NewtonConfig(max_iter=2)
    with pytest.raises(NewtonDivergence):
        # a Jacobian 100x too stiff crawls toward the root
        newton_solve(lambda z: z - 10.0, lambda z: np.array([[100.0]]), np.array([0.0]), cfg)


def test_newton_residual_monotone():
    norms = []

    def res(z):
        r = np.array([np.arctan(z[0])])
        norms.append(abs(r[0]))
        return r

    newton_solve(res, lambda z: np.array([[1.0 / (1.0 + z[0] ** 2)]]), np.array([3.0]))
    # accepted iterates: every evaluation that was not a rejected damped trial
    accepted = [norms[0]]
    for v in norms[1:]:
        if v <= accepted[-1]:
            accepted.append(v)
    assert accepted[-1] <= 1e-8
    assert all(b <= a for a, b in zip(accepted, accepted[1:]))


def test_newton_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(tol_residual=0.0)
    with pytest.raises(ValueError):
        NewtonConfig(max_iter=0)
    with pytest.raises(ValueError):
        NewtonConfig(damping=2.0)


def test_fixed_iterations_applies_exactly_k():
    calls = []

    def jac(z):
        calls.append(1)
        return np.diag(2.0 * z)

    z, rep = newton_solve(lambda z: z * z - 4.0, jac, np.array([3.0]), fixed_iterations=3)
    assert len(calls) == 3 and rep.iterations == 3


def test_solve_algebraic_affine():
    sys = FunctionDae(1, 1, lambda t, x, y: -x, lambda t, x, y: y - 2.0 * x,
                      jac_gy=lambda t, x, y: [[1.0]])
    y, rep = solve_algebraic(sys, 0.0, np.array([3.0]), np.array([0.0]))
    assert y[0] == pytest.approx(6.0, abs=1e-12)
    assert rep.iterations == 1


def test_solve_algebraic_empty():
    sys = FunctionDae(1, 0, lambda t, x, y: -x, None)
    y, rep = solve_algebraic(sys, 0.0, np.array([3.0]), np.zeros(0))
    assert y.size == 0 and rep.iterations == 0


def test_solve_algebraic_counts_calls():
    class Counter:
        n = 0

        def add_nonlinear_call(self):
            self.n += 1

    sys = FunctionDae(1, 1, lambda t, x, y: -x, lambda t, x, y: y - 2.0 * x)
    c = Counter()
    solve_algebraic(sys, 0.0, np.array([3.0]), np.array([0.0]), counter=c)
    solve_algebraic(sys, 0.0, np.array([3.0]), np.array([6.0]), counter=c)
    assert c.n == 2
