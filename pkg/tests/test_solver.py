import numpy as np
import pytest
from scipy.linalg import solve_triangular

from fracheat.hmatrix import build
from fracheat.l1disc import assemble_dense_R
from fracheat.mesh import SpatialGrid, make_graded_mesh
from fracheat.problems import heat1d, heat2d
from fracheat.solver import (
    CycleConfig,
    LevelOperator,
    WaveformSolver,
    _dense_laplacian,
    coarsest_solve,
    prolong_field,
    residual,
    restrict_field,
    smooth,
)


def dense_system(grid, R):
    """Kronecker-assembled space-time matrix R (x) I + I (x) A_h."""
    n = grid.npoints
    M = R.shape[0]
    A = _dense_laplacian(grid)
    return np.kron(R, np.eye(n)) + np.kron(np.eye(M), A)


def make_level(dim, N, M, delta, rank=20, n_min=32):
    grid = SpatialGrid(dim=dim, L=np.pi, N=N)
    mesh = make_graded_mesh(1.0, M, delta)
    return LevelOperator(grid, build(mesh, delta, rank, n_min)), mesh


def test_cycle_config_validation():
    with pytest.raises(ValueError):
        CycleConfig(nu1=0, nu2=0)
    with pytest.raises(ValueError):
        CycleConfig(gamma=3)


def test_residual_zero_guess_returns_rhs():
    op, _ = make_level(1, 7, 16, 0.5)
    f = np.random.default_rng(0).standard_normal((16, 7))
    np.testing.assert_array_equal(residual(op, np.zeros_like(f), f), f)
    with pytest.raises(ValueError):
        residual(op, np.zeros((16, 3)), f)


def test_residual_single_point_dense_case():
    # N=1, M below the leaf size: the operator is exactly R + (2/h^2) I
    op, mesh = make_level(1, 1, 16, 0.5)
    R = assemble_dense_R(mesh, 0.5)
    u = np.random.default_rng(1).standard_normal((16, 1))
    f = np.random.default_rng(2).standard_normal((16, 1))
    want = f - (R + op.diag * np.eye(16)) @ u
    np.testing.assert_allclose(residual(op, u, f), want, rtol=1e-12)


def test_residual_at_dense_solution():
    op, mesh = make_level(1, 7, 32, 0.5)
    R = assemble_dense_R(mesh, 0.5)
    S = dense_system(op.grid, R)
    f = np.random.default_rng(3).standard_normal((32, 7))
    u = np.linalg.solve(S, f.reshape(-1)).reshape(32, 7)
    r = residual(op, u, f)
    assert np.abs(r).max() <= 1e-6 * np.abs(f).max()


def smoother_oracle(grid, R, u, f):
    """Block red-black Gauss-Seidel on the dense system, temporal lines."""
    u = u.copy()
    M = R.shape[0]
    h2 = grid.h**2
    c = 2.0 * grid.dim / h2
    shifted = R + c * np.eye(M)
    if grid.dim == 1:
        order = list(range(0, grid.N, 2)) + list(range(1, grid.N, 2))
        for n in order:
            nb = np.zeros(M)
            if n > 0:
                nb += u[:, n - 1]
            if n < grid.N - 1:
                nb += u[:, n + 1]
            u[:, n] = solve_triangular(shifted, f[:, n] + nb / h2, lower=True)
        return u
    idx = [(i, j) for i in range(grid.N) for j in range(grid.N)]
    for parity in (0, 1):
        for i, j in idx:
            if (i + j) % 2 != parity:
                continue
            nb = np.zeros(M)
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < grid.N and 0 <= jj < grid.N:
                    nb += u[:, ii, jj]
            u[:, i, j] = solve_triangular(shifted, f[:, i, j] + nb / h2, lower=True)
    return u


@pytest.mark.parametrize("dim,N", [(1, 3), (2, 3)])
def test_smoother_matches_block_gauss_seidel(dim, N):
    op, mesh = make_level(dim, N, 16, 0.5)
    R = assemble_dense_R(mesh, 0.5)
    shape = (16, N) if dim == 1 else (16, N, N)
    rng = np.random.default_rng(4)
    u = rng.standard_normal(shape)
    f = rng.standard_normal(shape)
    got = smooth(op, u, f)
    want = smoother_oracle(op.grid, R, u, f)
    rel = np.abs(got - want).max() / np.abs(want).max()
    assert rel <= 1e-6


def test_smoother_single_line_is_exact_solve():
    op, _ = make_level(1, 1, 16, 0.5)
    f = np.random.default_rng(5).standard_normal((16, 1))
    u = smooth(op, np.zeros_like(f), f)
    assert np.abs(residual(op, u, f)).max() <= 1e-10 * np.abs(f).max()


def test_smoother_preserves_zero():
    op, _ = make_level(1, 7, 16, 0.5)
    z = np.zeros((16, 7))
    np.testing.assert_array_equal(smooth(op, z, z), z)


def test_restriction_constants_and_impulse():
    # constants are reproduced (weights sum to one)
    c1 = restrict_field(np.full((4, 7), 3.0), 1)
    np.testing.assert_allclose(c1, 3.0)
    c2 = restrict_field(np.full((4, 7, 7), -2.0), 2)
    np.testing.assert_allclose(c2, -2.0)
    # unit impulse at a coarse-coincident point keeps weight 1/2 in 1D
    imp = np.zeros((1, 7))
    imp[0, 3] = 1.0
    out = restrict_field(imp, 1)
    np.testing.assert_allclose(out[0], [0.0, 0.5, 0.0])
    with pytest.raises(ValueError):
        restrict_field(np.zeros((1, 1)), 1)


def test_prolongation_constants_and_impulse():
    # constants reproduced away from the zero Dirichlet boundary
    np.testing.assert_allclose(prolong_field(np.full((2, 3), 1.5), 1)[:, 1:-1], 1.5)
    imp = np.zeros((1, 3))
    imp[0, 1] = 1.0
    out = prolong_field(imp, 1)
    np.testing.assert_allclose(out[0], [0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0])
    # 2D bilinear: constants reproduced away from the boundary layer of zeros
    e = np.full((1, 3, 3), 1.0)
    out2 = prolong_field(e, 2)
    np.testing.assert_allclose(out2[0, 3, 3], 1.0)


@pytest.mark.parametrize("dim", [1, 2])
def test_transfer_transpose_relation(dim):
    # <R u, v>_coarse == 2^-dim <u, P v>_fine for full weighting vs interpolation
    N = 7
    shape_f = (2, N) if dim == 1 else (2, N, N)
    Nc = (N - 1) // 2
    shape_c = (2, Nc) if dim == 1 else (2, Nc, Nc)
    rng = np.random.default_rng(6)
    u = rng.standard_normal(shape_f)
    v = rng.standard_normal(shape_c)
    lhs = np.sum(restrict_field(u, dim) * v)
    rhs = np.sum(u * prolong_field(v, dim)) / 2**dim
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_coarsest_solve_against_dense_oracle():
    op, mesh = make_level(1, 1, 32, 0.4)
    R = assemble_dense_R(mesh, 0.4)
    f = np.random.default_rng(7).standard_normal((32, 1))
    got = coarsest_solve(op, f, R)
    S = dense_system(op.grid, R)
    want = np.linalg.solve(S, f.reshape(-1)).reshape(32, 1)
    rel = np.abs(got - want).max() / np.abs(want).max()
    assert rel <= 1e-12
    np.testing.assert_array_equal(coarsest_solve(op, np.zeros((32, 1)), R), 0.0)


def test_coarsest_solve_single_step_closed_form():
    op, mesh = make_level(1, 1, 1, 0.5)
    R = assemble_dense_R(mesh, 0.5)
    f = np.array([[2.0]])
    got = coarsest_solve(op, f, R)
    assert got[0, 0] == pytest.approx(2.0 / (R[0, 0] + op.diag), rel=1e-14)


def test_two_level_single_line_converges_in_one_cycle():
    grid = SpatialGrid(dim=1, L=np.pi, N=1)
    mesh = make_graded_mesh(1.0, 32, 0.5)
    solver = WaveformSolver(grid, mesh, 0.5)
    f = np.random.default_rng(8).standard_normal((32, 1))
    _, rep = solver.solve(f, CycleConfig(tol=1e-10))
    assert rep.converged and rep.iterations == 1


def test_converged_solution_matches_dense_direct_solve():
    problem = heat1d(0.5, 7, 32)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.5)
    u, rep = solver.solve(problem.rhs, CycleConfig(tol=1e-12))
    assert rep.converged
    R = assemble_dense_R(problem.mesh, 0.5)
    S = dense_system(problem.grid, R)
    want = np.linalg.solve(S, problem.rhs.reshape(-1)).reshape(32, 7)
    rel = np.abs(u - want).max() / np.abs(want).max()
    assert rel <= 1e-6


def test_converged_solution_matches_dense_direct_solve_2d():
    problem = heat2d(0.5, 3, 16)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.5)
    u, rep = solver.solve(problem.rhs, CycleConfig(nu1=1, nu2=1, tol=1e-12))
    assert rep.converged
    R = assemble_dense_R(problem.mesh, 0.5)
    S = dense_system(problem.grid, R)
    want = np.linalg.solve(S, problem.rhs.reshape(16, -1).reshape(-1)).reshape(16, 3, 3)
    rel = np.abs(u - want).max() / np.abs(want).max()
    assert rel <= 1e-6


def test_residuals_decrease_monotonically():
    problem = heat1d(0.4, 63, 64)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.4)
    _, rep = solver.solve(problem.rhs, CycleConfig(tol=1e-10), start="random")
    assert rep.converged
    assert all(b < a for a, b in zip(rep.residuals, rep.residuals[1:]))
    assert rep.residuals[-1] <= 1e-10 * rep.residuals[0]
    assert 0.0 < rep.convergence_factor < 1.0


def test_solve_zero_rhs_returns_zero_immediately():
    problem = heat1d(0.4, 7, 16)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.4)
    u, rep = solver.solve(np.zeros((16, 7)), CycleConfig())
    assert rep.iterations == 0 and rep.converged
    np.testing.assert_array_equal(u, 0.0)


def test_solve_reports_non_convergence():
    problem = heat1d(0.4, 31, 32)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.4)
    _, rep = solver.solve(problem.rhs, CycleConfig(tol=1e-10, max_iter=2), start="random")
    assert not rep.converged and rep.iterations == 2


def test_solve_random_start_is_deterministic():
    problem = heat1d(0.4, 15, 16)
    solver = WaveformSolver(problem.grid, problem.mesh, 0.4)
    u1, _ = solver.solve(problem.rhs, CycleConfig(), start="random", seed=42)
    u2, _ = solver.solve(problem.rhs, CycleConfig(), start="random", seed=42)
    np.testing.assert_array_equal(u1, u2)
    with pytest.raises(ValueError):
        solver.solve(problem.rhs, CycleConfig(), start="bogus")
