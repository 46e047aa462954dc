import numpy as np
import pytest

from layered_isp.greens import boundary_data, frequency_grid
from layered_isp.inversion import (
    TikhonovSolver,
    add_noise,
    assemble,
    data_vector,
    discrepancy_lambda,
    invert,
    penalty_operator,
    tikhonov_solve,
    vector_to_data,
)
from layered_isp.medium import MediumConfig
from layered_isp.greens import boundary_kernels
from layered_isp.sources import SourceGrid, SourcePair, demo_pair, sobolev_norm

CFG = MediumConfig(1.0, 1.5, 0.5)


@pytest.fixture(scope="module")
def small():
    """Well-conditioned instance: bandwidth covers the grid's resolvable modes."""
    A = assemble(CFG, SourceGrid(33), frequency_grid(60.0, 300, 1.5))
    return A, TikhonovSolver(A)


def test_matrix_matches_boundary_data():
    g = SourceGrid(201)
    sp = demo_pair(g)
    om = frequency_grid(10.0, c_max=1.5)
    A = assemble(CFG, g, om)
    d = data_vector(boundary_data(CFG, sp, om))
    assert np.abs(A.apply(sp) - d).max() <= 1e-10 * np.abs(d).max()
    dm, dp = vector_to_data(d)
    assert len(dm) == len(om) == len(dp)


def test_scalar_entry():
    g = SourceGrid(33)
    om = np.array([2.5])
    A = assemble(CFG, g, om)
    j = 5  # fifth support node
    y = g.x[A.support][j]
    km, _ = boundary_kernels(CFG, om, np.array([y]))
    w = g.weights[A.support][j]
    c = CFG.c_p if y >= 0 else CFG.c_n
    f0_entry = km[0, 0] * (-CFG.alpha + 1j * c * om[0]) * w
    f1_entry = -km[0, 0] * w
    m = A.n_support
    assert A.matrix[0, j] == pytest.approx(f0_entry.real, rel=1e-14)
    assert A.matrix[1, j] == pytest.approx(f0_entry.imag, rel=1e-14)
    assert A.matrix[0, m + j] == pytest.approx(f1_entry.real, rel=1e-14)


def test_f0_columns_vanish_at_low_frequency_without_damping():
    A = assemble(MediumConfig(1.0, 1.5, 0.0), SourceGrid(33), np.array([1e-6, 1e-5]))
    m = A.n_support
    f0_cols = np.abs(A.matrix[:, :m]).reshape(4, 2, m)
    ratio = f0_cols[:, 1].max() / f0_cols[:, 0].max()
    assert ratio == pytest.approx(10.0, rel=1e-3)  # omega * G is O(1), the multiplier is O(omega)


def test_penalty_operator_injective():
    L = penalty_operator(20, 0.05)
    assert np.linalg.matrix_rank(L) == 40


def test_exact_data_recovery(small):
    A, solver = small
    x = np.random.default_rng(0).standard_normal(A.matrix.shape[1])
    rec = solver.solve(A.matrix @ x, 1e-12 * solver.norm)
    assert np.linalg.norm(rec - x) <= 1e-6 * np.linalg.norm(x)


def test_zero_data_zero_solution(small):
    A, _ = small
    res = tikhonov_solve(A, np.zeros(A.matrix.shape[0]), 1.0)
    assert not res.recovered.f0.any() and not res.recovered.f1.any()


def test_huge_lambda_shrinks_to_zero(small):
    A, solver = small
    d = A.matrix @ np.ones(A.matrix.shape[1])
    assert np.abs(solver.solve(d, 1e8 * solver.norm)).max() < 1e-10


def test_rejects_nonpositive_lambda(small):
    with pytest.raises(ValueError):
        small[1].solve(np.zeros(small[0].matrix.shape[0]), 0.0)


def test_lambda_monotonicity(small):
    A, solver = small
    rng = np.random.default_rng(1)
    d = A.matrix @ rng.standard_normal(A.matrix.shape[1]) + 0.1 * rng.standard_normal(A.matrix.shape[0])
    L = penalty_operator(A.n_support, A.grid.h)
    lams = solver.norm * np.logspace(-6, 1, 15)
    res = [solver.residual(d, l) for l in lams]
    semi = [np.linalg.norm(L @ solver.solve(d, l)) for l in lams]
    assert np.all(np.diff(res) >= -1e-12 * res[-1])
    assert np.all(np.diff(semi) <= 1e-12 * semi[0])


def test_residual_matches_direct_evaluation(small):
    A, solver = small
    d = np.random.default_rng(2).standard_normal(A.matrix.shape[0])
    lam = 0.01 * solver.norm
    x = solver.solve(d, lam)
    direct = np.linalg.norm(A.row_weights * (A.matrix @ x - d))
    assert solver.residual(d, lam) == pytest.approx(direct, rel=1e-8)


def test_linearity_at_fixed_lambda(small):
    A, solver = small
    d = np.random.default_rng(3).standard_normal(A.matrix.shape[0])
    lam = 0.1 * solver.norm
    np.testing.assert_allclose(solver.solve(3.0 * d, lam), 3.0 * solver.solve(d, lam), rtol=1e-12)


def test_support_mask(small):
    A, solver = small
    res = solver.result(np.random.default_rng(4).standard_normal(A.matrix.shape[0]), 0.1 * solver.norm)
    outside = ~A.support
    assert not res.recovered.f0[outside].any() and not res.recovered.f1[outside].any()


def test_add_noise_contract():
    g = SourceGrid(201)
    om = frequency_grid(10.0, c_max=1.5)
    clean = boundary_data(CFG, SourcePair.zeros(g), om)
    a, b = add_noise(clean, 1e-6, 0), add_noise(clean, 1e-6, 1)
    assert a.epsilon2 == pytest.approx(1e-6, rel=1e-2) and b.epsilon2 == pytest.approx(a.epsilon2, rel=1e-12)
    assert not np.array_equal(a.d_minus, b.d_minus)
    again = add_noise(clean, 1e-6, 0)
    np.testing.assert_array_equal(a.d_minus, again.d_minus)
    assert a.noise_eps2 == 1e-6
    with pytest.raises(ValueError):
        add_noise(clean, 0.0, 0)


def test_add_noise_energy_is_noise_energy(demo_401):
    # the noise itself carries target_eps2; the stored epsilon2 is the total data energy
    om = frequency_grid(10.0, c_max=1.5)
    clean = boundary_data(CFG, demo_401, om)
    noisy = add_noise(clean, 1e-6, 0)
    noise = noisy.with_data(noisy.d_minus - clean.d_minus, noisy.d_plus - clean.d_plus)
    assert noise.epsilon2 == pytest.approx(1e-6, rel=1e-10)


def test_discrepancy_hits_target():
    g = SourceGrid(201)
    sp = demo_pair(g)
    om = frequency_grid(20.0, c_max=1.5)
    A = assemble(CFG, g, om)
    solver = TikhonovSolver(A)
    noisy = add_noise(boundary_data(CFG, sp, om), 1e-6, 0)
    lam, it, warn = discrepancy_lambda(solver, data_vector(noisy), 1e-3)
    assert warn is None and it > 0
    assert solver.residual(data_vector(noisy), lam) == pytest.approx(1e-3, rel=0.01)


def test_noiseless_two_bump_K60():
    g = SourceGrid.for_bandwidth(60.0, 1.5)
    sp = demo_pair(g)
    ds = boundary_data(CFG, sp, frequency_grid(60.0, c_max=1.5))
    res = invert(CFG, g, ds, 0.0, truth=sp)
    assert res.rel_err_f0 <= 1e-3 and res.rel_err_f1 <= 1e-3


def test_pure_noise_gives_no_structure():
    g = SourceGrid(201)
    om = frequency_grid(20.0, c_max=1.5)
    clean = boundary_data(CFG, SourcePair.zeros(g), om)
    A = assemble(CFG, g, om)
    solver = TikhonovSolver(A)
    recs = []
    for seed in range(20):
        noisy = add_noise(clean, 1e-6, seed)
        res = invert(CFG, g, noisy, 1e-3, solver=solver)
        assert res.warning is None
        # the fitted data never carry more energy than the noise
        assert np.linalg.norm(A.row_weights * A.apply(res.recovered)) <= 1e-3 * (1 + 1e-9)
        recs.append(np.r_[res.recovered.f0, res.recovered.f1])
    R = np.array(recs)
    sd = R.std(axis=0, ddof=1)
    mean = R.mean(axis=0)
    live = sd > 0
    # per-node mean over draws sits inside 3 standard errors almost everywhere
    assert np.mean(np.abs(mean[live]) > 3 * sd[live] / np.sqrt(len(R))) <= 0.02


def test_result_files(tmp_path, demo_401):
    om = frequency_grid(10.0, c_max=1.5)
    ds = boundary_data(CFG, demo_401, om)
    res = invert(CFG, demo_401.grid, add_noise(ds, 1e-6, 0), 1e-3, truth=demo_401)
    res.to_files(tmp_path / "r.csv", tmp_path / "r.json", demo_401, "config_sha256=x", {"seed": 0})
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[1] == "x,f0_true,f0_rec,f1_true,f1_rec"
    assert len(lines) == demo_401.grid.n + 2
    assert sobolev_norm(res.recovered.f0 - demo_401.f0, 0, demo_401.grid) > 0


def test_negative_noise_rejected(demo_401):
    ds = boundary_data(CFG, demo_401, frequency_grid(5.0, c_max=1.5))
    with pytest.raises(ValueError):
        invert(CFG, demo_401.grid, ds, -1.0)
