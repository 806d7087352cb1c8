import numpy as np
import pytest

from greedy_approx import (
    CgaConfig,
    DiscreteDictionary,
    GridFunction,
    ReluFamilySpec,
    build_relu_dictionary,
    cga_run,
    dual_pair,
    lp_norm,
    make_uniform_grid,
    oga_run,
    peak_functional,
)
from greedy_approx.sparse_greedy import TIE_BAND


@pytest.fixture(scope="module")
def grid():
    return make_uniform_grid(400)


@pytest.fixture(scope="module")
def ramps(grid):
    return build_relu_dictionary(ReluFamilySpec(m=1, b_count=101), grid)


def random_target(grid, rng, n_modes=8):
    coeffs = rng.normal(size=n_modes)
    vals = sum(
        c * np.sin((k + 1) * np.pi * grid.points) for k, c in enumerate(coeffs)
    )
    return GridFunction(grid, vals)


class TestCgaConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            CgaConfig(p="inf")
        with pytest.raises(ValueError):
            CgaConfig(p=2, alpha=0.0)
        with pytest.raises(ValueError):
            CgaConfig(p=2, alpha=(1.0, 0.5), max_steps=5)
        with pytest.raises(ValueError):
            CgaConfig(p=2, max_steps=0)

    def test_alpha_schedule(self):
        cfg = CgaConfig(p=2, alpha=(1.0, 0.5, 0.25), max_steps=3)
        assert cfg.alpha_at(2) == 0.5
        const = CgaConfig(p=2, alpha=0.7, max_steps=9)
        assert const.alpha_at(9) == 0.7


class TestCgaRun:
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_exact_recovery_of_dominant_atom(self, ramps, p):
        # the max-norm atom maximizes its own peak pairing, so one step wins
        norms = (np.abs(ramps.values) ** p @ ramps.grid.weights) ** (1.0 / p)
        top = int(norms.argmax())
        f = ramps.atom(top)
        approx, _ = cga_run(f, ramps, CgaConfig(p=p, max_steps=5))
        assert approx.atom_indices[0] == top
        assert approx.residual_norms[1] <= 1e-10 * lp_norm(f, p)

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_exact_recovery_normalized_dictionary(self, ramps, p):
        # normalized atoms make any target atom the unique scan maximizer
        norms = (np.abs(ramps.values) ** p @ ramps.grid.weights) ** (1.0 / p)
        K = DiscreteDictionary(ramps.grid, ramps.values / norms[:, None], ramps.labels)
        f = K.atom(37)
        approx, _ = cga_run(f, K, CgaConfig(p=p, max_steps=5))
        assert approx.atom_indices[0] == 37
        assert approx.residual_norms[1] <= 1e-10 * lp_norm(f, p)

    def test_zero_target_rejected(self, ramps, grid):
        z = GridFunction(grid, np.zeros(len(grid)))
        with pytest.raises(ValueError):
            cga_run(z, ramps, CgaConfig(p=2))

    def test_residual_monotone(self, ramps, grid):
        rng = np.random.default_rng(0)
        for p in (2, 3):
            f = random_target(grid, rng)
            approx, _ = cga_run(f, ramps, CgaConfig(p=p, max_steps=15))
            rn = approx.residual_norms
            assert np.all(rn[1:] <= rn[:-1] + 1e-12)

    def test_selection_matches_brute_force(self, grid):
        # small generic dictionary: reproduce the scan with explicit pairings
        rng = np.random.default_rng(1)
        vals = np.abs(rng.normal(size=(18, len(grid)))) + 0.05
        K = DiscreteDictionary(grid, vals, [(i,) for i in range(18)])
        f = random_target(grid, rng)
        p = 3
        approx, _ = cga_run(f, K, CgaConfig(p=p, max_steps=6))
        residual = f
        basis = []
        from greedy_approx import best_approximation

        for step, idx in enumerate(approx.atom_indices):
            F = peak_functional(residual, p)
            scores = np.array([abs(dual_pair(F, K.atom(i))) for i in range(len(K))])
            expected = int(np.argmax(scores >= scores.max() * (1 - TIE_BAND)))
            assert idx == expected
            basis.append(K.atom(idx))
            _, residual = best_approximation(f, basis, p)

    def test_first_order_optimality_each_step(self, ramps, grid):
        rng = np.random.default_rng(2)
        f = random_target(grid, rng)
        p, proj_tol = 3, 1e-10
        approx, _ = cga_run(f, ramps, CgaConfig(p=p, max_steps=10, proj_tol=proj_tol))
        from greedy_approx import best_approximation

        basis = []
        for idx in approx.atom_indices:
            basis.append(ramps.atom(idx))
            _, residual = best_approximation(f, basis, p, proj_tol)
            if lp_norm(residual, p) <= proj_tol * lp_norm(f, p):
                continue
            F = peak_functional(residual, p)
            for phi in basis:
                assert abs(dual_pair(F, phi)) <= 1.01 * proj_tol * lp_norm(phi, p)

    def test_scale_equivariance(self, ramps, grid):
        rng = np.random.default_rng(3)
        f = random_target(grid, rng)
        cf = GridFunction(grid, 7.5 * f.values)
        cfg = CgaConfig(p=3, max_steps=10)
        a1, _ = cga_run(f, ramps, cfg)
        a2, _ = cga_run(cf, ramps, cfg)
        assert a1.atom_indices == a2.atom_indices
        assert np.allclose(
            a2.residual_norms, 7.5 * a1.residual_norms, rtol=1e-10, atol=0
        )

    def test_stagnation_on_annihilated_dictionary(self, grid):
        # target component orthogonal to every atom stalls the selection
        sin1 = np.sin(np.pi * grid.points)
        w = grid.weights
        bump = np.sin(5 * np.pi * grid.points)
        bump -= sin1 * (w @ (bump * sin1)) / (w @ (sin1 * sin1))
        K = DiscreteDictionary(grid, sin1[None, :], [(0,)])
        f = GridFunction(grid, sin1 + bump)
        approx, trace = cga_run(f, K, CgaConfig(p=2, max_steps=5))
        assert trace.stagnated
        assert approx.atom_indices == (0,)

    def test_weak_alpha_rule(self, ramps, grid):
        rng = np.random.default_rng(4)
        f = random_target(grid, rng)
        alpha = 0.5
        approx, _ = cga_run(f, ramps, CgaConfig(p=2, alpha=alpha, max_steps=6))
        from greedy_approx import best_approximation

        residual, basis = f, []
        for idx in approx.atom_indices:
            F = peak_functional(residual, 2)
            scores = np.abs(ramps.values @ (grid.weights * F.values))
            sup = scores.max()
            assert scores[idx] >= alpha * sup * (1 - 1e-12)
            assert np.all(scores[:idx] < alpha * sup)
            basis.append(ramps.atom(idx))
            _, residual = best_approximation(f, basis, 2)


class TestOgaRun:
    def test_orthonormal_dictionary(self):
        g = make_uniform_grid(13)
        vals = np.zeros((2, 13))
        vals[0, 1:4] = 1.0
        vals[1, 5:8] = 1.0
        norms = np.sqrt(vals**2 @ g.weights)
        vals /= norms[:, None]
        K = DiscreteDictionary(g, vals, [(0,), (1,)])
        f = GridFunction(g, 3.0 * vals[0] + 1.0 * vals[1])
        approx, trace = oga_run(f, K, 5)
        assert approx.atom_indices == (0, 1)
        assert np.allclose(
            approx.residual_norms, [np.sqrt(10.0), 1.0, 0.0], atol=1e-10
        )

    def test_orthogonal_target_stagnates(self):
        g = make_uniform_grid(9)
        atom = np.zeros(9)
        atom[1:4] = 1.0
        f_vals = np.zeros(9)
        f_vals[5:8] = 1.0
        K = DiscreteDictionary(g, atom[None, :], [(0,)])
        approx, trace = oga_run(GridFunction(g, f_vals), K, 3)
        assert trace.stagnated
        assert approx.atom_indices == ()
        assert len(approx.residual_norms) == 1  # just ||f||

    def test_residual_orthogonal_to_selected(self, ramps, grid):
        rng = np.random.default_rng(5)
        f = random_target(grid, rng)
        approx, _ = oga_run(f, ramps, 12)
        r = f.values - ramps.values[list(approx.atom_indices)].T @ approx.coefficients
        fn = lp_norm(f, 2)
        for idx in approx.atom_indices:
            g = ramps.atom(idx)
            assert abs(dual_pair(GridFunction(grid, r), g)) <= 1e-10 * fn * lp_norm(g, 2)

    def test_dependent_atom_stops(self, grid):
        base = np.sin(np.pi * grid.points)
        K = DiscreteDictionary(
            grid, np.vstack([base, 2.0 * base]), [(0,), (1,)]
        )
        f = GridFunction(grid, base + 0.1 * np.cos(np.pi * grid.points))
        approx, trace = oga_run(f, K, 4)
        assert trace.stagnated
        assert len(approx.atom_indices) == 1


class TestEquivalence:
    def test_cga_p2_matches_oga(self, ramps, grid):
        rng = np.random.default_rng(6)
        for _ in range(5):
            f = random_target(grid, rng)
            a_c, _ = cga_run(f, ramps, CgaConfig(p=2, alpha=1.0, max_steps=12))
            a_o, _ = oga_run(f, ramps, 12)
            assert a_c.atom_indices == a_o.atom_indices
            n = min(a_c.residual_norms.size, a_o.residual_norms.size)
            assert np.allclose(
                a_c.residual_norms[:n], a_o.residual_norms[:n], rtol=1e-9, atol=0
            )
