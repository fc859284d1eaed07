import pytest

from hmcleod import collocation, pade, theta


@pytest.fixture(scope="session")
def pipeline_cache():
    return theta._PipelineCache()


@pytest.fixture(scope="session")
def pipe_refpoint(pipeline_cache):
    """Solved two-band pipeline at a comfortable pole-region point."""
    return pipeline_cache.get(-1.5 - 10j)


@pytest.fixture(scope="session")
def colloc_solutions():
    """Real-axis collocation solutions for k = 1, 2, 3 (N = 200)."""
    out = {}
    for k in (1, 2, 3):
        prob = collocation.BvpProblem(alpha=k + 0.5, y1=-12.0 + 0j, y2=12.0 + 0j, N=200)
        out[k] = collocation.solve_bvp(prob)
    return out


@pytest.fixture(scope="session")
def atlas_k3(colloc_solutions):
    """Vault atlas for k = 3 covering the Im(x) = -9 slice band."""
    k = 3
    ck = k ** (2.0 / 3.0) / 2.0 ** (1.0 / 3.0)
    u0, up0 = collocation.eval_solution(colloc_solutions[k], 2.0)
    window = (-6 * ck - 1, 6 * ck + 1, 0.0, 10 * ck + 1)
    return pade.run_vault(window, (2.0, u0, up0), k + 0.5, pade.VaultConfig(seed=7))
