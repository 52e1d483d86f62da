import pytest

from frlp import CYCLIC, ORIGINAL, gen_random


@pytest.fixture(scope="session")
def small_pool():
    """50 seeded instances with at most 8 nodes, alternating default variant.

    Shared by the cut-set exactness and dominance-soundness suites so the
    (instance, station-subset) grid is enumerated once per session.
    """
    pool = []
    for seed in range(50):
        variant = CYCLIC if seed % 2 else ORIGINAL
        nodes = 5 + seed % 4
        pool.append(gen_random(seed, num_nodes=nodes, density=0.3,
                               num_demands=2, variant=variant))
    return pool
