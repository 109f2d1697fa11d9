import numpy as np
import pytest

from superrad import AtomCloud


def random_cloud(n, seed, box=0.8, min_sep=0.08):
    """Seeded random positions in a cube with a minimum-separation guard."""
    rng = np.random.default_rng(seed)
    while True:
        pos = rng.uniform(0.0, box, (n, 3))
        if n < 2:
            break
        iu, ju = np.triu_indices(n, k=1)
        if np.min(np.linalg.norm(pos[iu] - pos[ju], axis=1)) >= min_sep:
            break
    return AtomCloud(pos, label=f"random n={n} seed={seed}")


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
