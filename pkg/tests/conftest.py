import numpy as np
import pytest

from leadfollow import DiscreteMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_measure(
    rng: np.random.Generator,
    max_atoms: int = 3,
    weight_choices=(0.25, 0.5, 0.75, 1.0),
    box: float = 1.0,
) -> DiscreteMeasure:
    """Random atomic measure with positions in [-box, box]."""
    n = int(rng.integers(1, max_atoms + 1))
    xs = rng.uniform(-box, box, size=n)
    ws = rng.choice(weight_choices, size=n)
    return DiscreteMeasure.from_1d(xs, ws)
