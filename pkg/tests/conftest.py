import numpy as np
import pytest

from galaxy_al.core import LabeledSet


# Five-example separable pool: class-1 probabilities ascending, true labels
# 0,0,0,1,1 with the cut between ids 2 and 3.
HAND_SCORES = np.array(
    [
        [0.9, 0.1],
        [0.8, 0.2],
        [0.7, 0.3],
        [0.2, 0.8],
        [0.1, 0.9],
    ]
)
HAND_TRUTH = [0, 0, 0, 1, 1]


@pytest.fixture
def hand_scores():
    return HAND_SCORES.copy()


@pytest.fixture
def hand_labeled():
    labeled = LabeledSet()
    labeled.add(0, 0)
    labeled.add(4, 1)
    return labeled
