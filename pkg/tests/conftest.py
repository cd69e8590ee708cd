import numpy as np
import pytest

from elastic_self.game import make_game, paper_pd


@pytest.fixture
def pd():
    return paper_pd()


@pytest.fixture
def zero2x2():
    return make_game(["A", "B"], [["C", "D"], ["C", "D"]], np.zeros((2, 2, 2)))

