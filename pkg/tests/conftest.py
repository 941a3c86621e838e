import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tunneltime import GaussianPrep, Grid, make_grid, prepare_gaussian


@pytest.fixture(scope="session")
def paper_grid() -> Grid:
    return make_grid(0.0, 400.0, 8001)


@pytest.fixture(scope="session")
def paper_prep() -> GaussianPrep:
    return GaussianPrep(x0=20.0, p0=8.0, var_x=2.25)


@pytest.fixture()
def paper_packet(paper_grid, paper_prep):
    return prepare_gaussian(paper_grid, paper_prep)
