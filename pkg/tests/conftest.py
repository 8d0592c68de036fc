import textwrap

import pytest

from piezoblow.grid_ops import Grid
from piezoblow.model import PhysicalParams
from piezoblow.sources import NullSource, PowerDifferenceSource

BLOWUP_CONFIG = """
[domain]
L = 1.0
N = {cells}

[physics]
alpha = 1.0
beta = 1.0
gamma = 0.5
lambda1 = 0.1
lambda2 = 0.1

[source]
kind = power
a = 40
eta = 8

[initial]
v0 = sine

[time]
t_end = 1.0
blowup_threshold = {threshold}

[output]
dir = {output}
"""

DAMPED_CONFIG = """
[domain]
N = 32

[physics]
gamma = 0.3
lambda1 = 0.5
lambda2 = 0.5

[source]
kind = null

[initial]
v0 = sine:0.2

[time]
t_end = 0.2
cfl = 0.5

[output]
dir = {output}
"""


@pytest.fixture
def grid():
    return Grid(1.0, 64)


@pytest.fixture
def free_params():
    return PhysicalParams(gamma=0.0, lambda1=0.0, lambda2=0.0)


@pytest.fixture
def blowup_params():
    return PhysicalParams(alpha=1.0, beta=1.0, gamma=0.5, lambda1=0.1, lambda2=0.1)


@pytest.fixture
def blowup_source():
    return PowerDifferenceSource(a=40.0, eta=8.0)


@pytest.fixture
def null_source():
    return NullSource()


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text).lstrip())
        return path

    return write


@pytest.fixture
def damped_config(write_config, tmp_path):
    return write_config(DAMPED_CONFIG.format(output=tmp_path / "out"))


@pytest.fixture
def blowup_config(write_config, tmp_path):
    return write_config(
        BLOWUP_CONFIG.format(cells=64, threshold="1e6", output=tmp_path / "out")
    )


@pytest.fixture
def output_dir(tmp_path):
    return tmp_path / "results"
