import json

import numpy as np
import pytest

from cli.main import run
from hubbard.Basis import enumerate_sector
from hubbard.lanczos import SolverOptions
from hubbard.params import Boundary, ModelParams

# tighter than the default so symmetry checks at 1e-8 are not limited by the solver
TIGHT = SolverOptions(tol=1e-12)


@pytest.fixture
def params():
    def make(U=0.0, V=0.0, mu=0.0, L=4, boundary=Boundary.PERIODIC):
        return ModelParams(U=U, V=V, mu=mu, L=L, boundary=boundary)

    return make


@pytest.fixture
def half_filled():
    def make(L):
        return enumerate_sector(L, L // 2, L // 2)

    return make


def free_fermion_energy(L: int, n: int) -> float:
    """
    Lowest energy of n spinless fermions on an L-site ring with the fermionic
    wrap sign: periodic for odd n, antiperiodic for even n.
    """
    twist = 0.0 if n % 2 else np.pi
    levels = np.sort(-2.0 * np.cos((2.0 * np.pi * np.arange(L) + twist) / L))
    return float(levels[:n].sum())


@pytest.fixture
def cli(capsys):
    def invoke(*argv):
        code = run([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


@pytest.fixture
def cli_json(cli):
    def invoke(*argv):
        code, out, err = cli(*argv)
        assert code == 0, err
        return json.loads(out)

    return invoke
