import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ellunits.conjugates import conjugate_args, epsilon_grid, initial_args, rou_twist  # noqa: E402
from ellunits.quadfield import make_field, make_ideal  # noqa: E402
from ellunits.rayclass import galois_elements, ray_data, residue_matrix, select_class  # noqa: E402
from ellunits.reciprocity import WClassMatrix, lift_with_det  # noqa: E402

PREC = 600


class Case:
    def __init__(self, d, N, cls=None, twist=None, prec=PREC):
        self.K = make_field(d)
        self.f = make_ideal(self.K, N)
        self.ray = ray_data(self.f)
        self.M = 12 * N * N
        if cls is None:
            x = residue_matrix(select_class(self.f, self.ray.W), self.f)
        else:
            x = WClassMatrix(cls[0], cls[1], self.K.principal_form, N)
        self.alpha = lift_with_det(x, self.M, None, self.ray.ell)
        self.start = initial_args(self.f)
        self.uc = conjugate_args(self.start, self.alpha)
        self.elements = galois_elements(self.f)
        self.prec = prec
        grid = epsilon_grid(self.start, self.uc, self.elements, prec, W=self.ray.W)
        self.grid = rou_twist(grid, *twist) if twist else grid


@pytest.fixture(scope="session")
def d91():
    return Case(-91, 5)


@pytest.fixture(scope="session")
def d40():
    return Case(-40, 6, twist=(12, 5))


@pytest.fixture(scope="session")
def d11():
    return Case(-11, 9, cls=(21, -2))
