import numpy as np
import pytest

from cmcindex import surfaces as zoo

CLIFFORD_R = 2.0**-0.5


@pytest.fixture(scope="session")
def sphere_lvl2():
    return zoo.gen_round_sphere_r3(1.0, 2)


@pytest.fixture(scope="session")
def sphere_lvl3():
    return zoo.gen_round_sphere_r3(1.0, 3)


@pytest.fixture(scope="session")
def geodesic_lvl3():
    return zoo.gen_geodesic_sphere_s3(np.pi / 4, 3)


@pytest.fixture(scope="session")
def clifford16():
    return zoo.gen_flat_torus_s3(CLIFFORD_R, 16, 16)


@pytest.fixture(scope="session")
def clifford64():
    return zoo.gen_flat_torus_s3(CLIFFORD_R, 64, 64)


@pytest.fixture(scope="session")
def t3_16():
    return zoo.gen_flat_torus_t3(None, 16, 16)


@pytest.fixture(scope="session")
def genus2():
    return zoo.gen_genus2_r3(48)
