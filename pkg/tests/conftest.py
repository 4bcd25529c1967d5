import pytest

from horomori.generate import (
    blowup_p3_point_fan,
    c0_two_fan,
    c2_mixed_rank1_fan,
    colour_flip_interior_fan,
    colour_flip_swap_fan,
    fixture_fans,
    flag_fan,
    line_fan,
    plane_fan,
    product_fan,
    rank1_coloured_fan,
    rank1_colour_off_ray_fan,
    rank1_colour_zero_fan,
    simplex_fan,
    suspension_flip_fan,
    weighted_p112_fan,
)


@pytest.fixture(scope="session")
def plane():
    return plane_fan()


@pytest.fixture(scope="session")
def line():
    return line_fan()


@pytest.fixture(scope="session")
def product():
    return product_fan()


@pytest.fixture(scope="session")
def rank1_coloured():
    return rank1_coloured_fan()


@pytest.fixture(scope="session")
def rank1_colour_off_ray():
    return rank1_colour_off_ray_fan()


@pytest.fixture(scope="session")
def rank1_colour_zero():
    return rank1_colour_zero_fan()


@pytest.fixture(scope="session")
def suspension_flip():
    return suspension_flip_fan()


@pytest.fixture(scope="session")
def all_fixture_fans():
    return fixture_fans()
