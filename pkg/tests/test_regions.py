import math
from fractions import Fraction

import numpy as np
import pytest

from errors import ParameterError
from regions import RegionFamily, RegionKind, ball_volume, radius_for_volume, unit_ball_volume


def test_ball_volumes():
    assert ball_volume(2, 1) == pytest.approx(math.pi)
    assert ball_volume(1, 0.5) == pytest.approx(1.0)
    assert ball_volume(3, 1) == pytest.approx(4 * math.pi / 3)
    assert unit_ball_volume(40) == pytest.approx(math.pi**20 / math.factorial(20))


def test_radius_inverts_volume():
    for d in (2, 5, 14):
        assert ball_volume(d, radius_for_volume(d, 100)) == pytest.approx(100)
    with pytest.raises(ParameterError):
        radius_for_volume(3, 0)


def test_shells_are_consecutive_annuli():
    family = RegionFamily.shells(4, 10, [Fraction(1, 4), Fraction(1, 2)])
    assert family.kind is RegionKind.ANNULUS
    assert family.volumes == (Fraction(5, 2), Fraction(5))
    assert family.inner_volumes == (Fraction(0), Fraction(5, 2))
    assert family.contains_origin(0)
    assert not family.contains_origin(1)
    assert family.inner_radius(1) == pytest.approx(family.outer_radius(0))


def test_star_scaled_volumes_are_exact():
    family = RegionFamily.star_scaled(3, 8, ["0.25", "0.5", 1])
    assert family.volumes == (Fraction(2), Fraction(4), Fraction(8))


def test_validation():
    with pytest.raises(ParameterError):
        RegionFamily.balls(3, [2, 1])
    with pytest.raises(ParameterError):
        RegionFamily.shells(3, 10, [0.75, 0.5])
    with pytest.raises(ParameterError):
        RegionFamily.balls(3, [0])


def test_sample_stays_inside(rng):
    family = RegionFamily.annuli(3, [1], [4])
    points = family.sample(0, rng, 2000)
    assert family.contains(0, np.linalg.norm(points, axis=1)).all()


def test_restrict():
    family = RegionFamily.balls(2, [1, 2, 3])
    assert family.restrict([0, 2]).volumes == (Fraction(1), Fraction(3))
