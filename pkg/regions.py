"""Balls, origin-centred annuli and star-scaled families with exact rational volumes."""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy import special

from errors import ParameterError


def unit_ball_volume(d):
    """V_d = pi^(d/2) / Gamma(d/2 + 1)"""
    if d < 1:
        raise ParameterError(f"dimension must be positive, got {d}")
    return math.exp(0.5 * d * math.log(math.pi) - special.gammaln(0.5 * d + 1.0))


def ball_volume(d, radius):
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    return unit_ball_volume(d) * float(radius) ** d


def radius_for_volume(d, volume):
    if volume <= 0:
        raise ParameterError(f"volume must be positive, got {volume}")
    return (float(volume) / unit_ball_volume(d)) ** (1.0 / d)


class RegionKind(str, Enum):
    BALL = "Ball"
    ANNULUS = "Annulus"
    STAR_SCALED = "StarScaled"


def _as_fraction(x):
    # str() keeps decimal inputs like 0.25 exact
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class RegionFamily:
    """
    k origin-centred regions in R^d, one per moment factor.

    volumes are the region volumes; annuli also carry the volumes of their inner
    balls so each annulus is {inner_radius <= |x| <= outer_radius}.
    """

    kind: RegionKind
    d: int
    volumes: tuple
    inner_volumes: tuple = ()
    symmetric: bool = True
    scales: tuple = ()  # t values of a star-scaled family

    def __post_init__(self):
        object.__setattr__(self, "kind", RegionKind(self.kind))
        volumes = tuple(_as_fraction(v) for v in self.volumes)
        object.__setattr__(self, "volumes", volumes)
        if self.d < 1:
            raise ParameterError(f"dimension must be positive, got {self.d}")
        if not volumes or any(v <= 0 for v in volumes):
            raise ParameterError("region volumes must be positive")
        if self.kind is RegionKind.ANNULUS:
            inner = tuple(_as_fraction(v) for v in self.inner_volumes) or (Fraction(0),) * len(volumes)
            if len(inner) != len(volumes) or any(v < 0 for v in inner):
                raise ParameterError("annuli need one nonnegative inner volume per region")
            object.__setattr__(self, "inner_volumes", inner)
        else:
            if self.inner_volumes and any(self.inner_volumes):
                raise ParameterError(f"{self.kind.value} regions have no inner boundary")
            object.__setattr__(self, "inner_volumes", (Fraction(0),) * len(volumes))
            if any(b < a for a, b in zip(volumes, volumes[1:])):
                raise ParameterError("ball volumes must be nondecreasing")

    @classmethod
    def balls(cls, d, volumes, symmetric=True):
        return cls(RegionKind.BALL, d, tuple(volumes), symmetric=symmetric)

    @classmethod
    def common_ball(cls, d, volume, k):
        return cls.balls(d, [volume] * k)

    @classmethod
    def star_scaled(cls, d, base_volume, scales):
        """Scalings t^(1/d) S of a ball S, with vol = t * vol(S) exactly."""
        scales = tuple(_as_fraction(t) for t in scales)
        if any(t <= 0 for t in scales):
            raise ParameterError("scaling parameters must be positive")
        base = _as_fraction(base_volume)
        return cls(RegionKind.STAR_SCALED, d, tuple(t * base for t in scales), scales=scales)

    @classmethod
    def annuli(cls, d, inner_volumes, outer_volumes):
        inner = tuple(_as_fraction(v) for v in inner_volumes)
        outer = tuple(_as_fraction(v) for v in outer_volumes)
        if any(b <= a for a, b in zip(inner, outer)):
            raise ParameterError("each outer volume must exceed its inner volume")
        return cls(RegionKind.ANNULUS, d, tuple(b - a for a, b in zip(inner, outer)), inner_volumes=inner)

    @classmethod
    def shells(cls, d, volume, fractions):
        """Consecutive disjoint annuli of volumes c_i * volume, starting at the origin."""
        fractions = [_as_fraction(c) for c in fractions]
        if any(c <= 0 for c in fractions) or sum(fractions) > 1:
            raise ParameterError("shell fractions must be positive with sum at most 1")
        volume = _as_fraction(volume)
        inner, outer, acc = [], [], Fraction(0)
        for c in fractions:
            inner.append(acc)
            acc += c * volume
            outer.append(acc)
        return cls.annuli(d, inner, outer)

    @property
    def k(self):
        return len(self.volumes)

    def outer_volume(self, i):
        return self.inner_volumes[i] + self.volumes[i]

    def outer_radius(self, i):
        return radius_for_volume(self.d, self.outer_volume(i))

    def inner_radius(self, i):
        inner = self.inner_volumes[i]
        return radius_for_volume(self.d, inner) if inner > 0 else 0.0

    def contains_origin(self, i):
        return self.inner_volumes[i] == 0

    def contains(self, i, norms):
        """Vectorized membership test on Euclidean norms."""
        norms = np.asarray(norms, dtype=float)
        inside = norms <= self.outer_radius(i)
        if self.inner_volumes[i] > 0:
            inside &= norms >= self.inner_radius(i)
        return inside

    def sample(self, i, rng, n):
        """n points uniform in region i: gaussian direction, radius with density r^(d-1)."""
        d = self.d
        directions = rng.standard_normal((n, d))
        directions /= np.linalg.norm(directions, axis=1)[:, None]
        r_in = self.inner_radius(i) ** d
        r_out = self.outer_radius(i) ** d
        radii = (r_in + rng.random(n) * (r_out - r_in)) ** (1.0 / d)
        return directions * radii[:, None]

    def restrict(self, indices):
        """Sub-family on the given factor indices (same kind and dimension)."""
        return RegionFamily(
            self.kind,
            self.d,
            tuple(self.volumes[i] for i in indices),
            inner_volumes=tuple(self.inner_volumes[i] for i in indices) if self.kind is RegionKind.ANNULUS else (),
            symmetric=self.symmetric,
            scales=tuple(self.scales[i] for i in indices) if self.scales else (),
        )

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "d": self.d,
            "volumes": [str(v) for v in self.volumes],
            "inner_volumes": [str(v) for v in self.inner_volumes],
            "symmetric": self.symmetric,
        }
