"""Periodic heat-conduction transfer matrices and internal areal heat capacity.

Conventions
-----------
* Side 1 is the internal surface, side 2 the external one.  Layers are listed
  from the inside out.
* A matrix maps the internal amplitudes onto the external ones::

      [theta_2, q_2]^T = Z @ [theta_1, q_1]^T

  so a construction is ``Z = Z_se @ Z_N @ ... @ Z_1 @ Z_si``.
* Pure resistances enter as ``[[1, -R], [0, 1]]`` (negative ``Z12``).  Only
  ``|Z12|`` reaches the areal heat capacity, so the sign is cosmetic there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_non_negative, check_positive
from .exceptions import EmptySequence, NonPositiveProperty, SingularZ12

__all__ = [
    "DAY",
    "Layer",
    "Construction",
    "TransferMatrix",
    "EnvelopeSummary",
    "layer_matrix",
    "resistance_matrix",
    "cascade",
    "areal_heat_capacity",
    "total_capacity",
    "summarize",
]

DAY = 86400.0
DEFAULT_RSI = 0.13
DEFAULT_RSE = 0.04


@dataclass(frozen=True)
class Layer:
    """Homogeneous slab: thickness [m], conductivity [W/(m K)],
    density [kg/m3], specific heat [J/(kg K)]."""

    thickness: float
    conductivity: float
    density: float
    specific_heat: float

    def __post_init__(self):
        for name in ("thickness", "conductivity", "density", "specific_heat"):
            object.__setattr__(
                self, name, check_positive(getattr(self, name), name, NonPositiveProperty)
            )

    @property
    def volumetric_heat_capacity(self):
        return self.density * self.specific_heat

    def penetration_depth(self, period=DAY):
        return math.sqrt(self.conductivity * period / (math.pi * self.volumetric_heat_capacity))


@dataclass(frozen=True)
class TransferMatrix:
    z11: complex
    z12: complex
    z21: complex
    z22: complex

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def from_array(cls, a):
        return cls(complex(a[0, 0]), complex(a[0, 1]), complex(a[1, 0]), complex(a[1, 1]))

    def as_array(self):
        return np.array([[self.z11, self.z12], [self.z21, self.z22]], dtype=complex)

    @property
    def det(self):
        return self.z11 * self.z22 - self.z12 * self.z21

    def __matmul__(self, other):
        return TransferMatrix.from_array(self.as_array() @ other.as_array())


@dataclass(frozen=True)
class Construction:
    """Layered envelope component with its exposed area [m2].

    ``r_si``/``r_se`` are the internal/external film resistances [m2 K/W];
    pass ``include_films=False`` to the matrix builder to leave them out.
    """

    layers: tuple
    area: float
    r_si: float = DEFAULT_RSI
    r_se: float = DEFAULT_RSE
    name: str = ""

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise EmptySequence("a construction needs at least one layer")
        layers = tuple(l if isinstance(l, Layer) else Layer(*l) for l in layers)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "area", check_positive(self.area, "area", NonPositiveProperty))
        object.__setattr__(self, "r_si", check_non_negative(self.r_si, "r_si", NonPositiveProperty))
        object.__setattr__(self, "r_se", check_non_negative(self.r_se, "r_se", NonPositiveProperty))

    def transfer_matrix(self, period=DAY, include_films=True):
        mats = [layer_matrix(l, period) for l in self.layers]
        if include_films:
            mats = [resistance_matrix(self.r_si)] + mats + [resistance_matrix(self.r_se)]
        return cascade(mats)

    def kappa(self, period=DAY, include_films=True):
        return areal_heat_capacity(self.transfer_matrix(period, include_films), period)

    @property
    def thickness(self):
        return sum(l.thickness for l in self.layers)

    @property
    def thermal_resistance(self):
        return self.r_si + self.r_se + sum(l.thickness / l.conductivity for l in self.layers)


def layer_matrix(layer, period=DAY):
    """Periodic conduction matrix of one homogeneous layer (unit determinant)."""
    period = check_positive(period, "period", NonPositiveProperty)
    delta = layer.penetration_depth(period)
    xi = layer.thickness / delta
    k = layer.conductivity
    ch, sh = math.cosh(xi), math.sinh(xi)
    c, s = math.cos(xi), math.sin(xi)
    z11 = complex(ch * c, sh * s)
    z12 = -delta / (2 * k) * complex(sh * c + ch * s, ch * s - sh * c)
    z21 = -k / delta * complex(sh * c - ch * s, sh * c + ch * s)
    return TransferMatrix(z11, z12, z21, z11)


def resistance_matrix(r):
    """Film or air-gap resistance without heat capacity."""
    r = check_non_negative(r, "resistance", NonPositiveProperty)
    return TransferMatrix(1 + 0j, complex(-r, 0.0), 0j, 1 + 0j)


def cascade(matrices):
    """Combine matrices ordered from the internal to the external side."""
    matrices = list(matrices)
    if not matrices:
        raise EmptySequence("cascade needs at least one matrix")
    out = matrices[0].as_array()
    for m in matrices[1:]:
        out = m.as_array() @ out
    return TransferMatrix.from_array(out)


def areal_heat_capacity(z, period=DAY):
    """Internal areal heat capacity in kJ/(m2 K)."""
    period = check_positive(period, "period", NonPositiveProperty)
    if abs(z.z12) < 1e-12:
        if abs(z.z11 - 1) < 1e-12:
            return 0.0
        raise SingularZ12("|Z12| is zero; the areal heat capacity is undefined")
    return period / (2 * math.pi) * abs((z.z11 - 1) / z.z12) / 1000.0


@dataclass(frozen=True)
class EnvelopeSummary:
    names: tuple
    kappas: tuple  # kJ/(m2 K)
    areas: tuple  # m2
    capacities: tuple  # kJ/K
    total: float  # kJ/K
    period: float = DAY

    def rows(self):
        return list(zip(self.names, self.kappas, self.areas, self.capacities))


def total_capacity(components, period=DAY):
    """Area-weighted sum of ``(construction, kappa)`` pairs, in kJ/K.

    ``construction`` may also be a bare area or a ``(name, area)`` pair.
    """
    names, kappas, areas, caps = [], [], [], []
    for i, (comp, kappa) in enumerate(components):
        if isinstance(comp, Construction):
            area, name = comp.area, comp.name or f"component-{i + 1}"
        elif isinstance(comp, tuple):
            name, area = str(comp[0]), check_positive(comp[1], "area", NonPositiveProperty)
        else:
            area, name = check_positive(comp, "area", NonPositiveProperty), f"component-{i + 1}"
        kappa = check_non_negative(kappa, "kappa", NonPositiveProperty)
        names.append(name)
        kappas.append(kappa)
        areas.append(area)
        caps.append(kappa * area)
    return EnvelopeSummary(tuple(names), tuple(kappas), tuple(areas), tuple(caps),
                           float(math.fsum(caps)), period)


def summarize(constructions, period=DAY, include_films=True):
    """kappa for every construction, then the total capacity."""
    pairs = [(c, c.kappa(period, include_films)) for c in constructions]
    return total_capacity(pairs, period)
