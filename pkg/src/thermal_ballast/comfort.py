"""Fanger PMV/PPD thermal comfort indices (ISO 7730 heat-balance method)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import NoConvergence

__all__ = [
    "MET_W_PER_M2",
    "CLO_M2K_PER_W",
    "COMFORT_BOUNDS",
    "ComfortInput",
    "ComfortResult",
    "pmv",
    "ppd",
    "classify",
    "clothing_surface_temperature",
]

MET_W_PER_M2 = 58.15
CLO_M2K_PER_W = 0.155
COMFORT_BOUNDS = {"existing": 0.7, "new": 0.5}


@dataclass(frozen=True)
class ComfortInput:
    """Temperatures in °C, air speed in m/s, RH in %, activity in met,
    insulation in clo.  Mean radiant temperature defaults to air temperature.

    ``air_speed`` is the room air speed; the body's own movement is added
    for activities above 1 met (``v + 0.3 (met - 1)``) unless
    ``relative_speed`` is set, in which case it is used as given.
    """

    air_temp: float
    mean_radiant_temp: float = None
    air_speed: float = 0.1
    relative_humidity: float = 50.0
    metabolic_rate: float = 1.2
    clothing: float = 1.0
    external_work: float = 0.0  # met
    relative_speed: bool = False

    def __post_init__(self):
        if self.mean_radiant_temp is None:
            object.__setattr__(self, "mean_radiant_temp", self.air_temp)
        for name in ("air_temp", "mean_radiant_temp", "air_speed", "relative_humidity",
                     "metabolic_rate", "clothing", "external_work"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.air_speed < 0:
            raise ValueError("air_speed must be >= 0")
        if not 0 <= self.relative_humidity <= 100:
            raise ValueError("relative_humidity must lie in [0, 100]")
        if self.metabolic_rate <= 0:
            raise ValueError("metabolic_rate must be > 0")
        if self.clothing < 0:
            raise ValueError("clothing must be >= 0")

    @property
    def relative_air_speed(self):
        if self.relative_speed or self.metabolic_rate <= 1.0:
            return self.air_speed
        return self.air_speed + 0.3 * (self.metabolic_rate - 1.0)

    def shifted(self, delta):
        """Same conditions with air and radiant temperature moved by ``delta`` K."""
        from dataclasses import replace

        return replace(self, air_temp=self.air_temp + delta,
                       mean_radiant_temp=self.mean_radiant_temp + delta)


@dataclass(frozen=True)
class ComfortResult:
    pmv: float
    ppd: float  # %
    t_clothing: float = float("nan")  # °C
    iterations: int = 0

    def to_dict(self):
        return {"pmv": self.pmv, "ppd": self.ppd}


def ppd(pmv_value):
    """Predicted percentage dissatisfied from PMV."""
    return 100.0 - 95.0 * math.exp(-0.03353 * pmv_value ** 4 - 0.2179 * pmv_value ** 2)


def _vapour_pressure(ta, rh):
    """Water vapour partial pressure in Pa."""
    return rh * 10.0 * math.exp(16.6536 - 4030.183 / (ta + 235.0))


def _clothing_factor(icl):
    return 1.0 + 1.29 * icl if icl <= 0.078 else 1.05 + 0.645 * icl


def clothing_surface_temperature(inp, max_iter=200, tol=1e-5):
    """Solve the clothing heat balance for t_cl (°C) by damped fixed point.

    Returns ``(t_cl, h_c, iterations)``; raises :class:`NoConvergence`
    if successive iterates still differ by more than ``tol`` K.
    """
    ta, tr = inp.air_temp, inp.mean_radiant_temp
    icl = CLO_M2K_PER_W * inp.clothing
    m = inp.metabolic_rate * MET_W_PER_M2
    mw = m - inp.external_work * MET_W_PER_M2
    fcl = _clothing_factor(icl)
    hc_forced = 12.1 * math.sqrt(inp.relative_air_speed)
    taa, tra = ta + 273.0, tr + 273.0
    p1 = icl * fcl
    p2 = 3.96 * p1
    p3 = 100.0 * p1
    p4 = p1 * taa
    p5 = 308.7 - 0.028 * mw + p2 * (tra / 100.0) ** 4
    # temperatures scaled by 1/100 as in the reference algorithm
    xn = (taa + (35.5 - ta) / (3.5 * icl + 0.1)) / 100.0
    xf = xn
    for it in range(1, max_iter + 1):
        xf = (xf + xn) / 2.0 if it > 1 else xn
        hc = max(hc_forced, 2.38 * abs(100.0 * xf - taa) ** 0.25)
        xn = (p5 + p4 * hc - p2 * xf ** 4) / (100.0 + p3 * hc)
        if 100.0 * abs(xn - xf) < tol:
            return 100.0 * xn - 273.0, hc, it
    raise NoConvergence(f"clothing temperature did not settle within {max_iter} iterations")


def pmv(inp, max_iter=200, tol=1e-5):
    """Predicted mean vote and PPD for one set of conditions."""
    ta, tr = inp.air_temp, inp.mean_radiant_temp
    icl = CLO_M2K_PER_W * inp.clothing
    m = inp.metabolic_rate * MET_W_PER_M2
    mw = m - inp.external_work * MET_W_PER_M2
    fcl = _clothing_factor(icl)
    pa = _vapour_pressure(ta, inp.relative_humidity)
    tcl, hc, its = clothing_surface_temperature(inp, max_iter, tol)

    skin_diffusion = 3.05e-3 * (5733.0 - 6.99 * mw - pa)
    sweating = 0.42 * (mw - MET_W_PER_M2) if mw > MET_W_PER_M2 else 0.0
    latent_resp = 1.7e-5 * m * (5867.0 - pa)
    dry_resp = 0.0014 * m * (34.0 - ta)
    radiation = 3.96 * fcl * (((tcl + 273.0) / 100.0) ** 4 - ((tr + 273.0) / 100.0) ** 4)
    convection = fcl * hc * (tcl - ta)
    sensitivity = 0.303 * math.exp(-0.036 * m) + 0.028
    value = sensitivity * (mw - skin_diffusion - sweating - latent_resp - dry_resp
                           - radiation - convection)
    return ComfortResult(value, ppd(value), tcl, its)


def classify(result, building_class="existing"):
    """True when |PMV| is strictly inside the class bound."""
    try:
        bound = COMFORT_BOUNDS[building_class]
    except KeyError:
        raise ValueError(f"building_class must be one of {sorted(COMFORT_BOUNDS)}") from None
    value = result.pmv if isinstance(result, ComfortResult) else float(result)
    return abs(value) < bound
