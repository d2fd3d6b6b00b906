"""Free-space optical channel model: turbulence, weather extinction, pointing.

The channel multiplies four independent gain factors per transmitted photon:

* scintillation drawn from a Gamma-Gamma fade distribution parameterised by
  the Rytov variance (plane wave),
* deterministic weather extinction (Kim model for clear air and fog,
  Carbonneau power law for rain, a linear coefficient for dry snow),
* a deterministic geometric capture factor from beam spreading,
* a random pointing factor from Gaussian angular jitter (Rayleigh radial
  offset through a Gaussian beam profile).

All factors are dimensionless; the product times the detector efficiency,
clamped to [0, 1], is the per-photon survival probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Extinction 1/km -> dB/km.
DB_PER_NEPER = 10.0 / math.log(10.0)

# Below this Rytov variance the fade distribution degenerates; treat the
# channel as turbulence-free instead of driving the Gamma shapes to infinity.
NO_FADING_RYTOV_FLOOR = 1e-6

# Dry snow extinction per unit precipitation rate.
SNOW_DB_PER_KM_PER_MMH = 3.0

WEATHER_KINDS = ("clear", "fog", "rain", "snow")


@dataclass(frozen=True)
class WeatherCondition:
    """Weather preset feeding the extinction model.

    Parameters
    ----------
    kind : str
        One of ``clear``, ``fog``, ``rain``, ``snow``.
    visibility_km : float
        Meteorological visibility, used by the Kim model (clear/fog).
    rain_rate_mmh : float
        Rain rate in mm/h for the Carbonneau power law.
    snow_rate_mmh : float
        Snowfall rate in mm/h for the linear dry-snow model.
    """

    kind: str
    visibility_km: float = 23.0
    rain_rate_mmh: float = 12.5
    snow_rate_mmh: float = 2.0

    def __post_init__(self):
        if self.kind not in WEATHER_KINDS:
            raise ValueError(f"unknown weather kind {self.kind!r}")
        if self.kind in ("clear", "fog") and self.visibility_km <= 0:
            raise ValueError("visibility must be positive")
        if self.rain_rate_mmh < 0 or self.snow_rate_mmh < 0:
            raise ValueError("precipitation rates must be non-negative")


def clear_weather() -> WeatherCondition:
    return WeatherCondition("clear", visibility_km=23.0)


def fog_weather(visibility_km: float = 8.0) -> WeatherCondition:
    return WeatherCondition("fog", visibility_km=visibility_km)


def rain_weather(rate_mmh: float = 12.5) -> WeatherCondition:
    return WeatherCondition("rain", rain_rate_mmh=rate_mmh)


def snow_weather(rate_mmh: float = 2.0) -> WeatherCondition:
    return WeatherCondition("snow", snow_rate_mmh=rate_mmh)


def default_weathers() -> list[WeatherCondition]:
    """The four sweep presets in sorted kind order."""
    return [clear_weather(), fog_weather(), rain_weather(), snow_weather()]


@dataclass(frozen=True)
class ChannelParams:
    """Static link-budget parameters of one optical path.

    Parameters
    ----------
    distance_m : float
        Slant path length in metres.
    wavelength_nm : float
        Carrier wavelength in nanometres.
    cn2 : float
        Refractive-index structure constant in m^(-2/3).
    beam_divergence_mrad : float
        Full divergence angle of the transmit beam, milliradians.
    rx_aperture_m : float
        Receive aperture diameter, metres.
    pointing_jitter_mrad : float
        Standard deviation of each angular jitter axis, milliradians.
    detector_efficiency : float
        Overall detection probability for a photon arriving on-aperture.
    """

    distance_m: float = 1000.0
    wavelength_nm: float = 1550.0
    cn2: float = 1e-14
    beam_divergence_mrad: float = 0.052
    rx_aperture_m: float = 0.1
    pointing_jitter_mrad: float = 0.084
    detector_efficiency: float = 0.7

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance must be positive")
        if self.wavelength_nm <= 0:
            raise ValueError("wavelength must be positive")
        if self.cn2 < 0:
            raise ValueError("cn2 must be non-negative")
        if self.beam_divergence_mrad <= 0:
            raise ValueError("beam divergence must be positive")
        if self.rx_aperture_m <= 0:
            raise ValueError("aperture must be positive")
        if self.pointing_jitter_mrad < 0:
            raise ValueError("jitter sigma must be non-negative")
        if not 0 < self.detector_efficiency <= 1:
            raise ValueError("detector efficiency must be in (0, 1]")


@dataclass(frozen=True)
class TurbulenceParams:
    """Gamma-Gamma fade parameters derived from the Rytov variance."""

    rytov_var: float
    alpha: float
    beta: float

    @property
    def no_fading(self) -> bool:
        return math.isinf(self.alpha)

    def intensity_variance(self) -> float:
        """Closed-form variance of the unit-mean irradiance.

        Var[I] = 1/alpha + 1/beta + 1/(alpha beta) for I = X * Y with
        X ~ Gamma(alpha, 1/alpha), Y ~ Gamma(beta, 1/beta).
        """
        if self.no_fading:
            return 0.0
        return 1.0 / self.alpha + 1.0 / self.beta + 1.0 / (self.alpha * self.beta)


@dataclass(frozen=True)
class ChannelGainSample:
    """One draw of the four gain factors. Fields are scalars or arrays."""

    turbulence_factor: np.ndarray | float
    atten_factor: float
    geometric_factor: float
    pointing_factor: np.ndarray | float

    @property
    def total_gain(self) -> np.ndarray | float:
        return (self.turbulence_factor * self.atten_factor
                * self.geometric_factor * self.pointing_factor)

    def survival_probability(self, detector_efficiency: float) -> np.ndarray | float:
        return np.minimum(1.0, self.total_gain * detector_efficiency)


def rytov_variance(params: ChannelParams) -> float:
    """Plane-wave Rytov variance sigma_R^2 = 1.23 Cn2 k^(7/6) L^(11/6).

    k is the optical wavenumber 2 pi / lambda with lambda in metres and L the
    path length in metres.
    """
    k = 2.0 * math.pi / (params.wavelength_nm * 1e-9)
    return 1.23 * params.cn2 * k ** (7.0 / 6.0) * params.distance_m ** (11.0 / 6.0)


def gamma_gamma_params(rytov_var: float) -> TurbulenceParams:
    """Effective large- and small-scale cell counts for the Gamma-Gamma fade.

    Plane-wave parameterisation:

        alpha = [exp(0.49 s2 / (1 + 1.11 s2^(6/5))^(7/6)) - 1]^-1
        beta  = [exp(0.51 s2 / (1 + 0.69 s2^(6/5))^(5/6)) - 1]^-1

    with s2 the Rytov variance (note sigma^(12/5) = (sigma^2)^(6/5)). Below
    the no-fading floor both shapes are reported as infinity and sampling
    returns the deterministic unit gain.
    """
    if rytov_var < 0:
        raise ValueError("rytov variance must be non-negative")
    if rytov_var < NO_FADING_RYTOV_FLOOR:
        return TurbulenceParams(rytov_var, math.inf, math.inf)
    s2 = rytov_var
    alpha = 1.0 / (math.exp(0.49 * s2 / (1.0 + 1.11 * s2 ** 1.2) ** (7.0 / 6.0)) - 1.0)
    beta = 1.0 / (math.exp(0.51 * s2 / (1.0 + 0.69 * s2 ** 1.2) ** (5.0 / 6.0)) - 1.0)
    return TurbulenceParams(rytov_var, alpha, beta)


def sample_turbulence(tp: TurbulenceParams, rng: np.random.Generator,
                      size: int | None = None) -> np.ndarray | float:
    """Draw unit-mean irradiance fades I = X * Y.

    X ~ Gamma(alpha, scale 1/alpha) models large-scale eddies and
    Y ~ Gamma(beta, scale 1/beta) small-scale ones, so E[I] = 1 regardless
    of turbulence strength.
    """
    if tp.no_fading:
        return 1.0 if size is None else np.ones(size)
    x = rng.gamma(tp.alpha, 1.0 / tp.alpha, size)
    y = rng.gamma(tp.beta, 1.0 / tp.beta, size)
    return x * y


def _kim_exponent(visibility_km: float) -> float:
    # Kim's piecewise wavelength exponent q(V).
    v = visibility_km
    if v > 50.0:
        return 1.6
    if v > 6.0:
        return 1.3
    if v > 1.0:
        return 0.16 * v + 0.34
    if v > 0.5:
        return v - 0.5
    return 0.0


def weather_attenuation_db_per_km(weather: WeatherCondition,
                                  wavelength_nm: float) -> float:
    """Specific extinction in dB/km for the given weather and wavelength.

    clear/fog use the Kim model gamma = (3.91/V) (lambda/550)^(-q(V)) in 1/km,
    converted to dB/km; rain uses Carbonneau 1.076 R^0.67 dB/km; snow uses a
    linear dry-snow coefficient. Dense fog at V = 0.5 km evaluates to
    33.96 dB/km independent of wavelength (q = 0).
    """
    if weather.kind in ("clear", "fog"):
        q = _kim_exponent(weather.visibility_km)
        gamma = (3.91 / weather.visibility_km) * (wavelength_nm / 550.0) ** (-q)
        return DB_PER_NEPER * gamma
    if weather.kind == "rain":
        return 1.076 * weather.rain_rate_mmh ** 0.67
    return SNOW_DB_PER_KM_PER_MMH * weather.snow_rate_mmh


def pointing_factor(params: ChannelParams, rng: np.random.Generator,
                    size: int | None = None) -> np.ndarray | float:
    """Random fractional gain from angular pointing jitter.

    The radial offset r is Rayleigh(sigma) (two independent Gaussian axes) and
    the received fraction follows the Gaussian beam profile
    exp(-2 r^2 / theta_b^2). The mean factor has the closed form
    1 / (1 + 4 (sigma/theta_b)^2), which is 0.2 at sigma = theta_b.
    """
    if params.pointing_jitter_mrad == 0.0:
        return 1.0 if size is None else np.ones(size)
    r = rng.rayleigh(params.pointing_jitter_mrad, size)
    theta = params.beam_divergence_mrad
    return np.exp(-2.0 * r ** 2 / theta ** 2)


def mean_pointing_factor(params: ChannelParams) -> float:
    """Closed-form expectation of :func:`pointing_factor`."""
    ratio = params.pointing_jitter_mrad / params.beam_divergence_mrad
    return 1.0 / (1.0 + 4.0 * ratio ** 2)


def geometric_factor(params: ChannelParams) -> float:
    """Aperture capture fraction min(1, (D / (L theta))^2) from beam spread."""
    theta_rad = params.beam_divergence_mrad * 1e-3
    ratio = params.rx_aperture_m / (params.distance_m * theta_rad)
    return min(1.0, ratio ** 2)


def atten_factor(params: ChannelParams, weather: WeatherCondition) -> float:
    """Beer-Lambert transmission 10^(-dB/km * km / 10)."""
    db_per_km = weather_attenuation_db_per_km(weather, params.wavelength_nm)
    return 10.0 ** (-db_per_km * (params.distance_m / 1000.0) / 10.0)


def sample_gain(params: ChannelParams, weather: WeatherCondition,
                rng: np.random.Generator,
                size: int | None = None) -> ChannelGainSample:
    """Draw the composite channel gain.

    Returns
    -------
    ChannelGainSample
        Random factors (turbulence, pointing) are scalars when ``size`` is
        None and arrays of that length otherwise; the deterministic factors
        are always scalars. ``total_gain`` is the exact product, unclamped;
        clamping happens only in ``survival_probability``.
    """
    tp = gamma_gamma_params(rytov_variance(params))
    turb = sample_turbulence(tp, rng, size)
    point = pointing_factor(params, rng, size)
    return ChannelGainSample(
        turbulence_factor=turb,
        atten_factor=atten_factor(params, weather),
        geometric_factor=geometric_factor(params),
        pointing_factor=point,
    )
