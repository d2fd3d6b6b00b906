"""Walk through the optical channel model piece by piece.

Prints the per-weather extinction coefficients, the turbulence fade
statistics at a few Rytov variances, and the end-to-end photon survival
probability as the link stretches from 1 to 5 km.
"""

import numpy as np

from skyshield.fso_channel import (ChannelParams, WeatherCondition,
                                   default_weathers, gamma_gamma_params,
                                   rytov_variance, sample_gain,
                                   weather_attenuation_db_per_km)

rng = np.random.default_rng(1)
params = ChannelParams()

print("extinction at 1550 nm")
for weather in default_weathers():
    db = weather_attenuation_db_per_km(weather, params.wavelength_nm)
    print(f"  {weather.kind:<6} {db:7.3f} dB/km")
dense = WeatherCondition("fog", visibility_km=0.5)
print(f"  dense fog (V=0.5 km) {weather_attenuation_db_per_km(dense, 1550.0):.1f} dB/km")
print()

print("turbulence strength vs distance (cn2 = 1e-14)")
for km in (1, 2, 5):
    p = ChannelParams(distance_m=km * 1000.0)
    var = rytov_variance(p)
    tp = gamma_gamma_params(var)
    fades = sample_gain(p, default_weathers()[0], rng,
                        size=50_000).turbulence_factor
    print(f"  {km} km  rytov {var:.3f}  alpha {tp.alpha:.2f} beta {tp.beta:.2f}"
          f"  fade mean {fades.mean():.3f} var {fades.var():.3f}")
print()

print("mean photon survival (detector efficiency folded in)")
header = "  km    " + "".join(f"{w.kind:>8}" for w in default_weathers())
print(header)
for km in (1, 2, 3, 4, 5):
    p = ChannelParams(distance_m=km * 1000.0)
    row = [f"  {km:<5}"]
    for weather in default_weathers():
        g = sample_gain(p, weather, rng, size=20_000)
        surv = g.survival_probability(p.detector_efficiency).mean()
        row.append(f"{surv:8.4f}")
    print("".join(row))
