import numpy as np

# volume of the unit ball in m dimensions, V(r) = c_m r^m
unit_ball = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}

# natural-log units per dB for a power ratio
neper_per_db = np.log(10.0) / 10.0  # [Np dB^-1]

# largest ln(x) that still fits in a double
ln_float_max = np.log(np.finfo(float).max)  # ~709.78

# two-sided confidence level for every Monte-Carlo interval
confidence = 0.99
