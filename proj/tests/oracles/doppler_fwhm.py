"""Frozen Doppler-width oracle used by the line-shape tests and the acceptance binary.

Evaluates the thermal Doppler FWHM two ways (closed form, and the half-maximum
of a brute-force velocity histogram) and prints the closed-form value.
"""
import math
import random

KB = 1.380649e-23
C = 299792458.0
T = 312.65
M87 = 1.443160648e-25
NU0 = 384.230e12

closed = math.sqrt(8 * KB * T * math.log(2) / (M87 * C * C)) * NU0

# Brute force: sample line-of-sight velocities, histogram the Doppler shifts.
rng = random.Random(1)
sigma_v = math.sqrt(KB * T / M87)
shifts = sorted(NU0 * rng.gauss(0.0, sigma_v) / C for _ in range(400000))
bins = 400
lo, hi = shifts[0], shifts[-1]
width = (hi - lo) / bins
counts = [0] * bins
for s in shifts:
    counts[min(int((s - lo) / width), bins - 1)] += 1
peak = max(counts)
above = [i for i, c in enumerate(counts) if c >= peak / 2]
brute = (above[-1] - above[0] + 1) * width

print(f"closed form: {closed!r} Hz")
print(f"brute force: {brute:.4e} Hz (relative difference {abs(brute / closed - 1):.1%})")
