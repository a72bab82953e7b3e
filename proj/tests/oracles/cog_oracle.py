"""Centroid shift of a Gaussian comb line through one Airy resonance.

Brute-force quadrature, independent of the C++ integrator. Prints the slope
d(shift)/d(delta) near delta = 0 for a line ten cavity widths wide.
"""
import math
from scipy.integrate import quad

R, FSR = 0.99, 10e9


def airy(x):
    return (1 - R) ** 2 / ((1 - R) ** 2 + 4 * R * math.sin(math.pi * x / FSR) ** 2)


FWHM = 2 * FSR / math.pi * math.asin((1 - R) / (2 * math.sqrt(R)))


def shift(lw, delta):
    s = lw / (2 * math.sqrt(2 * math.log(2)))
    g = lambda u: math.exp(-0.5 * (u / s) ** 2)  # u: detuning from the line centre
    lo, hi = -12 * s, 12 * s
    pts = [delta + k * FWHM for k in range(-3, 4) if lo < delta + k * FWHM < hi]
    num = quad(lambda u: u * g(u) * airy(u - delta), lo, hi, points=pts, limit=2000, epsabs=0, epsrel=1e-11)[0]
    den = quad(lambda u: g(u) * airy(u - delta), lo, hi, points=pts, limit=2000, epsabs=0, epsrel=1e-11)[0]
    return num / den


if __name__ == "__main__":
    for mult in (10, 20, 40):
        lw = mult * FWHM
        h = 0.05 * FWHM
        print(f"linewidth {mult:2d} x FWHM  slope {(shift(lw, h) - shift(lw, -h)) / (2 * h):.4f}")
