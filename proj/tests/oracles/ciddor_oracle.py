"""Independent reference for the Ciddor (1996) refractive index of air.

Used only to freeze expected values into the C++ unit and acceptance tests.
Written directly from the published procedure, with mpmath at 30 digits so
floating-point ordering differences in the C++ code cannot leak in.
"""
import sys
from mpmath import mp, mpf, exp

mp.dps = 30

R_GAS = mpf("8.314510")


def compressibility(p, T, xw):
    t = T - mpf("273.15")
    a0, a1, a2 = mpf("1.58123e-6"), mpf("-2.9331e-8"), mpf("1.1043e-10")
    b0, b1 = mpf("5.707e-6"), mpf("-2.051e-8")
    c0, c1 = mpf("1.9898e-4"), mpf("-2.376e-6")
    d, e = mpf("1.83e-11"), mpf("-0.765e-8")
    pt = p / T
    return (1 - pt * (a0 + a1 * t + a2 * t * t + (b0 + b1 * t) * xw + (c0 + c1 * t) * xw * xw)
            + pt * pt * (d + e * xw * xw))


def ciddor(lam_um, t_c, p, rh, xc):
    lam_um, t_c, p, rh, xc = map(mpf, (lam_um, t_c, p, rh, xc))
    if p == 0:
        return mpf(1)
    T = t_c + mpf("273.15")
    s2 = 1 / (lam_um * lam_um)
    k0, k1, k2, k3 = mpf("238.0185"), mpf("5792105"), mpf("57.362"), mpf("167917")
    w0, w1, w2, w3 = mpf("295.235"), mpf("2.6422"), mpf("-0.032380"), mpf("0.004028")
    nas = (k1 / (k0 - s2) + k3 / (k2 - s2)) * mpf("1e-8")
    naxs = nas * (1 + mpf("0.534e-6") * (xc - 450))
    nws = mpf("1.022") * (w0 + w1 * s2 + w2 * s2 ** 2 + w3 * s2 ** 3) * mpf("1e-8")
    A, B, C, D = mpf("1.2378847e-5"), mpf("-1.9121316e-2"), mpf("33.93711047"), mpf("-6.3431645e3")
    svp = exp(A * T * T + B * T + C + D / T)
    f = mpf("1.00062") + mpf("3.14e-8") * p + mpf("5.6e-7") * t_c * t_c
    xw = f * rh * svp / p
    Ma = mpf("1e-3") * (mpf("28.9635") + mpf("12.011e-6") * (xc - 400))
    Mw = mpf("0.018015")
    Za = compressibility(mpf(101325), mpf("288.15"), 0)
    Zw = compressibility(mpf(1333), mpf("293.15"), 1)
    rho_axs = mpf(101325) * Ma / (Za * R_GAS * mpf("288.15"))
    rho_ws = mpf(1333) * Mw / (Zw * R_GAS * mpf("293.15"))
    Z = compressibility(p, T, xw)
    rho_a = p * Ma * (1 - xw) / (Z * R_GAS * T)
    rho_w = p * Mw * xw / (Z * R_GAS * T)
    return 1 + (rho_a / rho_axs) * naxs + (rho_w / rho_ws) * nws


if __name__ == "__main__":
    torr = mpf(101325) / 760
    lab = (24, 630 * torr, "0.30", 400)
    print("standard air 633 nm  n-1 =", mp.nstr(ciddor("0.633", 15, 101325, 0, 450) - 1, 15))
    print("NIST check 633 nm 20C 50%RH n =", mp.nstr(ciddor("0.633", 20, 101325, "0.5", 450), 15))
    print("lab 800 nm           n-1 =", mp.nstr(ciddor("0.8", *lab) - 1, 15))
    print("lab 750 nm           n-1 =", mp.nstr(ciddor("0.75", *lab) - 1, 15))
    print("lab 850 nm           n-1 =", mp.nstr(ciddor("0.85", *lab) - 1, 15))
    print("lab dn 750-850          =", mp.nstr(ciddor("0.75", *lab) - ciddor("0.85", *lab), 15))
    print("lab 980 nm           n-1 =", mp.nstr(ciddor("0.98", *lab) - 1, 15))
    for p in (50000, 80000, 110000):
        print("p", p, mp.nstr(ciddor("0.8", 20, p, 0, 400) - 1, 15))
