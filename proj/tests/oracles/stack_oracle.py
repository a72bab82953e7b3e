"""Reflection of a lossless quarter-wave stack by recursive Fresnel summation.

Independent of the characteristic-matrix code: each interface is folded in
from the substrate outward with r = (r_ij + r' e^{-2i delta}) / (1 + r_ij r' e^{-2i delta}).
"""
import cmath
import math


def stack(nh, nl, pairs, lam0, ns, n0=1.0, cap=False):
    layers = []
    for _ in range(pairs):
        layers += [nh, nl]
    if cap:
        layers.append(nh)
    return n0, ns, [(n, lam0 / (4 * n)) for n in layers]


def reflect(n0, ns, layers, lam):
    idx = [n0] + [n for n, _ in layers] + [ns]
    r = (idx[-2] - idx[-1]) / (idx[-2] + idx[-1])
    for j in range(len(layers) - 1, -1, -1):
        n, d = layers[j]
        delta = 2 * math.pi * n * d / lam
        rij = (idx[j] - idx[j + 1]) / (idx[j] + idx[j + 1])
        ph = cmath.exp(-2j * delta)
        r = (rij + r * ph) / (1 + rij * r * ph)
    return r


if __name__ == "__main__":
    design = stack(2.3, 1.45, 5, 910e-9, 1.52, 1.0, True)
    for lam in (800e-9, 910e-9, 1000e-9, 700e-9):
        r = reflect(*design, lam)
        print(f"{lam*1e9:.0f} nm  R = {abs(r)**2:.15g}  phase = {cmath.phase(r):.15g}")
    print("closed-form bandwidth m=20 800nm R=0.992 dn=2.7e-7:",
          repr(20 * 800e-9 ** 2 * 1e9 * math.sqrt((0.992 - 1) ** 2 / 0.992) / (math.pi * 299792458 * 2.7e-7)))
