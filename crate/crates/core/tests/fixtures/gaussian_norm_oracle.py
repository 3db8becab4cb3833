"""Continuum oracle for tests/fixtures/gaussian_norm.cfg.

f(x) = a_m exp(-x^2/2) with a_m = 1/m^2, m = 1..3, in L_2(R; l_2).
Block and difference norms come from Plancherel with
fhat(xi) = sqrt(2 pi) exp(-xi^2/2), independently of the Rust code.
Run: python3 gaussian_norm_oracle.py > gaussian_norm_expected.json
"""
import json
import math

from scipy.integrate import quad

A = math.sqrt(sum((1.0 / m**2) ** 2 for m in (1, 2, 3)))
S, R, M_ORDER, K_MAX = 1.0, 2.0, 2, 4


def h(s):
    return math.exp(-1.0 / ((s - 0.5) * (2.0 - s))) if 0.5 < s < 2.0 else 0.0


def psi(s):
    if h(s) == 0.0:
        return 0.0
    return h(s) / sum(h(s * 2.0**-j) for j in range(-60, 60))


def phi(k, t):
    if k >= 1:
        return psi(t * 2.0**-k)
    return 1.0 - sum(psi(t * 2.0**-j) for j in range(1, 60))


def fhat2(xi):
    return 2.0 * math.pi * math.exp(-xi * xi)


def block(k):
    lo, hi = (0.0, 2.0) if k == 0 else (2.0 ** (k - 1), 2.0 ** (k + 1))
    v, _ = quad(lambda x: phi(k, x) ** 2 * fhat2(x), lo, hi, epsabs=0, epsrel=1e-13, limit=400)
    return A * math.sqrt(2.0 * v / (2.0 * math.pi))


def diff_norm2(y):
    v, _ = quad(lambda x: (2.0 - 2.0 * math.cos(y * x)) ** M_ORDER * fhat2(x), 0.0, 40.0,
                epsabs=0, epsrel=1e-12, limit=400)
    return A * A * 2.0 * v / (2.0 * math.pi)


blocks = [block(k) for k in range(K_MAX + 1)]
fourier = math.sqrt(sum((2.0 ** (k * S) * b) ** R for k, b in enumerate(blocks)))
lq = A * math.sqrt(math.sqrt(math.pi))
axis, _ = quad(lambda y: y ** (-S * R - 1.0) * diff_norm2(y), 0.0, 1.0, epsabs=0, epsrel=1e-11, limit=400)
difference = lq + math.sqrt(axis)
print(json.dumps({
    "block_norms": blocks,
    "fourier": fourier,
    "lq_norm": lq,
    "difference": difference,
    "ratio": difference / fourier,
}, indent=2))
