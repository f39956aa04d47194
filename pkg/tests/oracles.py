"""Independent reference computations used by the tests.

Everything here is deliberately naive (explicit loops, scalar math) so it
shares no code path with the package.
"""

import math


def naive_matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = [[0j] * p for _ in range(n)]
    for i in range(n):
        for j in range(p):
            s = 0j
            for k in range(m):
                s += complex(a[i][k]) * complex(b[k][j])
            out[i][j] = s
    return out


def naive_kron(a, b):
    ra, ca, rb, cb = len(a), len(a[0]), len(b), len(b[0])
    out = [[0j] * (ca * cb) for _ in range(ra * rb)]
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k][j * cb + l] = complex(a[i][j]) * complex(b[k][l])
    return out


def naive_partial_trace(m, dh, dk, over="K"):
    """Row index of ``H (x) K`` is ``h * dk + k``."""
    if over == "K":
        return [[sum(complex(m[i * dk + k][j * dk + k]) for k in range(dk)) for j in range(dh)] for i in range(dh)]
    return [[sum(complex(m[h * dk + i][h * dk + j]) for h in range(dh)) for j in range(dk)] for i in range(dk)]


def entropy_term(p, volume):
    """-p ln(p / volume) with 0 ln 0 = 0."""
    return 0.0 if p == 0 else -p * math.log(p / volume)


def shannon(ps):
    return sum(entropy_term(p, 1.0) for p in ps)


# Spot values by direct scalar evaluation
S_VN_075 = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))   # 0.5623351446188083
S_EFFECT_075 = -0.75 * math.log(0.75)                          # 0.21576155433883568
UPPER_075 = math.log(1 / 0.75)                                 # 0.2876820724517809
