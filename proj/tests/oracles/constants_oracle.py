"""Independent high-precision oracle for the frozen constants used in the C++ tests.

A_j is found by root-finding x*cos(x) - sin(x) = 0 on (pi*j, pi*(j+1)),
which is a different route from the grid + golden-section search in the library.
"""
from mpmath import mp, mpf, pi, sin, cos, log, sqrt, findroot, ceil, floor

mp.dps = 40


def a_sup(j):
    lo, hi = pi * j, pi * (j + 1)
    f = lambda x: x * cos(x) - sin(x)
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    x = (lo + hi) / 2
    return abs(sin(x)) / x


def u_constants(n, g):
    u1 = sum(a_sup((2 * j + 1) * g) for j in range(0, (n - 2 * g - 1) // (4 * g) + 1))
    u2 = sum(a_sup(2 * j * g - 1) for j in range(1, (n - 1) // (4 * g) + 1))
    return u1, u2


def eps_bar(n, sigma, H):
    return 2 * sigma * H / (1 - pi / 24) * sqrt(log(n) / n)


def coeffs(n, g, H):
    u1, u2 = u_constants(n, g)
    r = pi * u1 / (1 - pi * u2)
    sc = (2 * r + 2) * eps_bar(n, 1, H)
    bc = max(8 * pi / 3 * u2, r * max(pi * u1, pi * u2 + 1) + pi * u2)
    return sc, bc


def failure(n, K, H):
    H2 = H * H
    return 48 * K / n ** (H2 - 1) + 200 * K / n ** (mpf('0.867') * H2 - 1) + 200 * K / n ** (mpf('0.694') * H2 - 1)


if __name__ == "__main__":
    for j in (1, 2, 8, 15, 24):
        print("A_%d = %s" % (j, mp.nstr(a_sup(j), 15)))
    for n, g in ((50, 8), (100, 10), (200, 15), (500, 23)):
        H = sqrt(1 + log(n))
        u1, u2 = u_constants(n, g)
        sc, bc = coeffs(n, g, H)
        print(n, g, mp.nstr(u1, 10), mp.nstr(u2, 10), mp.nstr(sc, 10), mp.nstr(bc, 10), mp.nstr(failure(n, 5, H), 10))
    H50 = sqrt(1 + log(50))
    print("failure K=1 n=50", mp.nstr(failure(50, 1, H50), 10))
    print("eps_bar(50,0.2,2.2163) =", mp.nstr(eps_bar(50, mpf('0.2'), mpf('2.2163')), 12))
    print("eps_bar(50,0.2,H50) =", mp.nstr(eps_bar(50, mpf('0.2'), H50), 12))
    u1, u2 = u_constants(50, 8)
    e = eps_bar(50, mpf('0.2'), H50)
    print("tau(sup=3) =", mp.nstr(e + pi * u1 / (1 - pi * u2) * (e + 3), 12))
    print("width =", mp.nstr(sqrt(mpf(4) / 12 * log(8 * 8 * 12 / mpf('0.0008'))), 12))
    print("n_1 =", ceil(2 ** 4 * log(2 * 10000 * 1) / 4) * 4)
    print("recommended 10000/4:", floor(sqrt(mpf(10000) / 4)), "H", mp.nstr(sqrt(1 + log(50)), 10))


def worked_example_dft(n, v):
    """|(1/n) sum_t mu_t exp(-2 pi i v t)| for the noise-free worked example."""
    from mpmath import mpc, exp, fabs
    acc = mpc(0)
    for t in range(1, n + 1):
        mu = 3 + 3 * sin(pi * t / 2) + 3 * cos(pi * t)
        acc += mu * exp(-2j * pi * v * t)
    return fabs(acc / n)


def worked_example_report(n=50):
    vs = [mpf(0), mpf(1) / 4, mpf(1) / 2, mpf(1) / 3]
    for v in vs:
        print("worked |y(%s)| = %s" % (mp.nstr(v, 6), mp.nstr(worked_example_dft(n, v), 15)))
    # dense scan of the sup over [0, 1/2]
    best = max(worked_example_dft(n, mpf(i) / (2 * 2400)) for i in range(0, 2401))
    H = sqrt(1 + log(n))
    u1, u2 = u_constants(n, 8)
    e = eps_bar(n, mpf('0.2'), H)
    print("worked sup (dense) =", mp.nstr(best, 12))
    print("worked tau (dense sup) =", mp.nstr(e + pi * u1 / (1 - pi * u2) * (e + best), 12))


if __name__ == "__main__":
    mp.dps = 20
    worked_example_report()
