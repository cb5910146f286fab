"""Reference values of E_{a,b}(z) by the power series in high precision.

Prints a C++ initializer list used by tests/unit/test_mittag_leffler.cpp.
Working precision is raised until the largest term is cancelled with at least
30 spare digits, so every printed value is exact to double precision.
"""
import mpmath as mp


def ml_series(a, b, z):
    a, b, z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
    x = abs(z)
    # digits lost to cancellation ~ log10(max term)
    reach = x ** (1 / a) if x > 0 else mp.mpf(0)
    lost = int(mp.log10(mp.e) * reach) + 5
    with mp.workdps(lost + 40):
        s = mp.mpf(0)
        k = 0
        while True:
            v = a * k + b
            term = z ** k * mp.rgamma(v)
            s += term
            if k > reach / a + 5 and term != 0 and abs(term) < mp.mpf(10) ** (-(lost + 35)):
                break
            k += 1
        return +s


CASES = []
for a in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.2, 1.5, 1.8, 1.95, 2.0):
    for b in (0.5, 1.0, 1.3, 1.5, 1.7, 2.2):
        for z in (-0.5, -2.0, -5.0, -10.0, -20.0, -35.0, -60.0, -100.0, -300.0,
                  -1000.0, 0.5, 3.0):
            reach = abs(z) ** (1 / a)
            if reach > 400:
                continue
            CASES.append((a, b, z))

if __name__ == "__main__":
    mp.mp.dps = 30
    for a, b, z in CASES:
        v = ml_series(a, b, z)
        print("    {%r, %r, %r, %s}," % (a, b, z, mp.nstr(v, 20, min_fixed=-1, max_fixed=-1)))
