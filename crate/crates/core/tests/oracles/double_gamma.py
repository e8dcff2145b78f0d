"""High-precision reference values of ln Γ_b(x) from the defining integral.

Direct mpmath quadrature of the integral representation on the real t axis,
valid for 0 < Re x < Q. Run: python3 double_gamma.py
"""
import mpmath as mp

mp.mp.dps = 30


def ln_gamma_b(x, gamma):
    a = mp.mpf(gamma) / 2
    b = 2 / mp.mpf(gamma)
    Q = a + b
    u = Q / 2 - x

    def f(t):
        extra = 10 + 3 * max(0, int(-mp.log10(t))) if t < 1 else 10
        with mp.workdps(mp.mp.dps + extra):
            return g(t)

    def g(t):
        return (mp.exp(-Q * t / 2) * mp.expm1(u * t) / (mp.expm1(-a * t) * mp.expm1(-b * t))
                - u * u / 2 * mp.exp(-t) - u / t) / t

    return mp.quad(f, [0, 0.25, 1, 4, 16, 64, mp.inf], method="gauss-legendre")


if __name__ == "__main__":
    cases = [
        (2 ** 0.5, mp.mpc(1.3, 0.4)),
        (1.0, mp.mpc(1.0, 0.0)),
        (1.0, mp.mpc(0.8, 0.6)),
        (1.0, mp.mpc(1.7, -2.5)),
        (2 ** 0.5, mp.mpc(1.2, 0.0)),
        (2 ** 0.5, mp.mpc(0.9, 3.0)),
        (0.6, mp.mpc(1.9, 0.4)),
        (1.8, mp.mpc(1.0, 1.5)),
    ]
    for g, x in cases:
        v = ln_gamma_b(x, g)
        print(f"({g!r}, {float(x.real)!r}, {float(x.imag)!r}, {mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)}),")
