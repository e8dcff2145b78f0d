"""Reference values of the DOZZ constant, the reflection coefficient and
the FZZ one-point function, built from mpmath Gamma functions and the
defining integral of Υ.

Run: python3 structure_constants.py
"""
import mpmath as mp

from upsilon import ln_upsilon

mp.mp.dps = 30


def q_of(g):
    return g / 2 + 2 / g


def l(x):
    return mp.gamma(x) / mp.gamma(1 - x)


def upsilon(z, g):
    return mp.exp(ln_upsilon(z, g))


def ln_upsilon_near_zero(z, g):
    # for small z the integrand decays only like e^{-zt}
    Q = g / 2 + 2 / g
    v = Q / 2 - z

    def f(t):
        extra = 10 + 3 * max(0, int(-mp.log10(t))) if t < 1 else 10
        with mp.workdps(mp.mp.dps + extra):
            return (v * v * mp.exp(-t) - mp.sinh(v * t / 2) ** 2 / (mp.sinh(t * g / 4) * mp.sinh(t / g))) / t

    return mp.quad(f, [0, 0.25, 1] + [4 ** k for k in range(1, 12)] + [mp.inf], method="gauss-legendre")


def upsilon_prime_zero(g):
    # Υ(h)/h = Υ'(0) + O(h); Richardson on h, 2h, 4h, 8h
    h = mp.mpf("1e-3")
    f = [mp.exp(ln_upsilon_near_zero(k * h, g)) / (k * h) for k in (1, 2, 4, 8)]
    for order in (1, 2, 3):
        f = [((2 ** order) * f[i] - f[i + 1]) / (2 ** order - 1) for i in range(len(f) - 1)]
    return f[0]


def dozz(a1, a2, a3, g, mu):
    Q = q_of(g)
    s = a1 + a2 + a3
    base = mp.pi * mu * l(g * g / 4) * (g / 2) ** (2 - g * g / 2)
    num = upsilon_prime_zero(g) * upsilon(a1, g) * upsilon(a2, g) * upsilon(a3, g)
    den = upsilon(s / 2 - Q, g) * upsilon(s / 2 - a1, g) * upsilon(s / 2 - a2, g) * upsilon(s / 2 - a3, g)
    return mp.exp((2 * Q - s) / g * mp.log(base)) * num / den


def reflection(a, g, mu):
    Q = q_of(g)
    x = Q - a
    return -mp.exp(2 * x / g * mp.log(mp.pi * mu * l(g * g / 4))) * mp.gamma(-g * x / 2) / mp.gamma(g * x / 2) \
        * mp.gamma(-2 * x / g) / mp.gamma(2 * x / g)


def theta_of(g, mu, mu_b):
    k = mu_b / mp.sqrt(mu) * mp.sqrt(mp.sin(mp.pi * g * g / 4))
    return 2 / (mp.pi * g) * mp.acos(k)


def fzz(a, g, mu, mu_b):
    Q = q_of(g)
    th = theta_of(g, mu, mu_b)
    base = mp.pi * mu / mp.power(2, g * a) * l(g * g / 4)
    return 4 / g * mp.power(2, -a * a / 2) * mp.exp((Q - a) / g * mp.log(base)) \
        * mp.gamma(g * a / 2 - g * g / 4) * mp.gamma(2 * a / g - 4 / (g * g) - 1) * mp.cos((a - Q) * mp.pi * th)


def row(*xs):
    return "(" + ", ".join(xs) + "),"


if __name__ == "__main__":
    g1, g2 = mp.mpf(1), mp.sqrt(2)
    for g, a in [(g1, (mp.mpc(2.0, 0.3), mp.mpf(1.8), mp.mpf(1.9))), (g2, (mp.mpf(1.6), mp.mpf(1.7), mp.mpc(1.5, 0.5)))]:
        v = dozz(*a, g, 1)
        print("dozz", row(repr(float(g)), *(f"c({float(mp.re(x))!r}, {float(mp.im(x))!r})" for x in a),
                          mp.nstr(v.real, 20), mp.nstr(mp.im(v), 20)))
    g = mp.mpf("1.2")
    a = q_of(g) - mp.mpf("0.3") + mp.mpf("0.4") * 1j
    v = reflection(a, g, 1)
    print("reflection", mp.nstr(v.real, 20), mp.nstr(v.imag, 20))
    for mu_b in (mp.mpf("0.8"), mp.mpf("1.05")):
        a = q_of(g) + mp.mpf("0.7") * 1j
        v = fzz(a, g, 1, mu_b)
        print("fzz", float(mu_b), mp.nstr(v.real, 20), mp.nstr(v.imag, 20))
