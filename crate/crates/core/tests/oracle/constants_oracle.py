"""Independent 50-digit evaluation of the frozen constant examples.

Run with `python3 constants_oracle.py`; the printed values are pasted into
the acceptance test. Formulas are transcribed directly from their
definitions, without reference to the Rust code.
"""
from mpmath import mp, mpf, sqrt, exp, log, e, ceil

mp.dps = 50


def m1(p, mu, mup, c):
    lead = 2 * (2 * p - 1 + mup) ** p / (c * p)
    tail = mpf(1) if p == 1 else ((2 * p - 2) / ((2 * mu - c) * p)) ** (p - 1)
    return lead * tail


def m2(mu, mup, l1p, h):
    return (20 + 20 * l1p ** 2 * h + 2 * mup) / mu


def k1k2(l1, l1p, m11, m2v):
    k1 = 4 * (14 + 15 * l1 ** 2) * (l1 ** 2 * l1p + m11 * l1 ** 2 + m2v * l1 ** 3 + l1 ** 2)
    k2 = 4 * (10 + 11 * l1 ** 2) * l1 ** 3
    return k1, k2


def ergodicity(rho, l):
    first = sqrt(2 * rho * l / (1 - exp(-2 * l))) * exp(4 / rho)
    second = exp(2 * l + 2 / rho)
    return max(first, second), 2 / rho


def gaussian_chain(h):
    mu, mup, l1, l1p, l, rho, sigma = map(mpf, (1, 0, 1, 0, 1, 2, 0))
    m11 = m1(1, mu, mup, mu)
    m2v = m2(mu, mup, l1p, h)
    k1, k2 = k1k2(l1, l1p, m11, m2v)
    ck, eta = ergodicity(rho, l)
    lam = eta / (log(ck) + 1 + eta / l1)
    theta = (log(ck) + 1) / eta + 1 / l1
    c1 = exp(1 + 12 * l1 * theta) * sqrt(k1 + k2 * m2v + k2 * sigma)
    c2 = sqrt(2) * e * sqrt(m11 + m2v + 4 * sigma)
    return c1, c2, lam


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


show("m1(1,1,1,1)", m1(1, mpf(1), mpf(1), mpf(1)))
show("m1(1,2,0,1.5)", m1(1, mpf(2), mpf(0), mpf("1.5")))
show("m1(2,1,0,1)", m1(2, mpf(1), mpf(0), mpf(1)))
show("m1(3,2,0.5,1)", m1(3, mpf(2), mpf("0.5"), mpf(1)))
show("m2(1,0,0,0.04)", m2(mpf(1), 0, 0, mpf("0.04")))
show("m2(2,1,0,0.04)", m2(mpf(2), mpf(1), 0, mpf("0.04")))
show("m2(1,0,1,1)", m2(mpf(1), 0, mpf(1), mpf(1)))
k1, k2 = k1k2(mpf(1), 0, mpf(2), mpf(20))
show("k1(1,0,2,20)", k1)
show("k2(1,0,2,20)", k2)
k1, k2 = k1k2(mpf("1.7"), mpf("0.3"), mpf("2.5"), mpf("21"))
show("k1(1.7,0.3,2.5,21)", k1)
show("k2(1.7,0.3,2.5,21)", k2)
ck, eta = ergodicity(mpf(2), mpf(1))
show("cal_k(2,1)", ck)
show("eta(2,1)", eta)
ck, _ = ergodicity(mpf("0.5"), mpf("0.3"))
show("cal_k(0.5,0.3)", ck)

c1, c2, lam = gaussian_chain(mpf("0.04"))
d, h, n = 10, mpf("0.04"), 1000
disc = c1 * sqrt(d) * h
contr = c2 * sqrt(d) * exp(-lam * n * h)
show("main_bound.discretization", disc)
show("main_bound.contraction", contr)
show("main_bound.total", disc + contr)

show("guard rlmc gaussian", min(mpf(1), mpf(1), mpf(1), mpf(1) / 21))
show("guard prlmc double_well d=4", min(mpf(1), mpf(1) / 2, mpf(1), mpf(1) / 4 ** 2))

eps = mpf("0.1")
hm = eps / (2 * c1 * sqrt(d))
k = ceil((2 * c1 * sqrt(d) / eps) * log(2 * c2 * sqrt(d) / eps) / lam)
show("mixing.h", hm)
show("mixing.iterations", k)
