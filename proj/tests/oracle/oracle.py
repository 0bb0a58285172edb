"""Reference values frozen into the unit tests. Computed with scipy only,
independently of the C++ sources. Run: python3 tests/oracle/oracle.py"""
import numpy as np
from scipy.integrate import quad
from scipy.linalg import eig, expm
from scipy.stats import norm

inf = np.inf


def fmt(v, digits=12):
    return f"{v:.{digits}g}"


def killed_bm_density(c, x, y, t):
    # BM with drift -c killed at 0: Girsanov applied to the image-method kernel.
    g = lambda z: norm.pdf(z, 0, np.sqrt(t))
    return np.exp(-c * (y - x) - c * c * t / 2) * (g(y - x) - g(y + x))


def killed_ou_density(lam, x, y, t):
    # dY = -lam Y dt + dB killed at 0: OU kernel minus its mirror image.
    m = x * np.exp(-lam * t)
    sd = np.sqrt((1 - np.exp(-2 * lam * t)) / (2 * lam))
    return norm.pdf(y, m, sd) - norm.pdf(y, -m, sd)


def killed_ou_EM2(lam, x, s):
    # h(y) proportional to y
    m2 = quad(lambda y: y * y * killed_ou_density(lam, x, y, s), 0, inf, epsabs=0, epsrel=1e-12)[0]
    return np.exp(2 * lam * s) * m2 / (x * x)


def killed_bm_EM2(c, x, s):
    # h(y) proportional to y e^{cy}; h^2 times the kernel, assembled in log space
    def f(y):
        log_g = -c * (y - x) - c * c * s / 2 + 2 * (np.log(y) + c * y) - 0.5 * np.log(2 * np.pi * s)
        return np.exp(log_g - (y - x) ** 2 / (2 * s)) * -np.expm1(-2 * x * y / s)

    centre = x + c * s
    hi = centre + 40 * np.sqrt(s) + 40
    m2 = quad(f, 0, hi, points=[centre], epsabs=0, epsrel=1e-11, limit=500)[0]
    return np.exp(c * c * s) * m2 / (x * np.exp(c * x)) ** 2


def integral(f, lo, hi):
    edges = [lo] + [p for p in (1, 5, 20, 100) if lo < p < hi] + [hi]
    return sum(quad(f, a, b, epsabs=0, epsrel=1e-10, limit=500)[0] for a, b in zip(edges, edges[1:]))


def phi(em2, split, a, upper=inf):
    return split * integral(lambda s: em2(s) * np.exp(-a * s), 0, upper)


def second_moment_D(em2, split, a, t):
    return np.exp(-a * t) * em2(t) + split * integral(lambda s: em2(s) * np.exp(-a * s), 0, t)


print("killed-drift-bm density c=1 x=y=1 t=1:", fmt(killed_bm_density(1, 1, 1, 1)))
print("killed-ou density lam=1 x=1 y=0.5 t=0.7:", fmt(killed_ou_density(1, 1, 0.5, 0.7)))
print("killed-ou survival lam=1 x=1 t=1:",
      fmt(quad(lambda y: killed_ou_density(1, 1, y, 1), 0, inf, epsabs=0, epsrel=1e-12)[0]))
print("killed-drift-bm survival c=1 x=1 t=2:",
      fmt(quad(lambda y: killed_bm_density(1, 1, y, 2), 0, inf, epsabs=0, epsrel=1e-12)[0]))
print("killed-ou P_1(X_1 in [0.5,1.5)):",
      fmt(quad(lambda y: killed_ou_density(1, 1, y, 1), 0.5, 1.5, epsabs=0, epsrel=1e-12)[0]))

# killed OU lambda = 1, binary law r = 2: a = 2, (m2 - m1) r = 4
em2 = lambda s: killed_ou_EM2(1, 1, s) if s > 0 else 1.0
print("killed-ou E M_2^2:", fmt(em2(2)))
print("killed-ou phi:", fmt(phi(em2, 4, 2), 10))
print("killed-ou E D_6^2:", fmt(second_moment_D(em2, 4, 2, 6), 10))

# killed drifted BM c = 1, binary law, r = k / 2: a = k / 2, (m2 - m1) r = k
em2b = lambda s: killed_bm_EM2(1, 1, s) if s > 0 else 1.0
print("killed-drift-bm E M_2^2:", fmt(em2b(2)))
for k in (2.5, 3.0):
    print(f"killed-drift-bm k={k} phi (to 400):", fmt(phi(em2b, k, k / 2, upper=400), 10))
    print(f"killed-drift-bm k={k} E D_2^2:", fmt(second_moment_D(em2b, k, k / 2, 2), 10))
    print(f"killed-drift-bm k={k} E D_6^2:", fmt(second_moment_D(em2b, k, k / 2, 6), 10))

# default 5-state chain
Q = np.zeros((5, 5))
for i, j, r in [(0, 1, 1.0), (1, 0, .5), (1, 2, 1.0), (2, 1, .7), (2, 3, .6), (3, 2, 1.2), (3, 4, .4), (4, 3, .9),
                (4, 0, .3)]:
    Q[i, j] = r
np.fill_diagonal(Q, -Q.sum(axis=1))
w, vl = eig(Q.T)
nu = np.real(vl[:, np.argmin(np.abs(w))])
nu /= nu.sum()
print("ctmc stationary:", [fmt(v) for v in nu])
P = expm(Q * 1.0)
print("ctmc P_1(X_1 in [2,4)):", fmt(P[0, 1] + P[0, 2]))

# Galton-Watson motion rho(-1) = .6, rho(1) = .4, truncated at N
N = 400
G = np.zeros((N, N))
for n in range(1, N + 1):
    i = n - 1
    if n > 1:
        G[i, i - 1] = 0.6 * n
    if n < N:
        G[i, i + 1] = 0.4 * n
    G[i, i] = -n
w, vl = eig(G.T)
k = np.argmax(np.real(w))
y = np.abs(np.real(vl[:, k]))
y /= y.sum()
print("gw decay rate:", fmt(-np.real(w[k])), "yaglom(1..3):", [fmt(v) for v in y[:3]],
      "mean:", fmt((np.arange(1, N + 1) * y).sum()))
P = expm(G * 1.0)
print("gw P_2(X_1 = 1):", fmt(P[1, 0]), " P_2(X_1 in [2,4)):", fmt(P[1, 1] + P[1, 2]))

# transient OU lambda = .5, sigma2 = 1 from 0: X_1 ~ N(0, e - 1)
print("transient-ou P_0(X_1 in [0,1)):", fmt(norm.cdf(1, 0, np.sqrt(np.e - 1)) - 0.5))
