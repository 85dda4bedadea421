"""Independent oracles for frozen expected values.

Every function here is implemented from scratch against numpy/scipy
primitives, with no imports from mutrans: oracle disagreement must mean
a defect in exactly one of the two code paths. Hand-derivable closed
forms carry their derivation in comments so they can be re-checked
without running anything.
"""

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lstsq, solve_banded
from scipy.special import gamma, k0


# ---------------------------------------------------------------------------
# half-line two-point boundary value problem, order 2


def ode_closed_form(x, sigma=2.0):
    """Exact solution of -u'' + sigma^2 u = e^{-x}, u(0) = 0, u(inf) = 0,
    for sigma = 2.

    Derivation: particular solution c e^{-x} needs (-1 + 4) c = 1, so
    c = 1/3; decaying homogeneous solutions are multiples of e^{-2x};
    u(0) = 0 forces the combination (e^{-x} - e^{-2x}) / 3. Check:
    -u'' = -(e^{-x} - 4 e^{-2x})/3, 4u = (4 e^{-x} - 4 e^{-2x})/3,
    sum = e^{-x}.
    """
    if sigma != 2.0:
        raise ValueError("closed form derived for sigma = 2 only")
    x = np.asarray(x, dtype=float)
    return (np.exp(-x) - np.exp(-2.0 * x)) / 3.0


def ode_bvp_oracle(sigma=2.0, span=16.0, m=65536):
    """Second-order finite-difference solve of -u'' + sigma^2 u = e^{-x}
    on [0, span], u(0) = u(span) = 0, Richardson-extrapolated across a
    grid doubling to kill the leading h^2 error term.

    Returns (x, u) on the fine grid. The far boundary condition commits
    an e^{-sigma*span} truncation error, negligible at span = 16.
    """

    def tridiag(mm):
        h = span / mm
        x = h * np.arange(mm + 1)
        ab = np.zeros((3, mm - 1))
        ab[0, 1:] = -1.0 / h ** 2
        ab[1, :] = 2.0 / h ** 2 + sigma ** 2
        ab[2, :-1] = -1.0 / h ** 2
        u = np.zeros(mm + 1)
        u[1:-1] = solve_banded((1, 1), ab, np.exp(-x[1:-1]))
        return x, u

    x1, u1 = tridiag(m // 2)
    x2, u2 = tridiag(m)
    return x2, (4.0 * u2 - np.interp(x2, x1, u1)) / 3.0


# ---------------------------------------------------------------------------
# half-line truncated operator with symbol (sigma^2 + xi^2)^{1/2}, dense


def dense_sqrt_oracle(sigma=2.0, span=12.0, m=1536):
    """Dense quadrature discretization of the half-line problem
    r+ (sigma^2 - d^2/dx^2)^{1/2} u = e^{-x}, u supported in x >= 0.

    Writes the operator as (sigma^2 - d^2/dx^2) G with G the convolution
    by k0(sigma |x|)/pi (the inverse square root's kernel: its transform
    is (sigma^2 + xi^2)^{-1/2}). G is assembled as a Toeplitz matrix of
    exact hat-function moments of the kernel (adaptive quadrature with
    the log singularity flagged as a breakpoint), composed with the
    interior three-point second difference, and solved in the least
    squares sense with a h*1e-12 diagonal stabilizer on the normal
    geometry. Endpoint values are pinned: u(0) = 0 (the solution has a
    sqrt boundary factor), u(span) = 0 (exponential decay).

    Returns (x, u) on the m+1 point grid over [0, span].
    """
    h = span / m
    x = h * np.arange(m + 1)

    def hat_moment(r):
        c = r * h

        def f(t):
            w = max(0.0, 1.0 - abs(t - c) / h)
            return 0.0 if t == 0.0 else k0(sigma * abs(t)) * w

        pts = [p for p in (c, 0.0) if c - h < p < c + h]
        val, _ = quad(f, c - h, c + h, points=pts, limit=200)
        return val / np.pi

    mom = np.array([hat_moment(r) for r in range(m + 1)])
    idx_all = np.arange(m + 1)
    g_mat = mom[np.abs(idx_all[:, None] - idx_all[None, :])]

    idx = np.arange(1, m)
    d2 = np.zeros((m - 1, m + 1))
    rows = np.arange(m - 1)
    d2[rows, idx - 1] = -1.0 / h ** 2
    d2[rows, idx] = 2.0 / h ** 2 + sigma ** 2
    d2[rows, idx + 1] = -1.0 / h ** 2

    t_mat = d2 @ g_mat[:, idx]
    t_mat[rows, rows] += h * 1e-12
    rhs = np.exp(-x[idx])
    u = np.zeros(m + 1)
    u[idx] = lstsq(t_mat, rhs)[0]
    return x, u


# ---------------------------------------------------------------------------
# trace-jet transition matrix, by truncated Taylor algebra


def taylor_phi(m_count, mu, sigma):
    """Transition matrix between weighted trace jets, computed on the
    Taylor algebra of x at 0+.

    A field with jet sum_k c_k x^{mu+k} e^{-sigma x} / Gamma(mu+k+1)
    re-expands, via e^{-sigma x} = sum (-sigma x)^j / j!, into plain
    powers x^{mu+l} with coefficient matrix T(mu): T[l, k] =
    (-sigma)^{l-k} binom(mu+l, l-k) applied to (c / Gamma(mu+.+1))
    ... assembled below directly from the binomial series. The map from
    damped-jet coefficients to undamped-jet coefficients is T(mu); the
    transition between two damped conventions is T(0)^{-1}-free:
    Phi = T0 @ inv(Tmu) maps the mu-damped jet to the 0-damped one's
    convention used by the package. Entries are exact rationals in
    sigma, so float assembly is exact for small m_count.
    """
    mu = complex(mu)

    def binom(a, k):
        out = 1.0 + 0.0j
        for i in range(k):
            out *= (a - i) / (i + 1)
        return out

    t0 = np.zeros((m_count, m_count), dtype=complex)
    tmu = np.zeros((m_count, m_count), dtype=complex)
    for l in range(m_count):
        for k in range(l + 1):
            t0[l, k] = (-sigma) ** (l - k) * binom(float(l), l - k)
            tmu[l, k] = (-sigma) ** (l - k) * binom(mu + l, l - k)
    return t0 @ np.linalg.inv(tmu)


# ---------------------------------------------------------------------------
# interval fractional Laplacian on the sphere-profile family


def getoor_constant(a):
    """(-d^2/dx^2)^a applied to (1 - x^2)_+^a is constant on (-1, 1);
    this is that constant: 4^a Gamma(a + 1) Gamma(a + 1/2) / sqrt(pi).
    """
    return 4.0 ** a * gamma(a + 1.0) * gamma(a + 0.5) / np.sqrt(np.pi)


def fraclap_norm_const(a):
    """Normalizer j0(a) = integral over (0, inf) of
    16 sin^4(t/2) / t^{1+2a} dt, finite for a in (0, 2).

    The fourth symmetric difference u(x-2y) - 4u(x-y) + 6u(x) - 4u(x+y)
    + u(x+2y) has Fourier weight 16 sin^4(y xi / 2), so dividing the
    y-integral by j0 makes the quadrature below an exact |xi|^{2a}
    multiplier in the band limit. Head by adaptive quadrature; the
    oscillatory tail via 16 sin^4(t/2) = 6 - 8 cos t + 2 cos 2t, the
    constant part in closed form, the cosines with weighted quadrature.
    """
    a = float(a)
    top = 200.0
    head, _ = quad(lambda t: 16.0 * np.sin(t / 2.0) ** 4 * t ** (-1.0 - 2.0 * a),
                   0.0, top, limit=400)
    tail_const = 6.0 * top ** (-2.0 * a) / (2.0 * a)
    c1, _ = quad(lambda t: t ** (-1.0 - 2.0 * a), top, np.inf,
                 weight="cos", wvar=1.0)
    c2, _ = quad(lambda t: t ** (-1.0 - 2.0 * a), top, np.inf,
                 weight="cos", wvar=2.0)
    return head + tail_const - 8.0 * c1 + 2.0 * c2


def getoor_quadrature(a, x):
    """Direct quadrature of (-d^2/dx^2)^a of (1 - t^2)_+^a at interior
    points x, one dimension, via the normalized fourth-difference form

        (1/j0) integral over (0, inf) of
        [6u(x) - 4u(x+y) - 4u(x-y) + u(x+2y) + u(x-2y)] y^{-1-2a} dy.

    The fourth difference is O(y^4) at small y, so the integrand is
    absolutely convergent for every a in (0, 2) with no Taylor
    subtraction; kink locations (where x +- y, x +- 2y cross the
    endpoints +-1) are passed as quadrature breakpoints.
    """
    a = float(a)
    j0 = fraclap_norm_const(a)

    def u(t):
        return max(0.0, 1.0 - t * t) ** a

    out = []
    for xv in np.atleast_1d(x):
        up = u(float(xv))

        def integrand(y):
            return (6.0 * up - 4.0 * u(xv + y) - 4.0 * u(xv - y)
                    + u(xv + 2.0 * y) + u(xv - 2.0 * y)) * y ** (-1.0 - 2.0 * a)

        top = 50.0
        pts = sorted({t / d for t in (1.0 - xv, 1.0 + xv)
                      for d in (1.0, 2.0) if 0.0 < t / d < top})
        head, _ = quad(integrand, 0.0, top, points=pts, limit=800)
        # beyond top every shifted sample is 0: exact constant tail
        tail = 6.0 * up * top ** (-2.0 * a) / (2.0 * a)
        out.append((head + tail) / j0)
    return np.array(out)


def interval_ode_closed_form(x, sigma):
    """Exact solution of -u'' + sigma^2 u = 1 on (-1, 1), u(+-1) = 0:
    u = (1 - cosh(sigma x)/cosh(sigma)) / sigma^2. Check: -u'' =
    cosh(sigma x)/cosh(sigma), sigma^2 u = 1 - cosh(sigma x)/cosh(sigma);
    endpoints vanish since cosh(+-sigma) = cosh(sigma).
    """
    x = np.asarray(x, dtype=float)
    return (1.0 - np.cosh(sigma * x) / np.cosh(sigma)) / sigma ** 2


# ---------------------------------------------------------------------------
# rational symbol factorization, by hand


def rational_q(xi):
    """(1 + xi^2) / (4 + xi^2): order-zero, elliptic, winding 0, -> 1."""
    xi = np.asarray(xi, dtype=float)
    return (1.0 + xi ** 2) / (4.0 + xi ** 2)


def rational_q_minus(xi):
    """Factor analytic in Im xi > 0 direction for the half it owns:
    zeros/poles of q are +-i and +-2i; the minus factor collects the
    ones in the upper half-plane, (xi - i)/(xi - 2i)... derivation:
    q = [(xi+i)(xi-i)] / [(xi+2i)(xi-2i)]; the factor holomorphic and
    nonvanishing for Im xi < 0 must carry roots with Im > 0:
    q_plus = (xi + i)/(xi + 2i); the complementary minus factor is
    (xi - i)/(xi - 2i). Both tend to 1 at infinity.
    """
    xi = np.asarray(xi, dtype=complex)
    return (xi - 1j) / (xi - 2j)


def rational_q_plus(xi):
    xi = np.asarray(xi, dtype=complex)
    return (xi + 1j) / (xi + 2j)


# ---------------------------------------------------------------------------
# transform of the one-sided damped power profile


def damped_power_profile(x, mu, sigma):
    """x^mu e^{-sigma x} / Gamma(mu + 1) on x > 0, zero on x < 0.

    Its Fourier transform (integral of e^{-i x xi} f) is
    (sigma + i xi)^{-mu - 1}: substitute s = (sigma + i xi) x and use
    the Gamma integral along the rotated ray (justified for
    Re(sigma + i xi) > 0, all real xi).
    """
    x = np.asarray(x, dtype=float)
    mu = complex(mu)
    out = np.zeros_like(x, dtype=complex)
    pos = x > 0
    out[pos] = x[pos] ** mu * np.exp(-sigma * x[pos]) / gamma(mu + 1.0)
    return out
