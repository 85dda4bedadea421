"""Half-line model problems for homogeneous elliptic symbols.

The solve pipeline follows the order-reduction factorization of the
symbol: with m the symbol order and mu0 its factorization index,

    p(sigma, xi) = (sigma - i xi)^{m - mu0} q(xi) (sigma + i xi)^{mu0},

where q is order-zero, elliptic, and tends to 1 at both infinities. The
truncated solution operator is then the composition

    u = OP((s+ix)^{-mu0}) e+ r+ [1/q factors] e+ r+ OP((s-ix)^{mu0-m}) f,

applied on a periodic grid. Every restriction resolves the x = 0 node by
the midpoint rule applied to the true one-sided limits: a stage of
strictly negative order is smoothing, so its image is continuous at 0
and the restricted node is half the band value; a stage whose symbol
tends to 1 at infinity has a unit delta part that carries the input's
jump through, adding half the input's node value; a plus-side stage
preserves the support side, so its image's boundary node is already the
correct midpoint and must be kept, not re-halved. Getting any of these
wrong plants an O(1) delta at one node whose image under the next stage
is a smooth O(h) error over the whole half-line.

Residual policy. The solution has an x^{mu0}-type boundary singularity,
which no band-limited grid can represent near x = 0: the raw residual
over the whole half-line is dominated by the boundary node's aliasing
spike and does not converge. The verdict-quality measurement is the L2
residual over a fixed physical window well inside the domain (default
[0.25, L/2]), relative to ||f||_2 over x > 0; it halves under grid
doubling. The raw number is still reported as a diagnostic.

Nonhomogeneous (boundary-datum) problems split off the singular field
z = x^{mu0-1} e^{-sigma x} phi / Gamma(mu0) analytically. The forcing
correction r+ P z never touches the singular samples: its transform is
phi (q - 1) (sigma - i xi)^{m - mu0} plus a term supported in x <= 0, so
it is evaluated as a band sum and subtracted from f. In particular for
q == 1 the correction vanishes identically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

from mutrans.errors import DomainError, GridError
from mutrans.fourierops import GridFunction, MultiplierSpec, apply_multiplier, \
    impulse_response, minus_power, plus_power
from mutrans.muspace import poisson_apply, trace_gamma
from mutrans.symcore import BoundarySymbol, factorization_index
from mutrans.wienerhopf import CompactifiedGrid, WienerHopfFactors, factorize, \
    invert_truncated, normalize_symbol

_Q_TRIVIAL_TOL = 1e-12


@dataclass
class ModelProblem:
    """A half-line problem r+ p(sigma, D) u = f, u supported in x >= 0.

    symbol : BoundarySymbol (homogeneous of order m, elliptic).
    sigma : resolvent parameter > 0.
    n, half_length : line grid (x = 0 at node n/2).
    mu0 : factorization index; computed from the symbol when omitted.
    circle_n : resolution of the compactified grid for the q-factors.
    """

    symbol: BoundarySymbol
    sigma: float
    n: int
    half_length: float
    mu0: complex = None
    circle_n: int = 256
    _factors: object = field(default=None, repr=False)
    _q_trivial: bool = field(default=None, repr=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if self.mu0 is None:
            self.mu0 = factorization_index(self.symbol, self.sigma).mu0

    @property
    def order(self):
        return self.symbol.order

    def grid_function(self, func):
        return GridFunction.sample(func, self.n, self.half_length, "plus")

    def normalized(self):
        grid = CompactifiedGrid(self.circle_n, scale=self.sigma)
        return normalize_symbol(self.symbol, self.mu0, self.sigma, grid)

    def factors(self):
        """Wiener-Hopf factors of q, or None when q == 1 to float accuracy."""
        if self._q_trivial is None:
            norm = self.normalized()
            dev = float(np.max(np.abs(norm.values - 1.0)))
            self._q_trivial = dev <= _Q_TRIVIAL_TOL
            if not self._q_trivial:
                self._factors = factorize(norm)
        return None if self._q_trivial else self._factors

    def symbol_multiplier(self):
        sym, sig = self.symbol, self.sigma
        return MultiplierSpec(lambda xi: np.asarray(sym(sig, xi), complex),
                              order=self.order, side="none", label="p(sigma,xi)")


@dataclass
class HalflineSolution:
    u: GridFunction
    residual_windowed: float
    residual_raw: float
    window: tuple
    mu0: complex
    q_deviation: float
    elapsed: float
    trace_recovery_error: float = None
    traces: object = None
    exponent_fit: tuple = None


def _default_window(half_length):
    return (0.25, 0.5 * half_length)


def _residuals(model, u, f, window):
    """(windowed, raw) L2 residual of r+ p(D) u - f, relative to ||f||.

    u here is the solver's band representative (the image before the
    final restriction): every factor of p preserves the support side it
    acts on, so r+ P u on x > 0 is extension independent analytically,
    and on the band representative the plus/minus power factors compose
    exactly in band. Feeding the chopped solution instead would measure
    the forward ringing of the chop, not the parametrix quality.
    """
    img = apply_multiplier(model.symbol_multiplier(), u)
    r = img.values - f.values
    gf = GridFunction(r, u.half_length)
    x = gf.x
    raw_sel = x > 0
    scale = float(np.sqrt(gf.h) * np.linalg.norm(f.values[raw_sel]))
    if scale == 0.0:
        scale = 1.0
    raw = float(np.sqrt(gf.h) * np.linalg.norm(r[raw_sel])) / scale
    a, b = window
    win_sel = (x >= a) & (x <= b)
    win = float(np.sqrt(gf.h) * np.linalg.norm(r[win_sel])) / scale
    return win, raw


def fit_exponent(u, sigma, window=None):
    """Boundary exponent of u ~ c x^alpha near x = 0+.

    Fits log|u e^{sigma x}| against log x on a window pair and Richardson-
    extrapolates the slope in the window midpoint: the damping compensation
    removes the -sigma*x_mid slope bias exactly for the leading term, and
    the two-window extrapolation cancels the remaining bias linear in the
    window scale.  Returns (alpha_hat, fit_residual) where fit_residual is
    the rms log-deviation of the fine-window fit.

    window : optional (lo, hi) for the coarse window; the fine window is
    (max(lo/2, 8h), hi/2).  Default lo = 16h, hi = max(0.12, 40h).
    """
    h = u.h
    x = u.x
    if window is None:
        window = (16.0 * h, max(0.12, 40.0 * h))
    lo, hi = float(window[0]), float(window[1])

    def slope(a, b):
        sel = (x >= a) & (x <= b)
        vals = np.abs(u.values[sel]) * np.exp(sigma * x[sel])
        good = vals > 0
        if int(np.count_nonzero(good)) < 4:
            raise DomainError("exponent fit window has too few usable nodes")
        lx = np.log(x[sel][good])
        lv = np.log(vals[good])
        coeff = np.polyfit(lx, lv, 1)
        resid = lv - np.polyval(coeff, lx)
        return float(coeff[0]), float(np.sqrt(np.mean(resid ** 2)))

    s1, _ = slope(lo, hi)
    s2, r2 = slope(max(0.5 * lo, 8.0 * h), 0.5 * hi)
    return 2.0 * s2 - s1, r2


def solve_homogeneous(model, f, window=None):
    """Solve r+ p(sigma, D) u = f with u plus-supported.

    f : plus-supported GridFunction or a callable to sample.
    window : residual window (x_lo, x_hi), default (0.25, L/2).
    """
    t0 = time.perf_counter()
    if callable(f):
        f = model.grid_function(f)
    if f.support != "plus":
        raise GridError("forcing must be plus-supported")
    if f.n != model.n or f.half_length != model.half_length:
        raise GridError("forcing grid does not match the model grid")
    if window is None:
        window = _default_window(model.half_length)

    m = complex(model.order)
    mu0 = complex(model.mu0)
    factors = model.factors()
    norm = model.normalized()
    q_dev = float(np.max(np.abs(norm.values - 1.0)))

    img = apply_multiplier(minus_power(mu0 - m, model.sigma), f)
    # restriction midpoint at node 0: for Re(mu0 - m) < 0 the minus stage
    # is purely smoothing and its image is continuous at 0, so the fresh
    # jump's midpoint is half the band node; at order exactly 0 the stage
    # has a unit delta part that carries f's own jump through, and the
    # midpoint gains half of it (f's node-0 value)
    i0 = f.n // 2
    vals = img.values.copy()
    node0 = 0.5 * vals[i0] + (f.values[i0] * 0.5 if mu0 == m else 0.0)
    vals[f.x < 0] = 0.0
    vals[i0] = node0
    stage = GridFunction(vals, f.half_length, "plus")
    if factors is not None:
        stage = invert_truncated(factors, stage)
    out = apply_multiplier(plus_power(-mu0, model.sigma), stage)
    # the plus stage preserves the support side and the midpoint value of
    # its input's boundary node; re-halving node 0 here would plant a
    # delta whose forward image costs the whole chain an order
    vals = out.values.copy()
    vals[f.x < 0] = 0.0
    u = GridFunction(vals, f.half_length, "plus")

    win, raw = _residuals(model, out, f, window)
    try:
        efit = fit_exponent(u, model.sigma)
    except DomainError:
        # u below floating-point floor on the fit window (e.g. f == 0)
        efit = None
    traces = None
    if mu0.real > -1.0:
        traces = trace_gamma(u, mu0, model.sigma, count=1, method="limit")
    return HalflineSolution(u=u, residual_windowed=win, residual_raw=raw,
                            window=tuple(window), mu0=mu0, q_deviation=q_dev,
                            elapsed=time.perf_counter() - t0,
                            traces=traces, exponent_fit=efit)


def solve_nonhomogeneous(model, f, phi, window=None):
    """Solve r+ p(sigma, D) u = f with weighted boundary datum phi.

    The boundary condition is on the weighted trace of order mu0 - 1:
    Gamma(mu0) lim x^{1-mu0} u(x) = phi. Requires Re mu0 > 0. The singular
    field z = phi x^{mu0-1} e^{-sigma x} / Gamma(mu0) is carried
    analytically; the grid only ever sees the band sum of the regular
    forcing correction. trace_recovery_error reports how well the datum
    is read back off the computed solution.
    """
    t0 = time.perf_counter()
    mu0 = complex(model.mu0)
    if mu0.real <= 0:
        raise DomainError(
            f"nonhomogeneous problems need Re mu0 > 0, got {mu0}")
    if callable(f):
        f = model.grid_function(f)
    if window is None:
        window = _default_window(model.half_length)
    m = complex(model.order)
    sig = model.sigma
    phi = complex(phi)

    z = poisson_apply(mu0 - 1.0, 0, sig, phi, model.n, model.half_length)

    norm = model.normalized()
    q_dev = float(np.max(np.abs(norm.values - 1.0)))
    f2 = GridFunction(f.values.copy(), f.half_length, "plus")
    if q_dev > _Q_TRIVIAL_TOL:
        # band sum of phi (q - 1) (sigma - i xi)^{m - mu0}: smooth part of
        # r+ P z; the pure minus-power part is supported in x <= 0
        xi = f.xi
        sym, s0 = model.symbol, sig
        qline = np.asarray(sym(s0, xi), complex) \
            * (s0 - 1j * xi) ** (mu0 - m) * (s0 + 1j * xi) ** (-mu0)
        mvals = phi * (qline - 1.0) * (s0 - 1j * xi) ** (m - mu0)
        signs = np.where(np.arange(f.n) % 2 == 0, 1.0, -1.0)
        corr = _fft.ifft(mvals * signs) / f.h
        x = f.x
        sel = x > 0
        f2.values[sel] -= corr[sel]
        f2.values[f.n // 2] -= 0.5 * corr[f.n // 2]

    hom = solve_homogeneous(model, f2, window=window)
    u = GridFunction(z.values + hom.u.values, f.half_length, "plus")

    # the singular field's equation contribution cancels analytically, so
    # the meaningful residual is the regular part's: a discrete multiplier
    # applied to the x^{mu0-1} samples would only measure aliasing
    tr = trace_gamma(u, mu0 - 1.0, sig, count=1, method="limit")
    rec = abs(tr.values[0] - phi) / max(abs(phi), 1.0)
    try:
        efit = fit_exponent(u, sig)
    except DomainError:
        efit = None
    return HalflineSolution(u=u, residual_windowed=hom.residual_windowed,
                            residual_raw=hom.residual_raw,
                            window=tuple(window), mu0=mu0, q_deviation=q_dev,
                            elapsed=time.perf_counter() - t0,
                            trace_recovery_error=float(rec),
                            traces=tr, exponent_fit=efit)


# ---------------------------------------------------------------------------
# transmission mapping diagnostic


@dataclass
class MappingReport:
    mu: complex
    exponent: float
    second_diff_ratio: float
    c1_extendable: bool
    inconclusive: bool
    passed: bool


def _binomial_smooth(values, passes=2):
    # [1,2,1]/4 stencil; multiplies the spectrum by cos^2(xi h / 2), so
    # band-edge (alternating-sign) ringing is annihilated while smooth
    # content is perturbed only at O(h^2).
    for _ in range(passes):
        values = 0.25 * (np.roll(values, 1) + 2.0 * values
                         + np.roll(values, -1))
    return values


def transmission_mapping_test(model, mu, v_profile=None, fit_window=None):
    """Forward mapping check of the order-mu transmission property.

    Builds u = e+ x^mu v_profile(x) (v_profile smooth, default
    e^{-sigma x}), applies the full symbol, and scores the boundary
    regularity of g = r+ P u on (0, L/2]:

      * exponent: fitted power of |g(x) - g(0+)| near the boundary
        (a C1-extendable g gives ~1; a leftover fractional or negative
        power is the transmission failure showing up),
      * second_diff_ratio: one-sided second difference at stencil scale
        8h against the interior median of the same stencil;
        C1-extendable iff the ratio is <= 10.

    Construction of u matters. Pointwise samples of the fractional kink
    x^mu alias under an order-m multiplier: the image error at a fixed
    node index does not vanish with refinement and buries the probe. So
    the leading term v(0) x^mu e^{-sigma x} is synthesized spectrally
    (exact in-band transform Gamma(mu+1) v(0) (sigma + i xi)^{-mu-1}),
    which makes the discrete image the band-limited projection of the
    true image; only the one-order-less-singular remainder
    x^mu (v - v(0) e^{-sigma x}) is sampled pointwise. The projection
    still rings at the boundary with alternating sign, which the
    binomial pre-smoother removes before differencing.

    When the transmission condition holds for (p, mu), g is smooth up to
    the boundary and the test passes; when it fails, the image keeps a
    fractional or negative power and the ratio blows up (and keeps
    growing under refinement). A fit that cannot run (sign changes,
    underflow, empty window) sets inconclusive, which never passes.
    """
    mu = complex(mu)
    if mu.real <= -1:
        raise DomainError("mapping test needs Re mu > -1")
    sig = model.sigma
    n, L = model.n, model.half_length

    base = impulse_response(plus_power(-mu - 1.0, sig), n, L,
                            tail_correction=False)
    from scipy.special import gamma as _gamma_fn
    if v_profile is None:
        uvals = _gamma_fn(mu + 1.0) * base.values
    else:
        x = base.x
        pos = x > 0
        v0 = complex(np.asarray(v_profile(0.0), dtype=complex))
        rem = np.zeros(n, complex)
        rem[pos] = x[pos] ** mu * (
            np.asarray(v_profile(x[pos]), dtype=complex)
            - v0 * np.exp(-sig * x[pos]))
        uvals = v0 * _gamma_fn(mu + 1.0) * base.values + rem
    # band synthesis leaks O(h^{mu+1}) ringing into x < 0, so the grid
    # function is honestly a whole-line object; only x > 0 is probed
    u = GridFunction(uvals, L, "line")

    g = apply_multiplier(model.symbol_multiplier(), u)
    h = g.h
    i0 = g.n // 2
    x = g.x
    gv = _binomial_smooth(g.values.copy())

    s = 8
    near = abs(gv[i0 + s] - 2.0 * gv[i0 + 2 * s] + gv[i0 + 3 * s])
    # interior reference taken where the profile is still alive
    j_lo = i0 + max(3 * s + 1, int(round(0.5 / (sig * h))))
    j_hi = i0 + int(round(1.5 / (sig * h)))
    j_hi = min(j_hi, g.n - s - 1)
    inconclusive = False
    ratio = np.inf
    if j_hi - j_lo < 8:
        inconclusive = True
    else:
        d2 = np.abs(gv[j_lo + s:j_hi + s] - 2.0 * gv[j_lo:j_hi]
                    + gv[j_lo - s:j_hi - s])
        med = float(np.median(d2))
        if med > 0 and np.isfinite(med):
            ratio = float(near / med)
        else:
            inconclusive = True
    c1 = bool(np.isfinite(ratio) and ratio <= 10.0)

    # exponent score: |g - g0| ~ x^alpha with g0 extrapolated from the
    # outer half of the window (junk for unbounded g, where the huge
    # boundary values dominate the fit anyway)
    if fit_window is None:
        fit_window = (max(2 * s * h, 0.02), min(0.6 / sig, L / 8.0))
    sel = (x >= fit_window[0]) & (x <= fit_window[1])
    expo = 0.0
    if np.count_nonzero(sel) < 8:
        inconclusive = True
    else:
        dx = x[sel]
        gw = gv[sel]
        outer = dx >= 0.5 * dx[-1]
        coeff = np.polyfit(dx[outer], np.real(gw[outer]), 2)
        g0 = complex(np.polyval(coeff, 0.0))
        dg = np.abs(gw - g0)
        good = dg > 1e-13 * max(1.0, float(np.max(np.abs(gw))))
        if np.count_nonzero(good) < 6:
            inconclusive = True
        else:
            expo = float(np.polyfit(np.log(dx[good]), np.log(dg[good]),
                                    1)[0])
    return MappingReport(mu=mu, exponent=expo, second_diff_ratio=ratio,
                         c1_extendable=c1, inconclusive=inconclusive,
                         passed=bool(c1 and not inconclusive))
