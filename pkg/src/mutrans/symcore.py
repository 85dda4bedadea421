"""Boundary symbols and their structural checks.

A boundary symbol here is a function p(sigma, xi) of two real arguments,
positively homogeneous of some order m in the joint dilation
(sigma, xi) -> (t sigma, t xi); sigma > 0 is the resolvent parameter and
xi the boundary frequency. Three questions about p are answered here:

  * is it actually homogeneous of the claimed order (check_homogeneity),
  * does it satisfy the order-mu transmission condition, i.e. do the
    xi-derivatives at the two boundary rays sigma = 0, xi = +-1 match up
    to the ray-dependent phase e^{i pi (m - 2 mu - k)} (check_mu_transmission),
  * what is its factorization index mu0, the splitting exponent between
    plus and minus halves at infinity (factorization_index).

The index is read off a continuous branch of log p along the real xi-line:
with a_+- = log p(sigma, +-T) - m log r(+-T) continued along the path,
mu0 = m/2 + (a_+ - a_-) / (2 pi i). For exactly homogeneous symbols this
is T-independent; for perturbed ones a two-radius Richardson step removes
the O(1/T) contamination and the leftover gap is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mutrans import symexpr
from mutrans.errors import DomainError, EllipticityError, SymbolError
from mutrans.tolerances import tol


@dataclass
class BoundarySymbol:
    """A symbol p(sigma, xi), from an expression string or a callable.

    Expression-backed symbols get exact xi-derivatives and structural
    order inference; callable-backed ones fall back to finite differences
    and need the order supplied.
    """

    text: str = ""
    order: float = None
    ast: object = None
    func: object = None

    @classmethod
    def from_text(cls, text, order=None):
        ast = symexpr.parse_symbol(text)
        if order is None:
            order = symexpr.homogeneity_order(ast)
        return cls(text=text, order=order, ast=ast)

    @classmethod
    def from_callable(cls, func, order, text=""):
        if order is None:
            raise DomainError("callable symbols need an explicit order")
        return cls(text=text or getattr(func, "__name__", "<callable>"),
                   order=order, func=func)

    def __call__(self, sigma, xi):
        if self.ast is not None:
            return self.ast.eval(sigma, xi)
        return self.func(sigma, xi)

    def deriv_xi(self, k=1):
        """k-th xi-derivative as a callable (exact if expression-backed)."""
        if self.ast is not None:
            node = symexpr.diff_xi(self.ast, k)
            return lambda s, x: node.eval(s, x)
        return lambda s, x: _fd_deriv(self.func, s, x, k)


def _fd_deriv(func, sigma, xi, k, h=None):
    """Central finite difference with one Richardson step (h, h/2).

    The step balances the h^4 truncation error of the extrapolated
    stencil against eps/h^k roundoff in the k-fold difference; a fixed
    small h would drown k >= 3 in noise.
    """
    if h is None:
        h = (2.2e-16) ** (1.0 / (k + 4)) * max(
            1.0, float(np.max(np.abs(xi))))

    def stencil(step):
        # k-th derivative weights: k-fold composition of the centered
        # first difference; base[i] weights f(xi + (i - k) step)
        base = np.array([1.0])
        for _ in range(k):
            base = np.convolve(base, [-0.5, 0.0, 0.5]) / step
        vals = sum(base[i] * np.asarray(func(sigma, xi + (i - k) * step))
                   for i in range(2 * k + 1))
        return vals
    d1 = stencil(h)
    d2 = stencil(h / 2)
    return (4.0 * d2 - d1) / 3.0


# ---------------------------------------------------------------------------
# homogeneity


@dataclass
class HomogeneityReport:
    order: float
    max_residual: float
    passed: bool
    dilations: tuple
    samples: int


def check_homogeneity(sym, dilations=(0.5, 2.0, 5.0), samples=16,
                      tolerance=1e-10):
    """Verify p(t sigma, t xi) = t^m p(sigma, xi) on the upper half circle.

    Sample points (sigma, xi) = (sin th, cos th), th = pi (i+1/2)/samples,
    keep sigma > 0. Residuals are relative to |t^m p|. The claimed order is
    sym.order.
    """
    m = sym.order
    if m is None:
        raise DomainError("symbol has no order to check against")
    th = np.pi * (np.arange(samples) + 0.5) / samples
    sig = np.sin(th)
    xi = np.cos(th)
    base = np.asarray(sym(sig, xi), dtype=complex)
    if not np.all(np.isfinite(base)) or np.any(np.abs(base) == 0):
        raise EllipticityError("symbol vanishes or blows up on the unit half circle")
    worst = 0.0
    for t in dilations:
        lhs = np.asarray(sym(t * sig, t * xi), dtype=complex)
        rhs = (t ** complex(m)) * base
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    return HomogeneityReport(order=float(np.real(m)), max_residual=worst,
                             passed=worst <= tol(tolerance),
                             dilations=tuple(dilations), samples=samples)


# ---------------------------------------------------------------------------
# transmission condition


@dataclass
class TransmissionReport:
    mu: complex
    max_deriv: int
    residuals: np.ndarray
    passed: bool
    tolerance: float
    method: str


def _deriv_at_sigma0(sym, k, xi_sign):
    """d^k_xi p at (0, xi_sign), taking sigma -> 0+ by Richardson when the
    symbol cannot be evaluated on the boundary ray itself."""
    d = sym.deriv_xi(k) if k else (lambda s, x: sym(s, x))
    val = np.asarray(d(0.0, float(xi_sign)), dtype=complex)
    if np.all(np.isfinite(val)):
        return complex(val)
    eps = np.array([1e-3, 5e-4, 2.5e-4])
    v = np.array([complex(d(e, float(xi_sign))) for e in eps])
    # two Richardson stages assuming an O(eps) leading error
    v1 = 2.0 * v[1:] - v[:-1]
    v2 = 2.0 * v1[1:] - v1[:-1]
    return complex(v2[0])


def check_mu_transmission(sym, mu, max_deriv=4, tolerance=None):
    """Residuals of the order-mu transmission condition for k = 0..max_deriv:

        d^k_xi p(0,-1) = e^{i pi (m - 2 mu - k)} d^k_xi p(0,+1),

    each scaled by the larger of the two magnitudes. Expression-backed
    symbols use exact derivatives (tolerance 1e-8); callable-backed ones
    use Richardson finite differences (tolerance 1e-4).
    """
    m = sym.order
    exact = sym.ast is not None
    base_tol = 1e-8 if exact else 1e-4
    if tolerance is None:
        tolerance = base_tol
    res = np.zeros(max_deriv + 1)
    # scale floor: derivatives that vanish on both rays sit at FD-noise
    # level, and noise/noise would read as an O(1) residual
    floor = max(abs(_deriv_at_sigma0(sym, 0, +1)),
                abs(_deriv_at_sigma0(sym, 0, -1)))
    for k in range(max_deriv + 1):
        right = _deriv_at_sigma0(sym, k, +1)
        left = _deriv_at_sigma0(sym, k, -1)
        phase = np.exp(1j * np.pi * (m - 2.0 * complex(mu) - k))
        scale = max(abs(left), abs(right), floor)
        if scale == 0.0:
            res[k] = 0.0
        else:
            res[k] = abs(left - phase * right) / scale
    passed = bool(np.max(res) <= tol(tolerance))
    return TransmissionReport(mu=complex(mu), max_deriv=max_deriv,
                              residuals=res, passed=passed,
                              tolerance=tol(tolerance),
                              method="exact" if exact else "finite-difference")


# ---------------------------------------------------------------------------
# factorization index


@dataclass
class IndexReport:
    mu0: complex
    winding: int
    a_plus: complex
    a_minus: complex
    path_radius: float
    mu0_mod1: float
    richardson_gap: float


def _log_along_path(sym, sigma, T, n0=256, max_refine=24):
    """Continuous branch of log p(sigma, xi) along xi from -T to +T.

    The path is tangent-spaced (dense near 0 where the symbol turns
    fastest). Segments with |delta arg| >= pi/2 are bisected; if the
    refinement does not settle, the symbol winds too fast or vanishes.
    Returns (log at -T, log at +T continued, accumulated arg change).
    """
    tmax = np.arctan(T / sigma)
    t = np.linspace(-tmax, tmax, n0)
    for _ in range(max_refine):
        xi = sigma * np.tan(t)
        vals = np.asarray(sym(np.full_like(xi, sigma), xi), dtype=complex)
        if not np.all(np.isfinite(vals)) or np.any(vals == 0):
            raise EllipticityError("symbol vanishes on the index path")
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) >= 0.5 * np.pi
        if not np.any(bad):
            total = float(np.sum(dphi))
            start = np.log(vals[0])
            end = start + (np.log(np.abs(vals[-1])) - np.log(np.abs(vals[0]))) \
                + 1j * total
            return start, end, total
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        t = np.sort(np.concatenate([t, mids]))
    raise EllipticityError("index path did not resolve: winding too fast")


def factorization_index(sym, sigma=1.0, path_radius=None, richardson=True):
    """Factorization index mu0 of a symbol at resolvent parameter sigma.

    Walks log p along the real xi-line out to path_radius (default
    1e4 * sigma), forms a_+- = log p(sigma, +-T) - m log hypot(sigma, T)
    on one continuous branch, and returns

        mu0 = m/2 + (a_+ - a_-) / (2 pi i).

    With richardson=True the same quantity at half the radius removes the
    O(1/T) error of non-homogeneous perturbations; richardson_gap records
    the shift (0 for exactly homogeneous symbols, up to path resolution).
    """
    if sym.order is None:
        raise DomainError("factorization index needs the symbol order")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    m = complex(sym.order)
    T = float(path_radius) if path_radius else 1e4 * sigma

    def mu0_at(radius):
        lo, hi, total = _log_along_path(sym, sigma, radius)
        r = np.hypot(sigma, radius)
        a_minus = lo - m * np.log(r)
        a_plus = hi - m * np.log(r)
        mu0 = m / 2.0 + (a_plus - a_minus) / (2j * np.pi)
        return mu0, a_plus, a_minus, total

    mu0_T, a_plus, a_minus, total = mu0_at(T)
    gap = 0.0
    mu0 = mu0_T
    if richardson:
        mu0_half, _, _, _ = mu0_at(0.5 * T)
        extrap = 2.0 * mu0_T - mu0_half
        gap = abs(mu0_T - mu0_half)
        mu0 = extrap
    winding = int(np.rint(total / (2.0 * np.pi)))
    return IndexReport(mu0=complex(mu0), winding=winding,
                       a_plus=complex(a_plus), a_minus=complex(a_minus),
                       path_radius=T,
                       mu0_mod1=float(np.real(mu0) % 1.0),
                       richardson_gap=float(gap))
