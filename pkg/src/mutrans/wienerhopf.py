"""Multiplicative splitting of normalized symbols on a compactified line.

The real frequency line is mapped to the unit circle by

    z = (xi + i c) / (xi - i c),        xi = infinity -> z = 1,

so the lower half plane Im xi < 0 (where plus symbols are analytic and
their operators preserve support in x >= 0) becomes |z| < 1, and a plus
function is exactly one with only nonnegative circle-Fourier modes. The
grid is theta_j = 2 pi j / n, z_j = e^{i theta_j}, xi_j = c cot(theta_j/2);
node j = 0 is the point at infinity.

cauchy_split is the additive splitting (FFT mode masking, constant shared
evenly). factorize is the multiplicative one: take a continuous branch of
log q around the circle (winding must vanish, otherwise no bounded
factorization exists and EllipticityError is raised), split the log, and
exponentiate, normalized so q_plus(infinity) = 1. Factors evaluate off
the grid by a Horner sum in z, so they can be used as multipliers on any
line grid.

invert_truncated composes the half-line inverse of a normalized symbol:
v = r+ OP(1/q_plus) e+ r+ OP(1/q_minus) e+ g, with the midpoint rule at
every restriction (see fourierops).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

from mutrans.errors import DomainError, EllipticityError, GridError
from mutrans.fourierops import GridFunction, MultiplierSpec, apply_multiplier, \
    truncate_restrict


@dataclass
class CompactifiedGrid:
    """n equispaced circle nodes; xi = scale * cot(theta/2), node 0 at inf."""

    n: int
    scale: float = 1.0

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise GridError("circle grid size must be even and at least 8")
        if not self.scale > 0:
            raise GridError("scale must be positive")

    @property
    def theta(self):
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @property
    def z(self):
        return np.exp(1j * self.theta)

    @property
    def xi(self):
        th = self.theta
        out = np.empty(self.n)
        out[0] = np.inf
        out[1:] = self.scale / np.tan(0.5 * th[1:])
        return out

    def z_of_xi(self, xi):
        """Pull back line frequencies to the circle; +-inf -> 1."""
        xi = np.asarray(xi, dtype=float)
        c = self.scale
        with np.errstate(invalid="ignore"):
            z = (xi + 1j * c) / (xi - 1j * c)
        if z.ndim:
            z[~np.isfinite(xi)] = 1.0
        elif not np.isfinite(xi):
            z = np.asarray(1.0 + 0.0j)
        return z


@dataclass
class CauchySplit:
    plus: np.ndarray    # boundary values of the Im xi < 0 analytic half
    minus: np.ndarray
    coeffs: np.ndarray  # circle-Fourier coefficients, FFT index order


def cauchy_split(values):
    """Additive splitting h = h_plus + h_minus of circle-grid values.

    h_plus keeps the k >= 1 modes plus half the constant (analytic in
    |z| < 1, i.e. Im xi < 0); h_minus the k <= -1 modes plus the other
    half. The Nyquist mode counts as negative, matching FFT index order.
    """
    values = np.asarray(values, dtype=complex)
    n = values.size
    if n < 8 or n % 2:
        raise GridError("cauchy_split needs an even grid of at least 8")
    c = _fft.fft(values) / n
    mask_plus = np.zeros(n)
    mask_plus[1:n // 2] = 1.0
    cp = c * mask_plus
    cm = c * (1.0 - mask_plus)
    cp[0] = 0.5 * c[0]
    cm[0] = 0.5 * c[0]
    plus = _fft.ifft(cp * n)
    minus = _fft.ifft(cm * n)
    return CauchySplit(plus=plus, minus=minus, coeffs=c)


@dataclass
class NormalizedSymbol:
    """Values of q(xi) = p(sigma,xi) (sigma-i xi)^{mu0-m} (sigma+i xi)^{-mu0}
    on a circle grid, order-zero and elliptic when p is and mu0 is its
    factorization index."""

    values: np.ndarray
    grid: CompactifiedGrid
    mu0: complex
    sigma: float
    inf_mismatch: float
    inf_value: complex


def normalize_symbol(sym, mu0, sigma, grid):
    """Evaluate the order-reduced symbol q on the circle grid.

    Uses the unit-rescaled form q = p(s/r, x/r) ((s-ix)/r)^{mu0-m}
    ((s+ix)/r)^{-mu0}, r = hypot(s, x), which is exact for homogeneous p
    and finite at every node. The infinity node takes the average of the
    two directional limits q(+-inf); their relative mismatch (zero exactly
    when the transmission phases match at mu0 mod 1) is recorded.
    """
    if sym.order is None:
        raise DomainError("normalize_symbol needs the symbol order")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    m = complex(sym.order)
    mu0 = complex(mu0)
    xi = grid.xi[1:]
    r = np.hypot(sigma, xi)
    su, xu = sigma / r, xi / r
    vals = np.empty(grid.n, dtype=complex)
    vals[1:] = np.asarray(sym(su, xu), dtype=complex) \
        * (su - 1j * xu) ** (mu0 - m) * (su + 1j * xu) ** (-mu0)
    q_pinf = complex(sym(0.0, 1.0)) * (-1j) ** (mu0 - m) * (1j) ** (-mu0)
    q_minf = complex(sym(0.0, -1.0)) * (1j) ** (mu0 - m) * (-1j) ** (-mu0)
    scale = max(abs(q_pinf), abs(q_minf))
    mismatch = abs(q_pinf - q_minf) / scale if scale else 0.0
    vals[0] = 0.5 * (q_pinf + q_minf)
    return NormalizedSymbol(values=vals, grid=grid, mu0=mu0, sigma=float(sigma),
                            inf_mismatch=float(mismatch),
                            inf_value=vals[0])


@dataclass
class WienerHopfFactors:
    """Multiplicative factors q = q_plus * q_minus with q_plus(inf) = 1.

    log_coeffs are the circle-Fourier coefficients of the continuous
    log q branch (FFT index order). Factor evaluation anywhere on the
    closed half planes goes through a Horner sum in z (plus) or 1/z
    (minus).
    """

    grid: CompactifiedGrid
    log_coeffs: np.ndarray
    winding: int
    values: np.ndarray        # the input q on the grid
    values_plus: np.ndarray
    values_minus: np.ndarray

    def _split_sums(self):
        c = self.log_coeffs
        n = c.size
        cp = c[1:n // 2]            # k = 1 .. n/2-1
        cm = c[n // 2:][::-1]       # k = -1 .. -n/2 after reversal
        return cp, cm

    def q_plus(self, xi):
        cp, _ = self._split_sums()
        z = self.grid.z_of_xi(xi)
        acc = np.zeros_like(z)
        for ck in cp[::-1]:
            acc = (acc + ck) * z
        return np.exp(acc - np.sum(cp))

    def q_minus(self, xi):
        cp, cm = self._split_sums()
        z = self.grid.z_of_xi(xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(z == 0, 0.0, 1.0 / z)
        acc = np.zeros_like(w)
        for ck in cm[::-1]:
            acc = (acc + ck) * w
        return np.exp(acc + self.log_coeffs[0] + np.sum(cp))

    def reconstruction_error(self):
        """sup |q_plus q_minus - q| / sup |q| over the grid nodes."""
        recon = self.values_plus * self.values_minus
        return float(np.max(np.abs(recon - self.values))
                     / np.max(np.abs(self.values)))

    def coefficient_leakage(self):
        """Relative mass of negative-index circle modes of q_plus (and of
        positive-index modes of q_minus); both vanish for a clean split."""
        n = self.grid.n
        cp = _fft.fft(self.values_plus) / n
        cm = _fft.fft(self.values_minus) / n
        lp = np.linalg.norm(cp[n // 2:]) / np.linalg.norm(cp)
        lm = np.linalg.norm(cm[1:n // 2]) / np.linalg.norm(cm)
        return float(max(lp, lm))


def _circle_values(q, grid):
    if isinstance(q, NormalizedSymbol):
        return q.values, q.grid
    values = np.asarray(q, dtype=complex)
    if grid is None:
        grid = CompactifiedGrid(values.size)
    if values.size != grid.n:
        raise GridError("symbol values do not match the grid size")
    if not np.all(np.isfinite(values)) or np.any(values == 0):
        raise EllipticityError("symbol vanishes or is non-finite on the grid")
    return values, grid


def winding_number(q, grid=None):
    """Winding of an order-zero symbol around 0, by continuous phase.

    q : NormalizedSymbol or circle-grid values. Consecutive grid values
    must subtend less than pi for the unwrapping to be faithful; that is
    a resolution requirement, not a smallness one, so symbols with any
    integer winding are handled.
    """
    values, _ = _circle_values(q, grid)
    rolled = np.roll(values, -1)
    dphi = np.angle(rolled / values)          # closed loop, n steps
    return float(np.sum(dphi)) / (2.0 * np.pi)


def factorize(q, grid=None):
    """Wiener-Hopf factorization of an elliptic order-zero symbol.

    q : NormalizedSymbol, or an array of circle-grid values (then grid is
        required). Values must be finite and nonvanishing.

    Takes the continuous log around the circle; a nonzero winding number
    means q admits no bounded factorization and raises EllipticityError.
    """
    values, grid = _circle_values(q, grid)
    n = grid.n

    rolled = np.roll(values, -1)
    dphi = np.angle(rolled / values)          # closed loop, n steps
    total = float(np.sum(dphi))
    winding = total / (2.0 * np.pi)
    if abs(winding) > 0.25:
        raise EllipticityError(
            f"winding number {winding:.3f} != 0: no bounded factorization")
    phase = np.angle(values[0]) + np.concatenate([[0.0], np.cumsum(dphi[:-1])])
    logv = np.log(np.abs(values)) + 1j * phase
    c = _fft.fft(logv) / n

    cp_sum = np.sum(c[1:n // 2])
    log_plus = _fft.ifft(np.concatenate([[0.0], c[1:n // 2],
                                         np.zeros(n // 2)]) * n) - cp_sum
    log_minus = logv - log_plus
    return WienerHopfFactors(grid=grid, log_coeffs=c, winding=int(round(winding)),
                             values=values,
                             values_plus=np.exp(log_plus),
                             values_minus=np.exp(log_minus))


def invert_truncated(factors, g):
    """Half-line inverse of the normalized symbol:

        v = r+ OP(1/q_plus) e+ r+ OP(1/q_minus) e+ g,

    g must be plus-supported (midpoint value at the x=0 node). The result
    is the truncated solution of OP(q) v = g on x > 0.

    Node-0 handling at the two restrictions is what keeps the chain at
    O(h^{3/2}) instead of O(h). Both factors are normalized to 1 at
    infinity, so each kernel is a unit delta plus a smoothing part. After
    the 1/q_minus stage the image's jump at 0 equals the input's jump
    (the delta carries it, the smoothing part is continuous); the band
    node holds A + jump/2 with A the left limit, so the restricted
    midpoint (A + jump)/2 is the band node plus half the jump, i.e. the
    band node plus the input's node-0 value. After the 1/q_plus stage the
    image is already plus-supported with a correct midpoint node, and
    re-halving it would inject an O(1) delta at node 0 whose forward
    image pollutes the whole half-line at O(h).
    """
    if g.support != "plus":
        raise GridError("invert_truncated expects plus-supported data")
    inv_minus = MultiplierSpec(lambda xi: 1.0 / factors.q_minus(xi),
                               side="minus", label="1/q_minus")
    inv_plus = MultiplierSpec(lambda xi: 1.0 / factors.q_plus(xi),
                              side="plus", label="1/q_plus")
    i0 = g.n // 2
    img = apply_multiplier(inv_minus, g)
    vals = img.values.copy()
    node0 = 0.5 * (vals[i0] + g.values[i0])
    vals[g.x < 0] = 0.0
    vals[i0] = node0
    stage = GridFunction(vals, g.half_length, "plus")
    out = apply_multiplier(inv_plus, stage)
    vals = out.values.copy()
    vals[g.x < 0] = 0.0
    return GridFunction(vals, g.half_length, "plus")
