"""Truncated Laurent series in one complex variable.

A series is stored as a contiguous coefficient window starting at its lowest
exponent ``lead`` (negative ``lead`` means a pole of order ``-lead``).  Each
series also carries ``rel``, the highest exponent whose coefficient is
trustworthy; ``rel=None`` marks a series that is exactly the stored finite
window.  Binary operations propagate ``rel`` so that truncation error never
silently leaks into higher-order coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ZERO_TOL",
    "LaurentError",
    "LaurentPoly",
    "NormParams",
    "coefficient_dtype",
    "set_precision",
    "set_zero_tol",
]

#: Relative cutoff below which edge coefficients are treated as zero when
#: deciding leading exponents / pole orders.  Configurable per run.
ZERO_TOL = 1e-12

_PRECISIONS = {"double": np.complex128, "extended": np.clongdouble}
_dtype = np.complex128


def set_precision(kind: str) -> None:
    """Select the coefficient dtype for newly built series.

    ``"double"`` (the default) uses complex128; ``"extended"`` uses the
    platform's long-double complex type.  Meant to be called once at startup.
    """
    global _dtype
    if kind not in _PRECISIONS:
        raise ValueError(f"unknown precision {kind!r}; expected one of {sorted(_PRECISIONS)}")
    _dtype = _PRECISIONS[kind]


def coefficient_dtype():
    return _dtype


def set_zero_tol(tol: float) -> None:
    """Set the global relative zero cutoff (must be positive)."""
    global ZERO_TOL
    if not tol > 0.0:
        raise ValueError("zero_tol must be positive")
    ZERO_TOL = float(tol)


class LaurentError(ValueError):
    pass


@dataclass(frozen=True)
class NormParams:
    """Annulus radii for the weighted coefficient norm, 0 < r < R."""

    r: float
    R: float

    def __post_init__(self):
        if not (0.0 < self.r < self.R):
            raise ValueError(f"norm parameters need 0 < r < R, got r={self.r}, R={self.R}")


def _rel_min(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class LaurentPoly:
    """One truncated Laurent series; immutable after construction.

    The canonical zero has an empty window and ``lead == 0``.  Construction
    trims edge coefficients whose magnitude is below ``zero_tol`` relative to
    the larger of the series' own scale and ``scale_hint`` (callers pass the
    operand scale so cancellation debris does not fake a leading term).
    """

    __slots__ = ("lead", "coeffs", "rel")

    def __init__(self, lead, coeffs, rel=None, scale_hint=0.0, zero_tol=None):
        c = np.asarray(coeffs, dtype=_dtype)
        if c.ndim != 1:
            raise LaurentError("coefficients must be one-dimensional")
        lead = int(lead)
        if rel is not None:
            rel = int(rel)
            keep = rel - lead + 1
            c = c[: max(keep, 0)]
        scale = max(float(np.max(np.abs(c))) if c.size else 0.0, float(scale_hint))
        tol = (ZERO_TOL if zero_tol is None else zero_tol) * scale
        i, j = 0, c.size
        while i < j and abs(c[i]) <= tol:
            i += 1
        while j > i and abs(c[j - 1]) <= tol:
            j -= 1
        c = c[i:j].copy()
        c.setflags(write=False)
        self.coeffs = c
        self.lead = lead + i if c.size else 0
        self.rel = rel

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, rel=None):
        return cls(0, (), rel=rel)

    @classmethod
    def const(cls, value, rel=None):
        return cls(0, (value,), rel=rel)

    @classmethod
    def monomial(cls, exponent, value=1.0, rel=None):
        return cls(exponent, (value,), rel=rel)

    @classmethod
    def one(cls):
        return cls.const(1.0)

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def trunc_L(self) -> int:
        """Number of retained coefficient slots."""
        return int(self.coeffs.size)

    @property
    def top(self):
        """Highest stored exponent, or None for the zero series."""
        return None if self.is_zero else self.lead + self.coeffs.size - 1

    @property
    def pole_order(self) -> int:
        return max(0, -self.lead) if not self.is_zero else 0

    @property
    def magnitude(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if not self.is_zero else 0.0

    def exponents(self) -> np.ndarray:
        return self.lead + np.arange(self.coeffs.size)

    def coeff(self, exponent: int) -> complex:
        off = exponent - self.lead
        if 0 <= off < self.coeffs.size:
            return complex(self.coeffs[off])
        return 0.0 + 0.0j

    def window(self):
        """Reliable exponent range as (lo, hi); hi may be None (exact)."""
        return self.lead, self.rel

    def ord0(self) -> int:
        """Lowest exponent with a non-negligible coefficient."""
        if self.is_zero:
            raise LaurentError("ord0 of the zero series is undefined")
        return self.lead

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return LaurentPoly(self.lead, -self.coeffs, rel=self.rel)

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        rel = _rel_min(self.rel, other.rel)
        if self.is_zero and other.is_zero:
            return LaurentPoly.zero(rel=rel)
        if self.is_zero:
            return LaurentPoly(other.lead, other.coeffs, rel=rel)
        if other.is_zero:
            return LaurentPoly(self.lead, self.coeffs, rel=rel)
        lo = min(self.lead, other.lead)
        hi = max(self.top, other.top)
        buf = np.zeros(hi - lo + 1, dtype=_dtype)
        buf[self.lead - lo : self.lead - lo + self.coeffs.size] += self.coeffs
        buf[other.lead - lo : other.lead - lo + other.coeffs.size] += other.coeffs
        return LaurentPoly(lo, buf, rel=rel, scale_hint=max(self.magnitude, other.magnitude))

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, factor):
        if factor == 0:
            return LaurentPoly.zero(rel=self.rel)
        return LaurentPoly(self.lead, self.coeffs * complex(factor), rel=self.rel)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.is_zero or other.is_zero:
            # O(t^(rel+1)) times a series with leading exponent l is O(t^(rel+1+l)).
            rel = None
            for z, nz in ((self, other), (other, self)):
                if z.is_zero and z.rel is not None:
                    rel = _rel_min(rel, z.rel + (nz.lead if not nz.is_zero else 0))
            return LaurentPoly.zero(rel=rel)
        conv = np.convolve(self.coeffs, other.coeffs)
        rel = None
        if self.rel is not None:
            rel = _rel_min(rel, self.rel + other.lead)
        if other.rel is not None:
            rel = _rel_min(rel, other.rel + self.lead)
        return LaurentPoly(
            self.lead + other.lead,
            conv,
            rel=rel,
            scale_hint=self.magnitude * other.magnitude,
        )

    __rmul__ = __mul__

    def invert(self, n_terms=None):
        """Multiplicative inverse, truncated to ``n_terms`` coefficients.

        For a truncated operand the default window is everything its own
        reliability supports.  Exact monomials invert exactly.
        """
        if self.is_zero:
            raise LaurentError("cannot invert the zero series")
        c0 = complex(self.coeffs[0])
        if abs(c0) <= ZERO_TOL * max(1.0, self.magnitude):
            raise LaurentError("ill-conditioned inversion: leading coefficient below zero_tol")
        if self.coeffs.size == 1 and self.rel is None:
            return LaurentPoly.monomial(-self.lead, 1.0 / c0)
        avail = None if self.rel is None else self.rel - 2 * self.lead
        if n_terms is None:
            if avail is None:
                raise LaurentError("n_terms required to invert an exact multi-term series")
            n = avail - (-self.lead) + 1
        else:
            n = int(n_terms)
            if avail is not None:
                n = min(n, avail - (-self.lead) + 1)
        if n < 1:
            raise LaurentError("no reliable window left for inversion")
        out = np.zeros(n, dtype=_dtype)
        out[0] = 1.0 / c0
        f = self.coeffs
        for j in range(1, n):
            m = min(j, f.size - 1)
            s = np.dot(f[1 : m + 1], out[j - m : j][::-1]) if m > 0 else 0.0
            out[j] = -s / c0
        rel = -self.lead + n - 1
        return LaurentPoly(-self.lead, out, rel=rel)

    # -- diagonal operator actions ------------------------------------------

    def shifted(self, k_plus_n, gamma, j=1):
        """Multiply the coefficient at exponent l by (k_plus_n + i*gamma*l)**j."""
        j = int(j)
        if j < 0:
            raise LaurentError("operator power must be nonnegative")
        if j == 0 or self.is_zero:
            return LaurentPoly(self.lead, self.coeffs, rel=self.rel)
        mult = (k_plus_n + 1j * gamma * self.exponents().astype(float)) ** j
        return LaurentPoly(self.lead, self.coeffs * mult.astype(_dtype), rel=self.rel)

    def shifted_inv(self, k_plus_n, gamma, j=1):
        """Inverse of :meth:`shifted`; defensive guard against zero divisors."""
        j = int(j)
        if j < 0:
            raise LaurentError("operator power must be nonnegative")
        if j == 0 or self.is_zero:
            return LaurentPoly(self.lead, self.coeffs, rel=self.rel)
        base = k_plus_n + 1j * gamma * self.exponents().astype(float)
        floor = 1e-12 * max(1.0, abs(k_plus_n))
        small = np.abs(base) < floor
        if np.any(small):
            bad = int(self.exponents()[small][0])
            raise LaurentError(f"divisor magnitude below zero_tol at exponent {bad}")
        return LaurentPoly(self.lead, self.coeffs / (base.astype(_dtype) ** j), rel=self.rel)

    # -- metrics and evaluation ----------------------------------------------

    def norm(self, p: NormParams) -> float:
        """Weighted coefficient norm over the annulus (r, R).

        The series is read as t**(-nu) * sum f_k t**k with nu its actual pole
        order (clamped at zero); the value is a partial sum over the stored
        window and therefore a lower bound for the full-series norm.
        """
        if self.is_zero:
            return 0.0
        nu = self.pole_order
        w = np.abs(self.coeffs) * (p.R ** (self.exponents().astype(float) + nu))
        return float(np.sum(w) / p.r**nu)

    def eval(self, t: complex) -> complex:
        if self.is_zero:
            return 0.0 + 0.0j
        acc = 0.0 + 0.0j
        for c in self.coeffs[::-1]:
            acc = acc * t + complex(c)
        return acc * t**self.lead

    def csv_rows(self):
        """Rows (exponent, re, im), one per stored coefficient."""
        return [
            (int(e), float(c.real), float(c.imag))
            for e, c in zip(self.exponents(), self.coeffs)
        ]

    def __repr__(self):
        if self.is_zero:
            return f"LaurentPoly(0, rel={self.rel})"
        head = ", ".join(f"t^{e}:{complex(c):.6g}" for e, c in list(zip(self.exponents(), self.coeffs))[:4])
        more = "..." if self.coeffs.size > 4 else ""
        return f"LaurentPoly({head}{more}, rel={self.rel})"
