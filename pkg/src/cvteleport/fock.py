"""Truncated Fock-space kernel.

Special functions, ladder and deformed-ladder matrices, and displacement
operators on the span of |0>, ..., |nmax>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DeformationError

_EXACT_FACTORIAL_LIMIT = 20


@dataclass(frozen=True)
class Cutoff:
    """Fock truncation: keep levels 0..nmax.

    ``tail_tol`` bounds the probability mass a state may carry above nmax.
    With ``check_tail=False`` the truncated space itself defines the state
    and the tail is recorded but not enforced.
    """

    nmax: int
    tail_tol: float = 1e-12
    check_tail: bool = True

    def __post_init__(self):
        if int(self.nmax) != self.nmax or self.nmax < 1:
            raise ValueError(f"nmax must be an integer >= 1, got {self.nmax!r}")
        if not 0.0 <= self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in [0, 1), got {self.tail_tol!r}")
        object.__setattr__(self, "nmax", int(self.nmax))

    @property
    def dim(self) -> int:
        return self.nmax + 1

    def doubled(self) -> "Cutoff":
        return Cutoff(2 * self.nmax, self.tail_tol, self.check_tail)


@dataclass(frozen=True)
class DeformationFn:
    """Intensity-dependent function f(n) deforming a -> a f(N).

    Operators only ever use sqrt(n) f(n) and sqrt(n) / f(n), both set to zero
    at n = 0. Where f(0) is needed on its own, singular families use f(0) = 1.
    """

    kind: str
    p: float | None = None
    values: tuple[float, ...] = field(default=())

    KINDS = ("identity", "sqrt_n", "inv_sqrt_n", "inv_pow", "table")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DeformationError(f"unknown deformation kind {self.kind!r}")
        if self.kind == "inv_pow" and not (self.p is not None and self.p > 0):
            raise DeformationError("inv_pow needs an exponent p > 0")
        if self.kind == "table":
            if not self.values:
                raise DeformationError("table deformation needs at least one value")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def sqrt_n(cls):
        return cls("sqrt_n")

    @classmethod
    def inv_sqrt_n(cls):
        return cls("inv_sqrt_n")

    @classmethod
    def inv_pow(cls, p: float):
        return cls("inv_pow", p=float(p))

    @classmethod
    def table(cls, values):
        return cls("table", values=tuple(values))

    @classmethod
    def parse(cls, text: str) -> "DeformationFn":
        """Parse ``identity``, ``sqrt_n``, ``inv_sqrt_n``, ``inv_pow:P`` or ``table:v0,v1,...``."""
        text = text.strip()
        aliases = {"1": "identity", "one": "identity", "sqrt": "sqrt_n", "inv_sqrt": "inv_sqrt_n"}
        text = aliases.get(text, text)
        if text.startswith("inv_pow:"):
            return cls.inv_pow(float(text.split(":", 1)[1]))
        if text.startswith("table:"):
            return cls.table(float(v) for v in text.split(":", 1)[1].split(","))
        return cls(text)

    @property
    def label(self) -> str:
        if self.kind == "inv_pow":
            return f"inv_pow:{self.p:g}"
        if self.kind == "table":
            return "table:" + ",".join(f"{v:g}" for v in self.values)
        return self.kind

    def __call__(self, n):
        """f(n) elementwise for integer n >= 0."""
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore"):
            if self.kind == "identity":
                out = np.ones_like(n)
            elif self.kind == "sqrt_n":
                out = np.sqrt(n)
            elif self.kind == "inv_sqrt_n":
                out = 1.0 / np.sqrt(n)
            elif self.kind == "inv_pow":
                out = n ** (-self.p)
            else:
                vals = np.asarray(self.values)
                idx = np.minimum(n.astype(int), len(vals) - 1)
                return vals[idx]
        return np.where(n == 0, 1.0, out)

    def lowering_weights(self, dim: int) -> np.ndarray:
        """sqrt(n) f(n) for n = 0..dim-1 (the matrix elements of A)."""
        n = np.arange(dim, dtype=float)
        w = np.zeros(dim)
        w[1:] = np.sqrt(n[1:]) * self(n[1:])
        return w

    def aux_weights(self, dim: int) -> np.ndarray:
        """sqrt(n) / f(n) for n = 0..dim-1 (the matrix elements of B)."""
        n = np.arange(dim, dtype=float)
        w = np.zeros(dim)
        with np.errstate(divide="ignore", invalid="ignore"):
            w[1:] = np.sqrt(n[1:]) / self(n[1:])
        return w


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense (nmax+1)-square operator with a semantic label."""

    entries: np.ndarray
    label: str
    cutoff: Cutoff

    def __post_init__(self):
        if self.entries.shape != (self.cutoff.dim, self.cutoff.dim):
            raise ValueError(
                f"{self.label}: shape {self.entries.shape} does not match cutoff dim {self.cutoff.dim}"
            )
        self.entries.setflags(write=False)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other

    @property
    def dag(self) -> np.ndarray:
        return self.entries.conj().T


def log_factorial(n: int) -> float:
    if n < 0:
        raise ValueError("factorial of a negative integer")
    if n < _EXACT_FACTORIAL_LIMIT:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def sqrt_factorial_ratio(n: int, m: int) -> float:
    """sqrt(n! / m!) evaluated in log space."""
    return math.exp(0.5 * (log_factorial(n) - log_factorial(m)))


def laguerre_assoc(n: int, k, x):
    """Associated Laguerre polynomial L_n^k(x) by upward recurrence in n.

    ``k`` may be any integer (negative orders follow the polynomial
    continuation of the recurrence); ``x`` may be an array.
    """
    if n < 0:
        raise ValueError("Laguerre degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for i in range(1, n):
        prev, cur = cur, ((2 * i + 1 + k - x) * cur - (i + k) * prev) / (i + 1)
    return cur if np.ndim(cur) else float(cur)


def displacement_element(m: int, n: int, alpha: complex) -> complex:
    """<m| D(alpha) |n> via the Laguerre closed form."""
    alpha = complex(alpha)
    if m < n:
        # <m|D(a)|n> = conj(<n|D(-a)|m>)
        return displacement_element(n, m, -alpha).conjugate()
    x = abs(alpha) ** 2
    lag = laguerre_assoc(n, m - n, x)
    return complex(sqrt_factorial_ratio(n, m) * alpha ** (m - n) * math.exp(-x / 2) * lag)


def displacement_matrix(alpha, dim: int, reduced: bool = False, cols: int | None = None) -> np.ndarray:
    """Matrix of D(alpha) on levels 0..dim-1, batched over ``alpha``.

    Entry (n+s, n) is sqrt(n!/(n+s)!) alpha^s e^{-|alpha|^2/2} L_n^s(|alpha|^2),
    with the Laguerre values from the forward degree recurrence at fixed order s
    and the prefactor in log space; entries above the diagonal follow from
    <m|D(a)|n> = conj(<n|D(-a)|m>).  (The textbook column recurrence
    D[m,n] ~ sqrt(m) D[m-1,n-1] - alpha* D[m,n-1] loses all accuracy for
    |alpha| of a few units at dim ~ 40, so it is not used.)
    With ``reduced=True`` the overall factor exp(-|alpha|^2 / 2) is omitted.
    ``cols`` extends the column range to 0..cols-1 (rectangular block).
    """
    alpha = np.asarray(alpha, dtype=complex)
    cols = dim if cols is None else cols
    x = np.abs(alpha) ** 2
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(alpha))
    phase = np.exp(1j * np.angle(alpha))
    big = max(dim, cols)
    lf = np.array([log_factorial(i) for i in range(big)])
    zero = (alpha == 0)[..., None]
    out = np.zeros(alpha.shape + (dim, cols), dtype=complex)

    def block(s, length):
        # L_i^s(x) for i < length, times sqrt(i!/(i+s)!) |alpha|^s
        lag = np.empty(alpha.shape + (length,))
        lag[..., 0] = 1.0
        if length > 1:
            lag[..., 1] = 1.0 + s - x
        for i in range(1, length - 1):
            lag[..., i + 1] = ((2 * i + 1 + s - x) * lag[..., i] - (i + s) * lag[..., i - 1]) / (i + 1)
        if s == 0:
            return lag
        i = np.arange(length)
        with np.errstate(invalid="ignore"):
            mag = np.exp(0.5 * (lf[i] - lf[i + s]) + s * logr[..., None])
        return np.where(zero, 0.0, mag * lag)

    for s in range(dim):  # on and below the diagonal: row n+s, column n
        length = min(dim - s, cols)
        if length > 0:
            n = np.arange(length)
            out[..., n + s, n] = block(s, length) * (phase ** s)[..., None]
    for s in range(1, cols):  # above: row m, column m+s
        length = min(dim, cols - s)
        if length > 0:
            m = np.arange(length)
            out[..., m, m + s] = block(s, length) * ((-np.conj(phase)) ** s)[..., None]
    if not reduced:
        out *= np.exp(-x / 2)[..., None, None]
    return out


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _lowering_from_weights(w: np.ndarray) -> np.ndarray:
    return np.diag(w[1:], 1).astype(complex)


def build_deformed_ladders(f: DeformationFn, c: Cutoff):
    """Return (A, A^dag, B, B^dag) with A = a f(N) and B = a f(N)^-1."""
    wa = f.lowering_weights(c.dim)
    wb = f.aux_weights(c.dim)
    if not (np.all(np.isfinite(wa)) and np.all(np.isfinite(wb))):
        raise DeformationError(f"deformation {f.label} gives non-finite ladder weights below nmax={c.nmax}")
    a = _lowering_from_weights(wa)
    b = _lowering_from_weights(wb)
    return (
        OperatorMatrix(a, "A", c),
        OperatorMatrix(a.conj().T.copy(), "A+", c),
        OperatorMatrix(b, "B", c),
        OperatorMatrix(b.conj().T.copy(), "B+", c),
    )


def expm_nilpotent(x: np.ndarray) -> np.ndarray:
    """exp(x) for a strictly triangular matrix; the power series terminates."""
    dim = x.shape[0]
    out = np.eye(dim, dtype=complex)
    term = np.eye(dim, dtype=complex)
    for p in range(1, dim):
        term = term @ x / p
        if not term.any():
            break
        out += term
    return out


def expm_nilpotent_apply(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """exp(x) @ v for strictly triangular ``x`` without forming exp(x)."""
    out = np.array(v, dtype=complex)
    term = out.copy()
    for p in range(1, x.shape[0]):
        term = x @ term / p
        if not term.any():
            break
        out += term
    return out


def _displacement_factors(alpha, f, variant, c):
    A, Ad, B, Bd = build_deformed_ladders(f, c)
    alpha = complex(alpha)
    if variant == "prime":
        return alpha * Ad.entries, -alpha.conjugate() * B.entries
    if variant == "double_prime":
        return alpha * Bd.entries, -alpha.conjugate() * A.entries
    raise ValueError(f"variant must be 'prime' or 'double_prime', got {variant!r}")


def deformed_displacement(alpha: complex, f: DeformationFn, variant: str, c: Cutoff) -> OperatorMatrix:
    """Disentangled generalized displacement exp(-|a|^2/2) exp(X_up) exp(X_down).

    ``prime``: X_up = alpha A^dag, X_down = -alpha* B.
    ``double_prime``: X_up = alpha B^dag, X_down = -alpha* A.
    """
    up, down = _displacement_factors(alpha, f, variant, c)
    mat = math.exp(-abs(alpha) ** 2 / 2) * expm_nilpotent(up) @ expm_nilpotent(down)
    label = "D'_f" if variant == "prime" else "D''_f"
    return OperatorMatrix(mat, f"{label}({complex(alpha):g})", c)


def apply_deformed_displacement(alpha, f: DeformationFn, variant: str, c: Cutoff, n: int) -> np.ndarray:
    """Column n of ``deformed_displacement`` computed by vector application."""
    up, down = _displacement_factors(alpha, f, variant, c)
    v = np.zeros(c.dim, dtype=complex)
    v[n] = 1.0
    v = expm_nilpotent_apply(up, expm_nilpotent_apply(down, v))
    return math.exp(-abs(alpha) ** 2 / 2) * v
