"""Ideal continuous-variable teleportation fidelity.

Three independent routes:

* ``fidelity_quadrature``: Gauss-Hermite evaluation of
  F = (1/pi) int d^2g chi_in(g) chi_in(-g) chi_res(-g*, -g);
* ``fidelity_series_coherent``: the closed-form double series for a coherent
  input, with its (m, l) kernel evaluated in exact rational arithmetic;
* ``fidelity_series_squeezed``: the closed-form series for a squeezed-vacuum
  input (Gaussian moments resolved analytically, see ``docs/series.md``).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial.hermite import hermgauss

from .charfun import InputSpec, chi_input, chi_resource
from .errors import NonConvergent, NonRealResult
from .fock import Cutoff, displacement_matrix
from .states import ResourceSpec, TwoModeState, default_cutoff, make_single_mode

QUAD_START = 96
QUAD_CAP = 384
QUAD_TOL = 1e-8
IMAG_TOL = 1e-8
CERT_EXTRA = 20
CERT_TOL = 1e-8
SKIP_BUDGET = 1e-11


@dataclass(frozen=True)
class FidelityResult:
    value: float
    method: str
    resource_meta: dict | None
    input_meta: dict
    convergence: dict = field(default_factory=dict)


def chi_output(inp: InputSpec, resource: TwoModeState, gamma, method: str = "trace"):
    """chi_in(g) chi_res(g*, g)."""
    g = np.asarray(gamma, dtype=complex)
    out = chi_input(inp, g) * chi_resource(resource, np.conj(g), g, method)
    return out if np.ndim(out) else complex(out)


# ------------------------------------------------------------------ quadrature


def _envelope_axes(inp: InputSpec):
    """Rotation angle and Gaussian widths of chi_in(g) chi_in(-g) e^{-|g|^2}.

    In coordinates g = e^{i theta}(u + i v) the product is exp(-a u^2 - b v^2).
    """
    if inp.kind == "coherent":
        return 0.0, 2.0, 2.0
    r = inp.r
    return inp.zeta / 2, 1 + math.exp(2 * r), 1 + math.exp(-2 * r)


def _intermediate_dim(dim: int, a: float, pad: int | None) -> int:
    """Levels kept for the index contracted between the two 1-D factors.

    D(x) spreads level b over roughly b + 2 sqrt(b)|x| + x^2, and the narrower
    envelope axis effectively samples |x| <= sqrt(12 / (a - 1)).
    """
    if pad is None:
        x = math.sqrt(12.0 / (a - 1.0))
        pad = max(20, int(math.ceil(2 * math.sqrt(dim) * x + x * x)))
    return dim + pad


_BLOCK_CACHE: dict = {}
_BLOCK_CACHE_SIZE = 4


def _node_blocks(a: float, b: float, nodes: int, dim: int, P: int):
    """Weighted displacement blocks at the Gauss-Hermite nodes, [:dim, :P] each.

    The blocks do not depend on the state, and a block for a smaller cutoff is a
    slice of a larger one, so one entry per (a, b, nodes) serves a whole sweep.
    """
    key = (a, b, nodes)
    hit = _BLOCK_CACHE.get(key)
    if hit is not None and hit[0].shape[1] >= dim and hit[0].shape[2] >= P:
        return tuple(x[:, :dim, :P] for x in hit)
    if hit is not None:
        dim, P = max(dim, hit[0].shape[1]), max(P, hit[0].shape[2])
    t, w = hermgauss(nodes)
    keep = w > 1e-300
    t, w = t[keep], w[keep]
    u, su = t / math.sqrt(a), np.sqrt(w / math.sqrt(a))
    v, sv = t / math.sqrt(b), np.sqrt(w / math.sqrt(b))
    X = displacement_matrix(-u.astype(complex), dim, reduced=True, cols=P) * su[:, None, None]
    Yp = displacement_matrix(-1j * v, dim, reduced=True, cols=P) * sv[:, None, None]
    Ym = displacement_matrix(1j * v, dim, reduced=True, cols=P) * sv[:, None, None]
    blocks = (X, np.conj(Yp), np.conj(Ym))
    for x in blocks:
        x.setflags(write=False)
    _BLOCK_CACHE.pop(key, None)
    _BLOCK_CACHE[key] = blocks
    while len(_BLOCK_CACHE) > _BLOCK_CACHE_SIZE:
        _BLOCK_CACHE.pop(next(iter(_BLOCK_CACHE)))
    return blocks


def _quad_estimate(M: np.ndarray, a: float, b: float, nodes: int, pad: int | None = None) -> complex:
    # chi_res(-g*, -g) = Tr(Q(x) N(y)) with g = x + iy: the BCH phases of the
    # split D(x + iy) = e^{ixy} D(x) D(iy) cancel between the two modes, and
    # the trace is bilinear, so the 2-D tensor rule collapses to two 1-D sums.
    # The index joining Q and N runs over all levels, hence the padding.
    dim = M.shape[0]
    P = _intermediate_dim(dim, a, pad)
    # X_i = sqrt(w_i) D(-u_i)[:dim, :P];  Q = sum_i X_i^T M^dag X_i
    # N = sum_i D(i v_i) M D(-i v_i)^T, rows/cols restricted to 0..P-1
    # using <a|D(b)|c> = conj(<c|D(-b)|a>): D(iv)[:P, :dim] = conj(Yp)^T and
    # D(-iv)^T[:dim, :P] = conj(Ym), with Yp, Ym the dim x P blocks at -iv, iv
    X, cYp, cYm = _node_blocks(a, b, nodes, dim, P)
    Z = np.matmul(M.conj().T, X)
    Q = X.reshape(-1, P).T @ Z.reshape(-1, P)
    N = cYp.reshape(-1, P).T @ np.matmul(M, cYm).reshape(-1, P)
    return np.trace(Q @ N) / math.pi


def fidelity_quadrature(inp: InputSpec, resource: TwoModeState, nodes: int = QUAD_START,
                        max_nodes: int = QUAD_CAP, tol: float = QUAD_TOL) -> FidelityResult:
    theta, a, b = _envelope_axes(inp)
    dim = resource.dim
    phase = np.exp(1j * theta * (np.arange(dim)[:, None] - np.arange(dim)[None, :]))
    M = resource.coeffs * phase
    prev = _quad_estimate(M, a, b, nodes)
    while True:
        if nodes * 2 > max_nodes:
            raise NonConvergent(f"quadrature did not settle below {tol:g} by {nodes} nodes")
        nodes *= 2
        cur = _quad_estimate(M, a, b, nodes)
        err = abs(cur - prev)
        if err < tol:
            break
        prev = cur
    if abs(cur.imag) > IMAG_TOL:
        raise NonRealResult(f"fidelity has imaginary part {cur.imag:.3e}")
    meta = resource.spec.meta() if resource.spec is not None else None
    return FidelityResult(float(cur.real), "quadrature", meta, inp.meta(),
                          {"nodes": nodes, "error": float(err), "imag": float(cur.imag)})


# ------------------------------------------------------- coherent-input series


def _binom(n: int, x: int) -> int:
    if x < 0 or x > n:
        return 0
    return math.comb(n, x)


@lru_cache(maxsize=None)
def _k15_exact(m: int, l: int) -> Fraction:
    """Inner triple sum of the coherent-input kernel for the pair (m, l), exactly.

    sum_j C(m,j) sum_{r,s} C(j, j+(l-m)/2-r) C(m-j, (l+m)/2-j-s) (-1)^{r+s} h! / (2^{r+s} r! s!)
    with h = (m-l)/2 + r + s; terms with out-of-range binomials or h < 0 vanish.
    The (r, s) double sum is a convolution in r + s.
    """
    if (m + l) % 2:
        return Fraction(0)
    half = (m - l) // 2
    total = Fraction(0)
    for j in range(m + 1):
        a = j + (l - m) // 2
        b = (l + m) // 2 - j
        if a < 0 or b < 0:
            continue
        fa, fb = math.factorial(a), math.factorial(b)
        u = np.array([_binom(j, a - r) * (fa // math.factorial(r)) for r in range(a + 1)], dtype=object)
        v = np.array([_binom(m - j, b - s) * (fb // math.factorial(s)) for s in range(b + 1)], dtype=object)
        if not u.any() or not v.any():
            continue
        conv = np.convolve(u, v)
        num = 0
        for sig, cval in enumerate(conv):
            h = half + sig
            if cval == 0 or h < 0:
                continue
            num += (-1) ** sig * math.factorial(h) * int(cval) * 2 ** (a + b - sig)
        if num:
            total += Fraction(math.comb(m, j) * num, 2 ** (a + b) * fa * fb)
    return total


@lru_cache(maxsize=None)
def k15(m: int, l: int) -> float:
    """Coherent-input fidelity kernel: F = sum_{m,l} C_m* C_l k15(m, l)."""
    s = _k15_exact(m, l)
    if s == 0:
        return 0.0
    scale = math.exp(0.5 * (math.lgamma(l + 1) - math.lgamma(m + 1)) - (m + 1) * math.log(2))
    return (-1) ** (m - l) * float(s) * scale


def _contract(c: np.ndarray, kernel):
    """sum_{m,l} C_m* C_l K(m, l), dropping negligible amplitudes.

    K is the matrix of a quadratic form with values in [0, 1] on unit vectors,
    so |K(m, l)| <= 1 and dropping a set of amplitudes changes the sum by at
    most 2 * ||dropped||_1 * ||c||_1.  Returns (value, that bound).
    """
    mag = np.abs(c)
    order = np.argsort(mag)
    l1 = mag.sum()
    dropped = np.cumsum(mag[order])
    ndrop = int(np.searchsorted(dropped, SKIP_BUDGET / (2 * l1 + 1e-300), side="right"))
    bound = 2 * l1 * (dropped[ndrop - 1] if ndrop else 0.0)
    keep = np.sort(order[ndrop:])
    tot = 0j
    for m in keep:
        for l in keep:
            kv = kernel(int(m), int(l))
            if kv:
                tot += np.conj(c[m]) * c[l] * kv
    return tot, float(bound)


def _series_value(spec, c, kernel):
    state = make_single_mode(spec, c)
    val, bound = _contract(state.coeffs, kernel)
    return val, bound, state


def _certified(spec, c, kernel, certify, method, input_meta):
    c = c or default_cutoff(spec)
    val, bound, state = _series_value(spec, c, kernel)
    conv = {"nmax": c.nmax, "tail_mass": state.tail_mass, "skip_bound": bound}
    if certify and c.check_tail:
        c2 = Cutoff(c.nmax + CERT_EXTRA, c.tail_tol, c.check_tail)
        val2, _, _ = _series_value(spec, c2, kernel)
        drift = abs(val2 - val)
        conv.update(cert_nmax=c2.nmax, drift=float(drift))
        if drift > CERT_TOL:
            raise NonConvergent(f"series drifts by {drift:.3e} between nmax={c.nmax} and {c2.nmax}")
    else:
        conv["certified"] = False
    if abs(val.imag) > IMAG_TOL:
        raise NonRealResult(f"series fidelity has imaginary part {val.imag:.3e}")
    return FidelityResult(float(val.real), method, spec.meta(), input_meta, conv)


def fidelity_series_coherent(spec: ResourceSpec, c: Cutoff | None = None, certify: bool = True) -> FidelityResult:
    """Closed-form coherent-input fidelity (independent of the input amplitude)."""
    return _certified(spec, c, k15, certify, "series", {"kind": "coherent"})


# ------------------------------------------------------- squeezed-input series


def _dfact(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _pack_bits(m: int, l: int) -> int:
    # upper bound on any accumulated table entry, so packed fields never overlap
    bound = (m + 1) * (l + 1) ** 2 * 2 ** (2 * m + l) * math.factorial(l)
    return -(-(bound.bit_length() + 1) // 256) * 256


@lru_cache(maxsize=None)
def _packed(a: int, b: int, bits: int) -> int:
    """sum_r C(a, b-r) b!/r! 2^{bits r}: a non-negative integer polynomial packed into one int."""
    fb = math.factorial(b)
    out = 0
    for r in range(b, -1, -1):
        out = (out << bits) | (_binom(a, b - r) * (fb // math.factorial(r)))
    return out


@lru_cache(maxsize=None)
def _wtable(m: int, l: int):
    """l! * W[d][sigma] as exact integers.

    W collects sum_{j,k} C(m,j) C(l,k) sum_{r+s=sigma} (-1)^sigma C(j, k-r) C(m-j, l-k-s) k!(l-k)!/(l! r! s!)
    grouped by d = j - k. Every factor except the sign is non-negative, so the
    (r, s) convolutions are done as single big-integer products (Kronecker
    substitution) and the sign is applied when unpacking.
    """
    bits = _pack_bits(m, l)
    acc = {}
    for j in range(m + 1):
        cj = math.comb(m, j)
        for k in range(l + 1):
            u = _packed(j, k, bits)
            if not u:
                continue
            v = _packed(m - j, l - k, bits)
            if v:
                acc[j - k] = acc.get(j - k, 0) + cj * math.comb(l, k) * u * v
    mask = (1 << bits) - 1
    out = {}
    for d, packed in acc.items():
        row = []
        for sig in range(l + 1):
            c = packed & mask
            packed >>= bits
            row.append(-c if sig % 2 else c)
        out[d] = row
    return out


@lru_cache(maxsize=None)
def _moment_poly(p: int, q: int):
    """Gaussian moment magnitude for p >= q as {power of tanh(r)/2: rational coefficient}.

    sum_{t <= q, t = p = q mod 2} C(q,t) p! (q-t-1)!! / (2^t (p-t)!!) x^{(p+q)/2 - t}
    """
    out = {}
    for t in range(q + 1):
        if (p - t) % 2 or (q - t) % 2:
            continue
        coef = Fraction(math.comb(q, t) * (math.factorial(p) // _dfact(p - t)) * _dfact(q - t - 1), 2 ** t)
        pw = (p + q) // 2 - t
        out[pw] = out.get(pw, 0) + coef
    return out


@lru_cache(maxsize=None)
def _k17_poly(m: int, l: int):
    """Per d = j - k: exact polynomial in x = tanh(r)/2 (list of Fractions), times l!."""
    if (m - l) % 2:
        return {}
    polys = {}
    for d, row in _wtable(m, l).items():
        acc = {}
        for sig, w in enumerate(row):
            if not w:
                continue
            p, q = m - l - d + sig, d + sig
            if p < 0 or q < 0 or (p - q) % 2:
                continue
            sign = -1 if (p - q) // 2 % 2 else 1  # int power with a negative exponent would give a float
            for pw, coef in _moment_poly(max(p, q), min(p, q)).items():
                acc[pw] = acc.get(pw, 0) + sign * w * coef
        acc = {k: v for k, v in acc.items() if v}
        if acc:
            top = max(acc)
            polys[d] = [Fraction(acc.get(i, 0)) for i in range(top + 1)]
    return polys


@lru_cache(maxsize=None)
def k17(m: int, l: int, r: float, zeta: float) -> complex:
    """Squeezed-input fidelity kernel: F = sum_{m,l} C_m* C_l k17(m, l, r, zeta).

    The exact polynomials in tanh(r)/2 alternate in sign with large
    coefficients, so they are evaluated with mpmath at a working precision set
    from their condition number (float tanh alone loses everything by m ~ 40).
    """
    polys = _k17_poly(m, l)
    if not polys:
        return 0j
    with mpmath.workdps(30):
        x = mpmath.tanh(mpmath.mpf(r)) / 2
        absum = sum(abs(mpmath.mpf(c.numerator) / c.denominator) * x ** i
                    for cs in polys.values() for i, c in enumerate(cs))
    # the sum over d cancels as well, so the budget covers all terms
    with mpmath.workdps(30 + max(0, int(mpmath.log10(absum + 1)))):
        x = mpmath.tanh(mpmath.mpf(r)) / 2
        acc = mpmath.mpc(0)
        for d, coeffs in polys.items():
            val = mpmath.mpf(0)
            for c in reversed(coeffs):
                val = val * x + mpmath.mpf(c.numerator) / c.denominator
            acc += val * mpmath.expj(mpmath.mpf(zeta) * (m - l - 2 * d) / 2)
        scale = mpmath.sqrt(mpmath.factorial(l) / mpmath.factorial(m)) / mpmath.mpf(2) ** ((m + l) / 2)
        tot = complex(acc * scale / mpmath.factorial(l))
    return (-1) ** (m - l) * tot / (2 * math.cosh(r))


def fidelity_series_squeezed(spec: ResourceSpec, r: float, zeta: float = 0.0, c: Cutoff | None = None,
                             certify: bool = True) -> FidelityResult:
    """Closed-form squeezed-vacuum-input fidelity for squeezing modulus ``r`` and angle ``zeta``."""
    inp = InputSpec.squeezed(r, zeta)
    return _certified(spec, c, lambda m, l: k17(m, l, inp.r, inp.zeta), certify, "series", inp.meta())


def fidelity(inp: InputSpec, spec: ResourceSpec, method: str = "series", c: Cutoff | None = None) -> FidelityResult:
    """Convenience dispatcher over input kind and evaluation route."""
    if method == "quadrature":
        from .states import beam_split

        c = c or default_cutoff(spec)
        res = beam_split(make_single_mode(spec, c))
        return fidelity_quadrature(inp, res)
    if method != "series":
        raise ValueError(f"method must be 'series' or 'quadrature', got {method!r}")
    if inp.kind == "coherent":
        out = fidelity_series_coherent(spec, c)
        return FidelityResult(out.value, out.method, out.resource_meta, inp.meta(), out.convergence)
    return fidelity_series_squeezed(spec, inp.r, inp.zeta, c)
