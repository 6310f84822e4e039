"""Single-mode displaced Fock states (plain, photon-added, photon-subtracted,
f-deformed) and the two-mode resource obtained from a 50:50 beam splitter."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TailMassExceeded, ZeroState
from .fock import (
    Cutoff,
    DeformationFn,
    apply_deformed_displacement,
    build_deformed_ladders,
    displacement_element,
    log_factorial,
)

OPERATIONS = ("none", "add", "subtract")
_ZERO_REL = 1e-24


@dataclass(frozen=True)
class ResourceSpec:
    """Parameters of the state injected into the beam splitter (vacuum in the other port)."""

    n: int = 0
    k: int = 0
    operation: str = "none"
    alpha: complex = 0.0
    deformation: DeformationFn = field(default_factory=DeformationFn.identity)
    variant: str = "prime"

    def __post_init__(self):
        if self.operation not in OPERATIONS:
            raise ValueError(f"operation must be one of {OPERATIONS}, got {self.operation!r}")
        if self.n < 0 or self.k < 0:
            raise ValueError("n and k must be non-negative")
        if self.operation == "none" and self.k != 0:
            raise ValueError("operation 'none' requires k = 0")
        if self.variant not in ("prime", "double_prime"):
            raise ValueError(f"unknown displacement variant {self.variant!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if isinstance(self.deformation, str):
            object.__setattr__(self, "deformation", DeformationFn.parse(self.deformation))

    @property
    def label(self) -> str:
        op = "none" if self.operation == "none" else self.operation
        return f"n={self.n},k={self.k},{op}"

    def meta(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "operation": self.operation,
            "alpha": [self.alpha.real, self.alpha.imag],
            "deformation": self.deformation.label,
            "variant": self.variant,
        }


def default_cutoff(spec: ResourceSpec, tail_tol: float = 1e-12) -> Cutoff:
    nmax = max(40, math.ceil((abs(spec.alpha) + 3) ** 2) + spec.n + spec.k + 15)
    return Cutoff(nmax, tail_tol)


@dataclass(frozen=True, eq=False)
class SingleModeState:
    coeffs: np.ndarray
    cutoff: Cutoff
    tail_mass: float
    spec: ResourceSpec | None = None

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.cutoff.dim


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Amplitudes coeffs[j, i] of |j, i> on the truncated two-mode space."""

    coeffs: np.ndarray
    cutoff: Cutoff
    tail_mass: float
    spec: ResourceSpec | None = None

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.cutoff.dim


def norm_sq_added(n: int, k: int, alpha: complex) -> float:
    """|| a^dag^k D(alpha) |n> ||^2 in closed form."""
    x = abs(alpha) ** 2
    return sum(
        math.comb(k, p) ** 2 * x ** (k - p) * math.exp(log_factorial(n + p) - log_factorial(n))
        for p in range(k + 1)
    )


def norm_sq_subtracted(n: int, k: int, alpha: complex) -> float:
    """|| a^k D(alpha) |n> ||^2 in closed form."""
    x = abs(alpha) ** 2
    return sum(
        math.comb(k, p) ** 2 * x ** (k - p) * math.exp(log_factorial(n) - log_factorial(n - p))
        for p in range(min(k, n) + 1)
    )


def _pad(spec: ResourceSpec, c: Cutoff) -> int:
    return max(20, c.nmax // 2) + spec.k


def _analytic_vector(spec: ResourceSpec, top: int) -> np.ndarray:
    """Unnormalized a^dag^k D(alpha)|n> or a^k D(alpha)|n> on levels 0..top."""
    n, k, alpha = spec.n, spec.k, spec.alpha
    v = np.zeros(top + 1, dtype=complex)
    for m in range(top + 1):
        if spec.operation == "subtract":
            v[m] = math.exp(0.5 * (log_factorial(m + k) - log_factorial(m))) * displacement_element(m + k, n, alpha)
        elif m >= k:
            v[m] = math.exp(0.5 * (log_factorial(m) - log_factorial(m - k))) * displacement_element(m - k, n, alpha)
    return v


def _operator_vector(spec: ResourceSpec, top: int) -> np.ndarray:
    """Same vector via the deformed operator matrices; exact on levels 0..top."""
    work = Cutoff(top + spec.k + 1)
    v = apply_deformed_displacement(spec.alpha, spec.deformation, spec.variant, work, spec.n)
    A, Ad, _, _ = build_deformed_ladders(spec.deformation, work)
    ladder = A if spec.operation == "subtract" else Ad
    if spec.operation != "none":
        for _ in range(spec.k):
            v = ladder @ v
    return v[: top + 1]


def make_single_mode(spec: ResourceSpec, c: Cutoff | None = None, route: str = "auto") -> SingleModeState:
    """Normalized Fock coefficients of the resource's input state.

    ``route`` selects the analytic displacement-element construction
    (``analytic``, identity deformation only) or the operator-matrix one
    (``operator``); ``auto`` uses the analytic route when f = 1.
    """
    c = c or default_cutoff(spec)
    if route == "auto":
        route = "analytic" if spec.deformation.kind == "identity" else "operator"
    if route == "analytic" and spec.deformation.kind != "identity":
        raise ValueError("the analytic route only covers the undeformed case")
    top = c.nmax + _pad(spec, c)
    if route == "analytic":
        v = _analytic_vector(spec, top)
    else:
        v = _operator_vector(spec, top)

    total = float(np.vdot(v, v).real)
    if spec.operation == "subtract":
        # compare against the pre-subtraction scale to catch exact annihilation
        ref = 1.0 if spec.deformation.kind == "identity" else max(total, 1e-300)
        if total <= _ZERO_REL * ref or total == 0.0:
            raise ZeroState(f"{spec.label} at alpha={spec.alpha:g} is the zero vector")
    if not np.isfinite(total) or total == 0.0:
        raise ZeroState(f"{spec.label}: state vector vanished or overflowed")
    tail = float(np.vdot(v[c.dim:], v[c.dim:]).real) / total
    if c.check_tail and tail > c.tail_tol:
        raise TailMassExceeded(tail, c.tail_tol, c.nmax)
    kept = v[: c.dim]
    return SingleModeState(kept / np.linalg.norm(kept), c, tail, spec)


def coherent_coeffs(alpha: complex, dim: int) -> np.ndarray:
    m = np.arange(dim)
    logs = np.array([0.5 * log_factorial(int(i)) for i in m])
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    return np.exp(-abs(alpha) ** 2 / 2 + m * np.log(abs(alpha)) - logs) * np.exp(1j * np.angle(alpha) * m)


def beam_split(s: SingleModeState) -> TwoModeState:
    """|m, 0> -> 2^{-m/2} sum_j sqrt(C(m, j)) |j, m-j>, applied linearly."""
    dim = s.dim
    M = np.zeros((dim, dim), dtype=complex)
    lf = np.array([log_factorial(i) for i in range(dim)])
    for m in range(dim):
        cm = s.coeffs[m]
        if cm == 0:
            continue
        j = np.arange(m + 1)
        amp = np.exp(0.5 * (lf[m] - lf[j] - lf[m - j]) - 0.5 * m * math.log(2.0))
        M[j, m - j] = cm * amp
    M /= np.linalg.norm(M)
    return TwoModeState(M, s.cutoff, s.tail_mass, s.spec)


def make_resource(spec: ResourceSpec, c: Cutoff | None = None) -> TwoModeState:
    return beam_split(make_single_mode(spec, c))


def vacuum_two_mode(nmax: int = 1) -> TwoModeState:
    c = Cutoff(nmax)
    M = np.zeros((c.dim, c.dim), dtype=complex)
    M[0, 0] = 1.0
    return TwoModeState(M, c, 0.0)


def two_mode_from_coeffs(M, nmax: int | None = None, tail_mass: float = 0.0) -> TwoModeState:
    """Wrap (and zero-pad) an explicit coefficient matrix; normalizes it."""
    M = np.asarray(M, dtype=complex)
    nmax = max(nmax or 1, M.shape[0] - 1, M.shape[1] - 1, 1)
    out = np.zeros((nmax + 1, nmax + 1), dtype=complex)
    out[: M.shape[0], : M.shape[1]] = M
    out /= np.linalg.norm(out)
    return TwoModeState(out, Cutoff(nmax), tail_mass)


# ---------------------------------------------------------------- exchange form


def _meta(state) -> dict:
    return {
        "nmax": state.cutoff.nmax,
        "tail_tol": state.cutoff.tail_tol,
        "check_tail": state.cutoff.check_tail,
        "tail_mass": state.tail_mass,
        "spec": state.spec.meta() if state.spec is not None else None,
    }


def _records(state):
    M = state.coeffs if state.coeffs.ndim == 2 else state.coeffs[:, None]
    j, i = np.nonzero(M)
    return [(int(a), int(b), float(M[a, b].real), float(M[a, b].imag)) for a, b in zip(j, i)]


def state_to_json(state) -> str:
    doc = {"modes": state.coeffs.ndim, **_meta(state), "amplitudes": _records(state)}
    return json.dumps(doc)


def _spec_from_meta(meta):
    if not meta:
        return None
    return ResourceSpec(
        n=meta["n"],
        k=meta["k"],
        operation=meta["operation"],
        alpha=complex(*meta["alpha"]),
        deformation=DeformationFn.parse(meta["deformation"]),
        variant=meta["variant"],
    )


def _build(modes, meta, records):
    c = Cutoff(meta["nmax"], meta["tail_tol"], meta.get("check_tail", True))
    spec = _spec_from_meta(meta.get("spec"))
    if modes == 1:
        v = np.zeros(c.dim, dtype=complex)
        for j, _, re, im in records:
            v[int(j)] = complex(float(re), float(im))
        return SingleModeState(v, c, float(meta["tail_mass"]), spec)
    M = np.zeros((c.dim, c.dim), dtype=complex)
    for j, i, re, im in records:
        M[int(j), int(i)] = complex(float(re), float(im))
    return TwoModeState(M, c, float(meta["tail_mass"]), spec)


def state_from_json(text: str):
    doc = json.loads(text)
    return _build(doc["modes"], doc, doc["amplitudes"])


def state_to_csv(state) -> str:
    """CSV exchange form: a ``#``-prefixed JSON metadata line, then j,i,re,im rows."""
    buf = io.StringIO()
    meta = {"modes": state.coeffs.ndim, **_meta(state)}
    buf.write("# " + json.dumps(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "i", "re", "im"])
    for j, i, re, im in _records(state):
        w.writerow([j, i, repr(re), repr(im)])
    return buf.getvalue()


def state_from_csv(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("state CSV must start with a '#' metadata line")
    meta = json.loads(lines[0][1:])
    rows = list(csv.reader(lines[1:]))
    if rows[0] != ["j", "i", "re", "im"]:
        raise ValueError(f"unexpected state CSV header {rows[0]}")
    return _build(meta["modes"], meta, rows[1:])
