"""Symmetric-ordered characteristic functions of the input and resource states."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeriesDivergence
from .fock import displacement_matrix, laguerre_assoc, log_factorial
from .states import TwoModeState

SERIES_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class InputSpec:
    """State to be teleported: coherent(alpha0) or squeezed vacuum(r, zeta)."""

    kind: str
    alpha0: complex = 0.0
    r: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("coherent", "squeezed"):
            raise ValueError(f"input kind must be 'coherent' or 'squeezed', got {self.kind!r}")
        if self.r < 0:
            raise ValueError("squeezing modulus r must be >= 0")
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        object.__setattr__(self, "zeta", float(self.zeta) % (2 * math.pi))

    @classmethod
    def coherent(cls, alpha0=0.0):
        return cls("coherent", alpha0=alpha0)

    @classmethod
    def squeezed(cls, r, zeta=0.0):
        return cls("squeezed", r=float(r), zeta=zeta)

    def meta(self) -> dict:
        if self.kind == "coherent":
            return {"kind": "coherent", "alpha0": [self.alpha0.real, self.alpha0.imag]}
        return {"kind": "squeezed", "r": self.r, "zeta": self.zeta}


def chi_input(spec: InputSpec, gamma):
    g = np.asarray(gamma, dtype=complex)
    if spec.kind == "coherent":
        a0 = spec.alpha0
        out = np.exp(-np.abs(g) ** 2 / 2 + np.conj(a0) * g - a0 * np.conj(g))
    else:
        r, z = spec.r, spec.zeta
        out = np.exp(
            -(2 * np.abs(g) ** 2 * np.cosh(2 * r)
              + (g ** 2 * np.exp(-1j * z) + np.conj(g) ** 2 * np.exp(1j * z)) * np.sinh(2 * r)) / 4
        )
    return out if out.ndim else complex(out)


def chi_resource(state: TwoModeState, gamma1, gamma2, method: str = "trace"):
    """<phi| D(gamma1) (x) D(gamma2) |phi>, broadcast over the gamma arrays."""
    if method == "trace":
        return _chi_trace(state, gamma1, gamma2)
    if method == "closed_form":
        return _chi_closed(state, gamma1, gamma2)
    raise ValueError(f"unknown method {method!r}")


def _chi_trace(state, gamma1, gamma2):
    g1, g2 = np.broadcast_arrays(np.asarray(gamma1, complex), np.asarray(gamma2, complex))
    M = state.coeffs
    D1 = displacement_matrix(g1, state.dim)
    D2 = displacement_matrix(g2, state.dim)
    X = D1 @ M @ np.swapaxes(D2, -1, -2)
    out = np.einsum("ji,...ji->...", M.conj(), X)
    return out if out.ndim else complex(out)


def source_coefficients(state: TwoModeState) -> np.ndarray:
    """Recover the single-mode amplitudes C_m of a beam-splitter output.

    The first row holds C_m / 2^{m/2}; the remaining entries are checked
    against the splitter map so that arbitrary two-mode states are refused.
    """
    from .states import SingleModeState, beam_split

    m = np.arange(state.dim)
    c = state.coeffs[0] * 2.0 ** (m / 2)
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValueError("closed-form resource function applies only to beam-splitter outputs")
    rebuilt = beam_split(SingleModeState(c.copy(), state.cutoff, state.tail_mass)).coeffs
    if not np.max(np.abs(rebuilt - state.coeffs)) <= 1e-10:
        raise ValueError("closed-form resource function applies only to beam-splitter outputs")
    return c


def _ladder_table(g: complex, dim: int) -> np.ndarray:
    """E[j, k] = gamma^{j-k} L_k^{j-k}(|gamma|^2), so <j|D|k> = sqrt(k!/j!) e^{-|g|^2/2} E[j, k].

    Negative orders use gamma^{-s} L_k^{-s}(x) = (-gamma*)^s (k-s)!/k! L_{k-s}^s(x),
    which keeps the table finite at gamma = 0.
    """
    x = abs(g) ** 2
    E = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        for k in range(dim):
            if j >= k:
                E[j, k] = g ** (j - k) * laguerre_assoc(k, j - k, x)
            else:
                s = k - j
                ratio = math.exp(log_factorial(j) - log_factorial(k))
                E[j, k] = (-np.conj(g)) ** s * ratio * laguerre_assoc(j, s, x)
    return E


def _chi_closed(state, gamma1, gamma2):
    """Double series over (m, l) with the inner (j, k) sum taken independently.

    chi = e^{-(|g1|^2+|g2|^2)/2} sum_{m,l} C_m* C_l 2^{-(m+l)/2} sqrt(l!/m!)
          sum_{j<=m, k<=l} C(m, j) g1^{j-k} L_k^{j-k}(|g1|^2) g2^{(m-j)-(l-k)} L_{l-k}^{(m-j)-(l-k)}(|g2|^2)
    """
    c = source_coefficients(state)
    dim = state.dim
    lf = np.array([log_factorial(i) for i in range(dim)])
    pref = np.exp(0.5 * (lf[None, :] - lf[:, None]) - 0.5 * (np.arange(dim)[:, None] + np.arange(dim)[None, :]) * math.log(2))
    weights = np.conj(c)[:, None] * c[None, :] * pref
    binom = np.array([[math.comb(j + a, j) if j + a < dim else 0 for a in range(dim)] for j in range(dim)], dtype=float)

    def one(g1, g2):
        E1 = _ladder_table(g1, dim)
        E2 = _ladder_table(g2, dim)
        S = np.zeros((dim, dim), dtype=complex)
        for j in range(dim):
            row = binom[j, : dim - j, None] * E2[: dim - j]
            for k in range(dim):
                if E1[j, k] != 0:
                    S[j:, k:] += E1[j, k] * row[:, : dim - k]
        return np.exp(-(abs(g1) ** 2 + abs(g2) ** 2) / 2) * np.sum(weights * S)

    g1, g2 = np.broadcast_arrays(np.asarray(gamma1, complex), np.asarray(gamma2, complex))
    at0 = one(0j, 0j)
    if abs(at0 - 1.0) > SERIES_CHECK_TOL:
        raise SeriesDivergence(f"closed-form series gives chi(0,0) = {at0:.12g}")
    out = np.array([one(a, b) for a, b in zip(g1.ravel(), g2.ravel())]).reshape(g1.shape)
    return out if out.ndim else complex(out)
