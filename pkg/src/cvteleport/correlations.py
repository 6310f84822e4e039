"""Entanglement entropy and EPR quadrature variances of two-mode pure states."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TailMassExceeded
from .fock import annihilation
from .states import ResourceSpec, TwoModeState, make_resource, make_single_mode


@dataclass(frozen=True)
class CorrelationReport:
    entropy_nats: float
    var_xminus: float
    var_pplus: float
    schmidt_spectrum: np.ndarray

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / math.log(2)


def _entropy(lam: np.ndarray) -> float:
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def entanglement_entropy(state: TwoModeState):
    """Von Neumann entropy (nats) of the reduced state M M^dag, and its spectrum."""
    M = state.coeffs
    lam = np.linalg.eigvalsh(M @ M.conj().T)[::-1]
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    return _entropy(lam), lam


def schmidt_spectrum_svd(state: TwoModeState) -> np.ndarray:
    """Squared singular values of M: the second route to the Schmidt spectrum."""
    s = np.linalg.svd(state.coeffs, compute_uv=False)
    return s ** 2


def entropy_series_literal(spec: ResourceSpec, c=None) -> float:
    """Evaluate -sum_{m,l,j} x ln x with x = |C_m C_l| 2^{-(m+l)/2} sqrt(C(m,j) C(l, l-m+j)).

    This is the expanded entropy formula taken at face value, kept only for
    comparison with ``entanglement_entropy``; it is not an entropy of a
    spectrum and generally disagrees (see docs/series.md).
    """
    coeffs = np.abs(make_single_mode(spec, c).coeffs)
    total = 0.0
    for m, cm in enumerate(coeffs):
        if cm == 0:
            continue
        for l, cl in enumerate(coeffs):
            if cl == 0:
                continue
            base = cm * cl / 2 ** ((m + l) / 2)
            for j in range(m + 1):
                jj = l - m + j
                if jj < 0 or jj > l:
                    continue
                x = base * math.sqrt(math.comb(m, j) * math.comb(l, jj))
                if x > 0:
                    total -= x * math.log(x)
    return total


def _padded(M: np.ndarray, extra: int = 2) -> np.ndarray:
    out = np.zeros((M.shape[0] + extra, M.shape[1] + extra), dtype=complex)
    out[: M.shape[0], : M.shape[1]] = M
    return out


def epr_variance(state: TwoModeState):
    """(Var(x1 - x2), Var(p1 + p2)) with x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2).

    Ladder operators act on a copy of M padded by two levels, so the raising
    terms are exact for the truncated state.
    """
    if state.tail_mass > state.cutoff.tail_tol:
        raise TailMassExceeded(state.tail_mass, state.cutoff.tail_tol, state.cutoff.nmax)
    M = _padded(state.coeffs)
    a = annihilation(M.shape[0])
    ad = a.T
    a1, a1d = a @ M, ad @ M          # a on mode 1 acts on the row index
    a2, a2d = M @ a.T, M @ ad.T      # and on mode 2 on the column index
    xm = (a1 + a1d - a2 - a2d) / math.sqrt(2)
    pp = (a1 - a1d + a2 - a2d) / (1j * math.sqrt(2))

    def var(op):
        mean = np.vdot(M, op)
        return float(np.vdot(op, op).real - abs(mean) ** 2)

    return var(xm), var(pp)


def correlation_report(state: TwoModeState) -> CorrelationReport:
    e, lam = entanglement_entropy(state)
    vx, vp = epr_variance(state)
    return CorrelationReport(e, vx, vp, lam)


def epr_ordering(n: int, k: int, alphas, deformation=None, quantity: str = "var_pplus") -> dict:
    """Compare addition against subtraction EPR variance over ``alphas``.

    Returns how many points have the added state strictly below, equal to
    (within 1e-9) or above the subtracted one, for the chosen variance.
    """
    from .fock import DeformationFn

    f = deformation or DeformationFn.identity()
    below = equal = above = 0
    for alpha in alphas:
        va = correlation_report(make_resource(ResourceSpec(n, k, "add", alpha, f)))
        vs = correlation_report(make_resource(ResourceSpec(n, k, "subtract", alpha, f)))
        x, y = getattr(va, quantity), getattr(vs, quantity)
        if abs(x - y) <= 1e-9:
            equal += 1
        elif x < y:
            below += 1
        else:
            above += 1
    return {"added_lower": below, "equal": equal, "added_higher": above}
