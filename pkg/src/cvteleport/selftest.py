"""Oracle-equivalence checks runnable from the command line."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .charfun import InputSpec, chi_resource
from .fock import Cutoff, DeformationFn, deformed_displacement, displacement_matrix
from .states import ResourceSpec, make_resource, make_single_mode


@dataclass
class Check:
    name: str
    deviation: float
    tol: float
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.deviation <= self.tol


# small fixed cutoffs keep the suite to a few seconds; each pair of routes sees
# the same truncated state, so the comparison is exact up to rounding
_SELF_CUT = Cutoff(30, check_tail=False)
_RESOURCES = [
    ResourceSpec(1, 1, "add", 0.5),
    ResourceSpec(2, 1, "subtract", 0.7),
    ResourceSpec(0, 1, "subtract", 0.5, DeformationFn.parse("inv_sqrt_n")),
    ResourceSpec(1, 2, "add", 0.5, DeformationFn.parse("sqrt_n")),
]


def _series_vs_quadrature(inp):
    from .teleport import fidelity_quadrature, fidelity_series_coherent, fidelity_series_squeezed

    dev = 0.0
    for spec in _RESOURCES:
        if inp.kind == "coherent":
            s = fidelity_series_coherent(spec, _SELF_CUT, certify=False).value
        else:
            s = fidelity_series_squeezed(spec, inp.r, inp.zeta, _SELF_CUT, certify=False).value
        q = fidelity_quadrature(inp, make_resource(spec, _SELF_CUT)).value
        dev = max(dev, abs(s - q))
    return dev


def _chi_closed_vs_trace():
    rng = np.random.default_rng(7)
    g1 = rng.normal(scale=0.8, size=8) + 1j * rng.normal(scale=0.8, size=8)
    g2 = rng.normal(scale=0.8, size=8) + 1j * rng.normal(scale=0.8, size=8)
    dev = 0.0
    for spec in _RESOURCES[:2]:
        st = make_resource(spec, Cutoff(24, check_tail=False))
        dev = max(dev, np.max(np.abs(chi_resource(st, g1, g2, "closed_form") - chi_resource(st, g1, g2, "trace"))))
    return float(dev)


def _analytic_vs_operator():
    dev = 0.0
    for spec in (ResourceSpec(2, 1, "add", 0.8), ResourceSpec(1, 2, "subtract", 1.2 - 0.4j), ResourceSpec(3, 0, "none", 1.0)):
        c = Cutoff(50)
        a = make_single_mode(spec, c, route="analytic").coeffs
        b = make_single_mode(spec, c, route="operator").coeffs
        dev = max(dev, float(np.max(np.abs(a - b))))
    return dev


def _deformed_identity_vs_displacement():
    c = Cutoff(30)
    alpha = 0.6 + 0.3j
    D = deformed_displacement(alpha, DeformationFn.identity(), "prime", Cutoff(90)).entries[: c.dim, : c.dim]
    return float(np.max(np.abs(D - displacement_matrix(alpha, c.dim))))


CHECKS = [
    ("series vs quadrature, coherent input", lambda: _series_vs_quadrature(InputSpec.coherent(0.3)), 1e-8),
    ("series vs quadrature, squeezed input", lambda: _series_vs_quadrature(InputSpec.squeezed(0.6, 0.4)), 1e-8),
    ("closed-form chi vs trace chi", _chi_closed_vs_trace, 1e-8),
    ("analytic vs operator constructor", _analytic_vs_operator, 1e-10),
    ("deformed identity vs displacement", _deformed_identity_vs_displacement, 1e-10),
]


def run_selftest(out=print) -> bool:
    results = []
    for name, fn, tol in CHECKS:
        t0 = time.perf_counter()
        try:
            chk = Check(name, fn(), tol)
        except Exception as exc:  # a crash is a failed check, not an abort
            chk = Check(name, float("inf"), tol, error=f"{type(exc).__name__}: {exc}")
        chk.seconds = time.perf_counter() - t0
        results.append(chk)
    width = max(len(c.name) for c in results)
    out(f"{'check':<{width}}  {'max dev':>10}  {'tol':>8}  {'time':>7}  result")
    for c in results:
        dev = "error" if c.error else f"{c.deviation:.2e}"
        out(f"{c.name:<{width}}  {dev:>10}  {c.tol:>8.0e}  {c.seconds:6.2f}s  {'PASS' if c.passed else 'FAIL'}")
        if c.error:
            out(f"    {c.error}")
    ok = all(c.passed for c in results)
    out(f"{sum(c.passed for c in results)}/{len(results)} checks passed")
    return ok
