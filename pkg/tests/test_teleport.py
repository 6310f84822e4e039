import math

import numpy as np
import pytest

from cvteleport.charfun import InputSpec, chi_input, chi_resource
from cvteleport.errors import NonConvergent
from cvteleport.fock import Cutoff, DeformationFn
from cvteleport.states import ResourceSpec, make_resource, vacuum_two_mode
from cvteleport.teleport import (
    chi_output,
    fidelity,
    fidelity_quadrature,
    fidelity_series_coherent,
    fidelity_series_squeezed,
    k15,
    k17,
)


def brute_force_fidelity(inp, res, L=5.0, h=0.05):
    """Plain 2-D trapezoid rule on a square; slow but independent of the GH machinery."""
    xs = np.arange(-L, L + h / 2, h)
    total = 0j
    for x in xs:
        g = x + 1j * xs
        total += np.sum(chi_input(inp, g) * chi_input(inp, -g) * chi_resource(res, -np.conj(g), -g))
    return (total * h * h / math.pi).real


def test_chi_output_examples():
    res = vacuum_two_mode(4)
    a0 = 0.5 + 0.2j
    g = 0.3 - 0.4j
    expect = np.exp(-1.5 * abs(g) ** 2 + np.conj(a0) * g - a0 * np.conj(g))
    assert chi_output(InputSpec.coherent(a0), res, g) == pytest.approx(expect, abs=1e-14)
    assert chi_output(InputSpec.coherent(a0), make_resource(ResourceSpec(1, 1, "subtract", 1.0)), 0) == pytest.approx(1)


def test_factorwise_chi_output():
    res = make_resource(ResourceSpec(1, 1, "subtract", 1.0))
    inp = InputSpec.coherent(0.3)
    g = 0.4
    assert chi_output(inp, res, g) == pytest.approx(chi_input(inp, g) * chi_resource(res, np.conj(g), g), abs=1e-15)


@pytest.mark.parametrize("a0", [0, 1, 1 + 1j, 2])
def test_vacuum_resource_is_classical_limit(a0):
    assert fidelity_quadrature(InputSpec.coherent(a0), vacuum_two_mode(3)).value == pytest.approx(0.5, abs=1e-10)


def test_kernel_values():
    assert k15(0, 0) == pytest.approx(0.5)
    assert k15(1, 0) == 0.0
    for m, l in [(0, 0), (2, 0), (3, 1), (4, 4), (6, 2)]:
        assert complex(k17(m, l, 0.0, 0.0)) == pytest.approx(k15(m, l), abs=1e-14)


@pytest.mark.parametrize("spec", [
    ResourceSpec(1, 1, "add", 0.7),
    ResourceSpec(2, 1, "subtract", 1.3 + 0.4j),
    ResourceSpec(0, 2, "subtract", 0.9, DeformationFn.inv_sqrt_n()),
])
def test_coherent_series_matches_quadrature(spec):
    s = fidelity_series_coherent(spec)
    q = fidelity_quadrature(InputSpec.coherent(0.4), make_resource(spec))
    assert s.value == pytest.approx(q.value, abs=1e-10)
    assert s.convergence["drift"] <= 1e-8
    assert 0 <= s.value <= 1


def test_squeezed_series_matches_quadrature():
    spec = ResourceSpec(1, 1, "subtract", 0.6)
    c = Cutoff(30, check_tail=False)
    for r, z in [(0.5, 0.0), (1.0, 1.2)]:
        s = fidelity_series_squeezed(spec, r, z, c, certify=False)
        q = fidelity_quadrature(InputSpec.squeezed(r, z), make_resource(spec, c))
        assert s.value == pytest.approx(q.value, abs=1e-10)
        assert s.convergence["certified"] is False


def test_quadrature_matches_brute_force():
    spec = ResourceSpec(1, 1, "add", 0.8)
    res = make_resource(spec, Cutoff(30, check_tail=False))
    for inp in (InputSpec.coherent(0.2), InputSpec.squeezed(0.7, 0.6)):
        assert fidelity_quadrature(inp, res).value == pytest.approx(brute_force_fidelity(inp, res), abs=1e-8)


def test_photon_subtraction_from_vacuum_follows_k0_curve():
    for a in (0.5, 1.5, 2.5):
        base = fidelity_series_coherent(ResourceSpec(0, 0, "none", a)).value
        for k in (1, 2):
            assert fidelity_series_coherent(ResourceSpec(0, k, "subtract", a)).value == pytest.approx(base, abs=1e-12)


def test_dispatcher_and_errors():
    spec = ResourceSpec(1, 0, "none", 0.5)
    inp = InputSpec.squeezed(0.3)
    a = fidelity(inp, spec, "series")
    b = fidelity(inp, spec, "quadrature")
    assert a.method == "series" and b.method == "quadrature"
    assert a.value == pytest.approx(b.value, abs=1e-10)
    with pytest.raises(ValueError):
        fidelity(inp, spec, "guess")
    with pytest.raises(NonConvergent):
        fidelity_quadrature(inp, make_resource(spec), nodes=96, max_nodes=96)
