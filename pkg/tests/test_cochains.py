import numpy as np
import pytest
from hypothesis import given, settings

from gaussbonnet.cochains import (
    Cochain0, Cochain1, GraphMismatch, extend_by_zero, inner0, inner1, inner1_halfsum,
    parse_cochain0, parse_cochain1, restrict, serialize_cochain,
)
from gaussbonnet.graph import GraphError, ParseError, parse_graph
from gaussbonnet.operators import d
from gaussbonnet.randgraph import random_cochain0, random_cochain1

from conftest import graphs


def test_inner0_indicator():
    g = parse_graph("v a 3\nv b 1\ne a b 1\n")
    f = Cochain0.indicator(g, "a")
    assert inner0(f, f) == 3.0


def test_inner0_zero(path3):
    assert inner0(Cochain0(path3), Cochain0.constant(path3, 5.0)) == 0.0


def test_inner0_two_vertex(two_vertex):
    assert inner0(Cochain0(two_vertex, [1, -1]), Cochain0(two_vertex, [1, 1])) == 0.0


def test_inner1_basis_form():
    g = parse_graph("v a 1\nv b 1\ne a b 5\n")
    e = Cochain1.basis(g, "a", "b")
    # half-sum over both orientations: (1/2)(5 * 1 + 5 * (-1)^2)
    assert inner1_halfsum(e, e) == 5.0
    assert inner1(e, e) == 5.0
    assert e.norm() ** 2 == pytest.approx(5.0, rel=1e-15)


def test_inner1_disjoint_supports(triangle):
    assert inner1(Cochain1.basis(triangle, "a", "b"), Cochain1.basis(triangle, "b", "c")) == 0.0


def test_inner1_zero(triangle):
    assert inner1(Cochain1(triangle), Cochain1.basis(triangle, "a", "c")) == 0.0


def test_oddness(triangle):
    phi = Cochain1.from_dict(triangle, {("c", "a"): 2.5})
    assert phi("c", "a") == 2.5
    assert phi("a", "c") == -2.5


def test_both_orientations_rejected(two_vertex):
    with pytest.raises(GraphError):
        Cochain1.from_dict(two_vertex, {("a", "b"): 1.0, ("b", "a"): -1.0})


def test_graph_mismatch(two_vertex):
    other = parse_graph("v a 1.0\nv b 1.0\ne a b 1.0\n")
    with pytest.raises(GraphMismatch):
        inner0(Cochain0(two_vertex), Cochain0(other))
    with pytest.raises(GraphMismatch):
        Cochain1(two_vertex) + Cochain1(other)
    with pytest.raises(GraphMismatch):
        Cochain0(two_vertex, [1, 2, 3])


def test_extend_then_restrict(path3):
    k0 = path3.subgraph(["a", "b"])
    f = Cochain0(k0, [2.0, -1.0])
    phi = extend_by_zero(d(f), path3)
    assert phi("b", "c") == 0.0
    assert np.array_equal(restrict(phi, k0).values, d(f).values)
    assert np.array_equal(restrict(extend_by_zero(f, path3), k0).values, f.values)


def test_restrict_zero(path3):
    k0 = path3.subgraph(["b", "c"])
    assert not restrict(Cochain1(path3), k0).values.any()
    assert not restrict(Cochain0(path3), k0).values.any()


def test_values_are_read_only(path3):
    f = Cochain0(path3, [1, 2, 3])
    with pytest.raises(ValueError):
        f.values[0] = 0


@settings(max_examples=50, deadline=None)
@given(graphs(max_vertices=20))
def test_halfsum_equals_canonical_sum(gr):
    g, rng = gr
    phi, psi = random_cochain1(rng, g), random_cochain1(rng, g)
    assert inner1_halfsum(phi, psi) == inner1(phi, psi)


@settings(max_examples=50, deadline=None)
@given(graphs(max_vertices=20))
def test_inner_products_symmetric_bilinear_positive(gr):
    g, rng = gr
    for make, ip in ((random_cochain0, inner0), (random_cochain1, inner1)):
        x, y, z = make(rng, g), make(rng, g), make(rng, g)
        a, b = rng.standard_normal(2)
        assert ip(x, y) == ip(y, x)
        lhs = ip(a * x + b * y, z)
        rhs = a * ip(x, z) + b * ip(y, z)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * (x.norm() + y.norm()) * z.norm())
        assert ip(x, x) > 0


def test_file_round_trip(triangle):
    f = Cochain0(triangle, [0.1, -2.0, 1e-300])
    phi = Cochain1(triangle, [1 / 3, -7.25, 0.0])
    f2 = parse_cochain0(triangle, serialize_cochain(f))
    phi2 = parse_cochain1(triangle, serialize_cochain(phi))
    assert np.array_equal(f.values, f2.values) and np.array_equal(phi.values, phi2.values)


def test_cochain1_file_reverse_orientation(triangle):
    phi = parse_cochain1(triangle, "c a 2.0\n")
    assert phi("a", "c") == -2.0


@pytest.mark.parametrize("text, needle", [
    ("a b 1\nb a 1\n", "already listed"),
    ("a zz 1\n", "no edge"),
    ("a b\n", "expected"),
])
def test_cochain1_file_errors(triangle, text, needle):
    with pytest.raises(ParseError, match=needle):
        parse_cochain1(triangle, text)


def test_cochain0_file_errors(triangle):
    with pytest.raises(ParseError, match="unknown vertex"):
        parse_cochain0(triangle, "q 1\n")
    with pytest.raises(ParseError, match="already listed"):
        parse_cochain0(triangle, "a 1\na 2\n")
