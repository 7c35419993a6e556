import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realvar import corpus
from realvar.parse import ParseError, format_system, parse_polynomial, parse_system
from realvar.polycore import Monomial, Polynomial, PolySystem


def test_single_generator():
    sys = parse_system("vars x1 x2; x1^2 - 2*x1*x2 + 5;")
    assert sys.m == 1 and sys.D == 2 and sys.names == ("x1", "x2")


def test_katsura5():
    sys = corpus.load("katsura5")
    assert (sys.m, sys.n, sys.D) == (6, 6, 2)


def test_dangling_plus():
    with pytest.raises(ParseError) as err:
        parse_system("vars x; x^2 + ;")
    assert err.value.line == 1
    assert err.value.col == 13  # the dangling "+"


def test_error_line_and_column():
    with pytest.raises(ParseError) as err:
        parse_system("vars x y;\nx + y;\nx * $;\n")
    assert (err.value.line, err.value.col) == (3, 5)


@pytest.mark.parametrize(
    "text",
    [
        "x^2;",  # no header
        "vars x; y;",  # undeclared variable
        "vars x;",  # no polynomials
        "vars x; x x;",  # implicit multiplication
        "vars x; (x + 1;",
        "vars x; x / x;",  # division by a non-constant
    ],
)
def test_rejected(text):
    with pytest.raises(ParseError):
        parse_system(text)


def test_comments_rationals_and_parentheses():
    sys = parse_system("# two\nvars a b;  # header\n(a - 1)*(a + 1) + b/2 - 2/3;\n")
    want = parse_polynomial("a^2 + 0.5*b - 1 - 2/3", ("a", "b"))
    assert sys.generators[0] == want


def test_unary_minus_and_powers():
    p = parse_polynomial("-(x - 2)^2", ("x",))
    assert p == parse_polynomial("-x^2 + 4*x - 4", ("x",))


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_round_trip(name):
    sys = corpus.load(name)
    again = parse_system(format_system(sys))
    assert again.names == sys.names
    assert [g.terms for g in again.generators] == [g.terms for g in sys.generators]


coeff = st.one_of(
    st.integers(-50, 50).map(float),
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
).filter(lambda c: c != 0)
exps = st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4))
polys = st.dictionaries(exps, coeff, min_size=1, max_size=8).map(
    lambda d: Polynomial({Monomial(e): c for e, c in d.items()}, n=3)
)


@settings(max_examples=200, deadline=None)
@given(st.lists(polys, min_size=1, max_size=4))
def test_print_parse_identity(gens):
    sys = PolySystem(3, tuple(gens), ("x", "y", "z"))
    again = parse_system(format_system(sys))
    assert [g.terms for g in again.generators] == [g.terms for g in sys.generators]
