"""Embedded benchmark systems in the ``.sys`` text format."""

from realvar.parse import parse_system

__all__ = ["SYSTEMS", "DESCRIPTIONS", "names", "load", "text"]

SYSTEMS = {
    "nongorenstein": """\
# ideal (x1^2, x2^2, x1*x2); single real root at the origin
vars x1 x2;
x1^2;
x2^2;
x1*x2;
""",
    "sumsquares": """\
# x1^2 + x2^2: one real point, infinitely many complex ones
vars x1 x2;
x1^2 + x2^2;
""",
    "cox98": """\
# 8 complex roots, 2 real
vars x1 x2 x3;
x1^2 - 2*x1*x3 + 5;
x1*x2^2 + x2*x3 + 1;
3*x2^2 - 8*x1*x3;
""",
    "cox98pd": """\
# cox98 with every generator multiplied by 1 + x1^2 + x2^2 + x3^2
# (positive dimensional complex variety, same 2 real roots)
vars x1 x2 x3;
(x1^2 - 2*x1*x3 + 5)*(1 + x1^2 + x2^2 + x3^2);
(x1*x2^2 + x2*x3 + 1)*(1 + x1^2 + x2^2 + x3^2);
(3*x2^2 - 8*x1*x3)*(1 + x1^2 + x2^2 + x3^2);
""",
    "cox3": """\
# roots (0,0) with multiplicity 8 and (1,2)
vars x1 x2;
x2^4*x1 + 3*x1^3 - x2^4 - 3*x1^2;
x1^2*x2 - 2*x1^2;
2*x2^4*x1 - x1^3 - 2*x2^4 + x1^2;
""",
    "gauss": """\
# two-point Gaussian quadrature: weights x1, x2 and knots x3, x4
vars x1 x2 x3 x4;
x1 + x2 - 2;
x1*x3 + x2*x4;
x1*x3^2 + x2*x4^2 - 2/3;
x1*x3^3 + x2*x4^3;
""",
    "katsura5": """\
# 32 complex roots, 12 real
vars x1 x2 x3 x4 x5 x6;
2*x6^2 + 2*x5^2 + 2*x4^2 + 2*x3^2 + 2*x2^2 + x1^2 - x1;
x6*x5 + x5*x4 + 2*x4*x3 + 2*x3*x2 + 2*x2*x1 - x2;
2*x6*x4 + 2*x5*x3 + 2*x4*x2 + x2^2 + 2*x3*x1 - x3;
2*x6*x3 + 2*x5*x2 + 2*x3*x2 + 2*x4*x1 - x4;
x3^2 + 2*x6*x1 + 2*x5*x1 + 2*x4*x1 - x5;
2*x6 + 2*x5 + 2*x4 + 2*x3 + 2*x2 + x1 - 1;
""",
    "linear": """\
vars x;
x - 1;
""",
    "twopoints": """\
vars x;
x^2 - 1;
""",
    "noreal1": """\
# no real roots
vars x;
x^2 + 1;
""",
    "noreal2": """\
# no real roots
vars x1 x2;
x1^2 + x2^2 + 1;
""",
}

DESCRIPTIONS = {
    "nongorenstein": "non-Gorenstein quotient, real root 0",
    "sumsquares": "x1^2 + x2^2, real root 0",
    "cox98": "3 variables, 8 complex / 2 real roots",
    "cox98pd": "cox98 times 1 + |x|^2, positive dimensional",
    "cox3": "8-fold root at 0 plus (1, 2)",
    "gauss": "Gaussian quadrature, 2 real roots",
    "katsura5": "Katsura 5, 12 real roots",
    "linear": "x - 1",
    "twopoints": "x^2 - 1",
    "noreal1": "x^2 + 1, empty real variety",
    "noreal2": "x1^2 + x2^2 + 1, empty real variety",
}


def names():
    return list(SYSTEMS)


def text(name):
    try:
        return SYSTEMS[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {', '.join(SYSTEMS)}") from None


def load(name):
    return parse_system(text(name))
