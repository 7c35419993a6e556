"""Sparse real polynomials over a fixed graded monomial order.

Monomials are ordered by total degree, ties broken so that larger exponents on
earlier variables come first (``1, x1, x2, x1^2, x1*x2, x2^2, ...``).  The same
order indexes the columns of every coefficient matrix built in this package.
"""

from dataclasses import dataclass
from functools import lru_cache, total_ordering
from math import comb

import numpy as np

from realvar._kernels import grlex_rank

__all__ = [
    "Monomial",
    "Polynomial",
    "PolySystem",
    "monomials_up_to",
    "monomial_exponents",
    "n_monomials",
    "prolong_generators",
    "one_step_prolongation",
    "border",
    "is_connected_to_1",
    "is_division_closed",
    "coefficient_matrix",
    "prolongation_matrix",
]

DROP_TOL = 1e-12


@total_ordering
@dataclass(frozen=True)
class Monomial:
    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(a) for a in self.exponents)
        if any(a < 0 for a in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def one(cls, n):
        return cls((0,) * n)

    @classmethod
    def var(cls, i, n):
        exps = [0] * n
        exps[i] = 1
        return cls(tuple(exps))

    @property
    def n(self):
        return len(self.exponents)

    @property
    def degree(self):
        return sum(self.exponents)

    def sort_key(self):
        return (self.degree, tuple(-a for a in self.exponents))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __mul__(self, other):
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def divides(self, other):
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def __truediv__(self, other):
        if not other.divides(self):
            raise ValueError(f"{other} does not divide {self}")
        return Monomial(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def evaluate(self, point):
        out = 1
        for v, a in zip(point, self.exponents):
            if a:
                out = out * v**a
        return out

    def format(self, names=None):
        names = names or [f"x{i + 1}" for i in range(self.n)]
        parts = []
        for name, a in zip(names, self.exponents):
            if a == 1:
                parts.append(name)
            elif a > 1:
                parts.append(f"{name}^{a}")
        return "*".join(parts) if parts else "1"

    def __str__(self):
        return self.format()


def _compositions(d, n):
    # compositions of d into n parts, larger leading parts first
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _exponent_table(n, t):
    rows = [c for d in range(t + 1) for c in _compositions(d, n)]
    table = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    table.setflags(write=False)
    return table


def monomial_exponents(n, t):
    """Exponent array of shape ``(C(n+t, t), n)`` in graded order (read-only)."""
    if n < 1 or t < 0:
        raise ValueError("need n >= 1 and t >= 0")
    return _exponent_table(n, t)


def n_monomials(n, t):
    return comb(n + t, t) if t >= 0 else 0


def monomials_up_to(n, t):
    return [Monomial(tuple(row)) for row in monomial_exponents(n, t)]


class Polynomial:
    """Immutable sparse polynomial ``{Monomial: coefficient}``."""

    __slots__ = ("n", "terms", "_degree", "_hash")

    def __init__(self, terms, n=None, drop_tol=0.0):
        items = dict(terms)
        if n is None:
            if not items:
                raise ValueError("n is required for the zero polynomial")
            n = next(iter(items)).n
        if items:
            cmax = max(abs(c) for c in items.values())
            cut = drop_tol * cmax
            items = {m: float(c) for m, c in items.items() if abs(c) > cut and c != 0}
        self.n = n
        self.terms = dict(sorted(items.items(), key=lambda kv: kv[0].sort_key()))
        self._degree = max((m.degree for m in self.terms), default=-1)
        self._hash = None

    @classmethod
    def from_dict(cls, coeffs, n):
        """Build from ``{exponent tuple: coefficient}``."""
        return cls({Monomial(e): c for e, c in coeffs.items()}, n=n)

    @classmethod
    def constant(cls, c, n):
        return cls({Monomial.one(n): c}, n=n)

    @classmethod
    def variable(cls, i, n):
        return cls({Monomial.var(i, n): 1.0}, n=n)

    @classmethod
    def from_vector(cls, vec, n, drop_tol=DROP_TOL):
        """Inverse of ``coefficient_vector``; ``vec`` is indexed by graded order."""
        vec = np.asarray(vec, dtype=float)
        t = 0
        while n_monomials(n, t) < len(vec):
            t += 1
        if n_monomials(n, t) != len(vec):
            raise ValueError(f"length {len(vec)} is not a monomial count for n={n}")
        exps = monomial_exponents(n, t)
        terms = {Monomial(tuple(exps[i])): vec[i] for i in np.flatnonzero(vec)}
        return cls(terms, n=n, drop_tol=drop_tol)

    @property
    def degree(self):
        return self._degree

    def is_zero(self):
        return not self.terms

    def monomials(self):
        return list(self.terms)

    def exponent_array(self):
        return np.array([m.exponents for m in self.terms], dtype=np.int64).reshape(-1, self.n)

    def coeff_array(self):
        return np.fromiter(self.terms.values(), dtype=float, count=len(self.terms))

    def coefficient_vector(self, t):
        if self.degree > t:
            raise ValueError(f"degree {self.degree} exceeds {t}")
        out = np.zeros(n_monomials(self.n, t))
        if self.terms:
            out[grlex_rank(self.exponent_array())] = self.coeff_array()
        return out

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(float(other), self.n)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial(out, n=self.n, drop_tol=DROP_TOL)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()}, n=self.n)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Monomial):
            return Polynomial({m * other: c for m, c in self.terms.items()}, n=self.n)
        if not isinstance(other, Polynomial):
            return Polynomial({m: c * other for m, c in self.terms.items()}, n=self.n, drop_tol=DROP_TOL)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                out[m] = out.get(m, 0.0) + c1 * c2
        return Polynomial(out, n=self.n, drop_tol=DROP_TOL)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial.constant(1.0, self.n)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, tuple(self.terms.items())))
        return self._hash

    def __call__(self, point):
        return self.evaluate(point)

    def evaluate(self, point):
        """Evaluate at one point (real or complex sequence of length n)."""
        return sum(c * m.evaluate(point) for m, c in self.terms.items())

    def evaluate_many(self, points):
        pts = np.atleast_2d(np.asarray(points))
        if not self.terms:
            return np.zeros(pts.shape[0], dtype=pts.dtype)
        exps = self.exponent_array()
        powers = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
        return powers @ self.coeff_array()

    def gradient(self):
        grads = []
        for i in range(self.n):
            terms = {}
            for m, c in self.terms.items():
                a = m.exponents[i]
                if a:
                    e = list(m.exponents)
                    e[i] -= 1
                    terms[Monomial(tuple(e))] = c * a
            grads.append(Polynomial(terms, n=self.n))
        return grads

    def max_abs_coeff(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def normalized(self):
        """Scale so the largest coefficient magnitude is 1."""
        cmax = self.max_abs_coeff()
        return self if cmax == 0 else self * (1.0 / cmax)

    def format(self, names=None, precision=None, drop_below=0.0, lead=None):
        """Text form; terms with ``|c| <= drop_below * max|c|`` are omitted.

        ``lead`` names a monomial to print first (border relations print ``m``
        before its normal form).
        """
        if not self.terms:
            return "0"
        cut = drop_below * max(abs(c) for c in self.terms.values())
        out = []
        # highest degree first, graded order inside a degree
        for m, c in sorted(self.terms.items(), key=lambda kv: (kv[0] != lead, -kv[0].degree, kv[0].sort_key())):
            mag = abs(c)
            if mag <= cut:
                continue
            txt = repr(float(mag)) if precision is None else f"{mag:.{precision}g}"
            if txt.endswith(".0"):
                txt = txt[:-2]
            mono = m.format(names)
            if mono == "1":
                body = txt
            elif txt == "1":
                body = mono
            else:
                body = f"{txt}*{mono}"
            sign = "-" if c < 0 else "+"
            out.append((sign, body))
        first_sign, first = out[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"Polynomial({self.format()!r})"


@dataclass(frozen=True)
class PolySystem:
    n: int
    generators: tuple
    names: tuple = None

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a system needs at least one generator")
        for g in gens:
            if g.is_zero():
                raise ValueError("generators must be nonzero")
            if g.n != self.n:
                raise ValueError(f"generator in {g.n} variables, system has {self.n}")
        object.__setattr__(self, "generators", gens)
        if self.names is None:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.n)))

    @property
    def m(self):
        return len(self.generators)

    @property
    def D(self):
        return max(g.degree for g in self.generators)

    def evaluate(self, point):
        return np.array([g.evaluate(point) for g in self.generators])

    def residual(self, point):
        """max_j |h_j(v)|"""
        return float(np.max(np.abs(self.evaluate(point))))

    def format(self):
        lines = ["vars " + " ".join(self.names) + ";"]
        lines += [g.format(self.names) + ";" for g in self.generators]
        return "\n".join(lines) + "\n"


def prolong_generators(sys, t, with_provenance=False):
    """All products ``x^a * h_j`` with ``|a| + deg(h_j) <= t``.

    With ``with_provenance`` each entry is ``(poly, (a, j))``.
    """
    if t < sys.D:
        raise ValueError(f"order t={t} is below the generator degree D={sys.D}")
    out = []
    for j, h in enumerate(sys.generators):
        for mono in monomials_up_to(sys.n, t - h.degree):
            p = h * mono
            out.append((p, (mono.exponents, j)) if with_provenance else p)
    return out


def one_step_prolongation(polys):
    """``S ∪ x1 S ∪ ... ∪ xn S`` in input order then variable order, deduplicated."""
    polys = list(polys)
    if not polys:
        raise ValueError("empty input")
    n = polys[0].n
    seen = set()
    out = []
    candidates = list(polys)
    for i in range(n):
        xi = Monomial.var(i, n)
        candidates.extend(p * xi for p in polys)
    for p in candidates:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def border(B):
    """Monomials of ``B+`` not in ``B``, sorted in graded order."""
    B = set(B)
    if not B:
        raise ValueError("empty monomial set")
    n = next(iter(B)).n
    plus = {m * Monomial.var(i, n) for m in B for i in range(n)}
    return sorted(plus - B)


def is_division_closed(B):
    B = set(B)
    for m in B:
        for i, a in enumerate(m.exponents):
            if a:
                e = list(m.exponents)
                e[i] -= 1
                if Monomial(tuple(e)) not in B:
                    return False
    return True


def is_connected_to_1(B):
    B = set(B)
    if not B:
        return True
    n = next(iter(B)).n
    one = Monomial.one(n)
    if one not in B:
        return False
    # every member reachable from 1 by multiplying with single variables inside B
    reached = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for m in frontier:
            for i in range(n):
                q = m * Monomial.var(i, n)
                if q in B and q not in reached:
                    reached.add(q)
                    nxt.append(q)
        frontier = nxt
    return reached == B


def coefficient_matrix(polys, n, t):
    """Dense matrix whose rows are the coefficient vectors over ``T^n_t``."""
    out = np.zeros((len(polys), n_monomials(n, t)))
    for r, p in enumerate(polys):
        if p.degree > t:
            raise ValueError(f"row {r} has degree {p.degree} > {t}")
        if p.terms:
            out[r, grlex_rank(p.exponent_array())] = p.coeff_array()
    return out


def prolongation_matrix(rows, n, t_in, shifts_deg, t_out=None):
    """Rows ``x^b * r`` for every dense row ``r`` over ``T^n_{t_in}`` and ``|b| <= shifts_deg``.

    Shift blocks follow the graded order of ``b``; the result lives over
    ``T^n_{t_out}`` (default ``t_in + shifts_deg``).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    t_out = t_in + shifts_deg if t_out is None else t_out
    if t_out < t_in + shifts_deg:
        raise ValueError("output order too small for the requested shifts")
    exps = monomial_exponents(n, t_in)
    shifts = monomial_exponents(n, shifts_deg)
    cols = grlex_rank((exps[None, :, :] + shifts[:, None, :]).reshape(-1, n)).reshape(len(shifts), len(exps))
    out = np.zeros((len(shifts) * rows.shape[0], n_monomials(n, t_out)))
    for k in range(len(shifts)):
        out[k * rows.shape[0]:(k + 1) * rows.shape[0], cols[k]] = rows
    return out
