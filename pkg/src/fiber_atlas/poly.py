"""Exact multivariate polynomial arithmetic over the rationals.

Polynomials carry arbitrary-precision ``Fraction`` coefficients, so algebraic
identities (derivatives, substitutions, discriminant-style checks) can be
verified without floating error.  Float evaluation is a separate code path:
``evaluate`` goes Horner-style variable by variable, and :class:`BatchEvaluator`
vectorises evaluation over numpy point batches for the numerical layers.

Instances are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

Exponents = Tuple[int, ...]
ExactScalar = Union[int, Fraction]
Scalar = Union[int, float, Fraction]

__all__ = [
    "Polynomial",
    "PolynomialMap",
    "UnivariatePolynomial",
    "BatchEvaluator",
    "BatchMap",
    "hessian",
    "parse_polynomial",
]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    raise TypeError(
        f"exact coefficient expected (int or Fraction), got {type(value).__name__}; "
        "float input is only supported in evaluation, not in the coefficient ring"
    )


class Polynomial:
    """A multivariate polynomial with exact rational coefficients.

    ``variables`` is an ordered tuple of names; ``terms`` maps exponent
    tuples (one entry per variable) to nonzero ``Fraction`` coefficients.
    """

    __slots__ = ("variables", "terms", "_nested")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponents, Scalar]):
        vars_t = tuple(str(v) for v in variables)
        if len(set(vars_t)) != len(vars_t):
            raise ValueError(f"duplicate variable names in {vars_t}")
        clean: Dict[Exponents, Fraction] = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(vars_t):
                raise ValueError(
                    f"exponent vector {exps} has length {len(exps)}, expected {len(vars_t)}"
                )
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = _as_fraction(coeff)
            if c != 0:
                prev = clean.get(exps)
                c = c if prev is None else prev + c
                if c != 0:
                    clean[exps] = c
                elif exps in clean:
                    del clean[exps]
        object.__setattr__(self, "variables", vars_t)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_nested", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls(variables, {})

    @classmethod
    def constant(cls, variables: Sequence[str], value: ExactScalar) -> "Polynomial":
        vars_t = tuple(variables)
        return cls(vars_t, {(0,) * len(vars_t): _as_fraction(value)})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "Polynomial":
        vars_t = tuple(variables)
        if name not in vars_t:
            raise ValueError(f"unknown variable {name!r}; have {vars_t}")
        exps = tuple(1 if v == name else 0 for v in vars_t)
        return cls(vars_t, {exps: Fraction(1)})

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: str) -> int:
        i = self._var_index(var)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def constant_value(self) -> Fraction:
        """Coefficient of the constant term (the whole value if degree 0)."""
        return self.terms.get((0,) * self.n_variables, Fraction(0))

    def _var_index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise ValueError(f"unknown variable {var!r}; have {self.variables}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    # ------------------------------------------------------------------
    # ring operations (exact)
    # ------------------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise ValueError(
                    f"variable lists differ: {self.variables} vs {other.variables}"
                )
            return other
        return Polynomial.constant(self.variables, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps, Fraction(0)) + c
            if s == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = s
        return Polynomial(self.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms: Dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(exps, Fraction(0)) + c1 * c2
                if s == 0:
                    terms.pop(exps, None)
                else:
                    terms[exps] = s
        return Polynomial(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(self.variables, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def _nested_form(self):
        """Recursive (exponent, sub) lists used for Horner-style evaluation."""
        cached = self._nested
        if cached is not None:
            return cached
        nested = _nest(self.terms, self.n_variables)
        object.__setattr__(self, "_nested", nested)
        return nested

    def evaluate(self, point: Sequence[Scalar]):
        """Evaluate at ``point``.

        Exact ``Fraction`` arithmetic when every coordinate is an int or
        Fraction; ordinary float arithmetic otherwise.  Either way the walk
        is Horner-style, one variable at a time.
        """
        if len(point) != self.n_variables:
            raise ValueError(
                f"point has {len(point)} coordinates, expected {self.n_variables}"
            )
        exact = all(isinstance(c, (int, Fraction, np.integer)) for c in point)
        if exact:
            coords = [_as_fraction(c) for c in point]
            return _eval_nested(self._nested_form(), coords, 0, Fraction(0))
        coords_f = [float(c) for c in point]
        return _eval_nested(self._nested_form(), coords_f, 0, 0.0)

    def __call__(self, point: Sequence[Scalar]):
        return self.evaluate(point)

    # ------------------------------------------------------------------
    # calculus
    # ------------------------------------------------------------------

    def differentiate(self, var: str) -> "Polynomial":
        """Exact formal partial derivative with respect to ``var``."""
        i = self._var_index(var)
        terms: Dict[Exponents, Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            new = list(exps)
            new[i] = e - 1
            terms[tuple(new)] = c * e
        return Polynomial(self.variables, terms)

    def gradient(self) -> Tuple["Polynomial", ...]:
        return tuple(self.differentiate(v) for v in self.variables)

    # ------------------------------------------------------------------
    # substitution / slicing
    # ------------------------------------------------------------------

    def substitute(self, assignments: Mapping[str, Union["Polynomial", ExactScalar]]) -> "Polynomial":
        """Exact composition: replace variables by polynomials or rationals.

        Unassigned variables are kept.  The result lives on the same variable
        list.
        """
        images = []
        for v in self.variables:
            if v in assignments:
                img = assignments[v]
                if not isinstance(img, Polynomial):
                    img = Polynomial.constant(self.variables, img)
                elif img.variables != self.variables:
                    raise ValueError("substituted polynomials must share the variable list")
                images.append(img)
            else:
                images.append(Polynomial.variable(v, self.variables))
        result = Polynomial.zero(self.variables)
        for exps, c in self.terms.items():
            term = Polynomial.constant(self.variables, c)
            for img, e in zip(images, exps):
                if e:
                    term = term * img**e
            result = result + term
        return result

    def univariate_slice(self, var: str, values: Mapping[str, ExactScalar]) -> "UnivariatePolynomial":
        """Substitute exact rationals for every variable except ``var``."""
        i = self._var_index(var)
        missing = [v for v in self.variables if v != var and v not in values]
        if missing:
            raise ValueError(f"no value supplied for variables {missing}")
        vals = {v: _as_fraction(values[v]) for v in self.variables if v != var}
        coeffs: Dict[int, Fraction] = {}
        for exps, c in self.terms.items():
            acc = c
            for j, v in enumerate(self.variables):
                if j == i:
                    continue
                acc *= vals[v] ** exps[j]
            if acc != 0:
                coeffs[exps[i]] = coeffs.get(exps[i], Fraction(0)) + acc
        deg = max(coeffs) if coeffs else -1
        dense = [coeffs.get(k, Fraction(0)) for k in range(deg + 1)]
        return UnivariatePolynomial(var, dense)

    # ------------------------------------------------------------------
    # text / JSON round trips
    # ------------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            c = self.terms[exps]
            monos = []
            for v, e in zip(self.variables, exps):
                if e == 1:
                    monos.append(v)
                elif e > 1:
                    monos.append(f"{v}^{e}")
            body = "*".join(monos)
            if not body:
                piece = _fraction_str(abs(c))
            elif abs(c) == 1:
                piece = body
            else:
                piece = f"{_fraction_str(abs(c))}*{body}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, piece))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, piece in parts[1:]:
            out += sign + piece
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self.variables!r}, {str(self)!r})"

    def to_json_dict(self) -> dict:
        """JSON-friendly term list: exponent vector plus num/den strings."""
        terms = [
            {
                "exponents": list(exps),
                "numerator": str(c.numerator),
                "denominator": str(c.denominator),
            }
            for exps, c in sorted(self.terms.items())
        ]
        return {"variables": list(self.variables), "terms": terms}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Polynomial":
        terms = {
            tuple(t["exponents"]): Fraction(int(t["numerator"]), int(t["denominator"]))
            for t in data["terms"]
        }
        return cls(tuple(data["variables"]), terms)


def _nest(terms: Mapping[Exponents, Fraction], n_vars: int):
    """Group terms by leading exponent, recursively, for Horner walks."""
    if n_vars == 0:
        return sum(terms.values(), Fraction(0))
    groups: Dict[int, Dict[Exponents, Fraction]] = {}
    for exps, c in terms.items():
        groups.setdefault(exps[0], {})[exps[1:]] = c
    return sorted((e, _nest(sub, n_vars - 1)) for e, sub in groups.items())


def _eval_nested(nested, coords, depth, zero):
    if not isinstance(nested, list):
        return nested if isinstance(zero, Fraction) else float(nested)
    if not nested:
        return zero
    x = coords[depth]
    acc = zero
    prev_exp = None
    for e, sub in reversed(nested):  # descending exponent
        val = _eval_nested(sub, coords, depth + 1, zero)
        if prev_exp is None:
            acc = val
        else:
            acc = acc * x ** (prev_exp - e) + val
        prev_exp = e
    return acc * x**prev_exp


def _fraction_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ----------------------------------------------------------------------
# polynomial maps
# ----------------------------------------------------------------------


class PolynomialMap:
    """A polynomial map R^m -> R^n: components sharing one variable list."""

    __slots__ = ("components", "variables", "_jac")

    def __init__(self, components: Sequence[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a polynomial map needs at least one component")
        vars_t = comps[0].variables
        for c in comps[1:]:
            if c.variables != vars_t:
                raise ValueError("components must share a single variable list")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variables", vars_t)
        object.__setattr__(self, "_jac", None)

    def __setattr__(self, name, value):
        raise AttributeError("PolynomialMap is immutable")

    @property
    def m(self) -> int:
        """Domain dimension."""
        return len(self.variables)

    @property
    def n(self) -> int:
        """Target dimension."""
        return len(self.components)

    def evaluate(self, point: Sequence[Scalar]):
        return tuple(c.evaluate(point) for c in self.components)

    def __call__(self, point: Sequence[Scalar]):
        return self.evaluate(point)

    def jacobian_polynomials(self) -> Tuple[Tuple[Polynomial, ...], ...]:
        """Row i = gradient of component i, as exact polynomials (cached)."""
        cached = self._jac
        if cached is None:
            cached = tuple(c.gradient() for c in self.components)
            object.__setattr__(self, "_jac", cached)
        return cached

    def jacobian(self, point: Sequence[Scalar]):
        """Evaluated n x m Jacobian; exact rows when the point is exact."""
        if len(point) != self.m:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.m}")
        rows = self.jacobian_polynomials()
        exact = all(isinstance(c, (int, Fraction, np.integer)) for c in point)
        if exact:
            return tuple(tuple(p.evaluate(point) for p in row) for row in rows)
        return np.array(
            [[float(p.evaluate(point)) for p in row] for row in rows], dtype=float
        )

    def to_json_dict(self) -> dict:
        return {"components": [c.to_json_dict() for c in self.components]}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "PolynomialMap":
        return cls([Polynomial.from_json_dict(c) for c in data["components"]])


def hessian(p: Polynomial, point: Sequence[Scalar]):
    """Evaluated symmetric matrix of second partials of ``p`` at ``point``."""
    if len(point) != p.n_variables:
        raise ValueError(f"point has {len(point)} coordinates, expected {p.n_variables}")
    grads = p.gradient()
    exact = all(isinstance(c, (int, Fraction, np.integer)) for c in point)
    m = p.n_variables
    if exact:
        rows = []
        for i in range(m):
            row = []
            for j in range(m):
                if j < i:
                    row.append(rows[j][i])
                else:
                    row.append(grads[i].differentiate(p.variables[j]).evaluate(point))
            rows.append(row)
        return tuple(tuple(r) for r in rows)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            v = float(grads[i].differentiate(p.variables[j]).evaluate(point))
            out[i, j] = out[j, i] = v
    return out


# ----------------------------------------------------------------------
# batched float evaluation
# ----------------------------------------------------------------------


class BatchEvaluator:
    """Vectorised float evaluation of one polynomial over numpy batches."""

    def __init__(self, p: Polynomial):
        self.n_variables = p.n_variables
        if p.terms:
            exps = np.array(sorted(p.terms), dtype=np.int64)
            coeffs = np.array([float(p.terms[tuple(e)]) for e in exps], dtype=float)
        else:
            exps = np.zeros((0, p.n_variables), dtype=np.int64)
            coeffs = np.zeros(0)
        self._exps = exps
        self._coeffs = coeffs
        # per-variable power tables share work across terms
        self._max_exp = exps.max(axis=0) if len(exps) else np.zeros(p.n_variables, int)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        B = X.shape[0]
        if X.shape[1] != self.n_variables:
            raise ValueError(
                f"points have {X.shape[1]} coordinates, expected {self.n_variables}"
            )
        if len(self._coeffs) == 0:
            return np.zeros(B)
        with np.errstate(over="ignore", invalid="ignore"):
            acc = np.ones((B, len(self._coeffs)))
            for v in range(self.n_variables):
                evec = self._exps[:, v]
                if not evec.any():
                    continue
                powers = _power_table(X[:, v], int(self._max_exp[v]))
                acc *= powers[:, evec]
            return acc @ self._coeffs


def _power_table(x: np.ndarray, max_exp: int) -> np.ndarray:
    out = np.empty((x.shape[0], max_exp + 1))
    out[:, 0] = 1.0
    for k in range(1, max_exp + 1):
        out[:, k] = out[:, k - 1] * x
    return out


class BatchMap:
    """Vectorised residual/Jacobian evaluation for a :class:`PolynomialMap`."""

    def __init__(self, pmap: PolynomialMap):
        self.pmap = pmap
        self.m = pmap.m
        self.n = pmap.n
        self._comp = [BatchEvaluator(c) for c in pmap.components]
        self._jac = [
            [BatchEvaluator(p) for p in row] for row in pmap.jacobian_polynomials()
        ]

    def values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([ev(X) for ev in self._comp], axis=1)

    def jacobian(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        B = X.shape[0]
        out = np.empty((B, self.n, self.m))
        for i, row in enumerate(self._jac):
            for j, ev in enumerate(row):
                out[:, i, j] = ev(X)
        return out


# ----------------------------------------------------------------------
# univariate polynomials (dense, exact) — consumed by the root isolator
# ----------------------------------------------------------------------


class UnivariatePolynomial:
    """Dense exact univariate polynomial; coefficient k multiplies x^k."""

    __slots__ = ("variable", "coeffs")

    def __init__(self, variable: str, coeffs: Sequence[ExactScalar]):
        dense = [_as_fraction(c) for c in coeffs]
        while dense and dense[-1] == 0:
            dense.pop()
        object.__setattr__(self, "variable", str(variable))
        object.__setattr__(self, "coeffs", tuple(dense))

    def __setattr__(self, name, value):
        raise AttributeError("UnivariatePolynomial is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def evaluate(self, x):
        if isinstance(x, (int, Fraction, np.integer)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * _as_fraction(x) + c
            return acc
        xf = float(x)
        accf = 0.0
        for c in reversed(self.coeffs):
            accf = accf * xf + float(c)
        return accf

    def __call__(self, x):
        return self.evaluate(x)

    def derivative(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(
            self.variable, [c * k for k, c in enumerate(self.coeffs)][1:]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnivariatePolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "UnivariatePolynomial") -> "UnivariatePolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UnivariatePolynomial(self.variable, out)

    def __neg__(self) -> "UnivariatePolynomial":
        return UnivariatePolynomial(self.variable, [-c for c in self.coeffs])

    def __sub__(self, other: "UnivariatePolynomial") -> "UnivariatePolynomial":
        return self + (-other)

    def __mul__(self, other) -> "UnivariatePolynomial":
        if isinstance(other, (int, Fraction)):
            return UnivariatePolynomial(self.variable, [c * other for c in self.coeffs])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UnivariatePolynomial(self.variable, out)

    __rmul__ = __mul__

    def divmod(self, other: "UnivariatePolynomial"):
        """Exact Euclidean division: self = q*other + r with deg r < deg other."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        d = other.degree
        lead = other.leading()
        while len(rem) - 1 >= d and any(c != 0 for c in rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            k = len(rem) - 1 - d
            factor = rem[-1] / lead
            q[k] = factor
            for i, c in enumerate(other.coeffs):
                rem[k + i] -= factor * c
            rem.pop()
        return (
            UnivariatePolynomial(self.variable, q),
            UnivariatePolynomial(self.variable, rem),
        )

    def primitive(self) -> "UnivariatePolynomial":
        """Integer-content-free scalar multiple with positive leading coeff."""
        if not self.coeffs:
            return self
        from math import gcd, lcm

        den = 1
        for c in self.coeffs:
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for c in ints:
            g = gcd(g, c)
        ints = [c // g for c in ints]
        if ints[-1] < 0:
            ints = [-c for c in ints]
        return UnivariatePolynomial(self.variable, ints)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                body = _fraction_str(abs(c))
            else:
                base = self.variable if k == 1 else f"{self.variable}^{k}"
                body = base if abs(c) == 1 else f"{_fraction_str(abs(c))}*{base}"
            parts.append(("-" if c < 0 else "+", body))
        sign, first = parts[0]
        out = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += sign + body
        return out

    def __repr__(self) -> str:
        return f"UnivariatePolynomial({self.variable!r}, {str(self)!r})"


# ----------------------------------------------------------------------
# parser for the human-readable text format
# ----------------------------------------------------------------------


class PolynomialParseError(ValueError):
    pass


_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _TOKEN_CHARS:
            tokens.append(ch)
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise PolynomialParseError(f"unexpected character {ch!r} at position {i}")
    return tokens


class _Parser:
    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise PolynomialParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse_expression(self) -> Polynomial:
        node = self.parse_term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.parse_term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_term(self) -> Polynomial:
        node = self.parse_factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.parse_factor()
            if op == "*":
                node = node * rhs
            else:
                if rhs.total_degree() > 0:
                    raise PolynomialParseError(
                        "division is only supported by nonzero rational constants"
                    )
                val = rhs.constant_value()
                if val == 0:
                    raise PolynomialParseError("division by zero")
                node = node * Polynomial.constant(node.variables, Fraction(1) / val)
        return node

    def parse_factor(self) -> Polynomial:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.parse_factor()
        if tok == "+":
            self.take()
            return self.parse_factor()
        base = self.parse_base()
        if self.peek() == "^":
            self.take()
            exp_tok = self.take()
            neg = False
            if exp_tok == "-":
                neg = True
                exp_tok = self.take()
            if not exp_tok.isdigit() or neg:
                raise PolynomialParseError(
                    f"exponent must be a nonnegative integer, got {exp_tok!r}"
                )
            return base ** int(exp_tok)
        return base

    def parse_base(self) -> Polynomial:
        tok = self.take()
        if tok == "(":
            node = self.parse_expression()
            if self.take() != ")":
                raise PolynomialParseError("unbalanced parentheses")
            return node
        if tok[0].isdigit() or tok[0] == ".":
            try:
                value = Fraction(tok)
            except ValueError:
                raise PolynomialParseError(f"bad numeric literal {tok!r}") from None
            return Polynomial.constant(self.variables, value)
        if tok[0].isalpha() or tok[0] == "_":
            if tok not in self.variables:
                raise PolynomialParseError(
                    f"unknown variable {tok!r}; declared variables are {self.variables}"
                )
            return Polynomial.variable(tok, self.variables)
        raise PolynomialParseError(f"unexpected token {tok!r}")


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse expressions like ``"y^2+(u^2*x+1)*(v*x-1)"`` over ``variables``.

    Supports ``+ - * / ^``, parentheses, integer/decimal literals and
    rational constants written as divisions (``1/2``).  Multiplication is
    always explicit.
    """
    vars_t = tuple(variables)
    parser = _Parser(_tokenize(text), vars_t)
    result = parser.parse_expression()
    if parser.pos != len(parser.tokens):
        raise PolynomialParseError(
            f"trailing input at token {parser.tokens[parser.pos]!r}"
        )
    return result
