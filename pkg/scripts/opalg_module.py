#!/usr/bin/env python3
"""
Exact algebra of normal-ordered operator polynomials.

A polynomial is a sum of monomials  c * s * x^a y^b z^c p_x^d p_y^e p_z^f  where
c is a Gaussian rational, s a Laurent monomial in the fixed symbol set
(hbar, m, omega, omega_c, alpha, theta, eta) and the operator part is kept in
normal order: every position factor to the left of every momentum factor.
Reordering uses [x_i, p_j] = i hbar delta_ij, so equality of two polynomials is
structural equality of their canonical term lists.

The module also carries the Bopp-shift substitution that maps the
non-commutative phase-space operators onto commutative ones, and the grouping
of an expression by its powers of theta and eta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Union

if TYPE_CHECKING:
    from model_module import PhysicalParams

SYMBOLS = ("hbar", "m", "omega", "omega_c", "alpha", "theta", "eta")
OPERATORS = ("x", "y", "z", "p_x", "p_y", "p_z")
POSITIONS = OPERATORS[:3]
MOMENTA = OPERATORS[3:]


class NonFiniteCoefficient(ArithmeticError):
    """Raised when numeric substitution into a coefficient overflows or divides by zero."""


def _format_rational(value: Fraction, bracket: bool = True) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    text = f"{value.numerator}/{value.denominator}"
    return f"({text})" if bracket else text


@dataclass(frozen=True)
class GaussianRational:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def coerce(value) -> GaussianRational | None:
        """Return value as a GaussianRational, or None if it is not an exact scalar."""
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(Fraction(value))
        return None

    # ints and Fractions mix in; anything else is left to the other operand
    def __add__(self, other):
        other = GaussianRational.coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> GaussianRational:
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = GaussianRational.coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> GaussianRational:
        """
        Integer power by repeated multiplication.

        Raises:
            ValueError: If exponent is negative.
        """
        if exponent < 0:
            raise ValueError("Only nonnegative integer powers are supported")
        result = ONE
        for _ in range(exponent):
            result = result * self
        return result

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        """Render as 3, (1/2), i, (1/2)*i or (1-1/3*i)."""
        if not self.im:
            return _format_rational(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{_format_rational(self.im)}*i"
        sign = "+" if self.im > 0 else "-"
        return (
            f"({_format_rational(self.re, bracket=False)}{sign}"
            f"{_format_rational(abs(self.im), bracket=False)}*i)"
        )


ZERO = GaussianRational()
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)
MINUS_I = GaussianRational(0, -1)

ExactScalar = Union[int, Fraction, GaussianRational]


@dataclass(frozen=True, order=True)
class SymbolExponents:
    """Integer exponents over the fixed symbol set; absent symbols have exponent 0."""

    powers: tuple[int, ...] = (0,) * len(SYMBOLS)

    def __post_init__(self):
        if len(self.powers) != len(SYMBOLS):
            raise ValueError(f"Expected {len(SYMBOLS)} symbol exponents, got {len(self.powers)}")
        object.__setattr__(self, "powers", tuple(int(p) for p in self.powers))

    @classmethod
    def of(cls, **powers: int) -> SymbolExponents:
        unknown = set(powers) - set(SYMBOLS)
        if unknown:
            raise KeyError(f"Unknown symbol(s): {', '.join(sorted(unknown))}")
        return cls(tuple(powers.get(name, 0) for name in SYMBOLS))

    def __getitem__(self, name: str) -> int:
        return self.powers[SYMBOLS.index(name)]

    def __mul__(self, other: SymbolExponents) -> SymbolExponents:
        return SymbolExponents(tuple(a + b for a, b in zip(self.powers, other.powers)))

    def without(self, *names: str) -> SymbolExponents:
        """Drop the named symbols (set their exponents to zero)."""
        return SymbolExponents(
            tuple(0 if name in names else power for name, power in zip(SYMBOLS, self.powers))
        )

    def as_dict(self) -> dict[str, int]:
        return {name: power for name, power in zip(SYMBOLS, self.powers) if power}

    def render(self) -> str:
        return "*".join(
            name if power == 1 else f"{name}^{power}"
            for name, power in zip(SYMBOLS, self.powers)
            if power
        )


NO_SYMBOLS = SymbolExponents()
NO_OPERATORS = (0,) * len(OPERATORS)


@dataclass(frozen=True)
class OperatorMonomial:
    """coefficient * symbols * x^ax y^ay z^az p_x^bx p_y^by p_z^bz, in normal order."""

    coefficient: GaussianRational
    symbols: SymbolExponents = NO_SYMBOLS
    ops: tuple[int, ...] = NO_OPERATORS

    def __post_init__(self):
        if len(self.ops) != len(OPERATORS) or any(e < 0 for e in self.ops):
            raise ValueError(f"Operator exponents must be six nonnegative integers, got {self.ops}")

    @property
    def key(self) -> tuple[SymbolExponents, tuple[int, ...]]:
        return self.symbols, self.ops

    @property
    def degree(self) -> int:
        return sum(self.ops)

    def render(self) -> str:
        symbols = self.symbols.render()
        if not symbols:
            scalar = str(self.coefficient)
        elif self.coefficient == ONE:
            scalar = symbols
        elif self.coefficient == -ONE:
            scalar = f"-{symbols}"
        else:
            scalar = f"{self.coefficient}*{symbols}"
        operators = " ".join(
            f"{name}^{power}" for name, power in zip(OPERATORS, self.ops) if power
        )
        return f"{scalar} * {operators}" if operators else scalar


def _canonical_order(term: OperatorMonomial) -> tuple:
    # lower degree first; within a degree, positions before momenta
    return term.degree, tuple(-e for e in term.ops), term.symbols.powers


class OperatorPolynomial:
    """Immutable canonical sum of OperatorMonomial terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[OperatorMonomial] = ()):
        merged: dict[tuple, GaussianRational] = {}
        for term in terms:
            merged[term.key] = merged.get(term.key, ZERO) + term.coefficient
        canonical = [
            OperatorMonomial(coefficient, symbols, ops)
            for (symbols, ops), coefficient in merged.items()
            if coefficient
        ]
        canonical.sort(key=_canonical_order)
        self._terms = tuple(canonical)

    @property
    def terms(self) -> tuple[OperatorMonomial, ...]:
        return self._terms

    @property
    def degree(self) -> int:
        return max((term.degree for term in self._terms), default=0)

    def __iter__(self) -> Iterator[OperatorMonomial]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __add__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return OperatorPolynomial(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> OperatorPolynomial:
        return OperatorPolynomial(
            OperatorMonomial(-term.coefficient, term.symbols, term.ops) for term in self._terms
        )

    def __sub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            return poly_mul(self, other)
        scalar = GaussianRational.coerce(other)
        if scalar is None:
            return NotImplemented
        return self.scale(scalar)

    def __rmul__(self, other):
        scalar = GaussianRational.coerce(other)
        if scalar is None:
            return NotImplemented
        return self.scale(scalar)

    def __pow__(self, exponent: int) -> OperatorPolynomial:
        if exponent < 0:
            raise ValueError("Operator polynomials have no inverse")
        result = constant(1)
        for _ in range(exponent):
            result = poly_mul(result, self)
        return result

    def scale(self, coefficient: ExactScalar = 1, **symbols: int) -> OperatorPolynomial:
        """Multiply by a commuting scalar coefficient * prod(symbol^power)."""
        factor = GaussianRational.coerce(coefficient)
        if factor is None:
            raise TypeError(f"Cannot scale by {type(coefficient).__name__}")
        shift = SymbolExponents.of(**symbols)
        return OperatorPolynomial(
            OperatorMonomial(term.coefficient * factor, term.symbols * shift, term.ops)
            for term in self._terms
        )

    def render(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(term.render() for term in self._terms)

    __str__ = render

    def __repr__(self) -> str:
        return f"OperatorPolynomial({self.render()!r})"


def _as_polynomial(value) -> OperatorPolynomial | None:
    if isinstance(value, OperatorPolynomial):
        return value
    scalar = GaussianRational.coerce(value)
    if scalar is None:
        return None
    return constant(scalar)


def constant(value: ExactScalar = 1, **symbols: int) -> OperatorPolynomial:
    """A scalar polynomial value * prod(symbol^power)."""
    coefficient = GaussianRational.coerce(value)
    if coefficient is None:
        raise TypeError(f"{type(value).__name__} is not an exact scalar")
    return OperatorPolynomial([OperatorMonomial(coefficient, SymbolExponents.of(**symbols))])


def symbol(name: str, power: int = 1) -> OperatorPolynomial:
    """The scalar polynomial name^power, e.g. symbol("hbar", -1)."""
    return constant(1, **{name: power})


def generator(name: str) -> OperatorPolynomial:
    """One of the six canonical operators x, y, z, p_x, p_y, p_z."""
    if name not in OPERATORS:
        raise KeyError(f"Unknown operator {name!r}; expected one of {', '.join(OPERATORS)}")
    ops = tuple(1 if op == name else 0 for op in OPERATORS)
    return OperatorPolynomial([OperatorMonomial(ONE, NO_SYMBOLS, ops)])


def generators() -> tuple[OperatorPolynomial, ...]:
    return tuple(generator(name) for name in OPERATORS)


@lru_cache(maxsize=None)
def _reorder_weights(momentum_power: int, position_power: int) -> tuple[tuple[int, int], ...]:
    # p^b x^c = sum_k k! C(b,k) C(c,k) (-i hbar)^k x^(c-k) p^(b-k)
    return tuple(
        (k, math.factorial(k) * math.comb(momentum_power, k) * math.comb(position_power, k))
        for k in range(min(momentum_power, position_power) + 1)
    )


def _monomial_product(left: OperatorMonomial, right: OperatorMonomial) -> Iterator[OperatorMonomial]:
    coefficient = left.coefficient * right.coefficient
    symbols = left.symbols * right.symbols
    expansions = [_reorder_weights(left.ops[3 + i], right.ops[i]) for i in range(3)]
    for combination in itertools.product(*expansions):
        ops = [a + b for a, b in zip(left.ops, right.ops)]
        weight = 1
        contractions = 0
        for i, (k, count) in enumerate(combination):
            ops[i] -= k
            ops[3 + i] -= k
            weight *= count
            contractions += k
        yield OperatorMonomial(
            coefficient * weight * MINUS_I ** contractions,
            symbols * SymbolExponents.of(hbar=contractions),
            tuple(ops),
        )


def poly_mul(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    """
    Normal-ordered product a*b.

    Every pair of terms is multiplied and the momenta of the left factor are
    moved past the positions of the right one, so the result again has all
    positions to the left of all momenta.

    Args:
        a (OperatorPolynomial): Left factor.
        b (OperatorPolynomial): Right factor.

    Returns:
        OperatorPolynomial: The product, with like terms merged and zeros dropped.
    """
    return OperatorPolynomial(
        term for left in a for right in b for term in _monomial_product(left, right)
    )


def commutator(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    """
    Commutator [a, b] = ab - ba.

    Args:
        a (OperatorPolynomial): First operand.
        b (OperatorPolynomial): Second operand.

    Returns:
        OperatorPolynomial: The normal-ordered commutator.
    """
    return poly_mul(a, b) - poly_mul(b, a)


def adjoint(a: OperatorPolynomial) -> OperatorPolynomial:
    """
    Hermitian adjoint.

    The symbols are real and the six generators self-adjoint, so a term
    c x^a p^b maps to conj(c) p^b x^a, which is then brought back to normal order.

    Args:
        a (OperatorPolynomial): Operator to conjugate.

    Returns:
        OperatorPolynomial: The normal-ordered adjoint.
    """
    terms = []
    for term in a:
        # reversed order: momenta first, then positions
        momenta = OperatorMonomial(term.coefficient.conjugate(), term.symbols, NO_OPERATORS[:3] + term.ops[3:])
        positions = OperatorMonomial(ONE, NO_SYMBOLS, term.ops[:3] + NO_OPERATORS[3:])
        terms.extend(_monomial_product(momenta, positions))
    return OperatorPolynomial(terms)


def antisymmetric_tensor(i: int, j: int) -> int:
    """Sign of theta_ij and eta_ij: +1 for ij in (12, 23, 31), -1 for the transposes, 0 otherwise."""
    if (i, j) in ((0, 1), (1, 2), (2, 0)):
        return 1
    if (j, i) in ((0, 1), (1, 2), (2, 0)):
        return -1
    return 0


@lru_cache(maxsize=None)
def bopp_rule(name: str) -> OperatorPolynomial:
    """
    Commutative image of one non-commutative operator.

    x^_i = alpha x_i - theta_ij p_j / (2 alpha hbar)
    p^_i = alpha p_i + eta_ij x_j / (2 alpha hbar)
    """
    index = OPERATORS.index(name)
    shifted = generator(name).scale(alpha=1)
    if index < 3:
        for j in range(3):
            sign = antisymmetric_tensor(index, j)
            if sign:
                shifted = shifted + generator(MOMENTA[j]).scale(
                    Fraction(-sign, 2), theta=1, alpha=-1, hbar=-1
                )
    else:
        for j in range(3):
            sign = antisymmetric_tensor(index - 3, j)
            if sign:
                shifted = shifted + generator(POSITIONS[j]).scale(
                    Fraction(sign, 2), eta=1, alpha=-1, hbar=-1
                )
    return shifted


@lru_cache(maxsize=None)
def _bopp_power(name: str, power: int) -> OperatorPolynomial:
    return bopp_rule(name) ** power


def bopp_shift(a: OperatorPolynomial) -> OperatorPolynomial:
    """Substitute every canonical operator by its non-commutative image, factor by factor in normal order."""
    terms = []
    for term in a:
        product = OperatorPolynomial([OperatorMonomial(term.coefficient, term.symbols)])
        for name, power in zip(OPERATORS, term.ops):
            if power:
                product = poly_mul(product, _bopp_power(name, power))
        terms.extend(product)
    return OperatorPolynomial(terms)


def collect_orders(a: OperatorPolynomial) -> dict[tuple[int, int], OperatorPolynomial]:
    """
    Split a by its (theta, eta) exponents.

    Returns a mapping (j, k) -> part with theta and eta stripped, so that
    a == sum(theta^j eta^k part(j, k)).
    """
    buckets: dict[tuple[int, int], list[OperatorMonomial]] = {}
    for term in a:
        order = (term.symbols["theta"], term.symbols["eta"])
        buckets.setdefault(order, []).append(
            OperatorMonomial(term.coefficient, term.symbols.without("theta", "eta"), term.ops)
        )
    return {order: OperatorPolynomial(terms) for order, terms in sorted(buckets.items())}


def reassemble(parts: Mapping[tuple[int, int], OperatorPolynomial]) -> OperatorPolynomial:
    """
    Inverse of collect_orders.

    Args:
        parts (Mapping): (theta power, eta power) -> polynomial free of theta and eta.

    Returns:
        OperatorPolynomial: sum of theta^j eta^k parts[(j, k)].
    """
    total = OperatorPolynomial()
    for (theta_power, eta_power), part in parts.items():
        total = total + part.scale(theta=theta_power, eta=eta_power)
    return total


@dataclass(frozen=True)
class NumericOperatorPolynomial:
    """Operator polynomial with complex floating coefficients, keyed by normal-ordered exponents."""

    terms: tuple[tuple[tuple[int, ...], complex], ...] = ()

    @classmethod
    def from_mapping(cls, coefficients: Mapping[tuple[int, ...], complex]) -> NumericOperatorPolynomial:
        return cls(tuple(sorted((tuple(ops), complex(value)) for ops, value in coefficients.items() if value != 0)))

    @property
    def degree(self) -> int:
        return max((sum(ops) for ops, _ in self.terms), default=0)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return dict(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def evaluate_coefficients(a: OperatorPolynomial, params: PhysicalParams) -> NumericOperatorPolynomial:
    """Substitute numeric parameter values into every symbol; terms that become zero are pruned."""
    values = {name: float(getattr(params, name)) for name in SYMBOLS}
    numeric: dict[tuple[int, ...], complex] = {}
    for term in a:
        try:
            factor = 1.0
            for name, power in zip(SYMBOLS, term.symbols.powers):
                if power:
                    factor *= values[name] ** power
            value = complex(term.coefficient) * factor
        except (ZeroDivisionError, OverflowError) as e:
            raise NonFiniteCoefficient(
                f"Cannot evaluate {term.render()} at {values}: {e}"
            ) from e
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise NonFiniteCoefficient(f"Coefficient of {term.render()} is not finite at {values}")
        numeric[term.ops] = numeric.get(term.ops, 0j) + value
    return NumericOperatorPolynomial.from_mapping(numeric)


def angular_momentum(axis: str) -> OperatorPolynomial:
    """L_x = y p_z - z p_y, L_y = z p_x - x p_z, L_z = x p_y - y p_x."""
    i = "xyz".index(axis)
    j, k = (i + 1) % 3, (i + 2) % 3
    return generator(POSITIONS[j]) * generator(MOMENTA[k]) - generator(POSITIONS[k]) * generator(MOMENTA[j])


def omega_tilde_squared() -> OperatorPolynomial:
    """omega~^2 = omega^2 + omega_c^2 / 4; omega~ itself is never a symbol."""
    return symbol("omega", 2) + constant(Fraction(1, 4), omega_c=2)


def commutative_hamiltonian() -> OperatorPolynomial:
    """H0 = p^2/2m - omega_c L_z / 2 + m omega~^2 (x^2 + y^2) / 2 + m omega^2 z^2 / 2."""
    x, y, z, p_x, p_y, p_z = generators()
    kinetic = (p_x * p_x + p_y * p_y + p_z * p_z).scale(Fraction(1, 2), m=-1)
    zeeman = angular_momentum("z").scale(Fraction(-1, 2), omega_c=1)
    radial = omega_tilde_squared() * (x * x + y * y).scale(Fraction(1, 2), m=1)
    axial = (z * z).scale(Fraction(1, 2), m=1, omega=2)
    return kinetic + zeeman + radial + axial


@lru_cache(maxsize=1)
def expanded_hamiltonian() -> OperatorPolynomial:
    """H0(x^, p^) written in the commutative algebra."""
    return bopp_shift(commutative_hamiltonian())


def hamiltonian_groups() -> dict[tuple[int, int], OperatorPolynomial]:
    """
    The groups H_(j,k) of  H0(x^, p^) = sum theta^j eta^k / hbar^(j+k) H_(j,k).

    (0,0) is alpha^2 H0, (0,1) H_eta, (1,0) H_theta, (1,1) H_eta_theta,
    (0,2) H_eta^2 and (2,0) H_theta^2.
    """
    return {
        order: part.scale(hbar=sum(order))
        for order, part in collect_orders(expanded_hamiltonian()).items()
    }
