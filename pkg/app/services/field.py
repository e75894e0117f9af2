"""
Polynomials over GF(p).

FieldPoly stores coefficients in ascending degree order; the dense
galoistools routines work highest degree first, so every call goes through
`_dense` / `_from_dense`.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Sequence, Tuple

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_add, gf_div, gf_eval, gf_mul, gf_mul_ground, gf_strip, gf_sub

from app.models.qap import FieldPoly
from app.services.errors import DuplicateAbscissa, NotDivisible


logger = logging.getLogger(__name__)


def make_poly(coeffs: Iterable[int], p: int) -> FieldPoly:
    """Canonical form: reduced mod p, no trailing zero coefficients."""
    values = [int(c) % p for c in coeffs]
    while values and values[-1] == 0:
        values.pop()
    return FieldPoly(coeffs=values, modulus=p)


def zero_poly(p: int) -> FieldPoly:
    return FieldPoly(coeffs=[], modulus=p)


def constant_poly(c: int, p: int) -> FieldPoly:
    return make_poly([c], p)


def _dense(f: FieldPoly) -> List[int]:
    return [ZZ(c) for c in reversed(f.coeffs)]


def _from_dense(coeffs: Sequence[int], p: int) -> FieldPoly:
    return make_poly(reversed(gf_strip(list(coeffs))), p)


def add(f: FieldPoly, g: FieldPoly) -> FieldPoly:
    return _from_dense(gf_add(_dense(f), _dense(g), f.modulus, ZZ), f.modulus)


def sub(f: FieldPoly, g: FieldPoly) -> FieldPoly:
    return _from_dense(gf_sub(_dense(f), _dense(g), f.modulus, ZZ), f.modulus)


def mul(f: FieldPoly, g: FieldPoly) -> FieldPoly:
    return _from_dense(gf_mul(_dense(f), _dense(g), f.modulus, ZZ), f.modulus)


def scale(f: FieldPoly, c: int) -> FieldPoly:
    return _from_dense(gf_mul_ground(_dense(f), ZZ(c % f.modulus), f.modulus, ZZ), f.modulus)


def evaluate(f: FieldPoly, x: int) -> int:
    return int(gf_eval(_dense(f), ZZ(x % f.modulus), f.modulus, ZZ))


def divide(f: FieldPoly, g: FieldPoly) -> Tuple[FieldPoly, FieldPoly]:
    """Quotient and remainder of f / g."""
    q, r = gf_div(_dense(f), _dense(g), f.modulus, ZZ)
    return _from_dense(q, f.modulus), _from_dense(r, f.modulus)


def divide_exact(f: FieldPoly, g: FieldPoly) -> FieldPoly:
    q, r = divide(f, g)
    if not r.is_zero():
        logger.debug("division by a degree-%d divisor left a degree-%d remainder", g.degree, r.degree)
        raise NotDivisible(r)
    return q


def linear_combination(polys: Sequence[FieldPoly], coeffs: Sequence[int], p: int) -> FieldPoly:
    """sum coeffs[i] * polys[i], accumulated on plain integer lists."""
    acc: List[int] = []
    for poly, c in zip(polys, coeffs):
        c %= p
        if not c or poly.is_zero():
            continue
        if len(poly.coeffs) > len(acc):
            acc.extend([0] * (len(poly.coeffs) - len(acc)))
        for i, coeff in enumerate(poly.coeffs):
            acc[i] += c * coeff
    return make_poly(acc, p)


def vanishing(roots: Sequence[int], p: int) -> FieldPoly:
    """Monic product of (x - r) over the roots."""
    result = constant_poly(1, p)
    for r in roots:
        result = mul(result, make_poly([-r, 1], p))
    return result


def lagrange_basis(xs: Sequence[int], p: int) -> List[FieldPoly]:
    """L_j with L_j(x_i) = [i == j]."""
    xs = [x % p for x in xs]
    if len(set(xs)) != len(xs):
        raise DuplicateAbscissa("interpolation points share an x coordinate")
    master = vanishing(xs, p)
    basis = []
    for x in xs:
        numerator = divide_exact(master, make_poly([-x, 1], p))
        denominator = evaluate(numerator, x)
        basis.append(scale(numerator, pow(denominator, -1, p)))
    return basis


def interpolate(points: Sequence[Tuple[int, int]], p: int) -> FieldPoly:
    """Unique polynomial of degree < len(points) through the points."""
    basis = lagrange_basis([x for x, _ in points], p)
    return linear_combination(basis, [y for _, y in points], p)


def interpolate_on(basis: Sequence[FieldPoly], values: Dict[int, int], p: int) -> FieldPoly:
    """Sparse interpolation: values maps a basis index to its y (others are 0)."""
    indices = sorted(values)
    return linear_combination([basis[i] for i in indices], [values[i] for i in indices], p)
