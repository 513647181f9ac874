#!/usr/bin/env python
"""
Exact set calculus on small finite spaces.

Set integrals use counting measure, so the integral of a density is the sum
of its values over distinct subsets. A p.g.fl. G[h] = sum_X h^X f(X) is
multi-affine in the values of h, and its functional derivatives are computed
with the Radon-Nikodym sum

    dG/dX[h] = sum over W disjoint from X of h^W f(X u W).

Tagged spaces hold points (x, o); an admissible subset never holds two points
with the same base x, so each target carries exactly one tag.
"""
import math
from itertools import combinations

import singer

from udrfs.models import TAGS, in_detected, in_undetected

logger = singer.get_logger().getChild('udrfs')

DENSITY_TOLERANCE = 1e-10


class FiniteSpace():

    def __init__(self, points, cardinality_cap=None, tagged=False):
        points = tuple(points)
        if len(set(points)) != len(points):
            raise ValueError("space points must be distinct")
        self.points = points
        self.tagged = tagged
        limit = len(self.bases()) if tagged else len(points)
        if cardinality_cap is None:
            cardinality_cap = limit
        if not 0 <= cardinality_cap <= limit:
            raise ValueError(
                "cardinality cap {} exceeds {} admissible points".format(
                    cardinality_cap, limit))
        self.cardinality_cap = cardinality_cap
        self._index = {p: i for i, p in enumerate(points)}
        self._subsets = None

    @classmethod
    def tagged_space(cls, base_points, cardinality_cap=None):
        points = [(x, o) for x in base_points for o in TAGS]
        return cls(points, cardinality_cap, tagged=True)

    def bases(self):
        if not self.tagged:
            return self.points
        seen = []
        for x, _ in self.points:
            if x not in seen:
                seen.append(x)
        return tuple(seen)

    def __contains__(self, point):
        return point in self._index

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, FiniteSpace) and \
            self.points == other.points and \
            self.cardinality_cap == other.cardinality_cap and \
            self.tagged == other.tagged

    def __hash__(self):
        return hash((self.points, self.cardinality_cap, self.tagged))

    def is_admissible(self, X):
        X = frozenset(X)
        if len(X) > self.cardinality_cap or not all(p in self for p in X):
            return False
        if self.tagged:
            return len({x for x, _ in X}) == len(X)
        return True

    def subsets(self):
        """
        Admissible subsets ordered by size, then by point order.
        """
        if self._subsets is None:
            subsets = []
            for n in range(self.cardinality_cap + 1):
                for combo in combinations(self.points, n):
                    if not self.tagged or \
                            len({x for x, _ in combo}) == len(combo):
                        subsets.append(frozenset(combo))
            self._subsets = tuple(subsets)
        return self._subsets

    def detected(self):
        return frozenset(p for p in self.points if in_detected(p))

    def undetected(self):
        return frozenset(p for p in self.points if in_undetected(p))

    def complement(self, O):
        O = frozenset(O)
        return frozenset(p for p in self.points if p not in O)

    def sort_key(self, point):
        return self._index[point]


def _as_subset(space, X):
    if isinstance(X, (frozenset, set)):
        items = list(X)
    else:
        items = list(X)
        if len(set(items)) != len(items):
            raise ValueError("subset {} contains duplicate points".format(X))
    for p in items:
        if p not in space:
            raise ValueError("point {} is not in the space".format(p))
    subset = frozenset(items)
    if not space.is_admissible(subset):
        raise ValueError(
            "subset {} is not admissible (cap {})".format(
                sorted(subset, key=space.sort_key), space.cardinality_cap))
    return subset


class FiniteSetDensity():

    def __init__(self, space, values, probability=False):
        self.space = space
        clean = {}
        for X, value in values.items():
            X = _as_subset(space, X)
            value = float(value)
            if value < 0.0:
                if value < -1e-12:
                    raise ValueError(
                        "density value {} at {} is negative".format(value, X))
                value = 0.0
            if value != 0.0:
                clean[X] = clean.get(X, 0.0) + value
        self._values = clean
        self.probability = probability
        if probability and abs(self.mass() - 1.0) > DENSITY_TOLERANCE:
            raise ValueError(
                "probability density sums to {}".format(self.mass()))

    @classmethod
    def from_function(cls, space, fn, probability=False):
        return cls(space, {X: fn(X) for X in space.subsets()}, probability)

    def __call__(self, X):
        return self._values.get(frozenset(X), 0.0)

    def items(self):
        return self._values.items()

    def support(self):
        return sorted(self._values, key=lambda X: (
            len(X), sorted(self.space.sort_key(p) for p in X)))

    def mass(self):
        return math.fsum(self._values.values())

    def normalized(self):
        mass = self.mass()
        if mass <= 0.0:
            raise ZeroDivisionError("density has zero mass")
        return FiniteSetDensity(
            self.space, {X: v / mass for X, v in self._values.items()},
            probability=True)

    def max_abs_difference(self, other):
        keys = set(self._values) | set(other._values)
        return max((abs(self(X) - other(X)) for X in keys), default=0.0)


class TestFunction():
    __test__ = False

    def __init__(self, space, values, check=True):
        self.space = space
        clean = {}
        for p in space.points:
            value = float(values.get(p, 0.0)) if hasattr(values, 'get') \
                else float(values(p))
            if check and not -1e-12 <= value <= 1.0 + 1e-12:
                raise ValueError(
                    "test function value {} at {} outside [0, 1]".format(
                        value, p))
            clean[p] = min(max(value, 0.0), 1.0) if check else value
        self._values = clean

    @classmethod
    def constant(cls, space, c):
        return cls(space, {p: c for p in space.points})

    @classmethod
    def indicator(cls, space, S):
        S = frozenset(S)
        return cls(space, {p: 1.0 if p in S else 0.0 for p in space.points})

    def __call__(self, point):
        return self._values[point]

    def power(self, X):
        return math.prod(self._values[p] for p in X)

    def complement(self):
        return TestFunction(
            self.space, {p: 1.0 - v for p, v in self._values.items()})

    def multiply(self, other):
        return TestFunction(
            self.space, {p: v * other(p) for p, v in self._values.items()})

    def restricted(self, tag):
        """
        The tagged function with its tag argument fixed: x -> h(x, tag).
        Returned over the tagged space, constant across tags.
        """
        return TestFunction(
            self.space, {(x, o): self._values[(x, tag)]
                         for x, o in self.space.points})

    def on_detected(self):
        """
        1 on U-points, h on D-points.
        """
        return TestFunction(self.space, {
            p: v if in_detected(p) else 1.0 for p, v in self._values.items()
        })

    def on_undetected(self):
        """
        1 on D-points, h on U-points.
        """
        return TestFunction(self.space, {
            p: v if in_undetected(p) else 1.0
            for p, v in self._values.items()
        })

    def max_abs_difference(self, other):
        return max(abs(v - other(p)) for p, v in self._values.items())


def set_integral(f):
    return f.mass()


def pgfl_eval(f, h):
    if h.space.points != f.space.points:
        raise ValueError("test function is defined on a different space")
    return math.fsum(h.power(X) * v for X, v in f.items())


def functional_derivative(f, X, h):
    X = _as_subset(f.space, X)
    if h.space.points != f.space.points:
        raise ValueError("test function is defined on a different space")
    return math.fsum(
        h.power(Y - X) * v for Y, v in f.items() if X <= Y
    )


def belief(f, S):
    S = frozenset(S)
    return math.fsum(v for X, v in f.items() if X <= S)


def censor(f, O):
    """
    Density of the RFS with every point outside O removed.
    """
    O = frozenset(O)
    outside = TestFunction.indicator(f.space, f.space.complement(O))
    values = {
        X: functional_derivative(f, X, outside)
        for X in f.space.subsets() if X <= O
    }
    return FiniteSetDensity(f.space, values, probability=f.probability)


def recover_density(space, G, probability=False):
    """
    Density of a multi-affine p.g.fl. G by differentiation at h = 0,
    done as inclusion-exclusion over indicator test functions.
    """
    cache = {}

    def at(S):
        if S not in cache:
            cache[S] = G(TestFunction.indicator(space, S))
        return cache[S]

    values = {}
    for X in space.subsets():
        members = sorted(X, key=space.sort_key)
        total = []
        for n in range(len(members) + 1):
            sign = -1.0 if (len(members) - n) % 2 else 1.0
            for S in combinations(members, n):
                total.append(sign * at(frozenset(S)))
        values[X] = math.fsum(total)
    return FiniteSetDensity(space, values, probability=probability)


def lift(f, tagged_space, tag):
    """
    Place an untagged density onto the tagged space with every point tagged.
    """
    return FiniteSetDensity(tagged_space, {
        frozenset((x, tag) for x in X): v for X, v in f.items()
    }, probability=f.probability)


def tag_marginal(f, base_space):
    values = {}
    for X, v in f.items():
        base = frozenset(x for x, _ in X)
        values[base] = values.get(base, 0.0) + v
    return FiniteSetDensity(base_space, values, probability=f.probability)


class MultilinearPolynomial():
    """
    Polynomial in the values g(z) of a test function in which no monomial
    repeats a variable; products drop any monomial that would. The
    coefficient of g^Z is the derivative at g = 0 with respect to the set Z.
    """

    def __init__(self, terms):
        self.terms = {
            frozenset(k): float(v) for k, v in terms.items() if v != 0.0
        }

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def constant(cls, c):
        return cls({frozenset(): c})

    @classmethod
    def affine(cls, c, slopes):
        terms = {frozenset(): c}
        for z, s in slopes.items():
            terms[frozenset((z,))] = s
        return cls(terms)

    def __add__(self, other):
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0.0) + c
        return MultilinearPolynomial(terms)

    def __mul__(self, other):
        terms = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                if a & b:
                    continue
                key = a | b
                terms[key] = terms.get(key, 0.0) + ca * cb
        return MultilinearPolynomial(terms)

    def coefficient(self, Z):
        return self.terms.get(frozenset(Z), 0.0)

    def evaluate(self, g):
        return math.fsum(
            c * math.prod(g(z) for z in key) for key, c in self.terms.items())
