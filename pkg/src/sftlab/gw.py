"""Genus-0 descendant correlator store, reconstruction, and identity checks.

Correlators are reconstructed from primary invariants by a deterministic
rule order: forgetful removal of unit insertions (string / dilaton),
splitting off the highest descendant (topological recursion), reading
primaries from the model, and a divisor-class reduction fallback.
Correlators with fewer than three insertions are zero by convention in
every recursion formula; the potential therefore carries no 2-point terms
and the recursion is exactly the coefficient expansion of the series-level
identities checked by the verifiers below.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import comb, factorial
from typing import Iterable, Optional

from .algebra import (
    GradedSeries, TruncationPolicy, VariableTable, curve_class_variable,
    descendant_variable,
)
from .errors import MissingPrimaryError, ValidationError
from .operators import point_count


@dataclass(frozen=True)
class CohClass:
    id: str
    degree: int


@dataclass(frozen=True)
class CorrelatorKey:
    """Multiset of (class id, descendant level) insertions plus a curve class."""

    insertions: tuple  # ((class_id, level), ...) canonically sorted
    degree: tuple = ()  # exponent vector over the H2 basis

    def __str__(self):
        ins = " ".join(f"tau_{a}({c})" for c, a in self.insertions)
        d = "" if not any(self.degree) else f" d={list(self.degree)}"
        return f"<{ins}>{d}"


def _inverse(matrix):
    """Exact inverse of a square Fraction matrix by Gaussian elimination."""
    n = len(matrix)
    aug = [[Fraction(matrix[i][j]) for j in range(n)]
           + [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValidationError("eta not invertible", "eta")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


class TargetModel:
    """Cohomology basis, pairing, curve classes and primary correlators.

    ``eta`` is the Poincare pairing on the chosen basis.  ``chern`` holds
    the first-Chern pairing per curve-class basis element.  Primary values
    are keyed by CorrelatorKey and must have at least three insertions and
    pass the dimension filter.
    """

    def __init__(self, name, classes, unit, eta, h2_rank=0, chern=(),
                 primaries=None, divisor=None, divisor_cup=None,
                 divisor_pairing=None, contact=False):
        self.name = name
        self.classes = tuple(CohClass(c.id, c.degree) if isinstance(c, CohClass)
                             else CohClass(str(c[0]), int(c[1])) for c in classes)
        self.unit = unit
        self.eta = tuple(tuple(Fraction(x) for x in row) for row in eta)
        self.h2_rank = int(h2_rank)
        self.chern = tuple(int(c) for c in chern)
        self.divisor = divisor
        self.divisor_cup = divisor_cup
        self.divisor_pairing = tuple(divisor_pairing) if divisor_pairing else None
        self.contact = bool(contact)
        self._index = {c.id: i for i, c in enumerate(self.classes)}
        self._validate_static()
        self.eta_inv = _inverse(self.eta)
        self.primaries = {}
        for key, value in (primaries or {}).items():
            self.add_primary(key, value)

    # -- validation ------------------------------------------------------

    def _validate_static(self):
        if len(self._index) != len(self.classes):
            raise ValidationError("duplicate class ids", "classes")
        if self.unit not in self._index:
            raise ValidationError(f"unit class {self.unit!r} not declared", "unit")
        if self.degree_of(self.unit) != 0:
            raise ValidationError("unit class must have degree 0", "unit")
        n = len(self.classes)
        if len(self.eta) != n or any(len(r) != n for r in self.eta):
            raise ValidationError("eta shape mismatch", "eta")
        for i in range(n):
            for j in range(n):
                if self.eta[i][j] != self.eta[j][i]:
                    raise ValidationError("eta not symmetric", f"eta[{i}][{j}]")
        dims = {self.classes[i].degree + self.classes[j].degree
                for i in range(n) for j in range(n) if self.eta[i][j]}
        if len(dims) > 1:
            raise ValidationError(
                f"eta pairs classes of inconsistent degree sums {sorted(dims)}", "eta")
        self.dimension = dims.pop() if dims else 0
        if len(self.chern) != self.h2_rank:
            raise ValidationError("chern length != h2_rank", "chern")
        if self.divisor is not None:
            if self.divisor not in self._index:
                raise ValidationError(f"divisor class {self.divisor!r} not declared",
                                      "divisor")
            if self.degree_of(self.divisor) != 2:
                raise ValidationError("divisor class must have degree 2", "divisor")

    def add_primary(self, key: CorrelatorKey, value):
        value = Fraction(value)
        key = self.key(key.insertions, key.degree)
        if len(key.insertions) < 3:
            raise ValidationError(f"primary {key} has fewer than 3 insertions",
                                  "primaries")
        if any(a != 0 for _, a in key.insertions):
            raise ValidationError(f"primary {key} carries descendants", "primaries")
        if value and not self.dimension_ok(key):
            raise ValidationError(f"primary {key} fails the dimension filter",
                                  "primaries")
        self.primaries[key] = value

    # -- lookups ------------------------------------------------------------

    def class_index(self, cid: str) -> int:
        try:
            return self._index[cid]
        except KeyError:
            raise ValidationError(f"unknown class {cid!r}", "classes") from None

    def degree_of(self, cid: str) -> int:
        return self.classes[self.class_index(cid)].degree

    def key(self, insertions: Iterable, degree=()) -> CorrelatorKey:
        ins = tuple(sorted(((str(c), int(a)) for c, a in insertions),
                           key=lambda ca: (self.class_index(ca[0]), ca[1])))
        d = tuple(int(x) for x in degree) if degree else (0,) * self.h2_rank
        if len(d) != self.h2_rank:
            raise ValidationError(f"curve class length {len(d)} != h2_rank", "degree")
        if any(x < 0 for x in d):
            raise ValidationError("negative curve-class exponent", "degree")
        for c, _ in ins:
            self.class_index(c)
        return CorrelatorKey(ins, d)

    def dimension_ok(self, key: CorrelatorKey) -> bool:
        """Degree count: sum(deg theta + 2a) = dim + 2(n-3) + 2 c1.d"""
        n = len(key.insertions)
        lhs = sum(self.degree_of(c) + 2 * a for c, a in key.insertions)
        rhs = self.dimension + 2 * (n - 3) + 2 * sum(
            c * d for c, d in zip(self.chern, key.degree))
        return lhs == rhs

    def pairing_with_divisor(self, degree: tuple) -> Fraction:
        pair = self.divisor_pairing or (1,) * self.h2_rank
        return Fraction(sum(p * d for p, d in zip(pair, degree)))

    def cup_with_divisor(self, cid: str) -> dict:
        """c_{2 alpha}^beta as {beta: coefficient}; required model input."""
        if not self.divisor_cup:
            raise ValidationError("model has no divisor cup-product data",
                                  "divisor_cup")
        return {b: Fraction(v) for b, v in self.divisor_cup.get(cid, {}).items()}


@dataclass(frozen=True)
class Bounds:
    max_points: int = 6
    max_level: int = 3
    max_degree: int = 0


class CorrelatorTable:
    """Finite correlator store; absent keys read as zero.

    Every stored nonzero value must pass the model's dimension filter.
    """

    def __init__(self, model: TargetModel, values=None, bounds: Optional[Bounds] = None):
        self.model = model
        self.bounds = bounds
        self.values = {}
        for k, v in (values or {}).items():
            self.set(k, v)

    def set(self, key: CorrelatorKey, value):
        value = Fraction(value)
        if not value:
            self.values.pop(key, None)
            return
        if not self.model.dimension_ok(key):
            raise ValidationError(f"nonzero value at {key} fails the dimension filter",
                                  "values")
        self.values[key] = value

    def get(self, key: CorrelatorKey) -> Fraction:
        return self.values.get(key, Fraction(0))

    def items_sorted(self):
        return sorted(self.values.items(),
                      key=lambda kv: (len(kv[0].insertions), kv[0].degree,
                                      kv[0].insertions))

    def perturbed(self, key: CorrelatorKey, new_value) -> "CorrelatorTable":
        """Copy with one value replaced; dimension filter deliberately skipped
        so fault injection can plant inconsistent data."""
        t = CorrelatorTable(self.model, bounds=self.bounds)
        t.values = dict(self.values)
        v = Fraction(new_value)
        if v:
            t.values[key] = v
        else:
            t.values.pop(key, None)
        return t


# -- reconstruction --------------------------------------------------------------


def _submultisets(counts):
    """All sub-multisets of a counted multiset with binomial multiplicities."""
    items = sorted(counts.items())
    ranges = [range(c + 1) for _, c in items]
    for picks in product(*ranges):
        mult = 1
        sub = []
        for (item, c), k in zip(items, picks):
            mult *= comb(c, k)
            sub.extend([item] * k)
        yield tuple(sub), mult


def _degree_splits(d: tuple):
    ranges = [range(x + 1) for x in d]
    for picks in product(*ranges):
        yield tuple(picks), tuple(a - b for a, b in zip(d, picks))


class Reconstructor:
    """Memoized evaluation of descendant correlators from primaries."""

    def __init__(self, model: TargetModel, bounds: Bounds,
                 trr_choice: Optional[callable] = None):
        self.model = model
        self.bounds = bounds
        self.memo = {}
        # trr_choice(key, target_index) -> (beta_idx, gamma_idx): positions of
        # the two reference insertions among the remaining ones.  The default
        # takes the two (class, level)-smallest; any admissible choice gives
        # the same values (asserted by tests).
        self.trr_choice = trr_choice

    def value(self, key: CorrelatorKey) -> Fraction:
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = result = self._compute(key)
        return result

    def _compute(self, key: CorrelatorKey) -> Fraction:
        model = self.model
        ins, d = key.insertions, key.degree
        n = len(ins)
        if n < 3:
            return Fraction(0)
        if not model.dimension_ok(key):
            return Fraction(0)
        unit = model.unit
        if n >= 4 and (unit, 0) in ins:
            return self._string(key)
        if n >= 4 and (unit, 1) in ins:
            return self._dilaton(key)
        if any(a >= 1 for _, a in ins):
            return self._trr(key)
        if key in model.primaries:
            return model.primaries[key]
        if (n >= 4 and model.divisor is not None
                and (model.divisor, 0) in ins and model.divisor_cup):
            return self._divisor(key)
        raise MissingPrimaryError(key)

    def _string(self, key: CorrelatorKey) -> Fraction:
        """Remove one unit tau_0; lower each remaining level by one."""
        ins = list(key.insertions)
        ins.remove((self.model.unit, 0))
        total = Fraction(0)
        for i, (c, a) in enumerate(ins):
            if a >= 1:
                rest = ins[:i] + [(c, a - 1)] + ins[i + 1:]
                total += self.value(self.model.key(rest, key.degree))
        return total

    def _dilaton(self, key: CorrelatorKey) -> Fraction:
        ins = list(key.insertions)
        ins.remove((self.model.unit, 1))
        sub = self.model.key(ins, key.degree)
        return (len(ins) - 2) * self.value(sub)

    def _trr(self, key: CorrelatorKey) -> Fraction:
        """Split off the highest-level insertion against two reference points."""
        model = self.model
        ins = list(key.insertions)
        target = max(range(len(ins)), key=lambda i: (ins[i][1], ins[i][0]))
        alpha, a = ins.pop(target)
        if self.trr_choice is None:
            order = sorted(range(len(ins)),
                           key=lambda i: (model.class_index(ins[i][0]), ins[i][1]))
            bi, gi = order[0], order[1]
        else:
            bi, gi = self.trr_choice(key, target)
        beta, gamma = ins[bi], ins[gi]
        rest = [ins[i] for i in range(len(ins)) if i not in (bi, gi)]
        counts = {}
        for item in rest:
            counts[item] = counts.get(item, 0) + 1
        total = Fraction(0)
        eta_inv = model.eta_inv
        classes = model.classes
        for x1, mult in _submultisets(counts):
            x2 = _multiset_minus(rest, x1)
            for d1, d2 in _degree_splits(key.degree):
                left_base = list(x1) + [(alpha, a - 1)]
                right_base = list(x2) + [beta, gamma]
                for mu in range(len(classes)):
                    for nu in range(len(classes)):
                        w = eta_inv[mu][nu]
                        if not w:
                            continue
                        left = model.key(left_base + [(classes[mu].id, 0)], d1)
                        lv = self.value(left)
                        if not lv:
                            continue
                        right = model.key(right_base + [(classes[nu].id, 0)], d2)
                        rv = self.value(right)
                        if not rv:
                            continue
                        total += mult * w * lv * rv
        return total

    def _divisor(self, key: CorrelatorKey) -> Fraction:
        """Remove one divisor insertion: degree pairing plus cup corrections."""
        model = self.model
        ins = list(key.insertions)
        ins.remove((model.divisor, 0))
        total = model.pairing_with_divisor(key.degree) * self.value(
            model.key(ins, key.degree))
        for i, (c, a) in enumerate(ins):
            if a >= 1:
                for b, coeff in model.cup_with_divisor(c).items():
                    if coeff:
                        rest = ins[:i] + [(b, a - 1)] + ins[i + 1:]
                        total += coeff * self.value(model.key(rest, key.degree))
        return total


def _multiset_minus(whole, part):
    out = list(whole)
    for item in part:
        out.remove(item)
    return tuple(out)


def enumerate_keys(model: TargetModel, bounds: Bounds):
    pairs = [(c.id, a) for c in model.classes for a in range(bounds.max_level + 1)]
    degs = [()] if model.h2_rank == 0 else [
        d for d in product(range(bounds.max_degree + 1), repeat=model.h2_rank)
        if sum(d) <= bounds.max_degree]
    for n in range(3, bounds.max_points + 1):
        for combo in combinations_with_replacement(pairs, n):
            for d in degs:
                yield model.key(combo, d)


def reconstruct(model: TargetModel, bounds: Bounds,
                trr_choice=None) -> CorrelatorTable:
    """Every correlator within bounds, computed from the model's primaries."""
    rec = Reconstructor(model, bounds, trr_choice)
    table = CorrelatorTable(model, bounds=bounds)
    for key in enumerate_keys(model, bounds):
        v = rec.value(key)
        if v:
            table.set(key, v)
    return table


# -- potential assembly and series-level verifiers --------------------------------


def t_name(cid, level):
    return f"t[{cid},{level}]"


def tc_name(cid, level):
    return f"tc[{cid},{level}]"


def z_name(pos):
    return f"z{pos}"


def descendant_table(model: TargetModel, max_level: int,
                     with_checked: bool = False,
                     check_degree_offset: int = -1) -> VariableTable:
    """Variable table with t (and optionally t-check) per class and level,
    plus the declared curve-class variables."""
    vs = []
    for c in model.classes:
        for a in range(max_level + 1):
            vs.append(descendant_variable(c.id, a, c.degree, False))
            if with_checked:
                vs.append(descendant_variable(c.id, a, c.degree, True,
                                              check_degree_offset))
    for i in range(model.h2_rank):
        vs.append(curve_class_variable(i, model.chern[i]))
    return VariableTable(vs)


def automorphism_factor(key: CorrelatorKey) -> int:
    counts = {}
    for item in key.insertions:
        counts[item] = counts.get(item, 0) + 1
    f = 1
    for c in counts.values():
        f *= factorial(c)
    return f


def assemble_potential(table: CorrelatorTable, policy: TruncationPolicy,
                       var_table: Optional[VariableTable] = None,
                       max_level: Optional[int] = None) -> GradedSeries:
    """f = sum value * t^{insertions} z^d / |Aut|; t-derivatives at 0 return
    the correlator values exactly."""
    model = table.model
    if var_table is None:
        if max_level is None:
            max_level = max((a for k in table.values for _, a in k.insertions),
                            default=0)
        var_table = descendant_table(model, max_level)
    total = {}
    for key, value in table.values.items():
        factors = {}
        odd_repeat = False
        for cid, a in key.insertions:
            nm = t_name(cid, a)
            factors[nm] = factors.get(nm, 0) + 1
            if factors[nm] > 1 and var_table.variable(nm).odd:
                odd_repeat = True
        if odd_repeat:
            raise ValidationError(
                f"nonzero correlator {key} repeats an odd class", "values")
        for i, e in enumerate(key.degree):
            if e:
                factors[z_name(i)] = e
        mono = tuple(sorted((var_table.position(nm), e) for nm, e in factors.items()))
        total[mono] = total.get(mono, Fraction(0)) + value / automorphism_factor(key)
    return var_table.series(total, policy)


def correlator_from_potential(potential: GradedSeries, model: TargetModel,
                              key: CorrelatorKey) -> Fraction:
    """Round-trip check helper: iterated t-derivatives at t = 0."""
    cur = potential
    for cid, a in key.insertions:
        cur = cur.derivative(t_name(cid, a))
    factors = {z_name(i): e for i, e in enumerate(key.degree) if e}
    return cur.coefficient(factors)


def _second_derivative_series(potential, model, alpha, i):
    """d^2 f / dt^{alpha,i} dt^{mu,0} eta^{mu nu} indexed by nu."""
    out = []
    n = len(model.classes)
    base = potential.derivative(t_name(alpha, i))
    for nu in range(n):
        acc = potential.table.zero(potential.policy)
        for mu in range(n):
            w = model.eta_inv[mu][nu]
            if w:
                acc = acc + base.derivative(t_name(model.classes[mu].id, 0)).scale(w)
        out.append(acc)
    return out


def trr_residual(table: CorrelatorTable, alpha_i, beta_j, gamma_k,
                 policy: TruncationPolicy,
                 potential: Optional[GradedSeries] = None,
                 max_level: Optional[int] = None) -> GradedSeries:
    """LHS - RHS of the three-point descendant recursion, as a series.

    alpha_i = (class id, level i >= 1); beta_j, gamma_k likewise (any level).
    """
    model = table.model
    (alpha, i), (beta, j), (gamma, k) = alpha_i, beta_j, gamma_k
    if i < 1:
        raise ValidationError("recursion needs level >= 1 on the split insertion",
                              "alpha_i")
    f = potential if potential is not None else assemble_potential(
        table, policy, max_level=max_level)
    lhs = (f.derivative(t_name(gamma, k)).derivative(t_name(beta, j))
           .derivative(t_name(alpha, i)))
    two = _second_derivative_series(f, model, alpha, i - 1)
    rhs = f.table.zero(policy)
    for nu, cls in enumerate(model.classes):
        if two[nu].is_zero():
            continue
        three = (f.derivative(t_name(gamma, k)).derivative(t_name(beta, j))
                 .derivative(t_name(cls.id, 0)))
        rhs = rhs + two[nu] * three
    return lhs - rhs


def averaged_trr_residual(table: CorrelatorTable, alpha: str, i: int,
                          policy: TruncationPolicy,
                          potential: Optional[GradedSeries] = None,
                          max_level: Optional[int] = None) -> GradedSeries:
    """N(N-1) df/dt^{alpha,i} - d2f/dt^{alpha,i-1}dt^mu eta N(N-1) df/dt^nu."""
    model = table.model
    if i < 1:
        raise ValidationError("averaged recursion needs level >= 1", "i")
    f = potential if potential is not None else assemble_potential(
        table, policy, max_level=max_level)

    def n_n_minus_one(s):
        return point_count(point_count(s)) - point_count(s)

    lhs = n_n_minus_one(f.derivative(t_name(alpha, i)))
    two = _second_derivative_series(f, model, alpha, i - 1)
    rhs = f.table.zero(policy)
    for nu, cls in enumerate(model.classes):
        if two[nu].is_zero():
            continue
        rhs = rhs + two[nu] * n_n_minus_one(f.derivative(t_name(cls.id, 0)))
    return lhs - rhs


@dataclass
class EquationResiduals:
    string: GradedSeries
    dilaton: GradedSeries
    divisor: Optional[GradedSeries]  # None when the model has no divisor class
    divisor_applicable: bool


def string_dilaton_divisor_residuals(table: CorrelatorTable,
                                     policy: TruncationPolicy,
                                     potential: Optional[GradedSeries] = None,
                                     max_level: Optional[int] = None,
                                     quad_factor: Fraction = Fraction(1, 2),
                                     euler_sign: int = -1) -> EquationResiduals:
    """Residual series of the unit-insertion equations on a potential.

    string:  df/dt^{0,0} - quad_factor*eta(t,t) - sum t^{a,k+1} df/dt^{a,k}
    dilaton: df/dt^{0,1} - euler_sign * E(f), where E scales a monomial of
             t-order r by -(r - 2) (the Euler operator on the genus-0 part);
             euler_sign=-1 is the convention under which the reconstructed
             potentials satisfy the equation exactly.
    divisor: df/dt^{w,0} - (w.d)-weighted f - quad_factor * eta(w cup t, t)
             - sum t^{a,k+1} c_{w a}^b df/dt^{b,k}
    """
    model = table.model
    f = potential if potential is not None else assemble_potential(
        table, policy, max_level=max_level)
    vt = f.table
    if max_level is None:
        max_level = max((v.indices[1] for v in vt.variables if v.kind == "t"),
                        default=0)

    def shifted_sum(derivative_weights):
        """sum_{a,k} t^{a,k+1} * sum_b w[a][b] * df/dt^{b,k}"""
        acc = vt.zero(policy)
        for a, cls in enumerate(model.classes):
            for k in range(max_level):
                lead = vt.var(t_name(cls.id, k + 1), 1, policy)
                for b, cls2 in enumerate(model.classes):
                    w = derivative_weights[a][b]
                    if w:
                        acc = acc + (lead * f.derivative(t_name(cls2.id, k))).scale(w)
        return acc

    nclasses = len(model.classes)
    identity_w = [[Fraction(1 if a == b else 0) for b in range(nclasses)]
                  for a in range(nclasses)]

    # string
    quad = vt.zero(policy)
    for mu, cm in enumerate(model.classes):
        for nu, cn in enumerate(model.classes):
            if model.eta[mu][nu]:
                quad = quad + (vt.var(t_name(cm.id, 0), 1, policy)
                               * vt.var(t_name(cn.id, 0), 1, policy)
                               ).scale(model.eta[mu][nu])
    string = (f.derivative(t_name(model.unit, 0)) - quad.scale(quad_factor)
              - shifted_sum(identity_w))

    # dilaton
    def euler(s):
        from .algebra import mono_t_order
        return s.map_terms(lambda m: -(mono_t_order(vt, m) - 2))

    dilaton = f.derivative(t_name(model.unit, 1)) - euler(f).scale(euler_sign)

    # divisor
    divisor = None
    applicable = model.divisor is not None and model.divisor_cup is not None
    if applicable:
        w = model.divisor
        zweights = f.map_terms(lambda m: _z_pairing(vt, model, m))
        quad_d = vt.zero(policy)
        for mu, cm in enumerate(model.classes):
            cup = model.cup_with_divisor(cm.id)
            for nu, cn in enumerate(model.classes):
                coeff = sum((Fraction(cup.get(cb.id, 0)) * model.eta[b][nu]
                             for b, cb in enumerate(model.classes)), Fraction(0))
                if coeff:
                    quad_d = quad_d + (vt.var(t_name(cm.id, 0), 1, policy)
                                       * vt.var(t_name(cn.id, 0), 1, policy)
                                       ).scale(coeff)
        cup_w = [[Fraction(model.cup_with_divisor(ca.id).get(cb.id, 0))
                  for b, cb in enumerate(model.classes)]
                 for a, ca in enumerate(model.classes)]
        divisor = (f.derivative(t_name(w, 0)) - zweights
                   - quad_d.scale(quad_factor) - shifted_sum(cup_w))
    return EquationResiduals(string, dilaton, divisor, applicable)


def _z_pairing(vt, model, mono):
    pair = model.divisor_pairing or (1,) * model.h2_rank
    total = 0
    for p, e in mono:
        v = vt.variables[p]
        if v.kind == "z":
            total += pair[v.indices[0]] * e
    return Fraction(total)


def restrict_series_min_t_order(series: GradedSeries, min_order: int) -> GradedSeries:
    """Drop terms below a t-order threshold (boundary window for the divisor
    equation, whose low-point instances reference excluded 2-point data)."""
    from .algebra import mono_t_order
    return series.map_terms(
        lambda m: 1 if mono_t_order(series.table, m) >= min_order else 0)


def restrict_series_max_t_order(series: GradedSeries, max_order: int) -> GradedSeries:
    """Keep terms up to a t-order threshold.

    Identity residuals computed from a potential assembled out of an
    n-point-bounded table are reliable up to t-order n-3 (the window where
    every correlator the identity touches lies inside the table); this trims
    the unreliable tail before asserting exact zero.
    """
    from .algebra import mono_t_order
    return series.map_terms(
        lambda m: 1 if mono_t_order(series.table, m) <= max_order else 0)


# -- quantum product ---------------------------------------------------------------


class QuantumProduct:
    """Structure constants c_{ab}^nu as polynomials in the curve classes."""

    def __init__(self, model: TargetModel, structure):
        self.model = model
        self.structure = structure  # (a, b, nu) -> {degree tuple: Fraction}

    def constant(self, a, b, nu) -> dict:
        return self.structure.get((a, b, nu), {})

    def unit_axiom_violations(self):
        model = self.model
        u = model.class_index(model.unit)
        bad = []
        for b in range(len(model.classes)):
            for nu in range(len(model.classes)):
                expect = {(0,) * model.h2_rank: Fraction(1)} if b == nu else {}
                got = {d: v for d, v in self.constant(u, b, nu).items() if v}
                if got != expect:
                    bad.append((b, nu, got))
        return bad

    def associativity_residuals(self):
        """WDVV: sum_nu c_{ab}^nu c_{nc}^s - c_{ac}^nu c_{nb}^s, z-convolved."""
        model = self.model
        n = len(model.classes)
        bad = {}
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for s in range(n):
                        acc = {}
                        for nu in range(n):
                            _convolve_into(acc, self.constant(a, b, nu),
                                           self.constant(nu, c, s), 1)
                            _convolve_into(acc, self.constant(a, c, nu),
                                           self.constant(nu, b, s), -1)
                        acc = {d: v for d, v in acc.items() if v}
                        if acc:
                            bad[(a, b, c, s)] = acc
        return bad


def _convolve_into(acc, poly1, poly2, sign):
    for d1, v1 in poly1.items():
        for d2, v2 in poly2.items():
            d = tuple(x + y for x, y in zip(d1, d2)) if d1 else d2
            acc[d] = acc.get(d, Fraction(0)) + sign * v1 * v2


def quantum_product(model: TargetModel, table: CorrelatorTable,
                    max_degree: Optional[int] = None) -> QuantumProduct:
    """c_{ab}^nu = sum_d <a b mu>_d z^d eta^{mu nu} from primary 3-point values."""
    if max_degree is None:
        max_degree = max((sum(k.degree) for k in table.values), default=0)
    degs = [()] if model.h2_rank == 0 else [
        d for d in product(range(max_degree + 1), repeat=model.h2_rank)
        if sum(d) <= max_degree]
    structure = {}
    n = len(model.classes)
    for a in range(n):
        for b in range(n):
            for mu in range(n):
                poly = {}
                for d in degs:
                    key = model.key([(model.classes[a].id, 0),
                                     (model.classes[b].id, 0),
                                     (model.classes[mu].id, 0)], d)
                    v = table.get(key)
                    if v:
                        poly[key.degree] = v
                if not poly:
                    continue
                for nu in range(n):
                    w = model.eta_inv[mu][nu]
                    if not w:
                        continue
                    target = structure.setdefault((a, b, nu), {})
                    for d, v in poly.items():
                        target[d] = target.get(d, Fraction(0)) + w * v
    for k in list(structure):
        structure[k] = {d: v for d, v in structure[k].items() if v}
        if not structure[k]:
            del structure[k]
    return QuantumProduct(model, structure)
