"""Fischer pairing, adjoint operators, weighted divisions, and the
normalization machinery built from them.

The pairing is the apolar one: monomials are orthogonal and each has squared
norm equal to the product of the factorials of its exponents.  Under it,
multiplication by a polynomial q and the differential operator obtained by
conjugating q's coefficients and turning letters into partials are adjoint.

Division by the model polynomial x + i x^s P runs per pseudo-weight class.
On the class of weight p the quotient is drawn from the class of weight
p - wt(divisor) and the remainder is the component of the class orthogonal
to the (projected) image of multiplication.  Existence and uniqueness on
each class follow from positive-definiteness of the pairing.  When the
grading is additive over the products involved (always for s = 0, and for
any plain-homogeneous divisor under its matching grading) this is exactly
the classical Fischer decomposition and the remainder is annihilated by the
divisor's adjoint globally; in the genuinely pseudo-weighted cases (s >= 1)
a global polynomial splitting with annihilated remainder does not exist in
general, and the per-class solution here is the canonical substitute the
degree-by-degree induction needs.

Downstream of the division sit the remainder family (divisions of z^I and
x zb_l z^J, plus conjugates), the per-class normalization conditions (chain
remainders annihilated by the adjoints of same-weight family remainders,
plus the no-positive-x-power condition on the depth wt/k0 - 1 quotient),
and the membership residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional

from . import linalg
from .errors import DependentFamily, SingularDecomposition, ValidationError
from .poly import Mono, Poly, derivative
from .scalars import GaussRat, ZERO
from .weights import (
    ModelSpec,
    WeightPreset,
    is_weighted_homogeneous,
    weighted_part,
    weighted_parts,
)


def mono_factorial(m: Mono) -> int:
    out = 1
    for e in m.ez:
        out *= factorial(e)
    for e in m.ezb:
        out *= factorial(e)
    return out * factorial(m.ex)


def fischer_pairing(p: Poly, q: Poly) -> GaussRat:
    """Sesquilinear apolar pairing; the second argument is conjugated."""
    acc = ZERO
    small = p if len(p.terms) <= len(q.terms) else q
    other = q if small is p else p
    for m in small.terms:
        a = p.terms.get(m)
        b = q.terms.get(m)
        if a is not None and b is not None:
            acc = acc + a * b.conj() * mono_factorial(m)
    return acc


class AdjointOperator:
    """The Fischer adjoint q*(d) of multiplication by q."""

    __slots__ = ("source",)

    def __init__(self, source: Poly):
        self.source = source

    def __call__(self, p: Poly) -> Poly:
        return adjoint_apply(self, p)


def adjoint_apply(op, p: Poly) -> Poly:
    """Apply the adjoint of multiplication by op (a Poly or AdjointOperator)."""
    src = op.source if isinstance(op, AdjointOperator) else op
    out = Poly.zero(p.nvars)
    for m, c in src.terms.items():
        out = out + derivative(p, m.ez, m.ezb, m.ex).scale(c.conj())
    return out


def divisor_weight(divisor: Poly, preset: WeightPreset) -> int:
    """Validate weighted homogeneity of a divisor and return its weight."""
    if divisor.is_zero():
        raise ValidationError("divisor_nonzero")
    w = is_weighted_homogeneous(divisor, preset)
    if w is None:
        raise ValidationError(
            "divisor_weighted_homogeneous",
            f"divisor mixes weight classes under {preset.tag}",
        )
    return w


# ---------------------------------------------------------------------------
# Per-class division
# ---------------------------------------------------------------------------


class _SliceData:
    """Full division data on one weight class: basis, image, quotient map."""

    def __init__(self, preset: WeightPreset, divisor: Poly, w: int, dw: int):
        self.w = w
        self.basis_f = preset.monomials_of_weight(w)
        self.index_f = {m: i for i, m in enumerate(self.basis_f)}
        self.basis_a = preset.monomials_of_weight(w - dw) if w >= dw else []
        nf, na = len(self.basis_f), len(self.basis_a)
        if na == 0 or nf == 0:
            self.L = []
            self.Q = []
            return
        # L columns: the weight-w part of divisor * basis monomial.
        cols = []
        for m in self.basis_a:
            img = weighted_part(divisor.mul(Poly(divisor.nvars, {m: GaussRat(1)})),
                                preset, w)
            col = [ZERO] * nf
            for mm, c in img.terms.items():
                col[self.index_f[mm]] = c
            cols.append(col)
        self.L = [[cols[a][f] for a in range(na)] for f in range(nf)]
        facts = [mono_factorial(m) for m in self.basis_f]
        self.M = [
            [cols[a][f].conj() * facts[f] for f in range(nf)] for a in range(na)
        ]
        gram = linalg.mat_mul(self.M, self.L)
        solver = linalg.PreparedSolver(gram, na)
        if solver.rank != na:
            raise SingularDecomposition(
                f"division image lost rank on weight class {w}"
            )
        qcols = []
        for f in range(nf):
            rhs = [self.M[a][f] for a in range(na)]
            qcols.append(solver.solve(rhs))
        self.Q = [[qcols[f][a] for f in range(nf)] for a in range(na)]

    def quotient_vec(self, v: list) -> list:
        return linalg.mat_vec(self.Q, v) if self.Q else []


_SLICE_CACHE: dict = {}


def _divisor_key(divisor: Poly):
    return frozenset(divisor.terms.items())


def full_slice(preset: WeightPreset, divisor: Poly, w: int, dw: int) -> _SliceData:
    key = (preset.key, _divisor_key(divisor), w)
    got = _SLICE_CACHE.get(key)
    if got is None:
        got = _SLICE_CACHE[key] = _SliceData(preset, divisor, w, dw)
    return got


def slice_division(
    f_slice: Poly, divisor: Poly, preset: WeightPreset, w: int, dw: int
) -> tuple:
    """Divide one weight-w slice: returns (quotient A, pure remainder B).

    B = f - (weight-w part of divisor * A) lies in the class and is
    orthogonal to the projected multiplication image.  Only the monomials
    coupled to f's support are solved for; conditions outside the coupled
    component hold automatically.
    """
    n = f_slice.nvars
    if f_slice.is_zero():
        return Poly.zero(n), Poly.zero(n)
    if w < dw:
        return Poly.zero(n), f_slice
    candidates = preset.monomials_of_weight(w - dw)
    if not candidates:
        return Poly.zero(n), f_slice
    images = {}
    for m in candidates:
        img = weighted_part(
            divisor.mul(Poly(n, {m: GaussRat(1)})), preset, w
        )
        if not img.is_zero():
            images[m] = img

    support = set(f_slice.terms)
    chosen: list = []
    chosen_set: set = set()
    while True:
        grew = False
        for m, img in images.items():
            if m in chosen_set:
                continue
            if any(t in support for t in img.terms):
                chosen.append(m)
                chosen_set.add(m)
                support.update(img.terms)
                grew = True
        if not grew:
            break
    if not chosen:
        return Poly.zero(n), f_slice

    na = len(chosen)
    gram = [[ZERO] * na for _ in range(na)]
    rhs = [ZERO] * na
    for i, mi in enumerate(chosen):
        li = images[mi]
        rhs[i] = fischer_pairing(f_slice, li)
        for j, mj in enumerate(chosen):
            gram[i][j] = fischer_pairing(images[mj], li)
    solver = linalg.PreparedSolver(gram, na)
    if solver.rank != na:
        raise SingularDecomposition(
            f"division image lost rank on weight class {w}"
        )
    sol = solver.solve(rhs)
    a_poly = Poly.from_terms(n, [(m, c) for m, c in zip(chosen, sol)])
    proj = Poly.zero(n)
    for m, c in zip(chosen, sol):
        if c:
            proj = proj + images[m].scale(c)
    return a_poly, f_slice - proj


def fischer_decompose(f: Poly, divisor: Poly, preset: WeightPreset) -> tuple:
    """Split f = divisor * A + B along the preset's weight classes.

    A collects the per-class quotients; B is returned as f - divisor * A so
    the reconstruction identity is exact by construction.  Whenever
    multiplication by the divisor respects the grading on A's support (all
    s = 0 models, and any plain-homogeneous divisor under an additive
    grading) B also satisfies adjoint_apply(divisor, B) = 0 exactly; in the
    remaining pseudo-weighted cases that identity holds class by class.
    """
    dw = divisor_weight(divisor, preset)
    a_total = Poly.zero(f.nvars)
    for w, part in weighted_parts(f, preset).items():
        a_part, _ = slice_division(part, divisor, preset, w, dw)
        a_total = a_total + a_part
    return a_total, f - divisor.mul(a_total)


def brute_force_pure_remainder(
    f: Poly, divisor: Poly, preset: WeightPreset
) -> Poly:
    """Sum of the per-class remainders (each weight-pure)."""
    dw = divisor_weight(divisor, preset)
    b_total = Poly.zero(f.nvars)
    for w, part in weighted_parts(f, preset).items():
        _, b_part = slice_division(part, divisor, preset, w, dw)
        b_total = b_total + b_part
    return b_total


# ---------------------------------------------------------------------------
# Remainder family
# ---------------------------------------------------------------------------


@dataclass
class FamilyEntry:
    kind: str  # pure | mixed | pure_conj | mixed_conj
    index: tuple
    stage: int  # |I| for pure entries, |J| + offset for mixed ones
    source: Poly
    quotient: Poly
    remainder: Poly
    weight: int

    def label(self) -> str:
        return f"{self.kind}{self.index}"


@dataclass
class FischerBasisFamily:
    model: ModelSpec
    kmax: int
    preset: WeightPreset
    entries: list
    symmetric: bool = True
    mixed_index_offset: int = 1
    _conditions_cache: dict = field(default_factory=dict, repr=False)

    def entries_for_conditions(self, weight: int) -> list:
        kinds = (
            ("pure", "mixed", "pure_conj", "mixed_conj")
            if self.symmetric
            else ("mixed", "pure_conj", "mixed_conj")
        )
        return [
            e for e in self.entries if e.weight == weight and e.kind in kinds
        ]


def _multiindices(n: int, total: int) -> list:
    if n == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for rest in _multiindices(n - 1, total - head):
            out.append((head,) + rest)
    return out


def build_basis_family(
    model: ModelSpec,
    kmax: int,
    preset: WeightPreset,
    mixed_index_offset: int = 1,
    symmetric: bool = True,
) -> FischerBasisFamily:
    """Divide z^I and x zb_l z^J for 2 <= k <= kmax and collect remainders.

    Conjugate entries are included.  The remainders must be exactly linearly
    independent; a dependence is reported with an explicit witness.
    """
    if kmax < 2:
        raise ValidationError("family_kmax", f"kmax = {kmax} < 2")
    n = model.nz
    divisor = model.divisor()
    dw = divisor_weight(divisor, preset)
    entries: list = []
    zero = (0,) * n
    for k in range(2, kmax + 1):
        for idx in _multiindices(n, k):
            mono = Mono(idx, zero, 0)
            f = Poly(n, {mono: GaussRat(1)})
            w = preset.weight(mono)
            a, b = slice_division(f, divisor, preset, w, dw)
            entries.append(FamilyEntry("pure", (idx,), k, f, a, b, w))
        j_total = k - mixed_index_offset
        if j_total < 0:
            continue
        for jdx in _multiindices(n, j_total):
            for l in range(n):
                ezb = [0] * n
                ezb[l] = 1
                mono = Mono(jdx, tuple(ezb), 1)
                f = Poly(n, {mono: GaussRat(1)})
                w = preset.weight(mono)
                a, b = slice_division(f, divisor, preset, w, dw)
                entries.append(FamilyEntry("mixed", (jdx, l), k, f, a, b, w))
    # conjugation preserves every pseudo-weight: P is real, so its support
    # is symmetric under swapping the z and zb sides
    conj_entries = [
        FamilyEntry(
            e.kind + "_conj",
            e.index,
            e.stage,
            e.source.conjugate(),
            e.quotient.conjugate(),
            e.remainder.conjugate(),
            e.weight,
        )
        for e in entries
    ]
    entries = entries + conj_entries

    support: dict = {}
    for e in entries:
        for m in e.remainder.terms:
            support.setdefault(m, len(support))
    matrix = [[ZERO] * len(entries) for _ in range(len(support))]
    for j, e in enumerate(entries):
        for m, c in e.remainder.terms.items():
            matrix[support[m]][j] = c
    kernel = linalg.nullspace(matrix, len(entries))
    if kernel:
        combo = {
            entries[i].label(): v
            for i, v in enumerate(kernel[0])
            if (v if isinstance(v, GaussRat) else GaussRat(v))
        }
        raise DependentFamily(
            f"remainder family is linearly dependent ({len(kernel)} relations)",
            witness=combo,
        )
    return FischerBasisFamily(
        model, kmax, preset, entries, symmetric, mixed_index_offset
    )


# ---------------------------------------------------------------------------
# Normalization conditions per weight class
# ---------------------------------------------------------------------------


class ClassConditions:
    """Linear functionals on one weight class that cut the normal-form space.

    A class-T real polynomial passes iff every chain remainder is killed by
    the adjoints of the family remainders of its own weight and, when k0
    divides T, the depth T/k0 - 1 quotient has no monomial with a positive
    x power.
    """

    def __init__(
        self,
        model: ModelSpec,
        family: FischerBasisFamily,
        preset: WeightPreset,
        T: int,
    ):
        self.model = model
        self.family = family
        self.preset = preset
        self.T = T
        self.basis = preset.monomials_of_weight(T)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.rows: list = []
        self.labels: list = []
        self._stage_slices: list = []
        self._kernel = None
        self._kernel_solver = None
        k0 = model.k0
        divisor = model.divisor()
        nT = len(self.basis)
        qc = linalg.identity(nT)  # maps class coefficients to current quotient
        xstar_stage = T // k0 - 1 if T % k0 == 0 else None
        for j in range(0, T // k0 + 1):
            qj = T - j * k0
            basis_j = preset.monomials_of_weight(qj)
            sd = (
                full_slice(preset, divisor, qj, k0)
                if qj >= k0 and preset.monomials_of_weight(qj - k0)
                else None
            )
            self._stage_slices.append((qj, basis_j, sd))
            if xstar_stage is not None and j == xstar_stage:
                for mi, m in enumerate(basis_j):
                    if m.ex > 0:
                        r = [ZERO] * len(basis_j)
                        r[mi] = GaussRat(1)
                        self.rows.append(linalg.vec_mat(r, qc))
                        self.labels.append((j, "x_power", str(m)))
            for entry in family.entries_for_conditions(qj):
                for label, r in _adjoint_rows(entry.remainder, basis_j):
                    if sd is not None and sd.L:
                        u = linalg.vec_mat(r, sd.L)
                        v = linalg.vec_mat(u, sd.Q)
                        eff = [a - b for a, b in zip(r, v)]
                    else:
                        eff = r
                    self.rows.append(linalg.vec_mat(eff, qc))
                    self.labels.append((j, entry.label(), label))
            if sd is None or not sd.Q:
                break
            qc = linalg.mat_mul(sd.Q, qc)

    # -- evaluation -------------------------------------------------------------

    def vector(self, p: Poly) -> list:
        v = [ZERO] * len(self.basis)
        for m, c in p.terms.items():
            i = self.index.get(m)
            if i is None:
                raise ValidationError(
                    "weight_class_mismatch",
                    f"monomial {m} is not of weight {self.T}",
                )
            v[i] = c
        return v

    def values(self, p: Poly) -> list:
        v = self.vector(p)
        return [_dot(row, v) for row in self.rows]

    def is_member(self, p: Poly) -> bool:
        return all(val.is_zero() for val in self.values(p))

    def chain(self, p: Poly) -> tuple:
        """Actual remainders and quotients of the iterated division."""
        remainders = []
        quotients = []
        v = self.vector(p)
        for qj, basis_j, sd in self._stage_slices:
            if sd is not None and sd.L:
                a = sd.quotient_vec(v)
                lv = linalg.mat_vec(sd.L, a)
                r = [x - y for x, y in zip(v, lv)]
            else:
                a = []
                r = v
            remainders.append(_poly_from_vec(self.model.nz, basis_j, r))
            if not a:
                quotients.append(Poly.zero(self.model.nz))
                break
            nxt = self.preset.monomials_of_weight(qj - self.model.k0)
            quotients.append(_poly_from_vec(self.model.nz, nxt, a))
            v = a
        return remainders, quotients

    def certificate(self, p: Poly) -> list:
        """Violated conditions as (stage, condition, witness) triples."""
        out = []
        remainders, quotients = self.chain(p)
        k0 = self.model.k0
        for j, r in enumerate(remainders):
            for entry in self.family.entries_for_conditions(self.T - j * k0):
                img = adjoint_apply(entry.remainder, r)
                if not img.is_zero():
                    out.append(
                        {
                            "class": self.T,
                            "stage": j,
                            "condition": f"ker adjoint {entry.label()}",
                            "witness": repr(img),
                        }
                    )
        if self.T % k0 == 0:
            jstar = self.T // k0 - 1
            piece = (
                p
                if jstar == 0
                else (quotients[jstar - 1] if jstar - 1 < len(quotients) else None)
            )
            if piece is not None:
                bad = Poly(
                    piece.nvars,
                    {m: c for m, c in piece.terms.items() if m.ex > 0},
                )
                if not bad.is_zero():
                    out.append(
                        {
                            "class": self.T,
                            "stage": jstar,
                            "condition": "x_power_free_quotient",
                            "witness": repr(bad),
                        }
                    )
        return out

    # -- membership residual ------------------------------------------------------

    def _ensure_kernel(self):
        if self._kernel is not None:
            return
        mat = [list(row) for row in self.rows]
        self._kernel = linalg.nullspace(mat, len(self.basis))
        facts = [mono_factorial(m) for m in self.basis]
        nk = len(self._kernel)
        gram = [[ZERO] * nk for _ in range(nk)]
        for i in range(nk):
            for j in range(nk):
                acc = ZERO
                for t in range(len(self.basis)):
                    a = _as_gr(self._kernel[j][t])
                    b = _as_gr(self._kernel[i][t])
                    if a and b:
                        acc = acc + a * b.conj() * facts[t]
                gram[i][j] = acc
        self._kernel_solver = linalg.PreparedSolver(gram, nk) if nk else None
        if nk and self._kernel_solver.rank != nk:
            raise SingularDecomposition(
                f"membership projection lost rank on class {self.T}"
            )

    def residual(self, p: Poly) -> Poly:
        """Component of p outside the normalization space (zero iff member)."""
        self._ensure_kernel()
        v = self.vector(p)
        if not self._kernel:
            return p
        facts = [mono_factorial(m) for m in self.basis]
        rhs = []
        for i in range(len(self._kernel)):
            acc = ZERO
            for t, val in enumerate(v):
                b = _as_gr(self._kernel[i][t])
                if val and b:
                    acc = acc + val * b.conj() * facts[t]
            rhs.append(acc)
        coeffs = self._kernel_solver.solve(rhs)
        proj = [ZERO] * len(self.basis)
        for j, c in enumerate(coeffs):
            c = _as_gr(c)
            if not c:
                continue
            for t in range(len(self.basis)):
                kv = _as_gr(self._kernel[j][t])
                if kv:
                    proj[t] = proj[t] + c * kv
        out = {
            m: v[i] - proj[i]
            for i, m in enumerate(self.basis)
            if v[i] - proj[i]
        }
        return Poly(p.nvars, out)


def _as_gr(v) -> GaussRat:
    return v if isinstance(v, GaussRat) else GaussRat(v)


def _dot(row: list, v: list) -> GaussRat:
    acc = ZERO
    for a, b in zip(row, v):
        if a and b:
            acc = acc + a * b
    return acc


def _poly_from_vec(n: int, basis: list, vec: list) -> Poly:
    return Poly.from_terms(n, [(m, c) for m, c in zip(basis, vec) if c])


def _adjoint_rows(source: Poly, basis: list) -> list:
    """Rows of the matrix of adjoint_apply(source, .) on a slice basis."""
    if not basis:
        return []
    images = [
        adjoint_apply(source, Poly(source.nvars, {m: GaussRat(1)}))
        for m in basis
    ]
    targets: dict = {}
    for img in images:
        for m in img.terms:
            targets.setdefault(m, len(targets))
    rows = [[ZERO] * len(basis) for _ in targets]
    for col, img in enumerate(images):
        for m, c in img.terms.items():
            rows[targets[m]][col] = c
    return [
        (str(t), rows[i]) for t, i in sorted(targets.items(), key=lambda kv: kv[1])
    ]


def class_conditions(
    model: ModelSpec,
    family: FischerBasisFamily,
    preset: WeightPreset,
    T: int,
) -> ClassConditions:
    key = (preset.tag, T)
    got = family._conditions_cache.get(key)
    if got is None:
        got = family._conditions_cache[key] = ClassConditions(
            model, family, preset, T
        )
    return got


def normalization_residual(
    p: Poly,
    model: ModelSpec,
    family: FischerBasisFamily,
    preset: WeightPreset,
) -> tuple:
    """Membership data for the iterated-division normalization space.

    Returns (residual, certificate): the residual is the component of p the
    space rejects (zero iff every weight class of p passes) and the
    certificate lists each failed kernel or x-power condition.
    """
    if not p.is_real():
        raise ValidationError("real_valued", "membership is defined for real input")
    residual = Poly.zero(p.nvars)
    certificate: list = []
    for w, part in weighted_parts(p, preset).items():
        cc = class_conditions(model, family, preset, w)
        certificate.extend(cc.certificate(part))
        residual = residual + cc.residual(part)
    return residual, certificate
