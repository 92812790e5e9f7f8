"""Pseudo-weight gradings attached to a model hypersurface.

The model is Im w = (Re w)^s * P(z, zb) with P real, bihomogeneous of plain
degree k0 - s, every monomial mixed in z and zb, and nondegenerate.  Two
weight presets are provided.

block_minimal (the grading the normalizer runs on): x costs k0, each z or zb
letter costs 1, and every disjoint block x^s * (monomial of P) that can be
carved out of a monomial is re-priced at k0 instead of s*k0 + (k0 - s).
Minimizing over the number of extractable blocks t gives

    wt = k0*ex + |ez| + |ezb| - s*(k0-1)*t_max,

t_max = min(ex // s, max dominated multiset of P-monomials), and for s = 0
the discount vanishes so the weight is plainly additive.  Under this grading
both x and every monomial of x^s*P weigh exactly k0, which is what makes the
model weighted-homogeneous.

literal: a transcription of the printed rule table, kept for side-by-side
auditing.  The table prices x at 1 inside several rules while the base rule
prices it at k0; the minimum over all matching evaluations is returned and
the full evaluation list is exposed for inspection.  Nothing downstream
depends on this preset.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from . import linalg
from .errors import InfeasibleWeight, NotHomogeneous, ValidationError
from .poly import HoloMono, Mono, Poly, deriv_z, zeros


@dataclass(frozen=True)
class ModelSpec:
    """Model hypersurface data (N, s, k0, P); validated via ModelSpec.make."""

    nz: int
    s: int
    k0: int
    p: Poly

    @staticmethod
    def make(nz: int, s: int, k0: int, p: Poly) -> "ModelSpec":
        if nz < 1:
            raise ValidationError("positive_dimension", f"N = {nz}")
        if k0 < 2:
            raise ValidationError("k0_at_least_two", f"k0 = {k0}")
        if s < 0:
            raise ValidationError("nonnegative_transversal_exponent", f"s = {s}")
        if k0 - s < 2:
            raise ValidationError("block_degree_at_least_two", f"k0 - s = {k0 - s}")
        if p.nvars != nz:
            raise ValidationError("variable_count", f"{p.nvars} != {nz}")
        if p.is_zero():
            raise ValidationError("nonzero_reference_polynomial")
        d = k0 - s
        for m in p.terms:
            if m.ex != 0:
                raise ValidationError(
                    "reference_polynomial_x_free", f"monomial {m} has x-power"
                )
            if m.plain_degree() != d:
                raise ValidationError(
                    "reference_polynomial_homogeneous",
                    f"monomial {m} has degree {m.plain_degree()} != {d}",
                )
            if sum(m.ez) < 1 or sum(m.ezb) < 1:
                raise ValidationError(
                    "mixed_monomials_only", f"monomial {m} is one-sided"
                )
        if not p.is_real():
            raise ValidationError("reference_polynomial_real")
        if not check_nondegeneracy(nz, p):
            raise ValidationError("nondegeneracy")
        return ModelSpec(nz, s, k0, p)

    @property
    def key(self):
        return (self.nz, self.s, self.k0, frozenset(self.p.terms.items()))

    def divisor(self) -> Poly:
        """x + i * x^s * P, the polynomial every Fischer division is against."""
        from .scalars import I

        n = self.nz
        xs = Poly.var_x(n).pow(self.s)
        return Poly.var_x(n) + xs.mul(self.p).scale(I)


def check_nondegeneracy(nz: int, p: Poly) -> bool:
    """True iff (a_kl) -> sum_kl dP/dz_k * a_kl * z_l has trivial kernel."""
    cols = []
    support: dict = {}
    for k in range(nz):
        dk = deriv_z(p, k)
        for l in range(nz):
            q = dk.mul(Poly.var_z(nz, l))
            cols.append(q)
            for m in q.terms:
                support.setdefault(m, len(support))
    if not support:
        return False
    matrix = [[0] * len(cols) for _ in range(len(support))]
    for j, q in enumerate(cols):
        for m, c in q.terms.items():
            matrix[support[m]][j] = c
    return linalg.rank(matrix, len(cols)) == nz * nz


BLOCK_MINIMAL = "block_minimal"
LITERAL = "literal"


class WeightPreset:
    """A weight function over monomials, with per-preset memo caches."""

    def __init__(self, model: ModelSpec, tag: str = BLOCK_MINIMAL):
        if tag not in (BLOCK_MINIMAL, LITERAL):
            raise ValidationError("weight_preset_tag", tag)
        self.tag = tag
        self.model = model
        self._support = sorted((m.ez, m.ezb) for m in model.p.terms)
        self._blocks_cache: dict = {}
        self._weight_cache: dict = {}
        self._slice_cache: dict = {}

    @property
    def key(self):
        return (self.model.key, self.tag)

    # -- block_minimal ---------------------------------------------------------

    def max_blocks(self, ez: tuple, ezb: tuple) -> int:
        """Largest multiset of P-monomials dominated componentwise by (ez, ezb)."""
        got = self._blocks_cache.get((ez, ezb))
        if got is not None:
            return got
        best = 0
        for az, azb in self._support:
            if all(a <= e for a, e in zip(az, ez)) and all(
                a <= e for a, e in zip(azb, ezb)
            ):
                sub = self.max_blocks(
                    tuple(e - a for e, a in zip(ez, az)),
                    tuple(e - a for e, a in zip(ezb, azb)),
                )
                if sub + 1 > best:
                    best = sub + 1
        self._blocks_cache[(ez, ezb)] = best
        return best

    def _weight_block(self, m: Mono) -> int:
        k0, s = self.model.k0, self.model.s
        base = k0 * m.ex + sum(m.ez) + sum(m.ezb)
        if s == 0:
            return base
        t = min(m.ex // s, self.max_blocks(m.ez, m.ezb))
        return base - s * (k0 - 1) * t

    # -- literal -----------------------------------------------------------------

    def literal_evaluations(self, m: Mono) -> list:
        """Every matching rule of the printed table, in printed order."""
        k0, s = self.model.k0, self.model.s
        d = k0 - s
        a_tot, b_tot, n = sum(m.ez), sum(m.ezb), m.ex
        evals = []

        if n == 1 and a_tot == 0 and b_tot == 0:
            evals.append(("letter-x", k0, ""))
        if n == 0 and a_tot + b_tot == 1:
            evals.append(("letter-z", 1, ""))
        if n == 0:
            evals.append(("x-free", a_tot + b_tot, ""))
        if a_tot == 0 and b_tot != 0:
            evals.append(("zb-and-x", b_tot + n, ""))
        if b_tot == 0 and a_tot != 0:
            evals.append(("z-and-x", a_tot + n, ""))
        if a_tot + b_tot < d and (a_tot != 0 or b_tot != 0):
            evals.append(("mixed-below-block", n + a_tot + b_tot, ""))
        if a_tot + b_tot == d and a_tot != 0 and b_tot != 0:
            evals.append(("mixed-at-block", n - s + a_tot + b_tot, ""))

        overflow_blocked = False
        for beta, az, azb, res in self._block_power_splits(m):
            if sum(az) + sum(azb) == d:
                height = (n - (s - 1) * beta) * k0
                if height >= 0:
                    if res == 0:
                        evals.append(("block-power", height, f"beta={beta}"))
                    else:
                        evals.append(
                            ("block-power-residual", height + res, f"beta={beta}")
                        )
            # The overflow rule is printed with block degree k0, not k0 - s.
            if res == 0 and sum(az) + sum(azb) == k0:
                height = (n - (s - 1) * beta) * k0
                if height <= 0:
                    if s <= 1:
                        overflow_blocked = True
                        evals.append(
                            (
                                "block-power-overflow",
                                None,
                                f"beta={beta}: no maximal feasible beta'",
                            )
                        )
                    else:
                        bp = n // (s - 1)
                        evals.append(
                            (
                                "block-power-overflow",
                                height + (sum(az) + sum(azb)) * (beta - bp),
                                f"beta={beta} beta'={bp}",
                            )
                        )
        values = [v for _, v, _ in evals if v is not None]
        if not values and overflow_blocked:
            raise InfeasibleWeight(f"no feasible beta' for {m}")
        return evals

    def _block_power_splits(self, m: Mono):
        """Yield (beta, a, b, residual) with ez = beta*a + c, ezb = beta*b.

        The residual sits on one side only; the symmetric case is produced by
        swapping roles.  Pure block powers come out with residual 0.
        """
        seen = set()
        top = max((sum(m.ez) + sum(m.ezb), 1))
        for beta in range(1, top + 1):
            for z_side in (True, False):
                fixed, loose = (m.ezb, m.ez) if z_side else (m.ez, m.ezb)
                if any(e % beta for e in fixed):
                    continue
                b = tuple(e // beta for e in fixed)
                if sum(b) == 0:
                    continue
                ranges = [range(e // beta + 1) for e in loose]
                for a in product(*ranges):
                    if sum(a) == 0:
                        continue
                    res = sum(loose) - beta * sum(a)
                    key = (beta, a, b, res) if z_side else (beta, b, a, res)
                    if key in seen:
                        continue
                    seen.add(key)
                    yield key

    def _weight_literal(self, m: Mono) -> int:
        evals = self.literal_evaluations(m)
        values = [v for _, v, _ in evals if v is not None]
        if not values:
            k0 = self.model.k0
            return sum(m.ez) + sum(m.ezb) + k0 * m.ex
        return min(values)

    # -- shared ---------------------------------------------------------------

    def weight(self, m: Mono) -> int:
        got = self._weight_cache.get(m)
        if got is None:
            got = (
                self._weight_block(m)
                if self.tag == BLOCK_MINIMAL
                else self._weight_literal(m)
            )
            self._weight_cache[m] = got
        return got

    def monomials_of_weight(self, w: int) -> list:
        """All monomials of this weight; finite because weight >= plain degree."""
        got = self._slice_cache.get(w)
        if got is None:
            got = [
                m
                for m in _monomials_up_to_degree(self.model.nz, w)
                if self.weight(m) == w
            ]
            self._slice_cache[w] = got
        return got


def _monomials_up_to_degree(nz: int, dmax: int) -> list:
    out = []
    nslots = 2 * nz + 1
    vec = [0] * nslots

    def rec(slot: int, remaining: int):
        if slot == nslots - 1:
            for e in range(remaining + 1):
                vec[slot] = e
                out.append(Mono(tuple(vec[:nz]), tuple(vec[nz : 2 * nz]), vec[-1]))
            vec[slot] = 0
            return
        for e in range(remaining + 1):
            vec[slot] = e
            rec(slot + 1, remaining - e)
        vec[slot] = 0

    if dmax >= 0:
        rec(0, dmax)
    return out


def weight(m: Mono, preset: WeightPreset) -> int:
    return preset.weight(m)


def holo_weight(m: HoloMono, k0: int) -> int:
    """Weight of z^a w^n with w priced like x."""
    return sum(m.ez) + k0 * m.ew


def weighted_parts(p: Poly, preset: WeightPreset) -> dict:
    """Partition into weight classes; values sum back to p exactly."""
    parts: dict = {}
    for m, c in p.terms.items():
        parts.setdefault(preset.weight(m), {})[m] = c
    return {w: Poly(p.nvars, terms) for w, terms in sorted(parts.items())}


def weighted_part(p: Poly, preset: WeightPreset, w: int) -> Poly:
    return Poly(
        p.nvars, {m: c for m, c in p.terms.items() if preset.weight(m) == w}
    )


def weighted_truncate(p: Poly, preset: WeightPreset, wmax: int) -> Poly:
    return Poly(
        p.nvars, {m: c for m, c in p.terms.items() if preset.weight(m) <= wmax}
    )


def is_weighted_homogeneous(p: Poly, preset: WeightPreset) -> Optional[int]:
    """The single weight of p, or None when p is zero or mixed."""
    w = None
    for m in p.terms:
        wm = preset.weight(m)
        if w is None:
            w = wm
        elif wm != w:
            return None
    return w


def validate_model_homogeneity(model: ModelSpec, preset: WeightPreset) -> int:
    """Assert wt(x) = k0 and wt of every monomial of x^s * P is k0."""
    n, k0 = model.nz, model.k0
    x_mono = Mono(zeros(n), zeros(n), 1)
    wx = preset.weight(x_mono)
    if wx != k0:
        raise NotHomogeneous(
            f"wt(x) = {wx} != k0 = {k0}", monomial=x_mono, got=wx, expected=k0
        )
    for m in model.p.terms:
        block = Mono(m.ez, m.ezb, model.s)
        wm = preset.weight(block)
        if wm != k0:
            raise NotHomogeneous(
                f"wt({block}) = {wm} != k0 = {k0}",
                monomial=block,
                got=wm,
                expected=k0,
            )
    return k0


_PRESET_REGISTRY: dict = {}


def block_minimal_preset(model: ModelSpec) -> WeightPreset:
    """Shared preset instance per model, so weight memos accumulate."""
    key = (model.key, BLOCK_MINIMAL)
    got = _PRESET_REGISTRY.get(key)
    if got is None:
        got = _PRESET_REGISTRY[key] = WeightPreset(model, BLOCK_MINIMAL)
    return got


def literal_preset(model: ModelSpec) -> WeightPreset:
    key = (model.key, LITERAL)
    got = _PRESET_REGISTRY.get(key)
    if got is None:
        got = _PRESET_REGISTRY[key] = WeightPreset(model, LITERAL)
    return got
