"""Defining series, formal maps, and the pushforward of a hypersurface.

A hypersurface is Im w = (Re w)^s P(z, zb) + sum of tail classes, each tail
class a real polynomial sitting in one pseudo-weight class >= k0 + 1.  A
formal map (F, G) has identity linear part; pushing the series forward
means solving

    Im G(z, w) = (Re G)^s P(F, conj F) + sum phi'_k(F, conj F, Re G)

on the graph w = x + i (x^s P + sum phi_k) for the unknown classes phi'_k,
ascending one pseudo-weight at a time.  The solve is triangular because
every map increment beyond the identity strictly raises pseudo-weight under
composition, so the weight-T component of the equation determines phi'_T
outright from lower classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import FormNotPreserved, OrderOverflow, ValidationError
from .poly import HoloMono, HoloPoly, Poly, zeros
from .scalars import GaussRat, I, ONE
from .weights import (
    ModelSpec,
    WeightPreset,
    block_minimal_preset,
    is_weighted_homogeneous,
    weighted_parts,
)


@dataclass
class DefiningSeries:
    """Model plus weighted tail classes, truncated at truncation_order.

    truncation_order None means the series is exact (no discarded classes),
    which is how bare models are represented.
    """

    model: ModelSpec
    tail: dict
    truncation_order: Optional[int] = None

    def __post_init__(self):
        preset = block_minimal_preset(self.model)
        k0 = self.model.k0
        for t, p in self.tail.items():
            if p.is_zero():
                raise ValidationError("tail_class_nonzero", f"class {t} is zero")
            if p.nvars != self.model.nz:
                raise ValidationError("variable_count", f"tail class {t}")
            if t < k0 + 1:
                raise ValidationError(
                    "tail_class_range", f"class {t} < k0 + 1 = {k0 + 1}"
                )
            if self.truncation_order is not None and t > self.truncation_order:
                raise ValidationError(
                    "tail_class_range",
                    f"class {t} beyond truncation order {self.truncation_order}",
                )
            if not p.is_real():
                raise ValidationError("tail_class_real", f"class {t}")
            if is_weighted_homogeneous(p, preset) != t:
                raise ValidationError(
                    "tail_class_weight", f"class {t} entry is not of weight {t}"
                )

    def graph_height(self, order: int) -> Poly:
        """u with w = x + i u on the hypersurface, truncated at plain order."""
        n = self.model.nz
        u = Poly.var_x(n).pow(self.model.s, order).mul(self.model.p, order)
        for t in sorted(self.tail):
            if t <= order:
                u = u + self.tail[t]
        return u

    def order_cap(self) -> Optional[int]:
        return self.truncation_order

    def __eq__(self, other):
        if not isinstance(other, DefiningSeries):
            return NotImplemented
        return (
            self.model == other.model
            and self.tail == other.tail
            and self.truncation_order == other.truncation_order
        )


def model_defining(model: ModelSpec, order: Optional[int] = None) -> DefiningSeries:
    """The bare model: empty tail, exact to every order unless capped."""
    return DefiningSeries(model, {}, order)


@dataclass
class FormalMap:
    """(F, G) = (z + O(2), w + O(2)) with exact coefficients."""

    f: list
    g: HoloPoly
    truncation_order: Optional[int] = None

    def __post_init__(self):
        n = len(self.f)
        if self.g.nvars != n or any(fl.nvars != n for fl in self.f):
            raise ValidationError("variable_count", "map components disagree")
        zero = zeros(n)
        const = HoloMono(zero, 0)
        wlin = HoloMono(zero, 1)
        for l, fl in enumerate(self.f):
            if not fl.coeff(const).is_zero():
                raise ValidationError("identity_linear_part", f"F_{l+1}(0) != 0")
            for j in range(n):
                e = [0] * n
                e[j] = 1
                c = fl.coeff(HoloMono(tuple(e), 0))
                want = ONE if j == l else GaussRat(0)
                if c != want:
                    raise ValidationError(
                        "identity_linear_part", f"dF_{l+1}/dz_{j+1}(0) = {c!r}"
                    )
        if not self.g.coeff(const).is_zero():
            raise ValidationError("identity_linear_part", "G(0) != 0")
        if self.g.coeff(wlin) != ONE:
            raise ValidationError("identity_linear_part", "dG/dw(0) != 1")
        for j in range(n):
            e = [0] * n
            e[j] = 1
            if not self.g.coeff(HoloMono(tuple(e), 0)).is_zero():
                raise ValidationError("identity_linear_part", f"dG/dz_{j+1}(0) != 0")

    def order_cap(self) -> Optional[int]:
        return self.truncation_order


def identity_map(model: ModelSpec, order: Optional[int] = None) -> FormalMap:
    n = model.nz
    return FormalMap(
        [HoloPoly.var_z(n, k) for k in range(n)], HoloPoly.var_w(n), order
    )


def jet_conditions_check(fmap: FormalMap, model: ModelSpec) -> bool:
    """The k0-th pure w derivative of G at 0 is imaginary and the first w
    derivative of each F_l at 0 is real."""
    n = model.nz
    zero = zeros(n)
    # d^k0 G / dw^k0 (0,0) = k0! * coefficient, and k0! > 0
    if fmap.g.coeff(HoloMono(zero, model.k0)).re != 0:
        return False
    return all(fl.coeff(HoloMono(zero, 1)).is_real() for fl in fmap.f)


def compose_maps(inner: FormalMap, outer: FormalMap, order: int) -> FormalMap:
    """outer after inner, truncated at plain degree order."""
    f = [fl.substitute_holo(inner.f, inner.g, order) for fl in outer.f]
    g = outer.g.substitute_holo(inner.f, inner.g, order)
    cap = _min_cap(inner.order_cap(), outer.order_cap())
    cap = order if cap is None else min(cap, order)
    return FormalMap(f, g, cap)


def _min_cap(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def map_on_graph(series: DefiningSeries, fmap: FormalMap, order: int) -> tuple:
    """Evaluate (F, G) along the graph of the series.

    Returns (fg, fg_conj, im_g, re_g) as real-analytic polynomials truncated
    at plain degree order.
    """
    n = series.model.nz
    u = series.graph_height(order)
    w_graph = Poly.var_x(n) + u.scale(I)
    idz = [Poly.var_z(n, k) for k in range(n)]
    fg = [fl.substitute_real(idz, w_graph, order) for fl in fmap.f]
    gg = fmap.g.substitute_real(idz, w_graph, order)
    gg_conj = gg.conjugate()
    half = GaussRat(1) / GaussRat(2)
    im_g = (gg - gg_conj).scale(half / I)
    re_g = (gg + gg_conj).scale(half)
    return fg, [p.conjugate() for p in fg], im_g, re_g


def transform_defining(
    series: DefiningSeries, fmap: FormalMap, order: int
) -> DefiningSeries:
    """Defining series of the image hypersurface, exact through weight order."""
    model = series.model
    cap = _min_cap(series.order_cap(), fmap.order_cap())
    if cap is not None and order > cap:
        raise OrderOverflow(f"order {order} exceeds truncation order {cap}")
    k0 = model.k0
    preset = block_minimal_preset(model)
    fg, fg_conj, im_g, re_g = map_on_graph(series, fmap, order)
    rhs_model = re_g.pow(model.s, order).mul(
        model.p.substitute(z=fg, zb=fg_conj, max_degree=order), order
    )
    residual = im_g - rhs_model
    tail: dict = {}
    while True:
        parts = weighted_parts(residual, preset)
        live = [t for t in parts if t <= order]
        if not live:
            break
        t = min(live)
        phi = parts[t]
        if t <= k0:
            raise FormNotPreserved(
                f"weight class {t} <= k0 acquired terms: {phi!r}"
            )
        if not phi.is_real():
            raise AssertionError(
                f"transform produced a non-real class {t}: {phi!r}"
            )
        tail[t] = phi
        # composition equals phi plus strictly heavier terms, so this clears
        # class t and only feeds classes above it
        residual = residual - phi.substitute(
            z=fg, zb=fg_conj, x=re_g, max_degree=order
        )
    return DefiningSeries(model, tail, order)
