"""Exact sparse polynomial arithmetic in two variable universes.

Real-analytic universe: polynomials in (z_1..z_N, zb_1..zb_N, x) where zb_k
is the formal conjugate of z_k and x is a real transversal variable.  A
monomial is a triple of exponent data

    Mono(ez, ezb, ex)   ez, ezb: length-N int tuples, ex: int >= 0

and a Poly maps monomials to nonzero GaussRat coefficients.  The zero
polynomial stores no terms, so equality of canonical forms is dict equality.

Holomorphic universe: polynomials in (z_1..z_N, w) with HoloMono(ez, ew).
The two universes are distinct types on purpose: conjugation is only defined
on the real-analytic side, and a holomorphic series enters the real-analytic
world only through an explicit substitution of its variables.

Multiplication and substitution accept a max_degree bound; terms whose plain
total degree exceeds it are dropped.  That is the truncation contract every
formal-series computation here relies on.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

from .errors import NonNilpotentBinding
from .scalars import GaussRat, ONE, ZERO


class Mono(NamedTuple):
    ez: tuple
    ezb: tuple
    ex: int

    def plain_degree(self) -> int:
        return sum(self.ez) + sum(self.ezb) + self.ex


class HoloMono(NamedTuple):
    ez: tuple
    ew: int

    def plain_degree(self) -> int:
        return sum(self.ez) + self.ew


def mono_mul(a: Mono, b: Mono) -> Mono:
    return Mono(
        tuple(x + y for x, y in zip(a.ez, b.ez)),
        tuple(x + y for x, y in zip(a.ezb, b.ezb)),
        a.ex + b.ex,
    )


def _unit(n: int, k: int) -> tuple:
    e = [0] * n
    e[k] = 1
    return tuple(e)


_ZEROS: dict = {}


def zeros(n: int) -> tuple:
    t = _ZEROS.get(n)
    if t is None:
        t = _ZEROS[n] = (0,) * n
    return t


class Poly:
    """Sparse exact polynomial in (z, zb, x); immutable by convention."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[dict] = None):
        self.nvars = nvars
        self.terms = terms if terms is not None else {}

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def zero(n: int) -> "Poly":
        return Poly(n)

    @staticmethod
    def const(n: int, c) -> "Poly":
        c = c if isinstance(c, GaussRat) else GaussRat(c)
        if c.is_zero():
            return Poly(n)
        return Poly(n, {Mono(zeros(n), zeros(n), 0): c})

    @staticmethod
    def var_z(n: int, k: int) -> "Poly":
        return Poly(n, {Mono(_unit(n, k), zeros(n), 0): ONE})

    @staticmethod
    def var_zb(n: int, k: int) -> "Poly":
        return Poly(n, {Mono(zeros(n), _unit(n, k), 0): ONE})

    @staticmethod
    def var_x(n: int) -> "Poly":
        return Poly(n, {Mono(zeros(n), zeros(n), 1): ONE})

    @staticmethod
    def from_terms(n: int, items: Iterable) -> "Poly":
        """Build from (Mono, coeff) pairs, merging and dropping zeros."""
        terms: dict = {}
        for mono, c in items:
            c = c if isinstance(c, GaussRat) else GaussRat(c)
            acc = terms.get(mono)
            acc = c if acc is None else acc + c
            if acc.is_zero():
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        return Poly(n, terms)

    def coeff(self, mono: Mono) -> GaussRat:
        return self.terms.get(mono, ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m)
            if acc is None:
                out[m] = c
            else:
                acc = acc + c
                if acc.is_zero():
                    del out[m]
                else:
                    out[m] = acc
        return Poly(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def scale(self, c) -> "Poly":
        c = c if isinstance(c, GaussRat) else GaussRat(c)
        if c.is_zero():
            return Poly(self.nvars)
        return Poly(self.nvars, {m: cc * c for m, cc in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def mul(self, other: "Poly", max_degree: Optional[int] = None) -> "Poly":
        """Exact product, dropping plain total degree > max_degree if given."""
        if not self.terms or not other.terms:
            return Poly(self.nvars)
        out: dict = {}
        if max_degree is None:
            for ma, ca in self.terms.items():
                for mb, cb in other.terms.items():
                    m = mono_mul(ma, mb)
                    c = ca * cb
                    acc = out.get(m)
                    acc = c if acc is None else acc + c
                    if acc.is_zero():
                        out.pop(m, None)
                    else:
                        out[m] = acc
        else:
            bdeg = [(mb, mb.plain_degree(), cb) for mb, cb in other.terms.items()]
            for ma, ca in self.terms.items():
                da = ma.plain_degree()
                if da > max_degree:
                    continue
                room = max_degree - da
                for mb, db, cb in bdeg:
                    if db > room:
                        continue
                    m = mono_mul(ma, mb)
                    c = ca * cb
                    acc = out.get(m)
                    acc = c if acc is None else acc + c
                    if acc.is_zero():
                        out.pop(m, None)
                    else:
                        out[m] = acc
        return Poly(self.nvars, out)

    def pow(self, e: int, max_degree: Optional[int] = None) -> "Poly":
        if e < 0:
            raise ValueError("negative power")
        result = Poly.const(self.nvars, 1)
        for _ in range(e):
            result = result.mul(self, max_degree)
        return result

    def truncate(self, max_degree: int) -> "Poly":
        return Poly(
            self.nvars,
            {m: c for m, c in self.terms.items() if m.plain_degree() <= max_degree},
        )

    # -- conjugation and grading ----------------------------------------------

    def conjugate(self) -> "Poly":
        """Swap z and zb exponents and conjugate every coefficient."""
        return Poly(
            self.nvars,
            {Mono(m.ezb, m.ez, m.ex): c.conj() for m, c in self.terms.items()},
        )

    def is_real(self) -> bool:
        return self.conjugate() == self

    def real_part(self) -> "Poly":
        return (self + self.conjugate()).scale(GaussRat(1, 0) / GaussRat(2))

    def imag_part(self) -> "Poly":
        from .scalars import I

        return (self - self.conjugate()).scale(GaussRat(1) / (GaussRat(2) * I))

    def plain_degree(self) -> int:
        """Plain total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(m.plain_degree() for m in self.terms)

    def plain_graded_part(self, d: int) -> "Poly":
        if d < 0:
            raise ValueError("degree must be nonnegative")
        return Poly(
            self.nvars,
            {m: c for m, c in self.terms.items() if m.plain_degree() == d},
        )

    # -- substitution ----------------------------------------------------------

    def substitute(
        self,
        z: Optional[list] = None,
        zb: Optional[list] = None,
        x: Optional["Poly"] = None,
        max_degree: int = 0,
    ) -> "Poly":
        """Compose with z_k -> z[k], zb_k -> zb[k], x -> x, truncated.

        Unset bindings stay the identity.  Every binding that is actually
        used on a variable occurring here must have zero constant term so the
        truncated composition is well defined.
        """
        n = self.nvars
        slots = []
        for k in range(n):
            slots.append(z[k] if z is not None else Poly.var_z(n, k))
        for k in range(n):
            slots.append(zb[k] if zb is not None else Poly.var_zb(n, k))
        slots.append(x if x is not None else Poly.var_x(n))
        used = [False] * (2 * n + 1)
        for m in self.terms:
            for k in range(n):
                used[k] = used[k] or m.ez[k] > 0
                used[n + k] = used[n + k] or m.ezb[k] > 0
            used[2 * n] = used[2 * n] or m.ex > 0
        for k, b in enumerate(slots):
            if used[k] and not b.coeff(Mono(zeros(n), zeros(n), 0)).is_zero():
                raise NonNilpotentBinding(
                    f"binding for slot {k} has a nonzero constant term"
                )
        return _compose(self.nvars, self.terms.items(), _mono_exps, slots,
                        Poly.const(n, 1), max_degree)

    # -- comparisons -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for m in sorted(self.terms, key=lambda t: (t.plain_degree(), t)):
            c = self.terms[m]
            factors = []
            for k, e in enumerate(m.ez):
                if e:
                    factors.append(f"z{k+1}" + (f"^{e}" if e > 1 else ""))
            for k, e in enumerate(m.ezb):
                if e:
                    factors.append(f"zb{k+1}" + (f"^{e}" if e > 1 else ""))
            if m.ex:
                factors.append("x" + (f"^{m.ex}" if m.ex > 1 else ""))
            body = "*".join(factors) if factors else "1"
            bits.append(f"({c!r})*{body}")
        return " + ".join(bits)


def _mono_exps(mono) -> list:
    """Exponents of a Mono in slot order (z.., zb.., x)."""
    if isinstance(mono, Mono):
        return list(mono.ez) + list(mono.ezb) + [mono.ex]
    return list(mono.ez) + [mono.ew]


def _falling(e: int, d: int) -> int:
    """e (e-1) ... (e-d+1); zero when d > e."""
    if d > e:
        return 0
    out = 1
    for i in range(d):
        out *= e - i
    return out


def derivative(p: Poly, dz: tuple, dzb: tuple, dx: int) -> Poly:
    """Mixed partial derivative d^dz/dz d^dzb/dzb d^dx/dx applied to p."""
    out: dict = {}
    for m, c in p.terms.items():
        factor = _falling(m.ex, dx)
        if factor == 0:
            continue
        ok = True
        for e, d in zip(m.ez, dz):
            factor *= _falling(e, d)
            if factor == 0:
                ok = False
                break
        if not ok:
            continue
        for e, d in zip(m.ezb, dzb):
            factor *= _falling(e, d)
            if factor == 0:
                ok = False
                break
        if not ok:
            continue
        mono = Mono(
            tuple(e - d for e, d in zip(m.ez, dz)),
            tuple(e - d for e, d in zip(m.ezb, dzb)),
            m.ex - dx,
        )
        acc = out.get(mono)
        cc = c * factor
        acc = cc if acc is None else acc + cc
        if acc.is_zero():
            out.pop(mono, None)
        else:
            out[mono] = acc
    return Poly(p.nvars, out)


def deriv_z(p: Poly, k: int) -> Poly:
    n = p.nvars
    return derivative(p, _unit(n, k), zeros(n), 0)


def deriv_zb(p: Poly, k: int) -> Poly:
    n = p.nvars
    return derivative(p, zeros(n), _unit(n, k), 0)


def deriv_x(p: Poly) -> Poly:
    n = p.nvars
    return derivative(p, zeros(n), zeros(n), 1)


def _compose(nvars, term_items, exps_of, slots, one, max_degree):
    """Shared truncated-composition kernel for both universes.

    Caches powers of each binding so repeated exponents cost one multiply.
    The result lives in the bindings' universe.
    """
    power_cache: list = [{0: one} for _ in slots]

    def slot_pow(idx: int, e: int):
        cache = power_cache[idx]
        got = cache.get(e)
        if got is not None:
            return got
        best = max(k for k in cache if k <= e)
        acc = cache[best]
        for k in range(best + 1, e + 1):
            acc = acc.mul(slots[idx], max_degree)
            cache[k] = acc
        return acc

    total = None
    for mono, coeff in term_items:
        acc = one.scale(coeff)
        for idx, e in enumerate(exps_of(mono)):
            if e:
                acc = acc.mul(slot_pow(idx, e), max_degree)
                if acc.is_zero():
                    break
        total = acc if total is None else total + acc
    return total if total is not None else one.scale(0)


class HoloPoly:
    """Sparse exact polynomial in (z, w); no conjugate, no x."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[dict] = None):
        self.nvars = nvars
        self.terms = terms if terms is not None else {}

    @staticmethod
    def zero(n: int) -> "HoloPoly":
        return HoloPoly(n)

    @staticmethod
    def const(n: int, c) -> "HoloPoly":
        c = c if isinstance(c, GaussRat) else GaussRat(c)
        if c.is_zero():
            return HoloPoly(n)
        return HoloPoly(n, {HoloMono(zeros(n), 0): c})

    @staticmethod
    def var_z(n: int, k: int) -> "HoloPoly":
        return HoloPoly(n, {HoloMono(_unit(n, k), 0): ONE})

    @staticmethod
    def var_w(n: int) -> "HoloPoly":
        return HoloPoly(n, {HoloMono(zeros(n), 1): ONE})

    @staticmethod
    def from_terms(n: int, items: Iterable) -> "HoloPoly":
        terms: dict = {}
        for mono, c in items:
            c = c if isinstance(c, GaussRat) else GaussRat(c)
            acc = terms.get(mono)
            acc = c if acc is None else acc + c
            if acc.is_zero():
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        return HoloPoly(n, terms)

    def coeff(self, mono: HoloMono) -> GaussRat:
        return self.terms.get(mono, ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "HoloPoly") -> "HoloPoly":
        if not isinstance(other, HoloPoly):
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m)
            acc = c if acc is None else acc + c
            if acc.is_zero():
                out.pop(m, None)
            else:
                out[m] = acc
        return HoloPoly(self.nvars, out)

    def __sub__(self, other: "HoloPoly") -> "HoloPoly":
        return self + (-other)

    def __neg__(self) -> "HoloPoly":
        return HoloPoly(self.nvars, {m: -c for m, c in self.terms.items()})

    def scale(self, c) -> "HoloPoly":
        c = c if isinstance(c, GaussRat) else GaussRat(c)
        if c.is_zero():
            return HoloPoly(self.nvars)
        return HoloPoly(self.nvars, {m: cc * c for m, cc in self.terms.items()})

    def mul(self, other: "HoloPoly", max_degree: Optional[int] = None) -> "HoloPoly":
        out: dict = {}
        for ma, ca in self.terms.items():
            da = ma.plain_degree()
            if max_degree is not None and da > max_degree:
                continue
            for mb, cb in other.terms.items():
                if max_degree is not None and da + mb.plain_degree() > max_degree:
                    continue
                m = HoloMono(
                    tuple(a + b for a, b in zip(ma.ez, mb.ez)), ma.ew + mb.ew
                )
                c = ca * cb
                acc = out.get(m)
                acc = c if acc is None else acc + c
                if acc.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = acc
        return HoloPoly(self.nvars, out)

    def __mul__(self, other):
        if isinstance(other, HoloPoly):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = scale

    def truncate(self, max_degree: int) -> "HoloPoly":
        return HoloPoly(
            self.nvars,
            {m: c for m, c in self.terms.items() if m.plain_degree() <= max_degree},
        )

    def plain_degree(self) -> int:
        if not self.terms:
            return -1
        return max(m.plain_degree() for m in self.terms)

    def substitute_real(self, z: list, w: Poly, max_degree: int) -> Poly:
        """Evaluate on real-analytic arguments; the result is a Poly."""
        n = self.nvars
        self._check_nilpotent(z + [w], Poly, n)
        return _compose(n, self.terms.items(), _mono_exps, z + [w],
                        Poly.const(n, 1), max_degree)

    def substitute_holo(self, z: list, w: "HoloPoly", max_degree: int) -> "HoloPoly":
        """Compose with another holomorphic tuple; stays holomorphic."""
        n = self.nvars
        self._check_nilpotent(z + [w], HoloPoly, n)
        return _compose(n, self.terms.items(), _mono_exps, z + [w],
                        HoloPoly.const(n, 1), max_degree)

    def _check_nilpotent(self, slots, cls, n):
        used = [False] * (n + 1)
        for m in self.terms:
            for k in range(n):
                used[k] = used[k] or m.ez[k] > 0
            used[n] = used[n] or m.ew > 0
        const_key = Mono(zeros(n), zeros(n), 0) if cls is Poly else HoloMono(zeros(n), 0)
        for k, b in enumerate(slots):
            if used[k] and not b.coeff(const_key).is_zero():
                raise NonNilpotentBinding(
                    f"binding for slot {k} has a nonzero constant term"
                )

    def __eq__(self, other):
        if not isinstance(other, HoloPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for m in sorted(self.terms, key=lambda t: (t.plain_degree(), t)):
            c = self.terms[m]
            factors = []
            for k, e in enumerate(m.ez):
                if e:
                    factors.append(f"z{k+1}" + (f"^{e}" if e > 1 else ""))
            if m.ew:
                factors.append("w" + (f"^{m.ew}" if m.ew > 1 else ""))
            body = "*".join(factors) if factors else "1"
            bits.append(f"({c!r})*{body}")
        return " + ".join(bits)
