"""Closed-form sign conditions for individual Q entries.

Everything is evaluated in exact rational arithmetic (floats are converted
with :class:`fractions.Fraction`, which is lossless), so equality is a real
third outcome rather than a rounding accident.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import IntEnum
from fractions import Fraction

from .errors import MesoError, UnsupportedNullError
from .graph import BlockSummary
from .nulls import NullKind, NullModel


class Outcome(IntEnum):
    """Sign of ``lhs - rhs``. Truthy only for ``POSITIVE``."""

    NEGATIVE = -1
    BOUNDARY = 0
    POSITIVE = 1

    def __bool__(self):
        return self is Outcome.POSITIVE


def compare(lhs, rhs) -> Outcome:
    d = Fraction(lhs) - Fraction(rhs)
    return Outcome((d > 0) - (d < 0))


@dataclass(frozen=True)
class PairContext:
    """Edge counts around a pair of groups ``a``, ``b``.

    ``s_a_rest``/``s_b_rest`` count links from ``a``/``b`` to groups other
    than ``a`` and ``b``; ``s_rest`` is the total within and between those
    other groups (twice the edge count when undirected). Directed contexts
    also carry the reverse links ``s_ba`` and ``s_rest_a``/``s_rest_b``
    (links from the rest into ``a``/``b``); undirected contexts mirror them.
    Counts may be expected values (non-integers).
    """

    s_aa: Fraction
    s_bb: Fraction
    s_ab: Fraction
    s_a_rest: Fraction = 0
    s_b_rest: Fraction = 0
    s_rest: Fraction = 0
    directed: bool = False
    s_ba: Fraction = None
    s_rest_a: Fraction = None
    s_rest_b: Fraction = None
    # group sizes, only needed for the Erdos-Renyi null
    n_a: int = None
    n_b: int = None
    n: int = None
    # group indices, only needed for the block-scaled null
    a: int = None
    b: int = None

    def __post_init__(self):
        for name in ("s_aa", "s_bb", "s_ab", "s_a_rest", "s_b_rest", "s_rest", "s_ba", "s_rest_a", "s_rest_b"):
            val = getattr(self, name)
            if val is not None:
                val = Fraction(val)
                if val < 0:
                    raise MesoError(f"{name} must be non-negative")
                object.__setattr__(self, name, val)
        if not self.directed:
            object.__setattr__(self, "s_ba", self.s_ab)
            object.__setattr__(self, "s_rest_a", self.s_a_rest)
            object.__setattr__(self, "s_rest_b", self.s_b_rest)
        else:
            for name in ("s_ba", "s_rest_a", "s_rest_b"):
                if getattr(self, name) is None:
                    object.__setattr__(self, name, Fraction(0))

    @property
    def total(self) -> Fraction:
        """``2E`` for undirected contexts, ``E`` for directed ones."""
        if self.directed:
            return (self.s_aa + self.s_bb + self.s_ab + self.s_ba + self.s_a_rest + self.s_b_rest
                    + self.s_rest_a + self.s_rest_b + self.s_rest)
        return self.s_aa + self.s_bb + 2 * (self.s_ab + self.s_a_rest + self.s_b_rest) + self.s_rest

    @property
    def t_a_out(self):
        return self.s_aa + self.s_ab + self.s_a_rest

    @property
    def t_a_in(self):
        return self.s_aa + self.s_ba + self.s_rest_a

    @property
    def t_b_out(self):
        return self.s_bb + self.s_ba + self.s_b_rest

    @property
    def t_b_in(self):
        return self.s_bb + self.s_ab + self.s_rest_b

    @property
    def isolated(self) -> bool:
        """No links between the pair and the rest of the network."""
        return self.s_a_rest == self.s_b_rest == self.s_rest_a == self.s_rest_b == 0

    def swapped(self) -> "PairContext":
        """The same context seen from ``b``."""
        return replace(
            self,
            s_aa=self.s_bb, s_bb=self.s_aa,
            s_ab=self.s_ba, s_ba=self.s_ab,
            s_a_rest=self.s_b_rest, s_b_rest=self.s_a_rest,
            s_rest_a=self.s_rest_b, s_rest_b=self.s_rest_a,
            n_a=self.n_b, n_b=self.n_a, a=self.b, b=self.a,
        )

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def pair_context(bs: BlockSummary, a: int, b: int) -> PairContext:
    k = bs.k
    if not (0 <= a < k and 0 <= b < k):
        raise MesoError(f"groups ({a}, {b}) out of range for K={k}")
    if a == b:
        raise MesoError("pair context needs two distinct groups")
    S = bs.S
    s_aa, s_bb, s_ab, s_ba = int(S[a, a]), int(S[b, b]), int(S[a, b]), int(S[b, a])
    s_a_rest = int(bs.t_out[a]) - s_aa - s_ab
    s_b_rest = int(bs.t_out[b]) - s_bb - s_ba
    common = dict(n_a=int(bs.sizes[a]), n_b=int(bs.sizes[b]), n=bs.n, a=a, b=b)
    if not bs.directed:
        s_rest = bs.norm - s_aa - s_bb - 2 * (s_ab + s_a_rest + s_b_rest)
        return PairContext(s_aa, s_bb, s_ab, s_a_rest, s_b_rest, s_rest, **common)
    s_rest_a = int(bs.t_in[a]) - s_aa - s_ba
    s_rest_b = int(bs.t_in[b]) - s_bb - s_ab
    s_rest = bs.norm - (s_aa + s_bb + s_ab + s_ba + s_a_rest + s_b_rest + s_rest_a + s_rest_b)
    return PairContext(s_aa, s_bb, s_ab, s_a_rest, s_b_rest, s_rest, directed=True,
                       s_ba=s_ba, s_rest_a=s_rest_a, s_rest_b=s_rest_b, **common)


def cp_context_from_probabilities(p_c, p_p, p_m, n=None) -> PairContext:
    """Expected counts for a core, its periphery and a separate rest group.

    With ``n`` (nodes per group) the counts are the expected block totals of
    an SBM; without it the three probabilities stand in for the counts,
    which leaves every inequality of the ideal case unchanged up to the
    ``n/(n-1)`` finite-size factor.
    """
    p_c, p_p, p_m = Fraction(p_c), Fraction(p_p), Fraction(p_m)
    if n is None:
        return PairContext(s_aa=p_c, s_bb=0, s_ab=p_p, s_rest=p_m)
    return PairContext(s_aa=p_c * n * (n - 1), s_bb=0, s_ab=p_p * n * n, s_rest=p_m * n * (n - 1))


def _scale(null: NullModel, ctx: PairContext, diag: bool) -> Fraction:
    if null.kind is NullKind.BLOCK_SCALED:
        if ctx.a is None:
            raise MesoError("block-scaled null needs a context built with group indices")
        b = ctx.a if diag else ctx.b
        return Fraction(float(null.gamma_matrix[ctx.a, b]))
    return Fraction(null.scale_for(None, None))


def q_sign(ctx: PairContext, which: str, null: NullModel = None) -> Outcome:
    """Predicted sign of ``Q_aa`` (``which="aa"``) or ``Q_ab`` (``which="ab"``).

    For ``Q_bb`` or ``Q_ba`` pass ``ctx.swapped()``.
    """
    null = null or NullModel.configuration()
    if which not in ("aa", "ab"):
        raise MesoError(f"which must be 'aa' or 'ab', got {which!r}")
    diag = which == "aa"
    if not null.supports(ctx.directed):
        raise UnsupportedNullError(f"null model {null.kind.value!r} is undirected only")

    if null.kind is NullKind.ERDOS_RENYI:
        if ctx.n is None or ctx.n_a is None or ctx.n_b is None:
            raise MesoError("Erdos-Renyi condition needs group sizes in the context")
        # observed share of edges against share of possible pairs
        n_b = ctx.n_a if diag else ctx.n_b
        s = ctx.s_aa if diag else ctx.s_ab
        return compare(s * ctx.n**2, ctx.total * ctx.n_a * n_b)

    g = _scale(null, ctx, diag)
    if ctx.directed:
        return _directed_sign(ctx, diag, g)

    s_aa, s_bb, s_ab = ctx.s_aa, ctx.s_bb, ctx.s_ab
    s_a, s_b, s_rest = ctx.s_a_rest, ctx.s_b_rest, ctx.s_rest
    m = ctx.total - s_rest
    if diag:
        rhs = g * ((s_ab + s_a) ** 2 - s_aa * (s_bb + 2 * s_b)) + (g - 1) * s_aa * m
        return compare(s_aa * s_rest, rhs)
    rhs = g * ((s_aa + s_a) * (s_bb + s_b) - s_ab * (s_ab + s_a + s_b)) + (g - 1) * s_ab * m
    return compare(s_ab * s_rest, rhs)


def _directed_sign(ctx: PairContext, diag: bool, g: Fraction) -> Outcome:
    # S_x * E > g * T_out * T_in, with the S_rest term isolated on the left
    m = ctx.total - ctx.s_rest
    if diag:
        s, prod = ctx.s_aa, ctx.t_a_out * ctx.t_a_in
    else:
        s, prod = ctx.s_ab, ctx.t_a_out * ctx.t_b_in
    return compare(s * ctx.s_rest, g * prod - s * m)


def _ideal(ctx: PairContext) -> bool:
    return ctx.isolated


def cp_detectable(ctx: PairContext, directed: bool = None) -> Outcome:
    """Can ``a`` (core) and ``b`` (periphery) show core-periphery excesses?

    Ideal case (empty periphery, pair isolated from the rest): the core
    needs ``S_cc * S_rest > S_cp * S_pc``. Otherwise every required sign
    (``Q_cc > 0``, ``Q_cp > 0``, ``Q_pc > 0``, ``Q_pp < 0``) is checked and
    the weakest outcome returned.
    """
    directed = ctx.directed if directed is None else directed
    if directed and not ctx.directed:
        ctx = replace(ctx, directed=True, s_ba=ctx.s_ab, s_rest_a=ctx.s_a_rest, s_rest_b=ctx.s_b_rest)
    if ctx.s_bb == 0 and _ideal(ctx):
        return compare(ctx.s_aa * ctx.s_rest, ctx.s_ab * ctx.s_ba)
    back = ctx.swapped()
    signs = [q_sign(ctx, "aa"), q_sign(ctx, "ab"), Outcome(-q_sign(back, "aa"))]
    if ctx.directed:
        signs.append(q_sign(back, "ab"))
    return min(signs)


def ch_detectable(ctx: PairContext) -> Outcome:
    """Community hierarchy with one-way flow ``a -> b``.

    Ideal case (``S_ba = 0``, pair isolated): ``S_ab * S_rest > S_aa * S_bb``.
    """
    if not ctx.directed:
        raise MesoError("community hierarchy is a directed structure")
    if ctx.s_ba == 0 and _ideal(ctx):
        return compare(ctx.s_ab * ctx.s_rest, ctx.s_aa * ctx.s_bb)
    back = ctx.swapped()
    return min(q_sign(ctx, "aa"), q_sign(back, "aa"), q_sign(ctx, "ab"), Outcome(-q_sign(back, "ab")))


def nested_core_detectable(s_cacb, s_capb, s_cbpa) -> Outcome:
    """Excess between the two cores of a perfectly bipartite nested split."""
    s_cacb, s_capb, s_cbpa = Fraction(s_cacb), Fraction(s_capb), Fraction(s_cbpa)
    return compare(s_cacb * (s_cacb + s_capb + s_cbpa), s_capb * s_cbpa)


def resolution_merge_preferred(ctx: PairContext) -> Outcome:
    """Whether merging ``a`` and ``b`` raises community modularity (``Q_ab > 0``)."""
    if ctx.directed:
        raise MesoError("resolution check is defined for undirected contexts")
    t_a = ctx.s_aa + ctx.s_ab + ctx.s_a_rest
    t_b = ctx.s_bb + ctx.s_ab + ctx.s_b_rest
    return compare(ctx.s_ab * ctx.total, t_a * t_b)


def resolution_threshold(num_edges) -> float:
    """Largest clique size ``l`` merged in the two-clique resolution example.

    Two groups with ``2l`` internal degree, one link between them and one
    link each to the rest are merged iff ``(l + 1)**2 < E / 2``.
    """
    return (num_edges / 2) ** 0.5 - 1


def resolution_example_context(l, num_edges) -> PairContext:
    """Two groups of ``l`` internal edges each, one link between, one link out each."""
    s_rest = 2 * num_edges - (4 * l + 2 + 4)
    if s_rest < 0:
        raise MesoError("not enough edges for the rest of the network")
    return PairContext(s_aa=2 * l, s_bb=2 * l, s_ab=1, s_a_rest=1, s_b_rest=1, s_rest=s_rest)
