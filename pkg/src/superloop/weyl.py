"""Highest-weight bookkeeping for the odd node.

Torsion formal series are encoded canonically by triples (c, Q, P) with
coprime Q, P normalised at 0; the set of such triples is a commutative
monoid matching tensor products of highest weights.  The odd slice of a
Weyl module is the finite-dimensional weight space cut out by the
degree-d recurrence attached to Q, carrying the level-one Cartan loop
operator as a shifted companion matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .coeffs import (
    ONE,
    ZERO,
    Scalar,
    ZPoly,
    ZSeries,
    expand_ratio,
    poly_coprime,
    poly_gcd,
    q,
    scalar_str,
)


class TorsionError(ValueError):
    """Raised when data cannot be put in canonical torsion form."""


@dataclass(frozen=True)
class TorsionTriple:
    """Canonical (c, Q, P): Q(0) = P(0) = 1, Q and P coprime of equal degree
    with lead(Q) = c^-2 lead(P)."""

    c: Scalar
    Q: ZPoly
    P: ZPoly

    def __post_init__(self):
        if self.c == ZERO:
            raise TorsionError("c must be invertible")
        if self.Q.coeff(0) != ONE or self.P.coeff(0) != ONE:
            raise TorsionError("Q and P must have constant term 1")
        if self.Q.degree != self.P.degree:
            raise TorsionError("Q and P must have equal degree")
        if self.Q.degree > 0 and not poly_coprime(self.Q, self.P):
            raise TorsionError("Q and P must be coprime")
        lead_q = self.Q.coeffs[-1]
        lead_p = self.P.coeffs[-1]
        if lead_q * self.c**2 != lead_p:
            raise TorsionError("leading coefficients must satisfy lead(Q) = c^-2 lead(P)")

    def to_json(self) -> dict:
        return {"c": scalar_str(self.c), "Q": self.Q.to_json(), "P": self.P.to_json()}


def identity_triple() -> TorsionTriple:
    return TorsionTriple(ONE, ZPoly.one(), ZPoly.one())


def torsion_to_series(t: TorsionTriple, order: int) -> tuple[ZSeries, ZSeries, dict[int, Scalar]]:
    """Expand c Q/P both ways and take the two-sided window of f.

    Returns (plus series, minus series, {n: f_n for |n| <= order}) with
    (q - q^-1) f = iota_+(c Q/P) - iota_-(c Q/P).
    """
    plus = expand_ratio(t.c, t.Q, t.P, "+", order)
    if t.P.degree == 0:
        # c Q/P is the constant c; its minus expansion is the same constant.
        minus = ZSeries("-", order, (t.c * t.Q.coeff(0),) + (ZERO,) * order)
    else:
        minus = expand_ratio(t.c, t.Q, t.P, "-", order)
    denom = q - q**-1
    window: dict[int, Scalar] = {}
    for n in range(order + 1):
        if n == 0:
            window[0] = (plus.coeff(0) - minus.coeff(0)) / denom
        else:
            window[n] = plus.coeff(n) / denom
            window[-n] = -minus.coeff(n) / denom
    return plus, minus, window


def _minimal_annihilator(window: Mapping[int, Scalar], degree_bound: int) -> ZPoly | None:
    """Smallest-degree P with P(0) = 1 annihilating the window, or None.

    P annihilates f when sum_s p_s f_{m-s} = 0 for every m with all the
    touched coefficients inside the window.
    """
    lo, hi = min(window), max(window)
    for d in range(degree_bound + 1):
        ms = [m for m in range(lo + d, hi + 1)]
        if len(ms) < d + 1:
            return None  # window too short to pin the recurrence down
        # unknowns p_1..p_d with p_0 = 1
        from .linalg import solve_span

        cols = []
        for s in range(1, d + 1):
            cols.append({idx: window[m - s] for idx, m in enumerate(ms) if window[m - s] != ZERO})
        target = {idx: -window[m] for idx, m in enumerate(ms) if window[m] != ZERO}
        sol = solve_span(cols, target)
        if sol is None:
            continue
        cand = ZPoly([ONE] + list(sol))
        if _annihilates(cand, window):
            return cand
    return None


def _annihilates(p: ZPoly, window: Mapping[int, Scalar]) -> bool:
    lo, hi = min(window), max(window)
    d = p.degree
    for m in range(lo + d, hi + 1):
        s = sum((p.coeff(k) * window[m - k] for k in range(d + 1)), start=ZERO)
        if s != ZERO:
            return False
    return True


def series_to_torsion(
    window: Mapping[int, Scalar], c: Scalar, degree_bound: int = 4
) -> TorsionTriple:
    """Recover the canonical (c, Q, P) from a symmetric f-coefficient window.

    P is the minimal-degree annihilator of the window; Q comes from the
    truncation of c^-1 P(z) (c + (q - q^-1) sum_{n>0} f_n z^n), verified
    to close up at degree deg P.
    """
    lo, hi = min(window), max(window)
    if hi < degree_bound or -lo < degree_bound or hi - lo + 1 < 2 * degree_bound + 1:
        raise TorsionError("window too short for the requested degree bound")
    f0 = window.get(0, ZERO)
    if f0 != (c - c**-1) / (q - q**-1):
        raise TorsionError("f_0 must equal (c - c^-1)/(q - q^-1)")
    P = _minimal_annihilator(window, degree_bound)
    if P is None:
        raise TorsionError(f"no annihilator of degree <= {degree_bound} found")
    d = P.degree
    series = ZPoly([c] + [(q - q**-1) * window[n] for n in range(1, hi + 1)])
    prod = P * series
    coeffs = [c**-1 * prod.coeff(k) for k in range(hi + 1)]
    for k in range(d + 1, hi + 1):
        if coeffs[k] != ZERO:
            raise TorsionError("torsion construction did not truncate; window inconsistent")
    Q = ZPoly(coeffs[: d + 1])
    return TorsionTriple(c, Q, P)


# ---------------------------------------------------------------------------
# highest-weight data and the monoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HighestWeight:
    """Highest-weight datum: even-node polynomials, odd-node torsion triple.

    ``P`` maps each even node to its polynomial; ``epsilon`` records the
    observed sign of the K eigenvalue at that node; ``k0_eigen`` is the
    eigenvalue of the affine Chevalley K_0 image when one is available.
    """

    P: Mapping[int, ZPoly]
    torsion: TorsionTriple
    epsilon: Mapping[int, int]
    k0_eigen: Scalar | None = None

    def __post_init__(self):
        for i, p in self.P.items():
            if p.coeff(0) != ONE:
                raise TorsionError(f"P_{i} must have constant term 1")

    @property
    def c(self) -> Scalar:
        return self.torsion.c

    @property
    def odd_node(self) -> int:
        """The node missing from the even-node polynomial family."""
        node = 1
        while node in self.P:
            node += 1
        return node

    def to_json(self) -> dict:
        return {
            "P": {str(i): p.to_json() for i, p in sorted(self.P.items())},
            "c": scalar_str(self.torsion.c),
            "Q": self.torsion.Q.to_json(),
            "P_odd": self.torsion.P.to_json(),
            "epsilon": {str(i): e for i, e in sorted(self.epsilon.items())},
            "K0": None if self.k0_eigen is None else scalar_str(self.k0_eigen),
        }


def monoid_product(h1: HighestWeight, h2: HighestWeight) -> HighestWeight:
    """Componentwise product: polynomials multiply, triples multiply and reduce."""
    if set(h1.P) != set(h2.P):
        raise ValueError("highest weights live over different node sets")
    P = {i: h1.P[i] * h2.P[i] for i in h1.P}
    eps = {i: h1.epsilon.get(i, 1) * h2.epsilon.get(i, 1) for i in h1.P}
    t1, t2 = h1.torsion, h2.torsion
    Q, Pden = t1.Q * t2.Q, t1.P * t2.P
    if Q.degree > 0:
        g = poly_gcd(Q, Pden)
        if g.degree > 0:
            Q = Q.divmod(g)[0]
            Pden = Pden.divmod(g)[0]
            # re-normalise constant terms (gcd division preserves them here,
            # but guard against a unit sneaking in)
            Q = Q.scale(ONE / Q.coeff(0))
            Pden = Pden.scale(ONE / Pden.coeff(0))
    torsion = TorsionTriple(t1.c * t2.c, Q, Pden)
    k0 = None
    if h1.k0_eigen is not None and h2.k0_eigen is not None:
        k0 = h1.k0_eigen * h2.k0_eigen
    return HighestWeight(P, torsion, eps, k0)


def star_product_window(
    f: Mapping[int, Scalar], g: Mapping[int, Scalar], c: Scalar, d: Scalar, order: int
) -> dict[int, Scalar]:
    """The series-level product (f+g+ - f-g-)/(q - q^-1) on a window.

    f+- = c^{+-1} +- (q - q^-1) sum_{s >= 1} f_{+-s} z^{+-s}; the output
    window is only guaranteed for |n| <= order when both inputs cover
    |n| <= order.
    """
    u = q - q**-1

    def side(h, e, sign):
        def coeff(n):
            if n == 0:
                return e if sign > 0 else e**-1
            if sign * n < 0:
                return ZERO
            return sign * u * h.get(n, ZERO)

        return coeff

    fp, fm = side(f, c, +1), side(f, c, -1)
    gp, gm = side(g, d, +1), side(g, d, -1)
    out: dict[int, Scalar] = {}
    span = range(-order, order + 1)
    for n in span:
        acc = ZERO
        for k in range(0, order + 1):
            # f+ g+ contributes at n = k + (n - k) with both parts >= 0
            if n - k >= 0:
                acc += fp(k) * gp(n - k)
            if n + k <= 0:
                acc -= fm(-k) * gm(n + k)
        out[n] = acc / u
    return out


# ---------------------------------------------------------------------------
# the odd slice
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeylOddSlice:
    """The weight space lambda - alpha_M: dimension d = deg Q, with the
    level-one Cartan loop action hM1 = shift + theta."""

    d: int
    theta: Scalar
    hM1: tuple  # tuple of row tuples, d x d

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "theta": scalar_str(self.theta),
            "hM1": [[scalar_str(x) for x in row] for row in self.hM1],
        }


def weyl_odd_slice(Q: ZPoly, P_prev: ZPoly) -> WeylOddSlice:
    """Model the odd slice for Weyl polynomial Q and neighbour polynomial P_{M-1}.

    Basis w_0..w_{d-1} are the odd lowering operators at loop degrees
    0..d-1 applied to the highest weight vector; the recurrence
    sum_s a_{d-s} w_{n+s} = 0 turns the shift into a companion matrix S,
    and hM1 = S + theta with theta = -(coefficient of z in P_{M-1}).
    """
    if Q.coeff(0) != ONE:
        raise ValueError("Q must have constant term 1")
    theta = -P_prev.coeff(1)
    d = Q.degree
    if d <= 0:
        return WeylOddSlice(0, theta, ())
    rows = [[ZERO] * d for _ in range(d)]
    for n in range(d - 1):
        rows[n + 1][n] = ONE  # S w_n = w_{n+1}
    for s in range(d):
        rows[s][d - 1] = -Q.coeff(d - s)  # w_d = -sum_s a_{d-s} w_s
    for i in range(d):
        rows[i][i] += theta
    return WeylOddSlice(d, theta, tuple(tuple(r) for r in rows))


def odd_slice_of_highest_weight(hw: HighestWeight) -> WeylOddSlice:
    """The odd slice of the minimal Weyl module attached to a highest weight.

    The recurrence polynomial is the minimal annihilator of the torsion
    series (the canonical triple's denominator); the neighbour polynomial
    is the datum at the node below the odd one, so the odd node must not
    be node 1.
    """
    M = hw.odd_node
    if M < 2:
        raise ValueError("the slice's theta needs the node below the odd one")
    return weyl_odd_slice(hw.torsion.P, hw.P[M - 1])


def charpoly(rows: Sequence[Sequence[Scalar]]) -> ZPoly:
    """det(zI - A) for a small exact matrix, by cofactor expansion over ZPoly."""
    d = len(rows)
    entries = [
        [ZPoly([-rows[i][j]]) + (ZPoly.z() if i == j else ZPoly.zero()) for j in range(d)]
        for i in range(d)
    ]

    def det(mat: list[list[ZPoly]]) -> ZPoly:
        n = len(mat)
        if n == 0:
            return ZPoly.one()
        if n == 1:
            return mat[0][0]
        acc = ZPoly.zero()
        for k in range(n):
            if mat[0][k].is_zero():
                continue
            minor = [[row[j] for j in range(n) if j != k] for row in mat[1:]]
            term = mat[0][k] * det(minor)
            acc = acc + (term if k % 2 == 0 else -term)
        return acc

    return det(entries)


def slice_spectrum_identity(Q: ZPoly, slice_: WeylOddSlice) -> bool:
    """Check det(zI - hM1) = Q*(z - theta) with Q* the reciprocal of Q."""
    if slice_.d == 0:
        return Q.degree == 0
    lhs = charpoly(slice_.hM1)
    shift = ZPoly([-slice_.theta, ONE])  # z - theta
    rhs = Q.reciprocal().compose(shift)
    return lhs == rhs
