"""Sequence transforms and cone-membership tests for interval moment data.

A truncated sequence of q x q moments s_0..s_m is classified against a
family of nested positivity cones over a fixed interval [alpha, beta]:

* Hankel nonnegative (``Hnnd``) / positive definite (``Hpd``): the block
  Hankel matrix of the even-order prefix is PSD / PD.
* Hankel-nonnegative extendable (``Hnnd_ext``): some next moment keeps
  the Hankel cone inhabited one step further.
* ``Fnnd`` / ``Fpd``: the doubly weighted cone tied to both endpoints,
  whose interior members always extend within the interval problem.
* ``Knnd`` / ``Lnnd``: the one-sided cones obtained by weighting with
  (x - alpha), resp. (beta - x), plus their extendable refinements.

All tests emit tri-state verdicts so boundary contact (exact PSD faces,
rank drops) stays distinguishable from clear membership or failure.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .hankel import MomentSequence, block_column, build_hankel, reflected, schur_chain
from .matrix_core import (
    BOUNDARY,
    ClassVerdict,
    Tolerances,
    is_hermitian,
    is_pd,
    is_psd,
    null_included,
    range_included,
    verdict_all,
)

__all__ = [
    "DerivedSequences",
    "REPORT_KEYS",
    "ClassReport",
    "derive",
    "is_hankel_nnd",
    "is_hankel_pd",
    "is_hankel_nnd_extendable",
    "is_F_nnd",
    "is_F_pd",
    "is_K_nnd",
    "is_L_nnd",
    "is_K_nnd_extendable",
    "is_L_nnd_extendable",
    "reflect_class_dual",
    "class_report",
]


@dataclass(frozen=True)
class DerivedSequences:
    """The three weighted companions of a moment sequence, plus its mirror.

    s_alpha[j] = -alpha*s_j + s_{j+1}   (moments against (x - alpha) dmu)
    s_beta[j]  =  beta*s_j  - s_{j+1}   (moments against (beta - x) dmu)
    s_c[j]     = -alpha*beta*s_j + (alpha+beta)*s_{j+1} - s_{j+2}
                                        (against (x - alpha)(beta - x) dmu)
    r[j]       = (-1)^j s_j             (pushforward under x -> -x)
    """

    s_alpha: Tuple[np.ndarray, ...]
    s_beta: Tuple[np.ndarray, ...]
    s_c: Tuple[np.ndarray, ...]
    r: Tuple[np.ndarray, ...]
    q: int
    alpha: float
    beta: float
    tol: Tolerances

    def alpha_seq(self) -> MomentSequence:
        return MomentSequence(self.q, self.alpha, self.beta, self.s_alpha, self.tol)

    def beta_seq(self) -> MomentSequence:
        return MomentSequence(self.q, self.alpha, self.beta, self.s_beta, self.tol)

    def c_seq(self) -> MomentSequence:
        if not self.s_c:
            raise ValueError("doubly weighted sequence needs at least 3 moments")
        return MomentSequence(self.q, self.alpha, self.beta, self.s_c, self.tol)

    def r_seq(self) -> MomentSequence:
        return MomentSequence(self.q, -self.beta, -self.alpha, self.r, self.tol)


def derive(seq: MomentSequence) -> DerivedSequences:
    """Forms the endpoint-weighted and reflected companions of seq.

    Needs m >= 1; the doubly weighted sequence comes out empty when only
    two moments are given.
    """
    if seq.m < 1:
        raise ValueError("need at least 2 moments to form weighted sequences")
    s = seq.moments
    a, b = seq.alpha, seq.beta
    s_alpha = tuple(-a * s[j] + s[j + 1] for j in range(seq.m))
    s_beta = tuple(b * s[j] - s[j + 1] for j in range(seq.m))
    s_c = tuple(
        -a * b * s[j] + (a + b) * s[j + 1] - s[j + 2] for j in range(seq.m - 1)
    )
    r = tuple(s[j] if j % 2 == 0 else -s[j] for j in range(seq.m + 1))
    return DerivedSequences(s_alpha, s_beta, s_c, r, seq.q, a, b, seq.tol)


def _tag(v: ClassVerdict, label: str) -> ClassVerdict:
    return dataclasses.replace(v, detail=f"{label}:{v.detail}")


def is_hankel_nnd(seq: MomentSequence, n: int) -> ClassVerdict:
    """PSD test on the order-n block Hankel matrix (needs 2n <= m)."""
    return _tag(is_psd(build_hankel(seq, n).H, seq.tol), "hankel").with_index(n)


def is_hankel_pd(seq: MomentSequence, n: int) -> ClassVerdict:
    """PD test on the order-n block Hankel matrix (needs 2n <= m)."""
    return _tag(is_pd(build_hankel(seq, n).H, seq.tol), "hankel").with_index(n)


def is_hankel_nnd_extendable(seq: MomentSequence) -> ClassVerdict:
    """Can some next moment keep the block Hankel matrices PSD?

    Even length: the top Hankel matrix must be PSD and the trailing
    column of moments must lie in the range of the previous one.  That
    range condition has an equivalent Schur-complement null-space form;
    both are evaluated and a numerical split between them is reported as
    boundary.  Odd length: PSD prefix, Hermitian last moment, and the
    trailing column in the range of the top Hankel matrix.
    """
    m = seq.m
    tol = seq.tol
    if m == 0:
        return _tag(is_psd(seq.moments[0], tol), "hankel").with_index(0)
    if m % 2 == 1:
        n = m // 2
        v_psd = _tag(is_psd(build_hankel(seq, n).H, tol), "hankel")
        v_herm = _tag(is_hermitian(seq.moments[m], tol), "last_moment")
        v_rng = _tag(
            range_included(block_column(seq, n + 1, m), build_hankel(seq, n).H, tol),
            "tail_column",
        )
        return verdict_all(v_psd, v_herm, v_rng).with_index(n)
    n = m // 2
    h_prev = build_hankel(seq, n - 1).H
    v_psd = _tag(is_psd(build_hankel(seq, n).H, tol), "hankel")
    v_rng = _tag(range_included(block_column(seq, n + 1, m), h_prev, tol), "tail_column")
    chain = schur_chain(seq, n)
    v_null = _tag(null_included(chain.L[n - 1], chain.L[n], tol), "schur_null")
    by_range = verdict_all(v_psd, v_rng)
    by_null = verdict_all(v_psd, v_null)
    if by_range.status == by_null.status:
        return by_range.with_index(n)
    # The two exact-arithmetic-equivalent criteria split: rank boundary.
    witness = min(by_range.witness_eig, by_null.witness_eig)
    return ClassVerdict(BOUNDARY, witness, "extendability_criteria_disagree", n)


def is_F_nnd(seq: MomentSequence) -> ClassVerdict:
    """Membership in the doubly weighted interval cone (PSD layer)."""
    m = seq.m
    if m == 0:
        return _tag(is_psd(seq.moments[0], seq.tol), "hankel").with_index(0)
    d = derive(seq)
    n = m // 2
    if m % 2 == 1:
        va = is_hankel_nnd(d.alpha_seq(), n)
        vb = is_hankel_nnd(d.beta_seq(), n)
        return verdict_all(_tag(va, "alpha"), _tag(vb, "beta"))
    vh = is_hankel_nnd(seq, n)
    vc = is_hankel_nnd(d.c_seq(), n - 1)
    return verdict_all(vh, _tag(vc, "weighted"))


def is_F_pd(seq: MomentSequence) -> ClassVerdict:
    """Interior of the doubly weighted interval cone (PD layer)."""
    m = seq.m
    if m == 0:
        return _tag(is_pd(seq.moments[0], seq.tol), "hankel").with_index(0)
    d = derive(seq)
    n = m // 2
    if m % 2 == 1:
        va = is_hankel_pd(d.alpha_seq(), n)
        vb = is_hankel_pd(d.beta_seq(), n)
        return verdict_all(_tag(va, "alpha"), _tag(vb, "beta"))
    vh = is_hankel_pd(seq, n)
    vc = is_hankel_pd(d.c_seq(), n - 1)
    return verdict_all(vh, _tag(vc, "weighted"))


def _onesided_nnd(seq: MomentSequence, side: str) -> ClassVerdict:
    m = seq.m
    if m == 0:
        return _tag(is_psd(seq.moments[0], seq.tol), "hankel").with_index(0)
    d = derive(seq)
    shifted = d.alpha_seq() if side == "alpha" else d.beta_seq()
    n = m // 2
    vh = is_hankel_nnd(seq, n)
    if m % 2 == 1:
        vs = is_hankel_nnd(shifted, n)
    else:
        vs = is_hankel_nnd(shifted, n - 1)
    return verdict_all(vh, _tag(vs, side))


def is_K_nnd(seq: MomentSequence) -> ClassVerdict:
    """One-sided cone at the lower endpoint: plain and (x - alpha)-weighted
    Hankel matrices both PSD."""
    return _onesided_nnd(seq, "alpha")


def is_L_nnd(seq: MomentSequence) -> ClassVerdict:
    """One-sided cone at the upper endpoint: plain and (beta - x)-weighted
    Hankel matrices both PSD."""
    return _onesided_nnd(seq, "beta")


def _onesided_extendable(seq: MomentSequence, side: str) -> ClassVerdict:
    if seq.m < 1:
        raise ValueError("extendability test needs at least 2 moments")
    m = seq.m
    tol = seq.tol
    v_class = _onesided_nnd(seq, side)
    d = derive(seq)
    shifted = d.alpha_seq() if side == "alpha" else d.beta_seq()
    if m % 2 == 1:
        # m = 2n - 1: the weighted Schur complement must fit inside the
        # plain one at order n - 1.
        n = (m + 1) // 2
        l_plain = schur_chain(seq, n - 1).L[n - 1]
        l_shift = schur_chain(shifted, n - 1).L[n - 1]
        v_rng = _tag(range_included(l_shift, l_plain, tol), f"{side}_schur_range")
    else:
        # m = 2n: the order-n plain Schur complement must fit inside the
        # weighted one at order n - 1.
        n = m // 2
        l_plain = schur_chain(seq, n).L[n]
        l_shift = schur_chain(shifted, n - 1).L[n - 1]
        v_rng = _tag(range_included(l_plain, l_shift, tol), f"{side}_schur_range")
    return verdict_all(v_class, v_rng)


def is_K_nnd_extendable(seq: MomentSequence) -> ClassVerdict:
    """Lower one-sided membership plus the range condition that makes a
    next admissible moment exist."""
    return _onesided_extendable(seq, "alpha")


def is_L_nnd_extendable(seq: MomentSequence) -> ClassVerdict:
    """Upper one-sided membership plus the matching range condition."""
    return _onesided_extendable(seq, "beta")


def reflect_class_dual(seq: MomentSequence) -> MomentSequence:
    """The sign-alternated sequence over the mirrored interval.

    Reflection swaps the two one-sided cones and fixes the two-sided
    ones, which the test suite exercises as a duality check.
    """
    return reflected(seq)


REPORT_KEYS = (
    "Hnnd",
    "Hpd",
    "Hnnd_ext",
    "Fnnd",
    "Fpd",
    "Knnd",
    "Knnd_ext",
    "Lnnd",
    "Lnnd_ext",
)

# Cone inclusions that any report must respect, as (premise, conclusion)
# pairs on the membership (inside-or-boundary) level.
_IMPLICATIONS = (
    ("Fpd", "Fnnd"),
    ("Hpd", "Hnnd"),
    ("Fnnd", "Hnnd"),
    ("Fnnd", "Hnnd_ext"),
    ("Fnnd", "Knnd"),
    ("Fnnd", "Lnnd"),
    ("Fnnd", "Knnd_ext"),
    ("Fnnd", "Lnnd_ext"),
    ("Knnd_ext", "Knnd"),
    ("Lnnd_ext", "Lnnd"),
)


@dataclass(frozen=True)
class ClassReport:
    """All nine cone verdicts for one sequence, mutually reconciled."""

    verdicts: Dict[str, ClassVerdict]

    def __getitem__(self, key: str) -> ClassVerdict:
        return self.verdicts[key]

    def members(self) -> Tuple[str, ...]:
        return tuple(k for k in REPORT_KEYS if self.verdicts[k].is_member)


def _degrade(verdicts: Dict[str, ClassVerdict], key: str) -> None:
    v = verdicts[key]
    verdicts[key] = ClassVerdict(
        BOUNDARY, v.witness_eig, f"reconciled:{v.detail}", v.failing_index
    )


def _reconcile(verdicts: Dict[str, ClassVerdict], gate: float, odd: bool) -> None:
    """Repairs tolerance splits between logically linked verdicts.

    A violated cone inclusion whose decisive witnesses sit within the
    marginality gate is softened to boundary; a violation backed by
    robust witnesses on both sides means a real defect upstream.
    """
    pairs = _IMPLICATIONS + ((("Knnd", "Fnnd"), ("Lnnd", "Fnnd")) if odd else ())
    for a, b in pairs:
        if (a, b) in (("Knnd", "Fnnd"), ("Lnnd", "Fnnd")):
            # Odd-length equivalence: both one-sided memberships jointly
            # force the two-sided one.
            if not (verdicts["Knnd"].is_member and verdicts["Lnnd"].is_member):
                continue
            if verdicts["Fnnd"].is_member:
                continue
            involved = ("Knnd", "Lnnd", "Fnnd")
        else:
            if not verdicts[a].is_member or verdicts[b].is_member:
                continue
            involved = (a, b)
        margins = {k: abs(verdicts[k].witness_eig) for k in involved}
        marginal = [k for k, w in margins.items() if w <= gate]
        if not marginal:
            raise RuntimeError(
                f"inconsistent cone verdicts {involved} with robust witnesses {margins}"
            )
        for k in marginal:
            _degrade(verdicts, k)


def class_report(seq: MomentSequence) -> ClassReport:
    """Runs every cone test on seq and cross-checks the results.

    The plain Hankel tests are taken at the deepest admissible order
    floor(m/2).  Extendable one-sided tests need m >= 1; for a single
    moment they coincide with the plain one-sided tests.
    """
    n = seq.m // 2
    verdicts: Dict[str, ClassVerdict] = {
        "Hnnd": is_hankel_nnd(seq, n),
        "Hpd": is_hankel_pd(seq, n),
        "Hnnd_ext": is_hankel_nnd_extendable(seq),
        "Fnnd": is_F_nnd(seq),
        "Fpd": is_F_pd(seq),
        "Knnd": is_K_nnd(seq),
        "Lnnd": is_L_nnd(seq),
    }
    if seq.m >= 1:
        verdicts["Knnd_ext"] = is_K_nnd_extendable(seq)
        verdicts["Lnnd_ext"] = is_L_nnd_extendable(seq)
    else:
        verdicts["Knnd_ext"] = verdicts["Knnd"]
        verdicts["Lnnd_ext"] = verdicts["Lnnd"]
    gate = 1000.0 * max(seq.tol.tol_psd, seq.tol.tol_range)
    _reconcile(verdicts, gate, odd=seq.m % 2 == 1)
    return ClassReport(verdicts)
