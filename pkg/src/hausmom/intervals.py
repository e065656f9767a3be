"""Admissible-next-moment intervals for truncated interval moment data.

Once s_0..s_m sits in the doubly weighted cone over [alpha, beta], the
set of admissible next moments s_{m+1} is a matricial interval: every
candidate between a lower endpoint and an upper endpoint (in the Loewner
order) keeps the cone inhabited, and nothing else does.  This module
computes those endpoints from Schur-complement chains, tests candidates,
and carries the verification identities tying interval lengths to
parallel sums and range intersections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .classes import derive, is_F_nnd
from .hankel import MomentSequence, theta
from .matrix_core import (
    BOUNDARY,
    DEFAULT_TOL,
    INSIDE,
    OUTSIDE,
    ClassVerdict,
    Tolerances,
    cmatrix,
    hermitian_part,
    is_hermitian,
    loewner_leq,
    parallel_sum,
    pinv,
    psd_sqrt,
    spec_norm,
    verdict_all,
)

__all__ = [
    "SectionInterval",
    "endpoints",
    "all_sections",
    "membership",
    "verify_parallel_identity",
    "length_recursion",
    "is_completely_degenerate",
    "ball_point",
    "ball_coordinate",
]


@dataclass(frozen=True)
class SectionInterval:
    """Interval data attached to one moment index.

    a and b bound the admissible moment at this index, c is the
    midpoint, d = b - a the (PSD for cone members) interval length.
    u = s_j - a_{j-1} and o = b_{j-1} - s_j measure the slack the actual
    moment left against the previous interval; o is undefined at j = 0.
    reliable is False when the sequence prefix fails the cone test that
    the interval construction presupposes.
    """

    index: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    u: np.ndarray
    o: Optional[np.ndarray]
    reliable: bool = True


def _hermitian_moments(seq: MomentSequence) -> bool:
    gate = seq.tol.tol_herm
    return all(
        spec_norm(s - s.conj().T) <= gate * max(1.0, spec_norm(s))
        for s in seq.moments
    )


def _endpoint_pair(seq: MomentSequence, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """Raw endpoints (a_j, b_j) from the Schur chains of the weighted
    companion sequences.

    For Hermitian moment data the endpoints are Hermitian in exact
    arithmetic; the pseudoinverse products only miss that by matmul
    rounding, which gets stripped so the Loewner tests downstream see
    clean inputs.  Non-Hermitian data is passed through untouched.
    """
    al, be = seq.alpha, seq.beta
    d = derive(seq) if seq.m >= 1 else None
    if j % 2 == 0:
        k = j // 2
        if k == 0:
            th_a = np.zeros((seq.q, seq.q), dtype=np.complex128)
            th_b = th_a
        else:
            th_a = theta(d.alpha_seq(), k)
            th_b = theta(d.beta_seq(), k)
        a_j = al * seq.moments[j] + th_a
        b_j = be * seq.moments[j] - th_b
    else:
        k = (j - 1) // 2
        a_j = theta(seq, k + 1)
        if k == 0:
            th_c = np.zeros((seq.q, seq.q), dtype=np.complex128)
        else:
            th_c = theta(d.c_seq(), k)
        b_j = -al * be * seq.moments[j - 1] + (al + be) * seq.moments[j] - th_c
    if _hermitian_moments(seq):
        a_j = hermitian_part(a_j)[0]
        b_j = hermitian_part(b_j)[0]
    return a_j, b_j


def endpoints(seq: MomentSequence, m_index: int) -> SectionInterval:
    """Assembles the interval section at m_index (0 <= m_index <= m).

    The slack matrices u and o compare the moment at m_index with the
    previous section, so both endpoint pairs are computed.  When the
    prefix is outside the cone the numbers are still returned but
    flagged unreliable.
    """
    if not 0 <= m_index <= seq.m:
        raise IndexError(f"section index {m_index} outside 0..{seq.m}")
    a, b = _endpoint_pair(seq, m_index)
    if m_index == 0:
        u = seq.moments[0].copy()
        o = None
    else:
        a_prev, b_prev = _endpoint_pair(seq, m_index - 1)
        u = seq.moments[m_index] - a_prev
        o = b_prev - seq.moments[m_index]
    reliable = is_F_nnd(seq.prefix(m_index)).is_member
    return SectionInterval(
        index=m_index,
        a=a,
        b=b,
        c=0.5 * (a + b),
        d=b - a,
        u=u,
        o=o,
        reliable=reliable,
    )


def all_sections(seq: MomentSequence) -> Tuple[SectionInterval, ...]:
    """Interval sections at every index 0..m."""
    return tuple(endpoints(seq, j) for j in range(seq.m + 1))


def membership(seq: MomentSequence, candidate) -> ClassVerdict:
    """Would candidate be an admissible next moment after s_0..s_m?

    Two independent routes must agree: the Loewner sandwich between the
    current endpoints, and the cone test on the extended sequence.  A
    split at the membership level within twice the spectral tolerance is
    reported as boundary; a larger split raises, since the two routes
    are exact-arithmetic equivalent.
    """
    cand = cmatrix(candidate)
    if cand.shape != (seq.q, seq.q):
        raise ValueError(f"candidate shape {cand.shape}, expected {(seq.q, seq.q)}")
    if not is_hermitian(cand, seq.tol).is_member:
        _, dev = hermitian_part(cand)
        raise ValueError(f"candidate is not Hermitian (relative deviation {dev:.3e})")
    sec = endpoints(seq, seq.m)
    v_lo = loewner_leq(sec.a, cand, seq.tol)
    v_hi = loewner_leq(cand, sec.b, seq.tol)
    v_int = verdict_all(v_lo, v_hi)
    v_cls = is_F_nnd(seq.appended(cand))
    if v_int.is_member == v_cls.is_member:
        if v_int.status == v_cls.status:
            return v_int
        # Same side of the cone, one route touching the face: soften.
        return ClassVerdict(BOUNDARY, v_int.witness_eig, v_int.detail, v_int.failing_index)
    scale = max(1.0, spec_norm(cand), spec_norm(sec.d))
    gate = 2.0 * seq.tol.tol_psd * scale
    if min(abs(v_int.witness_eig), abs(v_cls.witness_eig)) <= gate:
        return ClassVerdict(
            BOUNDARY,
            min(v_int.witness_eig, v_cls.witness_eig),
            "membership_routes_split",
        )
    raise RuntimeError(
        "interval route and cone route disagree beyond tolerance: "
        f"{v_int} vs {v_cls}"
    )


def _require_member(seq: MomentSequence, what: str) -> None:
    if is_F_nnd(seq).status == OUTSIDE:
        raise ValueError(f"{what} needs a sequence inside the interval cone")


def verify_parallel_identity(seq: MomentSequence) -> Tuple[float, ...]:
    """Relative residuals of the parallel-sum law for interval lengths.

    Entry 0 checks d_0 = (beta - alpha) u_0; entry k >= 1 checks
    d_k = (beta - alpha) (u_k || o_k), where || is the parallel sum.
    """
    _require_member(seq, "parallel-sum verification")
    if seq.m < 1:
        raise ValueError("parallel-sum verification needs at least 2 moments")
    ba = seq.beta - seq.alpha
    out = []
    secs = all_sections(seq)
    d0 = secs[0].d
    out.append(spec_norm(d0 - ba * secs[0].u) / max(1.0, spec_norm(d0)))
    for k in range(1, seq.m + 1):
        sec = secs[k]
        ps = parallel_sum(sec.u, sec.o, seq.tol)
        resid = spec_norm(sec.d - ba * ps.value) / max(1.0, spec_norm(sec.d))
        out.append(resid)
    return tuple(out)


def length_recursion(seq: MomentSequence, j: int) -> np.ndarray:
    """One step of the interval-length recursion, evaluated from index j.

    Returns (beta-alpha)/4 * d_j minus the penalty for the moment at
    j+1 deviating from the midpoint; equals d_{j+1} for cone members.
    """
    _require_member(seq, "length recursion")
    if not 0 <= j + 1 <= seq.m:
        raise IndexError(f"recursion step j={j} needs moment {j + 1}, have m={seq.m}")
    ba = seq.beta - seq.alpha
    sec = endpoints(seq, j)
    dev = seq.moments[j + 1] - sec.c
    return ba / 4.0 * sec.d - ba * (dev @ pinv(sec.d, seq.tol) @ dev)


def is_completely_degenerate(seq: MomentSequence) -> ClassVerdict:
    """Has the admissible interval collapsed to a single point?"""
    _require_member(seq, "degeneracy test")
    d = endpoints(seq, seq.m).d
    rel = spec_norm(d) / max(1.0, spec_norm(seq.moments[0]))
    if rel <= seq.tol.tol_psd:
        return ClassVerdict(INSIDE, -rel, "degenerate_norm")
    return ClassVerdict(OUTSIDE, -rel, "degenerate_norm")


def ball_point(a, b, k_matrix, tol: Optional[Tolerances] = None) -> np.ndarray:
    """Maps a contraction coordinate K in [0, I] to the interval point
    A + sqrt(D) K sqrt(D) with D = B - A."""
    tol = tol or DEFAULT_TOL
    a = cmatrix(a)
    # The length is Hermitian by construction; strip matmul rounding so
    # the PSD square root does not trip on artifact asymmetry.
    d = hermitian_part(cmatrix(b) - a)[0]
    root = psd_sqrt(d, tol)
    return a + root @ cmatrix(k_matrix) @ root


def ball_coordinate(a, b, x, tol: Optional[Tolerances] = None) -> np.ndarray:
    """Recovers the contraction coordinate of an interval point:
    sqrt(D)^+ (X - A) sqrt(D)^+.  Faithful only when R(X - A) fits in
    R(D), which holds for every point of [A, B]."""
    tol = tol or DEFAULT_TOL
    a = cmatrix(a)
    d = hermitian_part(cmatrix(b) - a)[0]
    root_pinv = pinv(psd_sqrt(d, tol), tol)
    return root_pinv @ (cmatrix(x) - a) @ root_pinv
