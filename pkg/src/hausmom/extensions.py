"""Continuations of interval moment sequences and random cone members.

Given s_0..s_m inside the doubly weighted cone, each next moment may be
chosen anywhere in the current admissible interval.  The policies here
pin that choice: the lower or upper endpoint (which freezes the whole
tail), the midpoint (which shrinks the interval by a fixed factor each
step), an arbitrary contraction coordinate in the ball picture, or an
explicitly supplied candidate.  A generator built on the ball picture
produces random cone members for property tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .classes import is_F_nnd
from .hankel import MomentSequence, schur_chain
from .intervals import ball_point, endpoints, membership
from .matrix_core import (
    OUTSIDE,
    cmatrix,
    hermitian_part,
    is_hermitian,
    loewner_leq,
    spec_norm,
    verdict_all,
)

__all__ = [
    "ExtensionPolicy",
    "DegenerateTailReport",
    "extend",
    "random_F",
    "degenerate_tail_check",
]

_MODES = ("lower", "upper", "central", "ball", "explicit")


@dataclass(frozen=True)
class ExtensionPolicy:
    """How to pick each appended moment.

    ball mode moves by A + sqrt(D) K sqrt(D) and needs a Hermitian K
    with 0 <= K <= I; explicit mode re-validates the supplied candidate
    against the admissible interval at every step.
    """

    mode: str
    steps: int = 1
    K: Optional[np.ndarray] = None
    value: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown extension mode {self.mode!r}")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.mode == "ball":
            if self.K is None:
                raise ValueError("ball mode needs a contraction matrix K")
            object.__setattr__(self, "K", cmatrix(self.K))
        if self.mode == "explicit":
            if self.value is None:
                raise ValueError("explicit mode needs a candidate moment")
            object.__setattr__(self, "value", cmatrix(self.value))

    @classmethod
    def lower(cls, steps: int = 1) -> "ExtensionPolicy":
        return cls("lower", steps)

    @classmethod
    def upper(cls, steps: int = 1) -> "ExtensionPolicy":
        return cls("upper", steps)

    @classmethod
    def central(cls, steps: int = 1) -> "ExtensionPolicy":
        return cls("central", steps)

    @classmethod
    def ball(cls, k_matrix, steps: int = 1) -> "ExtensionPolicy":
        return cls("ball", steps, K=k_matrix)

    @classmethod
    def explicit(cls, value, steps: int = 1) -> "ExtensionPolicy":
        return cls("explicit", steps, value=value)


def _check_contraction(k: np.ndarray, tol) -> None:
    eye = np.eye(k.shape[0], dtype=np.complex128)
    zero = np.zeros_like(k)
    v = verdict_all(
        is_hermitian(k, tol),
        loewner_leq(zero, k, tol),
        loewner_leq(k, eye, tol),
    )
    if v.status == OUTSIDE:
        raise ValueError(f"ball coordinate is not a contraction in [0, I]: {v}")


def _hermitized(a: np.ndarray) -> np.ndarray:
    return hermitian_part(a)[0]


def extend(seq: MomentSequence, policy: ExtensionPolicy) -> MomentSequence:
    """Appends policy.steps admissible moments to seq.

    Once the interval has collapsed to a point every mode except
    explicit copies the forced midpoint directly, sidestepping
    pseudoinverse noise on a zero-length interval.  Explicit candidates
    are checked for admissibility and rejected with ValueError when they
    fall outside.
    """
    if is_F_nnd(seq).status == OUTSIDE:
        raise ValueError("extension needs a sequence inside the interval cone")
    if policy.mode == "ball":
        if policy.K.shape != (seq.q, seq.q):
            raise ValueError(f"contraction shape {policy.K.shape} != {(seq.q, seq.q)}")
        _check_contraction(policy.K, seq.tol)
    current = seq
    scale = max(1.0, spec_norm(seq.moments[0]))
    for _ in range(policy.steps):
        sec = endpoints(current, current.m)
        degenerate = spec_norm(sec.d) <= current.tol.tol_psd * scale
        if policy.mode == "explicit":
            if membership(current, policy.value).status == OUTSIDE:
                raise ValueError("explicit candidate falls outside the admissible interval")
            nxt = policy.value
        elif degenerate:
            nxt = sec.c
        elif policy.mode == "lower":
            nxt = sec.a
        elif policy.mode == "upper":
            nxt = sec.b
        elif policy.mode == "central":
            nxt = sec.c
        else:
            nxt = ball_point(sec.a, sec.b, policy.K, current.tol)
        current = current.appended(_hermitized(nxt))
    return current


def random_F(
    q: int,
    alpha: float,
    beta: float,
    m: int,
    seed: int,
    pd: bool = False,
) -> MomentSequence:
    """Draws a random member of the interval cone with m + 1 moments.

    The base moment is G G* + 0.1 I for a complex Gaussian G; each later
    moment comes from the ball picture with a random Hermitian
    contraction, drawn with spectrum in [0, 1], or in [0.05, 0.95] when
    pd is set so every prefix stays strictly interior.  Fixed seeds give
    reproducible sequences for a fixed generator implementation.
    """
    if q < 1 or m < 0:
        raise ValueError("need q >= 1 and m >= 0")
    if not alpha < beta:
        raise ValueError("need alpha < beta")
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))) / np.sqrt(2)
    s0 = g @ g.conj().T + 0.1 * np.eye(q)
    seq = MomentSequence(q, alpha, beta, (s0,))
    lo, hi = (0.05, 0.95) if pd else (0.0, 1.0)
    for _ in range(m):
        z = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
        unitary, _ = np.linalg.qr(z)
        lam = rng.uniform(lo, hi, size=q)
        k = unitary @ np.diag(lam) @ unitary.conj().T
        sec = endpoints(seq, seq.m)
        nxt = ball_point(sec.a, sec.b, k, seq.tol)
        seq = seq.appended(_hermitized(nxt))
    return seq


@dataclass(frozen=True)
class DegenerateTailReport:
    """Where (if anywhere) the admissible interval collapsed, and whether
    the moments after that point follow the forced values.

    degeneracy_order is the block Hankel order at which the
    Schur-complement chain is predicted to vanish; schur_residual is the
    measured relative norm there (None when too few moments exist to
    form it).
    """

    m0: Optional[int]
    tail_ok: bool
    tail_residual: float
    degeneracy_order: Optional[int]
    schur_residual: Optional[float]

    @property
    def is_degenerate(self) -> bool:
        return self.m0 is not None


def degenerate_tail_check(seq: MomentSequence) -> DegenerateTailReport:
    """Scans the interval lengths for collapse and audits the forced tail."""
    if is_F_nnd(seq).status == OUTSIDE:
        raise ValueError("degeneracy scan needs a sequence inside the interval cone")
    tol = seq.tol
    scale = max(1.0, spec_norm(seq.moments[0]))
    secs = [endpoints(seq, j) for j in range(seq.m + 1)]
    m0 = None
    for sec in secs:
        if spec_norm(sec.d) <= tol.tol_psd * scale:
            m0 = sec.index
            break
    if m0 is None:
        return DegenerateTailReport(None, True, 0.0, None, None)
    worst = 0.0
    for j in range(m0 + 1, seq.m + 1):
        prev = secs[j - 1]
        s_j = seq.moments[j]
        for forced in (prev.a, prev.b, prev.c):
            worst = max(worst, spec_norm(s_j - forced) / scale)
    tail_ok = worst <= 100.0 * tol.tol_psd
    order = m0 // 2 + 1
    schur_residual = None
    if 2 * order <= seq.m:
        l_mat = schur_chain(seq, order).L[order]
        schur_residual = spec_norm(l_mat) / scale
    return DegenerateTailReport(m0, tail_ok, worst, order, schur_residual)
