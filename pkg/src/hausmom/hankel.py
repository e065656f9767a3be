"""Block Hankel assembly and the Schur-complement chain.

A moment sequence s_0..s_m of q x q blocks determines the block Hankel
matrices H_n = [s_{j+k}], the shifted variants K_n = [s_{j+k+1}] and
G_n = [s_{j+k+2}], block columns y_{l,m} and rows z_{l,m}, and the chain

    Theta_0 = 0,  Theta_n = z_{n,2n-1} H_{n-1}^+ y_{n,2n-1},
    L_n = s_{2n} - Theta_n,
    M_0 = 0,      M_n = z_{n,2n-1} H_{n-1}^+ y_{n+1,2n}.

Assembly is an exact copy of the stored blocks; no symmetrization happens
here, so the sign/reflection identities hold bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .matrix_core import (
    DEFAULT_TOL,
    INSIDE,
    Tolerances,
    cmatrix,
    pinv,
    range_included,
)


@dataclass(frozen=True)
class MomentSequence:
    """A finite sequence of complex q x q moments with interval parameters."""

    q: int
    alpha: float
    beta: float
    moments: Tuple[np.ndarray, ...]
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("block size q must be positive")
        if not self.alpha < self.beta:
            raise ValueError("alpha < beta is required")
        if len(self.moments) == 0:
            raise ValueError("need at least s_0")
        checked = tuple(cmatrix(s) for s in self.moments)
        for j, s in enumerate(checked):
            if s.shape != (self.q, self.q):
                raise ValueError(f"moment {j} has shape {s.shape}, expected {(self.q, self.q)}")
        object.__setattr__(self, "moments", checked)

    @property
    def m(self) -> int:
        """Top index of the sequence (len - 1)."""
        return len(self.moments) - 1

    def prefix(self, upto: int) -> "MomentSequence":
        if not 0 <= upto <= self.m:
            raise IndexError(f"prefix index {upto} out of range 0..{self.m}")
        return MomentSequence(self.q, self.alpha, self.beta, self.moments[: upto + 1], self.tol)

    def appended(self, s_new) -> "MomentSequence":
        return MomentSequence(
            self.q, self.alpha, self.beta, self.moments + (cmatrix(s_new),), self.tol
        )

    def replaced(self, moments: Sequence[np.ndarray]) -> "MomentSequence":
        return MomentSequence(self.q, self.alpha, self.beta, tuple(moments), self.tol)


def block_column(seq: MomentSequence, lo: int, hi: int) -> np.ndarray:
    """y_{lo,hi}: the moments lo..hi stacked vertically."""
    if not 0 <= lo <= hi <= seq.m:
        raise IndexError(f"block column ({lo},{hi}) outside 0..{seq.m}")
    return np.vstack([seq.moments[j] for j in range(lo, hi + 1)])


def block_row(seq: MomentSequence, lo: int, hi: int) -> np.ndarray:
    """z_{lo,hi}: the moments lo..hi side by side."""
    if not 0 <= lo <= hi <= seq.m:
        raise IndexError(f"block row ({lo},{hi}) outside 0..{seq.m}")
    return np.hstack([seq.moments[j] for j in range(lo, hi + 1)])


def all_moments_hermitian(seq: MomentSequence) -> bool:
    """True when every stored moment is Hermitian within tol_herm."""
    gate = seq.tol.tol_herm
    return all(
        np.linalg.norm(s - s.conj().T, 2) <= gate * max(1.0, np.linalg.norm(s, 2))
        if s.size
        else True
        for s in seq.moments
    )


def _hankel_from(seq: MomentSequence, n: int, shift: int) -> np.ndarray:
    q = seq.q
    out = np.empty(((n + 1) * q, (n + 1) * q), dtype=np.complex128)
    for j in range(n + 1):
        for k in range(n + 1):
            out[j * q : (j + 1) * q, k * q : (k + 1) * q] = seq.moments[j + k + shift]
    return out


@dataclass(frozen=True)
class HankelView:
    """H_n plus (when enough moments exist) K_n and G_n for one sequence."""

    seq: MomentSequence
    n: int
    H: np.ndarray
    K: Optional[np.ndarray]
    G: Optional[np.ndarray]

    def y(self, lo: int, hi: int) -> np.ndarray:
        return block_column(self.seq, lo, hi)

    def z(self, lo: int, hi: int) -> np.ndarray:
        return block_row(self.seq, lo, hi)


def build_hankel(seq: MomentSequence, n: int) -> HankelView:
    """Assemble H_n (requires 2n <= m); K_n and G_n are filled in when the
    shifted moments exist, left as None otherwise."""
    if n < 0 or 2 * n > seq.m:
        raise IndexError(f"H_{n} needs moments up to 2n={2 * n}, have m={seq.m}")
    h = _hankel_from(seq, n, 0)
    k = _hankel_from(seq, n, 1) if 2 * n + 1 <= seq.m else None
    g = _hankel_from(seq, n, 2) if 2 * n + 2 <= seq.m else None
    return HankelView(seq, n, h, k, g)


def theta(seq: MomentSequence, n: int) -> np.ndarray:
    """Theta_n; needs moments up to 2n-1 only (Theta_0 = 0).

    For Hermitian moment data the triple product is Hermitian in exact
    arithmetic but not in floating point (matmul rounding scales with the
    condition of the inverted Hankel matrix), so it gets symmetrized;
    non-Hermitian data passes through untouched.
    """
    if n == 0:
        return np.zeros((seq.q, seq.q), dtype=np.complex128)
    if 2 * n - 1 > seq.m:
        raise IndexError(f"Theta_{n} needs moments up to {2 * n - 1}, have m={seq.m}")
    h_prev = _hankel_from(seq, n - 1, 0)
    z = block_row(seq, n, 2 * n - 1)
    y = block_column(seq, n, 2 * n - 1)
    out = z @ pinv(h_prev, seq.tol) @ y
    if all_moments_hermitian(seq):
        out = 0.5 * (out + out.conj().T)
    return out


@dataclass(frozen=True)
class SchurChain:
    """Theta_n, L_n = s_{2n} - Theta_n and the mixed products M_n.

    range_ok[n] records whether R(y_{n,2n-1}) lay inside R(H_{n-1}) when
    Theta_n was formed; the pseudoinverse formula stays well defined either
    way, but extendability consumers care about the flag.
    """

    theta: Tuple[np.ndarray, ...]
    L: Tuple[np.ndarray, ...]
    M: Tuple[np.ndarray, ...]
    range_ok: Tuple[bool, ...]

    @property
    def has_range_warning(self) -> bool:
        return not all(self.range_ok)


def schur_chain(seq: MomentSequence, upto_n: int) -> SchurChain:
    """Compute the chain for n = 0..upto_n (requires 2*upto_n <= m)."""
    if upto_n < 0 or 2 * upto_n > seq.m:
        raise IndexError(f"chain up to n={upto_n} needs m >= {2 * upto_n}, have {seq.m}")
    q = seq.q
    zero = np.zeros((q, q), dtype=np.complex128)
    hermitize = all_moments_hermitian(seq)
    thetas = [zero]
    ls = [seq.moments[0].copy()]
    ms = [zero]
    flags = [True]
    for n in range(1, upto_n + 1):
        h_prev = _hankel_from(seq, n - 1, 0)
        h_pinv = pinv(h_prev, seq.tol)
        z = block_row(seq, n, 2 * n - 1)
        y = block_column(seq, n, 2 * n - 1)
        y_next = block_column(seq, n + 1, 2 * n)
        th = z @ h_pinv @ y
        if hermitize:
            # Hermitian in exact arithmetic; strip the matmul rounding
            # that ill-conditioned Hankel inverses amplify.
            th = 0.5 * (th + th.conj().T)
        thetas.append(th)
        ls.append(seq.moments[2 * n] - thetas[n])
        ms.append(z @ h_pinv @ y_next)
        flags.append(range_included(y, h_prev, seq.tol).status == INSIDE)
    return SchurChain(tuple(thetas), tuple(ls), tuple(ms), tuple(flags))


@dataclass(frozen=True)
class StructuralMatrices:
    """The alternating-sign block signature J and the block selectors."""

    J: np.ndarray
    Delta: np.ndarray
    Nabla: np.ndarray


def structural(q: int, n: int) -> StructuralMatrices:
    """J_{q,n} = diag((-1)^j I_q), Delta = [I_{nq}; 0], Nabla = [0; I_{nq}].

    J is (n+1)q square; Delta and Nabla are (n+1)q x nq (empty for n = 0).
    """
    if q < 1 or n < 0:
        raise ValueError("need q >= 1 and n >= 0")
    signs = np.repeat([(-1.0) ** j for j in range(n + 1)], q)
    j_mat = np.diag(signs).astype(np.complex128)
    delta = np.zeros(((n + 1) * q, n * q), dtype=np.complex128)
    nabla = np.zeros(((n + 1) * q, n * q), dtype=np.complex128)
    if n >= 1:
        delta[: n * q, :] = np.eye(n * q)
        nabla[q:, :] = np.eye(n * q)
    return StructuralMatrices(j_mat, delta, nabla)


def reflected(seq: MomentSequence) -> MomentSequence:
    """The sign-alternated sequence (-1)^j s_j over the mirrored interval."""
    mirrored = tuple(((-1.0) ** j) * s for j, s in enumerate(seq.moments))
    return MomentSequence(seq.q, -seq.beta, -seq.alpha, mirrored, seq.tol)
