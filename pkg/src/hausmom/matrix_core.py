"""Dense complex matrix primitives for moment-sequence work.

Every decision that is exact in linear algebra (rank, range inclusion,
positive semidefiniteness) becomes a tolerance-gated tri-state verdict
here: "inside" (holds with margin), "boundary" (on the face, within
tolerance of equality), "outside" (violated with margin). Downstream
membership semantics is always "inside or boundary".

Matrices are plain 2-D complex128 numpy arrays; `cmatrix` validates and
normalizes inputs once at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

INSIDE = "inside"
BOUNDARY = "boundary"
OUTSIDE = "outside"


def cmatrix(obj) -> np.ndarray:
    """Validate and convert to a 2-D complex128 array (C order, finite)."""
    a = np.array(obj, dtype=np.complex128, order="C")
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def spec_norm(a) -> float:
    """Spectral norm; 0 for empty matrices."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances gating all tri-state decisions.

    rtol_rank is a base factor: the singular-value cutoff used by pinv is
    rtol_rank * max(rows, cols) * sigma_max.
    """

    tol_herm: float = 1e-10
    tol_psd: float = 1e-9
    rtol_rank: float = 1e-10
    tol_range: float = 1e-8

    def __post_init__(self):
        for name in ("tol_herm", "tol_psd", "rtol_rank", "tol_range"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly between 0 and 1")

    def rank_rtol(self, shape) -> float:
        return self.rtol_rank * max(shape[0], shape[1], 1)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class ClassVerdict:
    """Tri-state result of a membership or feasibility test.

    witness_eig carries the decisive number: the minimal eigenvalue for
    spectral tests, or minus the relative residual for residual tests
    (Hermiticity deviation, range inclusion), so that "outside" always
    comes with a negative witness.
    """

    status: str
    witness_eig: float
    detail: str = ""
    failing_index: Optional[int] = None

    @property
    def is_member(self) -> bool:
        return self.status != OUTSIDE

    def with_index(self, index: int) -> "ClassVerdict":
        return ClassVerdict(self.status, self.witness_eig, self.detail, index)


def verdict_all(*verdicts: ClassVerdict) -> ClassVerdict:
    """Tri-state conjunction: outside dominates, boundary propagates."""
    if not verdicts:
        raise ValueError("verdict_all needs at least one verdict")
    for wanted in (OUTSIDE, BOUNDARY):
        hits = [v for v in verdicts if v.status == wanted]
        if hits:
            return min(hits, key=lambda v: v.witness_eig)
    return min(verdicts, key=lambda v: v.witness_eig)


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def pinv(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse via SVD with a relative singular-value cutoff.

    A Hermitian argument gets an exactly Hermitian result; downstream
    triple products z A^+ y with z = y* then stay Hermitian up to plain
    matmul rounding instead of inheriting SVD asymmetry.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cutoff = tol.rank_rtol(a.shape) * (s[0] if s.size else 0.0)
    inv = np.where(s > cutoff, np.divide(1.0, s, where=s > 0), 0.0)
    out = (vh.conj().T * inv) @ u.conj().T
    if a.shape[0] == a.shape[1] and spec_norm(a - a.conj().T) <= tol.tol_herm * max(
        1.0, spec_norm(a)
    ):
        out = 0.5 * (out + out.conj().T)
    return out


class ParallelSumResult(NamedTuple):
    value: np.ndarray
    ps_pair: bool


def parallel_sum(a, b, tol: Tolerances = DEFAULT_TOL) -> ParallelSumResult:
    """A (A+B)^+ B, plus a flag telling whether (A, B) is a parallel pair.

    The flag checks R(A) subset R(A+B) and N(A+B) subset N(A); the
    commutativity and range/null laws of the parallel sum are only
    guaranteed when it holds (it always does for PSD pairs).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    s = a + b
    s_pinv = pinv(s, tol)
    value = a @ s_pinv @ b
    scale = max(1.0, spec_norm(a))
    in_range = spec_norm(a - s @ (s_pinv @ a)) <= tol.tol_range * scale
    null_ok = spec_norm(a @ (s_pinv @ s) - a) <= tol.tol_range * scale
    return ParallelSumResult(value, bool(in_range and null_ok))


def hermitian_part(a):
    """((A + A*)/2, relative deviation from Hermitian symmetry)."""
    a = _square(a)
    dev = spec_norm(a - a.conj().T)
    scale = max(1.0, spec_norm(a))
    return 0.5 * (a + a.conj().T), dev / scale


def is_hermitian(a, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    _, rel_dev = hermitian_part(a)
    if rel_dev <= tol.tol_herm:
        return ClassVerdict(INSIDE, -rel_dev, "hermitian")
    return ClassVerdict(OUTSIDE, -rel_dev, "nonhermitian")


def _eig_verdict(a, tol: Tolerances, detail: str) -> ClassVerdict:
    h, rel_dev = hermitian_part(a)
    if rel_dev > tol.tol_herm:
        return ClassVerdict(OUTSIDE, -rel_dev, "nonhermitian")
    if h.size == 0:
        return ClassVerdict(INSIDE, 0.0, detail)
    w = np.linalg.eigvalsh(h)
    lam = float(w[0])
    gate = tol.tol_psd * max(1.0, float(np.abs(w).max()))
    if lam > gate:
        status = INSIDE
    elif lam < -gate:
        status = OUTSIDE
    else:
        status = BOUNDARY
    return ClassVerdict(status, lam, detail)


def is_psd(a, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """Classify the minimal eigenvalue of the Hermitian part of A.

    inside: strictly positive with margin; boundary: within tolerance of
    zero (A sits on the PSD face, still counted as PSD); outside: negative
    with margin, or non-Hermitian beyond tol_herm.
    """
    return _eig_verdict(a, tol, "psd_eig")


def is_pd(a, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """Same classification as is_psd; definiteness means status inside."""
    return _eig_verdict(a, tol, "pd_eig")


def psd_sqrt(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root; negative eigenvalues are clamped to 0."""
    v = is_psd(a, tol)
    if v.status == OUTSIDE:
        raise ValueError(f"matrix is not PSD within tolerance ({v.detail}, witness {v.witness_eig:.3e})")
    h, _ = hermitian_part(a)
    w, vecs = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (vecs * np.sqrt(w)) @ vecs.conj().T


def proj_range(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector A A^+ onto the range of A."""
    a = np.asarray(a, dtype=np.complex128)
    return a @ pinv(a, tol)


def range_included(a, b, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """Tests R(A) subset-of R(B) via the residual (I - B B^+) A."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row count mismatch {a.shape} vs {b.shape}")
    resid = spec_norm(a - proj_range(b, tol) @ a)
    rel = resid / max(1.0, spec_norm(a))
    if rel <= tol.tol_range:
        return ClassVerdict(INSIDE, -rel, "range_residual")
    return ClassVerdict(OUTSIDE, -rel, "range_residual")


def null_included(a, b, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """Tests N(A) subset-of B's null space via the residual B (A^+ A) - B."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column count mismatch {a.shape} vs {b.shape}")
    resid = spec_norm(b @ (pinv(a, tol) @ a) - b)
    rel = resid / max(1.0, spec_norm(b))
    if rel <= tol.tol_range:
        return ClassVerdict(INSIDE, -rel, "null_residual")
    return ClassVerdict(OUTSIDE, -rel, "null_residual")


def loewner_leq(a, b, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """A precedes B in the Loewner order: classify B - A as PSD."""
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    v = _eig_verdict(b - a, tol, "loewner")
    return v


def block_psd(a, b, c, d, tol: Tolerances = DEFAULT_TOL) -> ClassVerdict:
    """Semidefiniteness of [[A, B], [C, D]] by the three-part criterion:
    A PSD, R(B) subset R(A), C = B*, and D - C A^+ B PSD.

    Kept as an independent oracle against direct eigenvalue tests of the
    assembled block matrix.
    """
    a = _square(a)
    d = _square(d)
    b = np.asarray(b, dtype=np.complex128)
    c = np.asarray(c, dtype=np.complex128)
    if b.shape != (a.shape[0], d.shape[0]) or c.shape != (d.shape[0], a.shape[0]):
        raise ValueError("blocks are not conformable")
    v_a = is_psd(a, tol)
    v_range = range_included(b, a, tol)
    adj_dev = spec_norm(c - b.conj().T) / max(1.0, spec_norm(b))
    v_adj = (
        ClassVerdict(INSIDE, -adj_dev, "adjoint_pair")
        if adj_dev <= tol.tol_herm
        else ClassVerdict(OUTSIDE, -adj_dev, "adjoint_pair")
    )
    schur = d - c @ pinv(a, tol) @ b
    v_schur = is_psd(schur, tol)
    return verdict_all(v_a, v_range, v_adj, v_schur)


def _range_basis(a, tol: Tolerances) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cutoff = tol.rank_rtol(a.shape) * (s[0] if s.size else 0.0)
    return u[:, s > cutoff]


def proj_intersection(a, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Projector onto R(A) inter R(B).

    Primary path reuses the parallel-sum range law (valid whenever (A, B)
    is a parallel pair); otherwise falls back to a principal-angle basis
    intersection.  A parallel sum whose norm sits below the rank floor of
    the inputs is cancellation residue, not a subspace: the intersection
    is numerically trivial and the zero projector is returned rather
    than a projector onto noise.
    """
    ps = parallel_sum(a, b, tol)
    if ps.ps_pair:
        floor = tol.rank_rtol(np.asarray(a).shape) * max(spec_norm(a), spec_norm(b))
        if spec_norm(ps.value) <= floor:
            n = np.asarray(a).shape[0]
            return np.zeros((n, n), dtype=np.complex128)
        return proj_range(ps.value, tol)
    ua = _range_basis(a, tol)
    ub = _range_basis(b, tol)
    if ua.shape[1] == 0 or ub.shape[1] == 0:
        n = np.asarray(a).shape[0]
        return np.zeros((n, n), dtype=np.complex128)
    _, s, vh = np.linalg.svd(ua.conj().T @ ub)
    keep = s >= 1.0 - tol.tol_range
    basis = ub @ vh.conj().T[:, keep]
    return basis @ basis.conj().T


def proj_sum(a, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Projector onto R(A) + R(B)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[0] != b.shape[0]:
        raise ValueError("row count mismatch")
    return proj_range(np.hstack([a, b]), tol)
