"""Command-line surface for the moment-sequence toolkit.

Subcommands: ``check`` classifies a sequence document against the cone
tests, ``interval`` prints the admissible-next-moment interval,
``extend`` appends moments under a policy, ``random`` draws a cone
member, and ``verify`` sweeps the identity suites over a document or a
batch of generated sequences.  Every command prints one JSON report to
stdout and exits 0 on success, 1 on a mathematical failure, 2 on usage
or parse problems.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classes import REPORT_KEYS, class_report, derive, is_F_nnd
from .extensions import ExtensionPolicy, extend, random_F
from .hankel import (
    MomentSequence,
    block_column,
    block_row,
    build_hankel,
    reflected,
    schur_chain,
    structural,
)
from .intervals import (
    all_sections,
    endpoints,
    is_completely_degenerate,
    length_recursion,
    verify_parallel_identity,
)
from .matrix_core import (
    DEFAULT_TOL,
    OUTSIDE,
    ClassVerdict,
    Tolerances,
    hermitian_part,
    is_psd,
    null_included,
    parallel_sum,
    proj_intersection,
    proj_range,
    proj_sum,
    range_included,
    spec_norm,
)

SUITES = (
    "parallel",
    "recursion",
    "reflection",
    "ranges",
    "ordering",
    "hankel-identities",
)

# flag attribute, env var, Tolerances field
_TOL_SPECS = (
    ("tol_psd", "HMOM_TOL_PSD", "tol_psd"),
    ("tol_rank", "HMOM_TOL_RANK", "rtol_rank"),
    ("tol_range", "HMOM_TOL_RANGE", "tol_range"),
    ("tol_herm", "HMOM_TOL_HERM", "tol_herm"),
)


# ---------------------------------------------------------------------------
# JSON codec for sequence documents


def _require_finite(x: float, where: str) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite number in {where}")
    return float(x)


def _reject_constant(token: str):
    raise ValueError(f"non-finite JSON token {token!r} rejected")


def load_json(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    obj = json.loads(raw.decode("utf-8"), parse_constant=_reject_constant)
    return obj, hashlib.sha256(raw).hexdigest()


def matrix_from_json(rows, q: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != q:
        raise ValueError(f"{where}: expected {q} rows")
    out = np.empty((q, q), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != q:
            raise ValueError(f"{where}: row {i} must hold {q} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(v, (int, float)) for v in entry)
            ):
                raise ValueError(f"{where}: entry ({i},{j}) must be a [re, im] pair")
            out[i, j] = complex(
                _require_finite(entry[0], where), _require_finite(entry[1], where)
            )
    return out


def matrix_to_json(a: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(a)]


def document_to_sequence(obj, tol: Tolerances) -> MomentSequence:
    if not isinstance(obj, dict):
        raise ValueError("document must be a JSON object")
    for key in ("q", "alpha", "beta", "moments"):
        if key not in obj:
            raise ValueError(f"document lacks required field {key!r}")
    q = obj["q"]
    if not isinstance(q, int) or q < 1:
        raise ValueError("q must be a positive integer")
    alpha = _require_finite(obj["alpha"], "alpha")
    beta = _require_finite(obj["beta"], "beta")
    moments = obj["moments"]
    if not isinstance(moments, list) or not moments:
        raise ValueError("moments must be a non-empty array")
    mats = tuple(
        matrix_from_json(mom, q, f"moments[{j}]") for j, mom in enumerate(moments)
    )
    return MomentSequence(q, alpha, beta, mats, tol)


def sequence_to_document(seq: MomentSequence) -> dict:
    return {
        "q": seq.q,
        "alpha": seq.alpha,
        "beta": seq.beta,
        "moments": [matrix_to_json(s) for s in seq.moments],
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


# ---------------------------------------------------------------------------
# Tolerances: flag > environment > document > built-in default


def resolve_tolerances(args, doc_tol) -> Tolerances:
    values = {}
    doc_tol = doc_tol or {}
    if not isinstance(doc_tol, dict):
        raise ValueError("tolerances must be an object")
    for flag_attr, env_name, field in _TOL_SPECS:
        flag_val = getattr(args, flag_attr, None)
        if flag_val is not None:
            values[field] = flag_val
        elif env_name in os.environ:
            try:
                values[field] = float(os.environ[env_name])
            except ValueError as exc:
                raise ValueError(f"bad value for {env_name}: {os.environ[env_name]!r}") from exc
        elif flag_attr in doc_tol:
            values[field] = _require_finite(doc_tol[flag_attr], f"tolerances.{flag_attr}")
    return Tolerances(**values) if values else DEFAULT_TOL


def tolerances_json(tol: Tolerances) -> dict:
    return {
        "tol_psd": tol.tol_psd,
        "tol_rank": tol.rtol_rank,
        "tol_range": tol.tol_range,
        "tol_herm": tol.tol_herm,
    }


def verdict_json(v: ClassVerdict) -> dict:
    return {
        "status": v.status,
        "witness": float(v.witness_eig),
        "detail": v.detail,
        "failing_index": v.failing_index,
    }


def _load_sequence(args) -> Tuple[MomentSequence, str]:
    obj, digest = load_json(args.file)
    tol = resolve_tolerances(args, obj.get("tolerances") if isinstance(obj, dict) else None)
    return document_to_sequence(obj, tol), digest


def _emit(command: str, digest: Optional[str], tol: Tolerances, started: float,
          result: dict, error: Optional[str] = None) -> None:
    report = {
        "command": command,
        "input_digest": digest,
        "tolerances": tolerances_json(tol),
        "wall_time_s": time.perf_counter() - started,
        "result": result,
        "error": error,
    }
    json.dump(report, sys.stdout, indent=2, allow_nan=False)
    sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_check(args) -> int:
    started = time.perf_counter()
    seq, digest = _load_sequence(args)
    try:
        report = class_report(seq)
    except RuntimeError as exc:
        _emit("check", digest, seq.tol, started, {}, error=str(exc))
        return 1
    result = {
        "require": args.require,
        "verdicts": {k: verdict_json(v) for k, v in report.verdicts.items()},
        "required_member": report[args.require].is_member,
    }
    _emit("check", digest, seq.tol, started, result)
    return 0 if report[args.require].is_member else 1


def cmd_interval(args) -> int:
    started = time.perf_counter()
    seq, digest = _load_sequence(args)
    m_index = seq.m if args.m is None else args.m
    if not 0 <= m_index <= seq.m:
        raise ValueError(f"--m {m_index} outside 0..{seq.m}")
    prefix = seq.prefix(m_index)
    gate = is_F_nnd(prefix)
    sec = endpoints(seq, m_index)
    if not gate.is_member:
        result = {"m_index": m_index, "class_verdict": verdict_json(gate)}
        _emit("interval", digest, seq.tol, started, result,
              error="sequence prefix is outside the interval cone")
        return 1
    d_herm = hermitian_part(sec.d)[0]
    eigs = [float(v) for v in np.linalg.eigvalsh(d_herm)]
    cutoff = seq.tol.rank_rtol(sec.d.shape) * max(abs(e) for e in eigs)
    result = {
        "m_index": m_index,
        "class_verdict": verdict_json(gate),
        "reliable": sec.reliable,
        "a": matrix_to_json(sec.a),
        "b": matrix_to_json(sec.b),
        "c": matrix_to_json(sec.c),
        "d": matrix_to_json(sec.d),
        "u": matrix_to_json(sec.u),
        "o": matrix_to_json(sec.o) if sec.o is not None else None,
        "d_psd": verdict_json(is_psd(sec.d, seq.tol)),
        "d_eigenvalues": eigs,
        "d_rank": int(sum(abs(e) > cutoff for e in eigs)),
        "degenerate": verdict_json(is_completely_degenerate(prefix)),
    }
    _emit("interval", digest, seq.tol, started, result)
    return 0


def cmd_extend(args) -> int:
    started = time.perf_counter()
    seq, digest = _load_sequence(args)
    matrix = None
    if args.mode in ("ball", "explicit"):
        if args.k_file is None:
            raise ValueError(f"--mode {args.mode} needs --k-file with a matrix document")
        obj, _ = load_json(args.k_file)
        matrix = matrix_from_json(obj, seq.q, args.k_file)
    if args.mode == "ball":
        policy = ExtensionPolicy.ball(matrix, steps=args.steps)
    elif args.mode == "explicit":
        policy = ExtensionPolicy.explicit(matrix, steps=args.steps)
    else:
        policy = ExtensionPolicy(args.mode, steps=args.steps)
    try:
        extended = extend(seq, policy)
    except (ValueError, RuntimeError) as exc:
        _emit("extend", digest, seq.tol, started,
              {"mode": args.mode, "steps": args.steps}, error=str(exc))
        return 1
    result = {
        "mode": args.mode,
        "steps": args.steps,
        "document": sequence_to_document(extended),
    }
    _emit("extend", digest, seq.tol, started, result)
    return 0


def cmd_random(args) -> int:
    started = time.perf_counter()
    tol = resolve_tolerances(args, None)
    if args.q < 1 or args.m < 0 or not args.alpha < args.beta:
        raise ValueError("need --q >= 1, --m >= 0 and --alpha < --beta")
    seq = random_F(args.q, args.alpha, args.beta, args.m, args.seed, args.pd)
    doc = sequence_to_document(seq)
    params = {
        "q": args.q,
        "alpha": args.alpha,
        "beta": args.beta,
        "m": args.m,
        "seed": args.seed,
        "pd": args.pd,
    }
    digest = hashlib.sha256(canonical_json(params).encode()).hexdigest()
    _emit("random", digest, tol, started, {"params": params, "document": doc})
    return 0


# ---------------------------------------------------------------------------
# Verification suites


def _rel(x: np.ndarray, ref: np.ndarray) -> float:
    return spec_norm(x) / max(1.0, spec_norm(ref))


def _suite_parallel(seq: MomentSequence) -> Tuple[List[float], int]:
    return list(verify_parallel_identity(seq)), 0


def _suite_recursion(seq: MomentSequence) -> Tuple[List[float], int]:
    out = []
    for j in range(seq.m):
        rhs = length_recursion(seq, j)
        d_next = endpoints(seq, j + 1).d
        out.append(_rel(d_next - rhs, d_next))
    return out, 0


def _suite_reflection(seq: MomentSequence) -> Tuple[List[float], int]:
    refl = reflected(seq)
    out = []
    top = seq.m // 2
    for n in range(top + 1):
        j_mat = structural(seq.q, n).J
        hv, hr = build_hankel(seq, n), build_hankel(refl, n)
        out.append(_rel(hr.H - j_mat @ hv.H @ j_mat, hv.H))
        if hv.K is not None:
            out.append(_rel(hr.K + j_mat @ hv.K @ j_mat, hv.K))
        if hv.G is not None:
            out.append(_rel(hr.G - j_mat @ hv.G @ j_mat, hv.G))
    c_orig = schur_chain(seq, top)
    c_refl = schur_chain(refl, top)
    for n in range(top + 1):
        out.append(_rel(c_refl.theta[n] - c_orig.theta[n], c_orig.theta[n]))
        out.append(_rel(c_refl.L[n] - c_orig.L[n], c_orig.L[n]))
        out.append(_rel(c_refl.M[n] + c_orig.M[n], c_orig.M[n]))
    return out, 0


def _suite_ranges(seq: MomentSequence) -> Tuple[List[float], int]:
    if is_F_nnd(seq).status == OUTSIDE:
        raise ValueError("range-law suite needs a sequence inside the interval cone")
    secs = all_sections(seq)
    tol = seq.tol
    out = []
    for j in range(1, seq.m + 1):
        p_d = proj_range(secs[j].d, tol)
        out.append(spec_norm(p_d - proj_intersection(secs[j].u, secs[j].o, tol)))
    for j in range(seq.m):
        p_d = proj_range(secs[j].d, tol)
        out.append(spec_norm(p_d - proj_sum(secs[j + 1].u, secs[j + 1].o, tol)))
    return out, 0


def _suite_ordering(seq: MomentSequence) -> Tuple[List[float], int]:
    if is_F_nnd(seq).status == OUTSIDE:
        raise ValueError("ordering suite needs a sequence inside the interval cone")
    al, be = seq.alpha, seq.beta
    out = []
    for sec in all_sections(seq):
        j = sec.index
        s_j = seq.moments[j]
        if j % 2 == 0:
            chain = [al * s_j, sec.a, sec.c, sec.b, be * s_j]
        else:
            zero = np.zeros_like(s_j)
            upper = -al * be * seq.moments[j - 1] + (al + be) * s_j
            chain = [zero, sec.a, sec.c, sec.b, upper]
        for lo, hi in zip(chain, chain[1:]):
            gap = hermitian_part(hi - lo)[0]
            lam = float(np.linalg.eigvalsh(gap)[0]) if gap.size else 0.0
            scale = max(1.0, spec_norm(lo), spec_norm(hi))
            out.append(max(0.0, -lam) / scale)
    return out, 0


def _suite_hankel_identities(seq: MomentSequence) -> Tuple[List[float], int]:
    if seq.m < 1:
        return [], 0
    al, be = seq.alpha, seq.beta
    ba = be - al
    der = derive(seq)
    a_seq, b_seq = der.alpha_seq(), der.beta_seq()
    c_seq = der.c_seq() if seq.m >= 2 else None
    out: List[float] = []
    skipped = 0
    for n in range(seq.m // 2 + 1):
        view = build_hankel(seq, n)
        if 2 * n + 1 <= seq.m:
            h_a = build_hankel(a_seq, n).H
            h_b = build_hankel(b_seq, n).H
            out.append(_rel(h_a - (-al * view.H + view.K), h_a))
            out.append(_rel(h_b - (be * view.H - view.K), h_b))
            out.append(_rel(ba * view.H - (h_a + h_b), view.H))
            out.append(_rel(ba * view.K - (be * h_a + al * h_b), view.K))
        if 2 * n + 2 <= seq.m:
            h_c = build_hankel(c_seq, n).H
            out.append(_rel(h_c - (-al * be * view.H + (al + be) * view.K - view.G), h_c))
            st = structural(seq.q, n + 1)
            big = build_hankel(seq, n + 1).H
            lower = st.Nabla - al * st.Delta
            upper = be * st.Delta - st.Nabla
            out.append(_rel(ba * build_hankel(a_seq, n).H
                            - (lower.conj().T @ big @ lower + h_c), h_c))
            out.append(_rel(ba * build_hankel(b_seq, n).H
                            - (upper.conj().T @ big @ upper + h_c), h_c))
        if n >= 1 and 2 * n + 1 <= seq.m:
            h_n = view.H
            y_tail = block_column(seq, n + 1, 2 * n + 1)
            z_tail = block_row(seq, n + 1, 2 * n + 1)
            cmm = (
                range_included(y_tail, h_n, seq.tol).is_member
                and null_included(h_n, z_tail, seq.tol).is_member
            )
            if cmm:
                h_a = build_hankel(a_seq, n).H
                h_b = build_hankel(b_seq, n).H
                ps = parallel_sum(h_a, h_b, seq.tol).value
                delta = structural(seq.q, n).Delta
                h_c_prev = build_hankel(c_seq, n - 1).H
                out.append(_rel(h_c_prev - ba * delta.conj().T @ ps @ delta, h_c_prev))
            else:
                skipped += 1
    return out, skipped


_SUITE_FUNCS = {
    "parallel": _suite_parallel,
    "recursion": _suite_recursion,
    "reflection": _suite_reflection,
    "ranges": _suite_ranges,
    "ordering": _suite_ordering,
    "hankel-identities": _suite_hankel_identities,
}


def cmd_verify(args) -> int:
    started = time.perf_counter()
    if (args.file is None) == (args.random is None):
        raise ValueError("verify needs exactly one source: a document file or --random N")
    suites = args.suite or list(SUITES)
    if args.file is not None:
        seq, digest = _load_sequence(args)
        sources = [seq]
    else:
        if args.random < 1:
            raise ValueError("--random needs a positive instance count")
        tol = resolve_tolerances(args, None)
        sources = [
            random_F(args.q, args.alpha, args.beta, args.m, args.seed + i, args.pd)
            for i in range(args.random)
        ]
        if tol is not DEFAULT_TOL:
            sources = [MomentSequence(s.q, s.alpha, s.beta, s.moments, tol)
                       for s in sources]
        params = {"q": args.q, "alpha": args.alpha, "beta": args.beta,
                  "m": args.m, "seed": args.seed, "pd": args.pd, "n": args.random}
        digest = hashlib.sha256(canonical_json(params).encode()).hexdigest()
    tol = sources[0].tol
    gate = tol.tol_range
    suite_results: Dict[str, dict] = {}
    ok = True
    try:
        for name in suites:
            worst = 0.0
            checks = 0
            skipped = 0
            for seq in sources:
                residuals, skips = _SUITE_FUNCS[name](seq)
                checks += len(residuals)
                skipped += skips
                if residuals:
                    worst = max(worst, max(residuals))
            passed = worst <= gate
            ok = ok and passed
            suite_results[name] = {
                "max_residual": worst,
                "checks": checks,
                "skipped": skipped,
                "pass": passed,
            }
    except (ValueError, RuntimeError) as exc:
        _emit("verify", digest, tol, started,
              {"suites": suite_results, "gate": gate}, error=str(exc))
        return 1
    result = {
        "suites": suite_results,
        "instances": len(sources),
        "gate": gate,
        "pass": ok,
    }
    _emit("verify", digest, tol, started, result)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hausmom",
        description="Classify, bound, extend and verify matrix moment sequences "
        "on a real interval.",
    )
    common = argparse.ArgumentParser(add_help=False)
    for flag_attr, env_name, _ in _TOL_SPECS:
        common.add_argument(
            f"--{flag_attr.replace('_', '-')}",
            dest=flag_attr,
            type=float,
            default=None,
            help=f"override tolerance (fallback: ${env_name}, then document, then default)",
        )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_check = sub.add_parser("check", parents=[common],
                             help="run all cone tests on a sequence document")
    p_check.add_argument("file")
    p_check.add_argument("--require", choices=REPORT_KEYS, default="Fnnd",
                         help="class whose membership decides the exit code")
    p_check.set_defaults(func=cmd_check)

    p_int = sub.add_parser("interval", parents=[common],
                           help="admissible next-moment interval at an index")
    p_int.add_argument("file")
    p_int.add_argument("--m", type=int, default=None,
                       help="section index (default: the full length)")
    p_int.set_defaults(func=cmd_interval)

    p_ext = sub.add_parser("extend", parents=[common],
                           help="append moments under an extension policy")
    p_ext.add_argument("file")
    p_ext.add_argument("--mode", required=True,
                       choices=["lower", "upper", "central", "ball", "explicit"])
    p_ext.add_argument("--steps", type=int, default=1)
    p_ext.add_argument("--k-file", default=None,
                       help="matrix document for ball (contraction K) or explicit "
                       "(candidate moment) mode")
    p_ext.set_defaults(func=cmd_extend)

    p_rand = sub.add_parser("random", parents=[common],
                            help="draw a random interval-cone member")
    p_rand.add_argument("--q", type=int, default=2)
    p_rand.add_argument("--alpha", type=float, default=0.0)
    p_rand.add_argument("--beta", type=float, default=1.0)
    p_rand.add_argument("--m", type=int, default=4)
    p_rand.add_argument("--seed", type=int, default=0)
    p_rand.add_argument("--pd", action="store_true")
    p_rand.set_defaults(func=cmd_random)

    p_ver = sub.add_parser("verify", parents=[common],
                           help="run identity suites on a document or generated batch")
    p_ver.add_argument("file", nargs="?", default=None)
    p_ver.add_argument("--random", type=int, default=None, metavar="N",
                       help="generate N sequences instead of reading a file")
    p_ver.add_argument("--suite", action="append", choices=SUITES, default=None,
                       help="suite name (repeatable; default: all)")
    p_ver.add_argument("--q", type=int, default=2)
    p_ver.add_argument("--alpha", type=float, default=0.0)
    p_ver.add_argument("--beta", type=float, default=1.0)
    p_ver.add_argument("--m", type=int, default=5)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--pd", action="store_true")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, IndexError, OSError, json.JSONDecodeError) as exc:
        print(f"hausmom: error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"hausmom: inconsistency: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
