"""Command-line interface: design, basis, verify, test, fiber.

Exit codes: 0 success, 2 input error, 3 size limit, 4 verification failure.
Counts files are JSON {"p": ..., "counts": [...]} or headerless CSV of
integers, both in Yates run order (the order printed by `ffexact design`).
Cells are serialized as binary strings "i_1...i_{p-1}".
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .basis import MarkovBasis, full_square_free_basis, minimal_markov_basis
from .design import (
    CountTable,
    Move,
    build_design,
    build_model_matrix,
    cell_label,
    sufficient_stat,
    sufficient_stat_vector,
)
from .errors import (
    EnumerationInfeasibleError,
    FFExactError,
    InvalidParameterError,
    SizeLimitError,
)
from .fiber import check_connectivity, enumerate_fiber, enumeration_cap
from .sampler import ChainConfig, estimate_p

EXIT_INPUT = 2
EXIT_SIZE = 3
EXIT_VERIFY = 4


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def load_counts(path: str) -> CountTable:
    """Load a counts file (JSON canonical, headerless CSV convenience)."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        p = data["p"]
        counts = data["counts"]
        order = data.get("run_order", "yates")
        if order != "yates":
            raise InvalidParameterError(f"unsupported run_order {order!r}")
    else:
        tokens = [tok for line in text.splitlines() for tok in line.split(",") if tok.strip()]
        counts = [int(tok) for tok in tokens]
        k = len(counts)
        if k < 4 or k & (k - 1):
            raise InvalidParameterError(
                f"CSV counts length {k} is not a power of two >= 4"
            )
        p = k.bit_length()  # k = 2^(p-1)
    return CountTable(p=int(p), y=np.asarray(counts, dtype=np.int64))


def _move_record(mv: Move) -> dict:
    return {
        "pos": [cell_label(c, mv.p) for c in mv.pos],
        "neg": [cell_label(c, mv.p) for c in mv.neg],
    }


def parse_basis_jsonl(text: str) -> MarkovBasis:
    """Inverse of the JSONL serialization written by cmd_basis."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = json.loads(lines[0])
    p = header["p"]
    moves = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        moves.append(
            Move(
                p=p,
                pos=tuple(sorted(int(c, 2) for c in rec["pos"])),
                neg=tuple(sorted(int(c, 2) for c in rec["neg"])),
            )
        )
    return MarkovBasis(p=p, moves=tuple(moves), kind=header["kind"])


def cmd_design(args) -> int:
    design = build_design(args.p)
    matrix = build_model_matrix(design).m if args.model else design.d
    for row in matrix:
        print(",".join(f"{v:+d}" for v in row))
    return 0


def cmd_basis(args) -> int:
    basis = full_square_free_basis(args.p) if args.full else minimal_markov_basis(args.p)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "jsonl":
            print(
                json.dumps({"p": basis.p, "kind": basis.kind, "count": len(basis.moves)}),
                file=out,
            )
            for mv in basis.moves:
                print(json.dumps(_move_record(mv)), file=out)
        else:
            print(f"# p={basis.p} kind={basis.kind} count={len(basis.moves)}", file=out)
            print("pos,neg", file=out)
            for mv in basis.moves:
                rec = _move_record(mv)
                print(f"{' '.join(rec['pos'])},{' '.join(rec['neg'])}", file=out)
    finally:
        if args.out:
            out.close()
    return 0


def _tables_of_total(k: int, total: int):
    """All length-k nonnegative integer tables with the given total."""
    table = [0] * k

    def rec(cell: int, rem: int):
        if cell == k - 1:
            table[cell] = rem
            yield tuple(table)
            table[cell] = 0
            return
        for v in range(rem + 1):
            table[cell] = v
            yield from rec(cell + 1, rem - v)
            table[cell] = 0

    yield from rec(0, total)


def cmd_verify(args) -> int:
    p = args.p
    k = 2 ** (p - 1)
    if args.basis == "empty":
        basis = MarkovBasis(p=p, moves=(), kind="empty")
    elif args.basis == "full":
        basis = full_square_free_basis(p)
    else:
        basis = minimal_markov_basis(p)
    stats = {}
    for total in range(args.max_total + 1):
        for table in _tables_of_total(k, total):
            s = sufficient_stat_vector(np.asarray(table, dtype=np.int64), p)
            stats.setdefault(s.key(), s)
    sizes: dict[int, int] = {}
    disconnected = []
    for key in sorted(stats):
        stat = stats[key]
        fib = enumerate_fiber(stat, p, cap=enumeration_cap())
        if fib.truncated:
            print(f"error: fiber for statistic {key} exceeds the cap", file=sys.stderr)
            return EXIT_VERIFY
        report = check_connectivity(fib, basis)
        sizes[fib.size] = sizes.get(fib.size, 0) + 1
        if report.class_count > 1:
            disconnected.append((key, fib, report))
    print(f"fibers checked: {len(stats)} (p={p}, totals 0..{args.max_total})")
    for size in sorted(sizes):
        print(f"  size {size}: {sizes[size]} fibers")
    if disconnected:
        key, fib, report = disconnected[0]
        i, j = report.witness
        print(f"disconnected fibers: {len(disconnected)}")
        print(f"witness statistic: {key}")
        print(f"witness pair: {fib.elements[i]} | {fib.elements[j]}")
        return EXIT_VERIFY
    print("all fibers connected")
    return 0


def cmd_test(args) -> int:
    y0 = load_counts(args.counts_file)
    config = ChainConfig(
        steps=args.steps,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        replicas=args.replicas,
    )
    report = estimate_p(y0, config=config, exact_cap=args.exact_cap)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_fiber(args) -> int:
    y0 = load_counts(args.counts_file)
    fib = enumerate_fiber(sufficient_stat(y0), y0.p, cap=args.limit)
    shown = fib.elements if not fib.truncated else fib.elements[: args.limit]
    for elem in shown:
        parts = [
            f"{cell_label(c, y0.p)}:{v}" for c, v in enumerate(elem) if v > 0
        ] or ["(empty)"]
        print(" ".join(parts))
    if fib.truncated:
        print(f"... truncated at {args.limit} elements")
    else:
        print(f"total: {fib.size} elements")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffexact",
        description="Exact conditional goodness-of-fit tests for 2^(p-1) "
        "fractional factorial designs with Poisson counts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="print the design or model matrix as CSV")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--model", action="store_true", help="print the model matrix")
    d.set_defaults(func=cmd_design)

    b = sub.add_parser("basis", help="emit a Markov basis")
    b.add_argument("--p", type=int, required=True)
    kind = b.add_mutually_exclusive_group()
    kind.add_argument("--minimal", action="store_true", default=True)
    kind.add_argument("--full", action="store_true", help="all square-free degree-2 moves")
    b.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    b.add_argument("--out", help="write to file instead of stdout")
    b.set_defaults(func=cmd_basis)

    v = sub.add_parser("verify", help="check fiber connectivity exhaustively")
    v.add_argument("--p", type=int, required=True)
    v.add_argument("--max-total", type=int, required=True)
    v.add_argument(
        "--basis",
        choices=["minimal", "full", "empty"],
        default="minimal",
        help=argparse.SUPPRESS,
    )
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("test", help="run the conditional goodness-of-fit test")
    t.add_argument("counts_file")
    t.add_argument("--steps", type=int, default=100_000)
    t.add_argument("--burn-in", type=int, default=10_000)
    t.add_argument("--thin", type=int, default=1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--replicas", type=int, default=1)
    t.add_argument("--exact-cap", type=int, default=None)
    t.set_defaults(func=cmd_test)

    f = sub.add_parser("fiber", help="enumerate the fiber of a counts file")
    f.add_argument("counts_file")
    f.add_argument("--limit", type=int, default=1000)
    f.set_defaults(func=cmd_fiber)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        return _fail(str(exc), EXIT_SIZE)
    except (InvalidParameterError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    except EnumerationInfeasibleError as exc:
        return _fail(str(exc), EXIT_VERIFY)
    except FFExactError as exc:
        return _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
