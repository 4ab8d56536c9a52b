"""Command-line front end.

Exit codes: 0 found/ok, 1 internal error, 2 input or encoding error,
3 target not found, 4 unsupported preparation angle.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import emap
from .encoding import encode, read_dataset, verify_encoding
from .engine import SearchProblem, run_sqs
from .errors import EncodingError, EMError, PartnerConflict, SQSError, UnsupportedAngle, ContractViolation
from .reference import complexity_table
from .sim.circuit import Circuit

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_NOT_FOUND, EXIT_ANGLE = 0, 1, 2, 3, 4


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def load_circuit(path: str) -> Circuit:
    return Circuit.from_json(Path(path).read_text(encoding="utf-8"))


def cmd_encode(args) -> int:
    dataset = read_dataset(args.dataset)
    try:
        circuit = encode(dataset)
    except PartnerConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        for a, b in exc.pairs:
            print(f"  conflict: {a} {b}", file=sys.stderr)
        return EXIT_INPUT
    em = emap.build(circuit)
    emit(circuit.to_json(indent=1) + "\n", args.out)
    em_out = args.em_out
    if em_out is None and args.out:
        em_out = str(Path(args.out).with_suffix("")) + ".em.json"
    if em_out:
        write_atomic(em_out, em.to_json() + "\n")
    print(f"encoded {len(dataset)} entries on {circuit.num_qubits} qubits, "
          f"{len(dataset.complement())} removals, EM rows {em.row_sizes()}", file=sys.stderr)
    return EXIT_OK


def _prep_from_args(args) -> Circuit:
    if bool(args.circuit) == bool(args.dataset):
        raise EncodingError("give exactly one of --circuit or --dataset")
    if args.circuit:
        return load_circuit(args.circuit)
    return encode(read_dataset(args.dataset))


def cmd_search(args) -> int:
    prep = _prep_from_args(args)
    try:
        problem = SearchProblem.from_circuit(prep, args.target, backend=args.backend)
        result = run_sqs(problem, args.mode, shots=args.shots, seed=args.seed, backend=args.backend)
    except UnsupportedAngle as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANGLE
    emit(json.dumps(result.to_dict(), indent=1) + "\n", args.out)
    return EXIT_OK if result.found else EXIT_NOT_FOUND


def cmd_bench(args) -> int:
    rows = complexity_table(args.n, kind=args.scenario, seed=args.seed, backend=args.backend)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "classical", "grover", "sqs"])
    for r in rows:
        w.writerow(r.as_tuple())
    emit(buf.getvalue(), args.out)
    if args.plot_out:
        pbuf = io.StringIO()
        pw = csv.writer(pbuf, lineterminator="\n")
        pw.writerow(["series", "n", "N", "queries"])
        for series in ("classical", "grover", "sqs"):
            for r in rows:
                pw.writerow([series, r.n, r.N, getattr(r, series)])
        write_atomic(args.plot_out, pbuf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_encoding(load_circuit(args.circuit), read_dataset(args.dataset))
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_emap(args) -> int:
    em = emap.build(load_circuit(args.circuit))
    emit(em.to_json() + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqsearch", description="Structured quantum search simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="dataset file -> preparation circuit + entanglement map")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="circuit JSON path (stdout if omitted)")
    p.add_argument("--em-out", help="EM JSON path (default: <out>.em.json)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("search", help="run the structured search for a target bitstring")
    p.add_argument("--circuit")
    p.add_argument("--dataset")
    p.add_argument("--target", required=True)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["dense", "factored", "auto"], default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bench", help="query-complexity table (CSV)")
    p.add_argument("--n", type=int, nargs="*", default=[])
    p.add_argument("--scenario", choices=["full", "two-row", "chain"], default="full")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["dense", "factored", "auto"], default="auto")
    p.add_argument("--out")
    p.add_argument("--plot-out", help="long-format CSV for plotting")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check a circuit prepares exactly a dataset")
    p.add_argument("--circuit", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emap", help="entanglement map of a circuit")
    p.add_argument("--circuit", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_emap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "shots", 1) < 1:
        print("error: --shots must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (EncodingError, EMError, ContractViolation, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SQSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
