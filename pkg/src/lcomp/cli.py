"""``lcomp`` command line.

Exit codes: 0 success, 1 I/O error, 2 usage error, 3 bad input (parse errors,
unsorted keys, bad indices), 4 malformed compressed file, 5 domain error
(uncalibrated tuner, degenerate sample, unreachable precision).
"""
import argparse
import os
import sys
import warnings

from . import bench as bench_mod
from . import partition as part_mod
from . import query as query_mod
from . import report, tuner
from .codec import compress, decompress, space_report
from .errors import DomainError, FormatError, InputError, LCError
from .fileformat import (
    PLAN_MAGIC,
    deserialize,
    deserialize_plan,
    ingest_keys,
    iter_corpus,
    serialize,
    serialize_plan,
    write_keys,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_FORMAT = 4
EXIT_DOMAIN = 5

KEY_FORMATS = ("text", "u32", "u64")


def _emit(args, rows, columns=None, title=None):
    out = report.render(rows, columns, machine=args.machine)
    if title and not args.machine:
        print(title)
    print(out)


def _warn(msg):
    print(f"WARNING: {msg}", file=sys.stderr)


def _load_lists(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] == PLAN_MAGIC:
        return deserialize_plan(data)
    return [deserialize(data)]


def _load_one(path):
    lists = _load_lists(path)
    if len(lists) != 1:
        raise FormatError(f"{path} holds a {len(lists)}-partition plan; queries need a single list")
    return lists[0]


def _tune(keys, c_const):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        eps, stats = tuner.tune(keys, c_const)
    for w in caught:
        _warn(str(w.message))
    return eps, stats


def _space_row(c):
    rep = space_report(c)
    return {
        "n": c.n,
        "epsilon": c.epsilon,
        "segments": len(c.segments),
        "residual_bits_per_int": rep.residual_bits // c.n,
        "bits_per_int": rep.bits_per_int,
        "ratio": rep.ratio,
        "total_bits": rep.total_bits,
        "file_bytes": rep.serialized_bytes,
    }


def _sweep_rows(points):
    return [{"epsilon": p.epsilon, "segments": p.segments, "total_bits": p.total_bits,
             "bits_per_int": p.bits_per_int} for p in points]


def cmd_compress(args):
    keys = ingest_keys(args.input, args.format)
    if args.tune:
        eps, stats = _tune(keys, args.c)
        print(f"tuned epsilon {eps} (gap variance {stats.gap_variance:.6g}, C {stats.c_const:.6g})",
              file=sys.stderr)
    elif args.sweep:
        points = tuner.sweep(keys)
        eps = tuner.sweep_argmin(points).epsilon
        print(f"sweep argmin epsilon {eps}", file=sys.stderr)
    else:
        eps = args.epsilon
    c = compress(keys, eps)
    with open(args.output, "wb") as fh:
        fh.write(serialize(c))
    _emit(args, [_space_row(c)])
    return EXIT_OK


def cmd_decompress(args):
    lists = _load_lists(args.input)
    if len(lists) == 1:
        keys = decompress(lists[0])
    else:
        keys = part_mod.decompress_plan(lists)
    write_keys(args.output, keys, args.format)
    return EXIT_OK


def _bench_inputs(args):
    with open(args.input, "rb") as fh:
        head = fh.read(4)
    if head in (b"LCI1", PLAN_MAGIC):
        return _load_lists(args.input)
    if args.corpus:
        key_lists = list(iter_corpus(args.input, args.min_len))
    else:
        key_lists = [ingest_keys(args.input, args.format)]
    out = []
    for keys in key_lists:
        eps = args.epsilon
        if eps is None:
            eps = _tune(keys, args.c)[0] if len(keys) >= 2 else 1
        out.append(compress(keys, eps))
    return out


def cmd_bench(args):
    lists = _bench_inputs(args)
    name = args.name or os.path.basename(args.input)
    modes = bench_mod.MODES if args.mode == "both" else (args.mode,)
    reports = [bench_mod.bench(lists, name, m, args.repeat, args.lists_parallel) for m in modes]
    rows = [{
        "dataset": r.dataset,
        "mode": r.mode,
        "size_bytes": r.total_size_bytes,
        "bits_per_int": r.bits_per_int,
        "ns_per_int": r.decode_ns_per_int,
        "gib_per_s": r.throughput_gib_s,
        "threads": r.threads,
        "checksum": r.checksum,
    } for r in reports]
    _emit(args, rows)
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        baselines = report.read_baselines(args.baselines) if args.baselines else []
        with open(os.path.join(args.report_dir, "bench.tsv"), "w") as fh:
            fh.write(report.tsv(rows) + "\n")
        fig = report.render_tradeoff(reports, os.path.join(args.report_dir, "tradeoff.png"), baselines)
        print(f"wrote {fig}", file=sys.stderr)
    return EXIT_OK


def _write_or_print(args, keys):
    if args.output:
        write_keys(args.output, keys, args.format)
    else:
        sys.stdout.write("".join(f"{int(k)}\n" for k in keys.keys))


def cmd_query(args):
    a = _load_one(args.list)
    if args.op in ("intersect", "union"):
        b = _load_one(args.other)
        fn = query_mod.intersect if args.op == "intersect" else query_mod.union
        _write_or_print(args, fn(a, b))
    elif args.op == "quantile":
        fn = query_mod.quantile_approx if args.approx else query_mod.quantile_exact
        print(fn(a, args.k, args.q))
    else:
        for x in args.values:
            hit = query_mod.next_geq(a, x)
            print("none" if hit is None else f"{hit[0]}\t{hit[1]}")
    return EXIT_OK


def cmd_partition(args):
    keys = ingest_keys(args.input, args.format)
    if args.exact:
        if len(keys) > 10_000:
            _warn(f"exact partitioning is quadratic; {len(keys)} keys may take a long time")
        plan = part_mod.optimal_partition(keys)
    else:
        plan = part_mod.greedy_partition(keys, args.granularity)
    single = part_mod.single_partition(keys)
    rows = [{"lo": i, "hi": j, "keys": j - i, "epsilon": e} for i, j, e in plan.parts]
    _emit(args, rows, title=f"{len(plan)} partitions, {plan.total_bits} bits "
                            f"({plan.total_bits / len(keys):.4f} bits/int); single partition {single.total_bits} bits")
    if args.machine:
        print(f"total_bits\t{plan.total_bits}\nsingle_bits\t{single.total_bits}")
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(serialize_plan(part_mod.compress_plan(keys, plan)))
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        with open(os.path.join(args.report_dir, "partition.tsv"), "w") as fh:
            fh.write(report.tsv(rows) + "\n")
        report.render_partition(keys, plan, os.path.join(args.report_dir, "partition.png"))
    return EXIT_OK


def cmd_tune(args):
    keys = ingest_keys(args.input, args.format)
    eps, stats = _tune(keys, args.c)
    measured = space_report(compress(keys, eps))
    rows = [{
        "n": stats.n,
        "gap_variance": stats.gap_variance,
        "c": stats.c_const,
        "epsilon_opt": eps,
        "model_bits": tuner.space_model(stats, eps),
        "measured_bits": measured.total_bits,
        "bits_per_int": measured.bits_per_int,
    }]
    _emit(args, rows)
    if args.sweep:
        points = tuner.sweep(keys)
        best = tuner.sweep_argmin(points)
        _emit(args, _sweep_rows(points), title=f"sweep argmin epsilon {best.epsilon}")
        if args.report_dir:
            os.makedirs(args.report_dir, exist_ok=True)
            with open(os.path.join(args.report_dir, "sweep.tsv"), "w") as fh:
                fh.write(report.tsv(_sweep_rows(points)) + "\n")
            chosen = tuner.SweepPoint(eps, len(compress(keys, eps).segments), measured.total_bits,
                                      measured.bits_per_int)
            report.render_sweep(points, os.path.join(args.report_dir, "sweep.png"), chosen)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="lcomp", description="Learned compression for sorted integer lists.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--machine", action="store_true", help="tab-separated output")
        if fmt:
            sp.add_argument("--format", choices=KEY_FORMATS, default="text", help="key file format")

    sp = sub.add_parser("compress", help="compress a key file to LCI1")
    sp.add_argument("input")
    sp.add_argument("output")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--epsilon", type=int)
    g.add_argument("--tune", action="store_true", help="closed-form error bound")
    g.add_argument("--sweep", action="store_true", help="best power-of-two error bound by measurement")
    sp.add_argument("--c", type=float, help="calibration constant (default: fit on the input)")
    common(sp)
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="decode an LCI1 file or LCP1 plan to keys")
    sp.add_argument("input")
    sp.add_argument("output")
    common(sp)
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("bench", help="measure decode throughput")
    sp.add_argument("input", help="LCI1/LCP1 file, key file, or count-prefixed corpus (--corpus)")
    sp.add_argument("--corpus", action="store_true")
    sp.add_argument("--min-len", type=int, default=1)
    sp.add_argument("--epsilon", type=int, help="error bound when compressing raw keys (default: tuned)")
    sp.add_argument("--c", type=float)
    sp.add_argument("--mode", choices=bench_mod.MODES + ("both",), default="both")
    sp.add_argument("--repeat", type=int, default=5)
    sp.add_argument("--lists-parallel", action="store_true", help="decode lists on LC_THREADS workers")
    sp.add_argument("--name")
    sp.add_argument("--report-dir")
    sp.add_argument("--baselines", help="TSV/CSV of external codecs: name, bits_per_int, throughput_gib_s")
    common(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("query", help="AND/OR, quantiles and successor search on LCI1 files")
    qs = sp.add_subparsers(dest="op", required=True)
    for op in ("intersect", "union"):
        q = qs.add_parser(op)
        q.add_argument("list")
        q.add_argument("other")
        q.add_argument("-o", "--output")
        common(q)
    q = qs.add_parser("quantile")
    q.add_argument("list")
    q.add_argument("k", type=int)
    q.add_argument("q", type=int)
    q.add_argument("--approx", action="store_true", help="model-only estimate, within epsilon")
    common(q, fmt=False)
    q = qs.add_parser("nextgeq")
    q.add_argument("list")
    q.add_argument("values", type=int, nargs="+")
    common(q, fmt=False)
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("partition", help="split a key list into separately compressed partitions")
    sp.add_argument("input")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="shortest path over all ranges (quadratic)")
    g.add_argument("--greedy", action="store_true", help="geometric edge lengths (default)")
    sp.add_argument("--granularity", type=int)
    sp.add_argument("-o", "--output", help="write the compressed plan (LCP1)")
    sp.add_argument("--report-dir")
    common(sp)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("tune", help="closed-form error bound, optionally checked by a sweep")
    sp.add_argument("input")
    sp.add_argument("--c", type=float)
    sp.add_argument("--sweep", action="store_true")
    sp.add_argument("--report-dir")
    common(sp)
    sp.set_defaults(func=cmd_tune)
    return p


def _exit_code(exc):
    if isinstance(exc, InputError):
        return EXIT_INPUT, "input error"
    if isinstance(exc, FormatError):
        return EXIT_FORMAT, "format error"
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN, "domain error"
    if isinstance(exc, (LCError, ValueError)):
        return EXIT_INPUT, "error"
    return EXIT_IO, "I/O error"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LCError, ValueError, OSError) as exc:
        code, kind = _exit_code(exc)
        print(f"lcomp: {kind}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
