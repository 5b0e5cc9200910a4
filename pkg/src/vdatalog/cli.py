"""Command-line driver.

    vdatalog PROGRAM.dl -F FACT_DIR -D OUT_DIR [--fm FM.pc] [options]

Reads ``<FACT_DIR>/<Rel>.facts`` for each ``.input`` relation and writes
``<OUT_DIR>/<Rel>.csv`` for each ``.output`` relation.
"""

from __future__ import annotations

import argparse
import codecs
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import engine, facts_io, oracle
from .errors import VDatalogError
from .pcbdd import BddManager, PresenceCondition
from .syntax import parse_pc, parse_program, pc_to_bdd

log = logging.getLogger("vdatalog")


@dataclass
class RunOptions:
    program: str
    fact_dir: str = "."
    output_dir: str = "."
    fm: str | None = None
    delimiter: str = facts_io.DEFAULT_DELIMITER
    sat_pruning: bool = True
    post_prune: bool = True
    conjoin_fm: bool = False
    check: bool = False
    stats: bool = False
    ignore_pcs: bool = False
    dump_bdd: bool = False
    allow_same_dir: bool = False
    max_features: int = oracle.DEFAULT_MAX_FEATURES


def load_feature_model(path, mgr: BddManager) -> PresenceCondition:
    """Parse a feature-model file (one PC, comments allowed); ``None`` means True."""
    if path is None:
        return mgr.true
    text = Path(path).read_text(encoding="utf-8")
    return pc_to_bdd(parse_pc(text, source=str(path)), mgr)


def _stats_line(elapsed_ms: float, db_bytes: int, stats: engine.InferenceStats) -> str:
    return (f"time_ms={int(round(elapsed_ms))} db_bytes={db_bytes} "
            f"iterations={stats.iterations} sat_checks={stats.sat_checks}")


def run(opts: RunOptions, out=sys.stdout, err=sys.stderr) -> int:
    """Execute one run; returns the process exit status."""
    if (not opts.allow_same_dir and opts.output_dir and opts.fact_dir
            and os.path.realpath(opts.fact_dir) == os.path.realpath(opts.output_dir)):
        print("error: fact and output directories coincide (use --allow-same-dir)", file=err)
        return 2
    try:
        program = parse_program(Path(opts.program).read_text(encoding="utf-8"),
                                source=opts.program)
        mgr = BddManager()
        if opts.ignore_pcs:
            program = program.without_pcs()
            fm = mgr.true
        else:
            # registration order: program text, then fact files, then the feature model
            for name in program.features:
                mgr.mk_var(name)
        edb = facts_io.load_inputs(program, opts.fact_dir, mgr, opts.delimiter,
                                   ignore_pcs=opts.ignore_pcs)
        if not opts.ignore_pcs:
            fm = load_feature_model(opts.fm, mgr)
        cfg = engine.EngineConfig(feature_model=fm, sat_pruning=opts.sat_pruning,
                                  conjoin_fm_into_stored_pcs=opts.conjoin_fm)

        start = time.perf_counter()
        if opts.check:
            result = oracle.check_theorem1(program, edb, fm, mgr, cfg,
                                           max_features=opts.max_features)
            db = result.lifted
        else:
            result = None
            db = engine.infer(program, edb, mgr, cfg)
            if not opts.sat_pruning and opts.post_prune:
                db = engine.post_prune(db, fm)
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        with_pcs = not opts.ignore_pcs
        for rel in program.outputs:
            facts_io.write_facts(Path(opts.output_dir) / (rel.name + facts_io.OUTPUT_SUFFIX),
                                 db[rel.name], with_pcs, opts.delimiter)
    except (VDatalogError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1

    if opts.stats:
        db_bytes = sum(len(facts_io.format_relation(r, with_pcs, opts.delimiter).encode("utf-8"))
                       for r in db.values())
        print(_stats_line(elapsed_ms, db_bytes, db.stats), file=err)
        for name, rel in db.items():
            print(f"# relation {name} size={len(rel)}", file=err)
        print(f"# bdd_nodes={mgr.node_count()} candidates={db.stats.candidates} "
              f"pruned={db.stats.pruned}", file=err)
    if opts.dump_bdd:
        for line in mgr.dump():
            print(line, file=err)
    if result is not None:
        if result.passed:
            print(f"check passed: {result.configurations} valid configurations", file=out)
            return 0
        print("check FAILED", file=out)
        print(result.counterexample.describe(opts.delimiter), file=out)
        return 3
    return 0


def _delimiter(text: str) -> str:
    value = codecs.decode(text, "unicode_escape")
    if not value:
        raise argparse.ArgumentTypeError("delimiter must be nonempty")
    if value.isspace() and value != "\t":
        raise argparse.ArgumentTypeError("only TAB is allowed as a whitespace delimiter")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdatalog",
                                description="Variability-aware Datalog interpreter.")
    p.add_argument("program", help="Datalog program file")
    p.add_argument("-F", "--fact-dir", default=".", help="directory of <Rel>.facts inputs")
    p.add_argument("-D", "--output-dir", default=".", help="directory for <Rel>.csv outputs")
    p.add_argument("--fm", metavar="FILE", help="feature model: a file holding one PC")
    p.add_argument("--delimiter", type=_delimiter, default=facts_io.DEFAULT_DELIMITER,
                   help=r"field delimiter, escapes allowed (default '\t')")
    p.add_argument("--no-sat-check", dest="sat_pruning", action="store_false",
                   help="skip the per-derivation satisfiability check")
    p.add_argument("--no-post-prune", dest="post_prune", action="store_false",
                   help="with --no-sat-check, keep facts unsatisfiable under the feature model")
    p.add_argument("--conjoin-fm", action="store_true",
                   help="store PCs conjoined with the feature model")
    p.add_argument("--check", action="store_true",
                   help="verify the result against per-configuration plain runs")
    p.add_argument("--max-features", type=int, default=oracle.DEFAULT_MAX_FEATURES,
                   help="feature limit for --check")
    p.add_argument("--stats", action="store_true", help="print run statistics to stderr")
    p.add_argument("--ignore-pcs", action="store_true",
                   help="strip all presence conditions and run plain Datalog")
    p.add_argument("--dump-bdd", action="store_true", help="print the BDD node table to stderr")
    p.add_argument("--allow-same-dir", action="store_true",
                   help="permit -F and -D to name the same directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    opts = RunOptions(program=args.program, fact_dir=args.fact_dir, output_dir=args.output_dir,
                      fm=args.fm, delimiter=args.delimiter, sat_pruning=args.sat_pruning,
                      post_prune=args.post_prune, conjoin_fm=args.conjoin_fm, check=args.check,
                      stats=args.stats, ignore_pcs=args.ignore_pcs, dump_bdd=args.dump_bdd,
                      allow_same_dir=args.allow_same_dir, max_features=args.max_features)
    return run(opts)


if __name__ == "__main__":
    sys.exit(main())
