"""Time lifted inference against plain runs on a generated bundle.

Three measurements on the same clustered transitive-closure workload:

* lifted: one run with presence conditions and the feature model
* ignore-pcs: one plain run over all edges (PCs stripped)
* per-configuration: one plain run for every valid configuration

    python3 scripts/overhead_experiment.py --features 10 --edges 10000 --repeats 3
"""

import argparse
import io
import random
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from vdatalog import BddManager, EngineConfig, infer, restrict
from vdatalog.cli import RunOptions, run
from vdatalog.workloads import overhead_instance, write_bundle


@dataclass
class OverheadConfig:
    features: int = 10
    edges: int = 10_000
    seed: int = 7
    repeats: int = 3
    p_annotated: float = 0.3
    skip_per_config: bool = False


def _best_cli_time(paths, out_dir, ignore_pcs, repeats):
    times = []
    for _ in range(repeats):
        opts = RunOptions(program=str(paths["program"]), fact_dir=str(paths["facts"]),
                          output_dir=str(out_dir), fm=str(paths["fm"]), ignore_pcs=ignore_pcs,
                          stats=True)
        err = io.StringIO()
        start = time.perf_counter()
        if run(opts, io.StringIO(), err) != 0:
            raise SystemExit(err.getvalue())
        times.append(time.perf_counter() - start)
    return min(times), err.getvalue().splitlines()[0]


def experiment(cfg: OverheadConfig):
    inst = overhead_instance(random.Random(cfg.seed), nfeatures=cfg.features, nedges=cfg.edges,
                             p_annotated=cfg.p_annotated)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_bundle(inst, Path(tmp) / "bundle")
        out = Path(tmp) / "out"
        out.mkdir()
        lifted, lifted_stats = _best_cli_time(paths, out, False, cfg.repeats)
        plain, plain_stats = _best_cli_time(paths, out, True, cfg.repeats)

    print(f"bundle: {cfg.features} features, {len(inst.edb['Edge'])} edges, "
          f"fm = {inst.fm_text}")
    print(f"lifted      {lifted:8.3f}s  {lifted_stats}")
    print(f"ignore-pcs  {plain:8.3f}s  {plain_stats}")
    print(f"overhead    {lifted / plain:8.2f}x")
    if cfg.skip_per_config:
        return

    configs = list(inst.manager.enumerate_configurations(inst.fm))
    program = inst.program.without_pcs()
    start = time.perf_counter()
    for rho in configs:
        mgr = BddManager()
        edb = {name: [(v, mgr.true) for v in sorted(vs)]
               for name, vs in restrict(inst.edb, rho).items()}
        infer(program, edb, mgr, EngineConfig(feature_model=mgr.true))
    per_config = time.perf_counter() - start
    print(f"per-config  {per_config:8.3f}s  ({len(configs)} configurations, inference only)")
    print(f"savings     {per_config / lifted:8.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--features", type=int, default=10)
    ap.add_argument("--edges", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--p-annotated", type=float, default=0.3)
    ap.add_argument("--skip-per-config", action="store_true")
    experiment(OverheadConfig(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
