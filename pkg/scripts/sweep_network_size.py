"""Mackey-Glass autoencoder over a range of reservoir sizes.

Every (size, seed) run is recorded in the results store; a table of median
free-run NRMSE and divergence horizon per size is printed at the end.

    PYTHONPATH=src python scripts/sweep_network_size.py --sizes 25 50 100 200 --seeds 5
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from asnrc.db.database import DatabaseManager
from asnrc.logs import setup_logging
from asnrc.tasks.autoencoder import AutoencoderInput, AutoencoderTask
from asnrc.tasks.base import ReservoirConfig
from asnrc.tasks.signals import SignalSpec


def sweep(sizes, seeds, teach_len, free_len, db=None):
    rows = []
    for n in sizes:
        scores, horizons = [], []
        for seed in range(seeds):
            inp = AutoencoderInput(
                reservoir=ReservoirConfig.for_task("autoencoder", n=n),
                signal=SignalSpec(kind="mackey_glass"),
                teach_len=teach_len,
                free_len=free_len,
                seed=seed,
            )
            report = AutoencoderTask(inp).run()
            if db is not None:
                db.record_report(report, inp)
            if report.ok:
                scores.append(report.metrics.nrmse)
                horizons.append(report.metrics.divergence_horizon if report.metrics.divergence_horizon is not None
                                else free_len)
        rows.append((n, len(scores), float(np.median(scores)) if scores else float("nan"),
                     float(np.median(horizons)) if horizons else float("nan")))
    return rows


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200])
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--teach-len", type=int, default=2000)
    parser.add_argument("--free-len", type=int, default=500)
    parser.add_argument("--no-record", action="store_true")
    args = parser.parse_args()

    setup_logging("WARNING")
    db = None
    if not args.no_record:
        db = DatabaseManager()
        db.create_tables()
    print(f"{'n':>6} {'ok':>4} {'median nrmse':>14} {'median horizon':>16}")
    for n, ok, score, horizon in sweep(args.sizes, args.seeds, args.teach_len, args.free_len, db):
        print(f"{n:>6} {ok:>4} {score:>14.4f} {horizon:>16.1f}")
