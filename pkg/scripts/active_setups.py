"""Final active-learning accuracy across blob setups and learners.

Sweeps class-centre spread, feature dimension and learner, running a
few seeds per cell for a handful of strategies. Useful to see where
conformal uncertainty sampling helps and where it only chases label
noise. Slow: about 35 s per (seed, strategy) run on one core.

    python3 scripts/active_setups.py --seeds 4 --setups 2:2,4:2,3:5
"""

import argparse
import time

import numpy as np

from mmicp import seeding
from mmicp.active import ActiveConfig, run_active
from mmicp.models import LearnerKind, LearnerSpec, make_blobs
from mmicp.strategy import Strategy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--setups", default="2:2,4:2,3:5", help="spread:dim pairs")
    ap.add_argument("--learners", default="SOFTMAX_LINEAR,KNN")
    ap.add_argument("--strategies", default="mmi_pi,size@0.01,size@0.3,random")
    ap.add_argument("--rounds", type=int, default=300)
    args = ap.parse_args()
    cfg = ActiveConfig(rounds=args.rounds)
    names = args.strategies.split(",")
    print("spread,dim,learner," + ",".join(names) + ",seconds")
    for setup in args.setups.split(","):
        spread, dim = float(setup.split(":")[0]), int(setup.split(":")[1])
        for kind in args.learners.split(","):
            t0 = time.perf_counter()
            final = {n: [] for n in names}
            for seed in range(args.seeds):
                data = make_blobs(4000, 10, dim, spread, seeding.seed_for(0, seed, seeding.STREAM_DATA))
                for n in names:
                    run = run_active(data, Strategy.parse(n), LearnerSpec(LearnerKind(kind)), cfg,
                                     seeding.seed_for(0, seed))
                    final[n].append(run.accuracies[-1])
            cells = ",".join(f"{np.mean(final[n]):.4f}" for n in names)
            print(f"{spread},{dim},{kind},{cells},{time.perf_counter() - t0:.0f}", flush=True)


if __name__ == "__main__":
    main()
