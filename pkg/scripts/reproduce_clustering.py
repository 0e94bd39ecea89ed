"""Fuzzy C-means on the bundled 28-script feature table, scored against its labels."""

import argparse
import json
import time
import warnings

from cryptojack.fcm import DroppedFeatureWarning, evaluate, fit_best, project_2d
from cryptojack.fixtures import feature_table_arrays


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=float, default=2.0)
    ap.add_argument("--sweep", type=int, default=0, help="also report accuracy for this many base seeds")
    args = ap.parse_args()

    data, labels = feature_table_arrays()
    warnings.simplefilter("ignore", DroppedFeatureWarning)
    t = time.perf_counter()
    model = fit_best(data, m=args.m, restarts=args.restarts, seed=args.seed)
    elapsed = time.perf_counter() - t
    rep = evaluate(model, labels)
    proj = project_2d(data)

    print(f"best of {args.restarts} restarts: seed {model.seed}, objective {model.objective:.6f}, {elapsed:.3f} s")
    print("confusion (rows benign/malicious/cryptojacking):")
    for row in rep.confusion:
        print("  " + " ".join(f"{v:3d}" for v in row))
    print(f"accuracy {rep.correct}/{sum(map(sum, rep.confusion))} = {rep.accuracy:.2f}%")
    print("fpr " + json.dumps({k: round(v, 2) for k, v in rep.false_positive_rate.items()}))
    print("fnr " + json.dumps({k: round(v, 2) for k, v in rep.false_negative_rate.items()}))
    print(f"pca explained variance {proj.explained_variance_ratio.round(3).tolist()}")

    if args.sweep:
        accs = []
        for s in range(args.sweep):
            accs.append(evaluate(fit_best(data, m=args.m, restarts=args.restarts, seed=s * args.restarts), labels).correct)
        print(f"correct over {args.sweep} seed sets: min {min(accs)}, max {max(accs)}")


if __name__ == "__main__":
    main()
