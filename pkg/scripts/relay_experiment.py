"""Direct vs relayed mining session: credit, frame logs and detector verdicts."""

import argparse
import json
from collections import Counter

from cryptojack.mineproto import Scenario, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--throttle", type=float, default=0.5)
    ap.add_argument("--hash-budget", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--log", help="write the relay-side frame log as JSONL")
    args = ap.parse_args()

    common = dict(throttle=args.throttle, hash_budget=args.hash_budget, seed=args.seed)
    runs = {
        "direct": run_scenario(Scenario(name="direct", **common)),
        "relay": run_scenario(Scenario(name="relay", relay=True, **common)),
        "keyless": run_scenario(Scenario(name="keyless", site_key="", **common)),
    }
    for name, r in runs.items():
        kinds = Counter(r.miner.log.kinds)
        print(f"{name:8} {r.scenario.endpoint:36} shares={r.miner.shares:3d} accepted={r.miner.accepted_hashes:6d} "
              f"content={r.content.status:13} blacklist={r.blacklist.status:13} frames={json.dumps(kinds, sort_keys=True)}")

    relay = runs["relay"]
    tap = Counter(e.frame.serialize() for e in relay.relay_logs[0].entries)
    upstream = Counter(e.frame.serialize() for e in relay.server_logs[0].entries)
    print(f"relay tap equals upstream log: {tap == upstream} ({sum(tap.values())} frames)")
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(relay.relay_logs[0].to_jsonl())


if __name__ == "__main__":
    main()
