"""Command-line entry point.

Exit codes: 0 success, 1 bad input, 2 internal error. ``CRYPTOJACK_CONFIG``
may name a JSON file with econ ``params``/``devices`` overrides; ``--config``
takes precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, corpus, econ, fcm, featurestats
from .errors import CryptojackError
from .fixtures import feature_table_text
from .jsmetrics import compute_features, export_feature_matrix, read_feature_matrix
from .jsmetrics.features import FEATURE_NAMES

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


class InputError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer, np.floating)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _load_matrix(path: str | None):
    text = Path(path).read_text(encoding="utf-8") if path else feature_table_text()
    rows = read_feature_matrix(text)
    if not rows:
        raise InputError("feature matrix has no rows")
    return np.array([v.as_row() for _, v in rows], dtype=float), [label for label, _ in rows]


# subcommands

def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def cmd_features(args) -> str:
    vectors = []
    for f in args.files:
        src = _read(f)
        vectors.append((args.label if args.label is not None else ("stdin" if f == "-" else Path(f).stem), compute_features(src)))
    if args.json:
        return _dump([{"file": f, "label": lab, "features": v.as_dict()} for f, (lab, v) in zip(args.files, vectors)])
    return export_feature_matrix(vectors)


def _by_class(data, labels):
    classes = {}
    for row, lab in zip(data, labels):
        classes.setdefault(lab, []).append(row)
    return {k: np.array(v) for k, v in classes.items()}


def cmd_correlate(args) -> str:
    data, labels = _load_matrix(args.input)
    groups = _by_class(data, labels)
    wanted = [args.cls] if args.cls else sorted(groups)
    missing = [c for c in wanted if c not in groups]
    if missing:
        raise InputError(f"no rows with label {missing[0]!r}")
    mats = {c: featurestats.class_correlation(groups[c]) for c in wanted}
    if args.json:
        return _dump({c: {"features": list(m.feature_names), "values": m.values} for c, m in mats.items()})
    return "".join((f"# {c}\n" if len(mats) > 1 else "") + m.to_csv() for c, m in mats.items())


def cmd_select(args) -> str:
    data, labels = _load_matrix(args.input)
    groups = _by_class(data, labels)
    names = {"cryptojacking": args.cj_label, "malicious": args.mal_label, "benign": args.ben_label}
    for role, lab in names.items():
        if lab not in groups:
            raise InputError(f"no rows labelled {lab!r} ({role})")
    corr = {role: featurestats.class_correlation(groups[lab]) for role, lab in names.items()}
    sel = featurestats.select_features(corr["cryptojacking"], corr["malicious"], corr["benign"],
                                       strategy=args.strategy, exclude_diagonal=args.exclude_diagonal)
    if args.json:
        return sel.to_json()
    lines = [f"{'feature':>8} {'C':>8} {'M':>8} {'B':>8}  selected"]
    for n in FEATURE_NAMES:
        lines.append(f"{n:>8} {sel.cmean[n]:8.4f} {sel.mmean[n]:8.4f} {sel.bmean[n]:8.4f}  {'*' if n in sel.selected else ''}")
    lines.append("selected: " + ", ".join(sel.selected))
    return "\n".join(lines) + "\n"


def cmd_cluster(args) -> str:
    data, labels = _load_matrix(args.input)
    if args.labels:
        labels = [ln.strip() for ln in Path(args.labels).read_text(encoding="utf-8").splitlines() if ln.strip()]
    model = fcm.fit_best(data, n_clusters=args.clusters, m=args.m, restarts=args.restarts, seed=args.seed,
                         workers=args.workers)
    out = {
        "objective": model.objective,
        "seed": model.seed,
        "iterations": model.iterations,
        "converged": model.converged,
        "hard_labels": model.hard_labels().tolist(),
        "memberships": model.memberships.round(6).tolist(),
    }
    if args.evaluate:
        out["evaluation"] = json.loads(fcm.evaluate(model, labels).to_json())
    if args.projection:
        proj = fcm.project_2d(data)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pc1", "pc2", "label", "cluster"])
        for (x, y), lab, c in zip(proj.coords, labels, model.hard_labels()):
            w.writerow([repr(float(x)), repr(float(y)), lab, int(c)])
        Path(args.projection).write_text(buf.getvalue(), encoding="utf-8")
        out["explained_variance_ratio"] = proj.explained_variance_ratio.tolist()
    if args.json:
        return _dump(out)
    lines = [f"best objective {model.objective:.6f} (seed {model.seed}, {model.iterations} iterations)"]
    if args.evaluate:
        ev = out["evaluation"]
        lines.append("confusion (rows: true benign/malicious/cryptojacking):")
        lines += ["  " + " ".join(f"{v:3d}" for v in row) for row in ev["confusion"]]
        lines.append(f"accuracy {ev['accuracy']:.2f}%")
        lines += ["divergence: " + d for d in ev["divergences"]]
    return "\n".join(lines) + "\n"


def cmd_detect(args) -> str:
    from .mineproto import SessionLog, blacklist_detector, content_verdict, load_blacklist

    log = SessionLog.from_jsonl(_read(args.log))
    verdicts = {"content": content_verdict(log.entries).to_dict()}
    if args.endpoint:
        bl = load_blacklist(args.blacklist)
        verdicts["blacklist"] = blacklist_detector(args.endpoint, bl).to_dict()
    if args.json:
        return _dump(verdicts)
    return "".join(f"{k}: {v['status']} ({v['reason']})\n" for k, v in verdicts.items())


def cmd_simulate(args) -> str:
    from .mineproto import load_scenario, run_scenario
    from .mineproto.detect import load_blacklist

    sc = load_scenario(args.scenario)
    if args.blacklist:
        sc.blacklist = load_blacklist(args.blacklist)
    res = run_scenario(sc)
    if args.log:
        Path(args.log).write_text(res.miner.log.to_jsonl(), encoding="utf-8")
    report = res.to_dict(timing=args.timing)
    if args.detector != "both":
        report["verdicts"] = {args.detector: report["verdicts"][args.detector]}
    if args.json:
        return _dump(report)
    lines = [f"scenario {sc.name}: endpoint {sc.endpoint}",
             "frames: " + " ".join(report["miner"]["frames"]),
             f"accepted hashes: {report['miner']['accepted_hashes']}"]
    if report["miner"]["error"]:
        lines.append(f"session error: {report['miner']['error']}")
    lines += [f"{k} detector: {v['status']}" for k, v in report["verdicts"].items()]
    return "\n".join(lines) + "\n"


def _econ_setup(args):
    path = args.config or os.environ.get("CRYPTOJACK_CONFIG")
    params, devices = econ.load_config(path) if path else (econ.EconParams(), dict(econ.DEVICES))
    overrides = {k: v for k, v in (("xmr_price", args.xmr_price), ("payout_rate", args.payout_rate),
                                   ("electricity_cost", args.electricity_cost)) if v is not None}
    if overrides:
        params = econ.EconParams(**{**params.__dict__, **overrides})
    return params, devices


def cmd_econ(args) -> str:
    params, devices = _econ_setup(args)
    out = {"params": params.__dict__}
    if args.sites:
        table = econ.TOP_SITES if args.sites == "top" else econ.CJ_SITES
        rows = []
        for site, visits, mmss, published in table:
            usd = econ.site_monthly_revenue(visits, econ.parse_mmss(mmss), args.hash_rate, params)
            rows.append({"site": site, "visits": visits, "duration": mmss, "revenue_usd": usd,
                         "published_usd": published, "delta": (usd - published) / published})
        out["sites"] = rows
    else:
        names = [args.device] if args.device else sorted(devices)
        unknown = [n for n in names if n not in devices]
        if unknown:
            raise InputError(f"unknown device {unknown[0]!r}; known: {sorted(devices)}")
        alphas = [args.alpha] if args.alpha is not None else None
        sessions = []
        for n in names:
            for a in alphas or sorted(devices[n].hash_rate):
                sessions.append(json.loads(econ.evaluate_session(devices[n], a, params).to_json()))
        out["sessions"] = sessions
        if args.trajectory:
            if len(sessions) != 1:
                raise InputError("--trajectory needs exactly one --device and --alpha")
            dev = devices[names[0]]
            traj = econ.battery_trajectory(dev, alphas[0], dev.session_minutes)
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["minute", "battery_pct"])
            w.writerows([repr(t), repr(b)] for t, b in traj)
            Path(args.trajectory).write_text(buf.getvalue(), encoding="utf-8")
    if args.json:
        return _dump(out)
    lines = []
    for s in out.get("sessions", []):
        years = s["time_to_one_xmr_years"]
        lines.append(
            f"{s['device']:8s} alpha={s['throttle']:.2f} h={s['hash_rate']:g} P=${s['profit_usd']:.3g} "
            f"L=${s['loss_usd']:.3g} L-P=${s['gap_usd']:.3g} T={'inf' if years is None else f'{years:.1f}'}y"
            + (f"  flagged: {', '.join(s['flags'])}" if s["flags"] else "")
        )
    for r in out.get("sites", []):
        lines.append(f"{r['site']:18s} ${r['revenue_usd']:,.1f}/month (published ${r['published_usd']:,.1f}, {100 * r['delta']:+.2f}%)")
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> str:
    db = corpus.SignatureDb.load(args.signatures) if args.signatures else corpus.default_db()
    if args.synthetic:
        records = [corpus.scan_html(html, db, domain) for domain, html in corpus.synthetic_corpus(args.seed)]
    elif args.urls:
        urls = [u.strip() for u in Path(args.urls).read_text(encoding="utf-8").splitlines() if u.strip()]
        records = [corpus.scan_html(html, db, url) for url, html in corpus.fetch_urls(urls, delay=args.delay)
                   if html is not None]
    elif args.directory:
        if not Path(args.directory).is_dir():
            raise InputError(f"not a directory: {args.directory}")
        records = corpus.scan_directory(args.directory, db, workers=args.workers)
    else:
        raise InputError("give a directory, --urls FILE or --synthetic")
    if args.records:
        Path(args.records).write_text(corpus.records_to_jsonl(records), encoding="utf-8")
    report = corpus.aggregate(records)
    if args.json:
        return _dump(report)
    lines = [f"{report['total']} sites"]
    lines += [f"{r['rank']:>3} {r['tld']:8s} {r['type'] or '-':8s} {r['sites']:6d} {r['pct']:6.2f}%" for r in report["tld"]]
    lines += [f"{k:12s} {v['sites']:6d} {v['pct']:6.2f}%" for k, v in report["platform"].items()]
    lines += [f"{k:12s} {v['sites']:6d} {v['pct']:6.2f}%" for k, v in report["currency"].items()]
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cryptojack", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.set_defaults(func=func)
        return sp

    sp = add("features", cmd_features, "static features of JavaScript files as CSV")
    sp.add_argument("files", nargs="+", help="JavaScript files; - reads stdin")
    sp.add_argument("--label", help="label column value (default: file stem)")

    sp = add("correlate", cmd_correlate, "per-class Pearson correlation matrices")
    sp.add_argument("input", nargs="?", help="feature CSV with a label column (default: bundled table)")
    sp.add_argument("--class", dest="cls", help="only this label")

    sp = add("select-features", cmd_select, "features distinguishing the cryptojacking class")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--exclude-diagonal", action="store_true", help="leave self-correlation out of column means")
    sp.add_argument("--strategy", default="conjunctive", choices=sorted(featurestats.STRATEGIES))
    sp.add_argument("--cj-label", default="cryptojacking")
    sp.add_argument("--mal-label", default="malicious")
    sp.add_argument("--ben-label", default="benign")

    sp = add("cluster", cmd_cluster, "fuzzy c-means over a feature CSV")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--evaluate", action="store_true", help="score against labels")
    sp.add_argument("--labels", help="file with one label per row (default: CSV label column)")
    sp.add_argument("--clusters", type=int, default=3)
    sp.add_argument("--m", type=float, default=2.0)
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--projection", help="write 2-D PCA coordinates to this CSV")

    sp = add("detect", cmd_detect, "verdicts for a JSONL frame log")
    sp.add_argument("log", help="frame-log JSONL; - reads stdin")
    sp.add_argument("--endpoint", help="WebSocket URL of the session, enables the blacklist detector")
    sp.add_argument("--blacklist", help="host-pattern file (default: bundled list)")

    sp = add("simulate", cmd_simulate, "run a dropzone/relay/miner scenario")
    sp.add_argument("--scenario", default="direct", help="builtin name (direct, relay, keyless) or JSON file")
    sp.add_argument("--detector", choices=("content", "blacklist", "both"), default="both")
    sp.add_argument("--blacklist")
    sp.add_argument("--log", help="write the miner-side frame log as JSONL")
    sp.add_argument("--timing", action="store_true", help="include wall-clock measurements")

    sp = add("econ", cmd_econ, "profit/loss of a cryptojacking session or site revenue")
    sp.add_argument("--device")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--xmr-price", type=float)
    sp.add_argument("--payout-rate", type=float)
    sp.add_argument("--electricity-cost", type=float)
    sp.add_argument("--config", help="JSON with params/devices (overrides $CRYPTOJACK_CONFIG)")
    sp.add_argument("--sites", choices=("top", "cj"), help="monthly revenue of the top or cryptojacking sites")
    sp.add_argument("--hash-rate", type=float, default=20.0, help="visitor hash rate for --sites")
    sp.add_argument("--trajectory", help="write the battery trajectory CSV")

    sp = add("scan", cmd_scan, "signature scan of HTML pages and distributions")
    sp.add_argument("directory", nargs="?")
    sp.add_argument("--urls", help="newline-delimited URL list to fetch")
    sp.add_argument("--delay", type=float, default=1.0, help="seconds between fetches")
    sp.add_argument("--synthetic", action="store_true", help="scan the generated 5,703-site corpus")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--signatures")
    sp.add_argument("--records", help="write SiteRecords as JSONL")
    sp.add_argument("--workers", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except (InputError, CryptojackError, ValueError, OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"cryptojack {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"cryptojack {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
