"""Device and ad-comparison economics next to the published rows."""

import argparse

from cryptojack import econ


def _delta(value, published):
    return 100 * (value - published) / published


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="JSON with params/devices overrides")
    ap.add_argument("--hash-rate", type=float, default=20.0, help="visitor hash rate for the site tables")
    args = ap.parse_args()
    params, devices = econ.load_config(args.config) if args.config else (econ.EconParams(), econ.DEVICES)

    print(f"{'device':8} {'alpha':>5} {'P':>10} {'dP%':>7} {'L':>10} {'dL%':>7} {'T(y)':>7} {'pub T':>6}")
    for (name, alpha), (p, l, _, years) in sorted(econ.DEVICE_TABLE.items()):
        r = econ.evaluate_session(devices[name], alpha, params)
        print(f"{name:8} {alpha:5.1f} {r.profit_usd:10.3e} {_delta(r.profit_usd, p):+7.1f} "
              f"{r.loss_usd:10.3e} {_delta(r.loss_usd, l):+7.1f} {r.time_to_one_xmr_years:7.1f} {years:6}")

    _, p = econ.session_profit(21, 85 * 60, params)
    l = econ.session_loss(devices["windows"], 0.1, params)
    print(f"\nworked example: P={p:.3e} ({_delta(p, 6.38e-4):+.1f}%), L={l:.3e} ({_delta(l, 4.5e-3):+.1f}%), L/P={l / p:.2f}")
    print(f"hashes per XMR {params.hashes_per_xmr:.4e}; h=21 -> {econ.time_to_one_xmr(21, params):.1f} years")

    for title, table in (("top sites", econ.TOP_SITES), ("cryptojacking sites", econ.CJ_SITES)):
        print(f"\n{title}")
        for site, visits, mmss, published in table:
            usd = econ.site_monthly_revenue(visits, econ.parse_mmss(mmss), args.hash_rate, params)
            print(f"  {site:18} {usd:14,.1f} {published:14,.1f} {_delta(usd, published):+6.2f}%")


if __name__ == "__main__":
    main()
