"""Signature scanning of HTML pages and dataset-level distributions.

Platform detection is first-match-wins over the signature DB's platform list,
so a page carrying markers of two platforms is attributed to the one listed
first. When several keys or throttles occur on one page the smallest value
is kept, which makes the result independent of script-tag order.
"""

from __future__ import annotations

import json
import random
import re
import time
import urllib.request
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urlsplit

from .fixtures import data_path

# TLD types as tabulated for the dataset; unknown multi-letter TLDs fall back to generic.
GENERIC_TLDS = frozenset({"com", "net", "org", "info", "online", "biz", "edu", "gov", "mil", "int"})
NEW_TLDS = frozenset({"site", "xyz", "club", "top", "space", "website", "store", "tech", "fun", "live", "win", "bid", "date"})


def tld_type(tld: str) -> str:
    tld = tld.lower().lstrip(".")
    if tld in GENERIC_TLDS:
        return "generic"
    if tld in NEW_TLDS:
        return "new"
    if len(tld) == 2 and tld.isalpha():
        return "country"
    return "generic"


@dataclass(frozen=True)
class Platform:
    name: str
    currency: str
    script_src: tuple
    constructor: tuple  # compiled regexes


@dataclass(frozen=True)
class SignatureDb:
    version: int
    platforms: tuple
    key_patterns: tuple
    throttle_patterns: tuple

    @classmethod
    def from_dict(cls, obj: dict) -> "SignatureDb":
        platforms = tuple(
            Platform(
                p["name"], p["currency"],
                tuple(s.lower() for s in p.get("script_src", ())),
                tuple(re.compile(r, re.I) for r in p.get("constructor", ())),
            )
            for p in obj["platforms"]
        )
        return cls(
            obj.get("version", 1),
            platforms,
            tuple(re.compile(r, re.I) for r in obj.get("key_patterns", ())),
            tuple(re.compile(r, re.I) for r in obj.get("throttle_patterns", ())),
        )

    @classmethod
    def load(cls, path: str | Path | None = None) -> "SignatureDb":
        text = Path(path).read_text(encoding="utf-8") if path else data_path("signatures.json").read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))

    def currency_of(self, platform: str) -> str | None:
        for p in self.platforms:
            if p.name == platform:
                return p.currency
        return None


_DEFAULT_DB: SignatureDb | None = None


def default_db() -> SignatureDb:
    global _DEFAULT_DB
    if _DEFAULT_DB is None:
        _DEFAULT_DB = SignatureDb.load()
    return _DEFAULT_DB


@dataclass(frozen=True)
class SiteRecord:
    domain: str = ""
    tld: str = ""
    tld_type: str = ""
    platform: str | None = None
    currency: str | None = None
    site_key: str | None = None
    throttle: float | None = None
    active: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class _Scripts(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.srcs: list[str] = []
        self.inline: list[str] = []
        self._in_script = False
        self._buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "script":
            src = dict(attrs).get("src")
            if src:
                self.srcs.append(src)
            self._in_script = True
            self._buf = []

    def handle_endtag(self, tag):
        if tag == "script" and self._in_script:
            self.inline.append("".join(self._buf))
            self._in_script = False

    def handle_data(self, data):
        if self._in_script:
            self._buf.append(data)


def extract_scripts(html: str) -> tuple[list[str], list[str]]:
    """``(script src attributes, inline script bodies)``."""
    p = _Scripts()
    p.feed(html)
    p.close()
    if p._in_script:
        p.inline.append("".join(p._buf))
    return p.srcs, p.inline


def split_domain(domain: str) -> tuple[str, str]:
    host = urlsplit(domain).hostname if "//" in domain else domain
    host = (host or "").lower().rstrip(".")
    tld = host.rsplit(".", 1)[-1] if "." in host else ""
    return host, tld


def scan_html(html: str, db: SignatureDb | None = None, domain: str = "") -> SiteRecord:
    db = db or default_db()
    srcs, inline = extract_scripts(html)
    lowered = [s.lower() for s in srcs]
    host, tld = split_domain(domain)
    base = SiteRecord(domain=host, tld=tld, tld_type=tld_type(tld) if tld else "")
    platform = None
    for p in db.platforms:
        if any(sig in s for sig in p.script_src for s in lowered) or any(
            rx.search(body) for rx in p.constructor for body in inline
        ):
            platform = p
            break
    if platform is None:
        return base
    texts = srcs + inline
    keys = sorted(m.group(1) for rx in db.key_patterns for t in texts for m in rx.finditer(t) if m.group(1).strip())
    throttles = sorted(
        float(m.group(1)) for rx in db.throttle_patterns for t in inline for m in rx.finditer(t)
        if 0 <= float(m.group(1)) <= 1
    )
    key = keys[0] if keys else None
    return SiteRecord(
        domain=host, tld=tld, tld_type=base.tld_type,
        platform=platform.name, currency=platform.currency,
        site_key=key, throttle=throttles[0] if throttles else None,
        active=key is not None,
    )


def scan_directory(path: str | Path, db: SignatureDb | None = None, workers: int = 1) -> list[SiteRecord]:
    """Scan every ``*.html`` file; the file stem is taken as the domain."""
    db = db or default_db()
    files = sorted(Path(path).glob("*.html"))

    def one(f: Path) -> SiteRecord:
        return scan_html(f.read_text(encoding="utf-8", errors="replace"), db, f.stem)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, files))
    return [one(f) for f in files]


def fetch_urls(urls, delay: float = 1.0, timeout: float = 10.0, opener=urllib.request.urlopen):
    """Yield ``(url, html or None)``, waiting ``delay`` seconds between requests."""
    last = None
    for url in urls:
        if last is not None:
            wait = delay - (time.monotonic() - last)
            if wait > 0:
                time.sleep(wait)
        last = time.monotonic()
        try:
            with opener(url, timeout=timeout) as resp:
                yield url, resp.read().decode("utf-8", errors="replace")
        except OSError:
            yield url, None


def records_to_jsonl(records) -> str:
    return "".join(r.to_json() + "\n" for r in records)


# aggregation

NO_CJ = "No CJ"


def _pct(n: int, total: int) -> float:
    return 100.0 * n / total if total else 0.0


def aggregate(records, top: int = 10) -> dict:
    """TLD, platform and currency distributions of scanned records.

    A record without a platform counts as "No CJ".
    """
    records = list(records)
    n = len(records)
    if n == 0:
        return {"total": 0, "tld": [], "platform": {}, "currency": {}}
    tlds = Counter(r.tld for r in records)
    ranked = sorted(tlds.items(), key=lambda kv: (-kv[1], kv[0]))
    tld_rows = [
        {"rank": i + 1, "tld": "." + t, "type": tld_type(t), "sites": c, "pct": _pct(c, n)}
        for i, (t, c) in enumerate(ranked[:top])
    ]
    rest = sum(c for _, c in ranked[top:])
    if rest:
        tld_rows.append({"rank": len(tld_rows) + 1, "tld": "others", "type": None, "sites": rest, "pct": _pct(rest, n)})
    platforms = Counter(r.platform or NO_CJ for r in records)
    currencies = Counter(r.currency or NO_CJ for r in records)
    return {
        "total": n,
        "tld": tld_rows,
        "platform": {k: {"sites": c, "pct": _pct(c, n)} for k, c in sorted(platforms.items(), key=lambda kv: (-kv[1], kv[0]))},
        "currency": {k: {"sites": c, "pct": _pct(c, n)} for k, c in sorted(currencies.items(), key=lambda kv: (-kv[1], kv[0]))},
    }


# synthetic corpus with the dataset's marginals

TLD_COUNTS = {"com": 1945, "net": 359, "si": 358, "online": 349, "ru": 242, "org": 191,
              "sk": 169, "info": 169, "br": 157, "site": 116}
OTHER_TLDS = ("de", "fr", "it", "pl", "in", "io", "es", "nl", "cz", "ro", "hu", "ua", "jp", "tr", "xyz",
              "club", "top", "me", "co", "us")
OTHERS_TOTAL = 1648
# One record more than the published per-platform rows (Miner 38 -> 39) so the
# Monero subtotal and the grand total agree with the published 4926 and 5703.
PLATFORM_COUNTS = {"Coinhive": 4652, "Hashing": 67, "deepMiner": 56, "Freecontent": 39, "Crypto-Loot": 38,
                   "Miner": 39, "Authedmine": 35, "JSEcoin": 149, NO_CJ: 628}

_TEMPLATES = {
    "Coinhive": ('<script src="https://coinhive.com/lib/coinhive.min.js"></script>',
                 'var miner = new CoinHive.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "Authedmine": ('<script src="https://authedmine.com/lib/authedmine.min.js"></script>',
                   'var miner = new CoinHive.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "Crypto-Loot": ('<script src="https://crypto-loot.com/lib/crlt.js"></script>',
                    'var miner = new CRLT.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "Hashing": ('<script src="https://hashing.win/hash.js"></script>',
                'var miner = new HashingWin.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "deepMiner": ('<script src="/js/deepMiner.min.js"></script>',
                  'var miner = new deepMiner.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "Freecontent": ('<script src="https://freecontent.bid/fc.js"></script>',
                    'var miner = new FreeContent.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
    "Miner": ('<script src="https://minero.cc/lib/minero.min.js"></script>',
              'var miner = new Minero.Anonymous("{key}", {{throttle: {throttle}}}); miner.start();'),
}


def _tld_pool() -> list[str]:
    pool = [t for t, c in TLD_COUNTS.items() for _ in range(c)]
    k = len(OTHER_TLDS)
    for i, t in enumerate(OTHER_TLDS):
        pool += [t] * (OTHERS_TOTAL // k + (1 if i < OTHERS_TOTAL % k else 0))
    return pool


def render_page(platform: str | None, key: str | None, throttle: float, domain: str, jse_user: int = 0) -> str:
    head = f"<!doctype html><html><head><title>{domain}</title>"
    body = "<body><p>content</p>"
    if platform is None:
        head += '<script src="/static/app.js"></script><script>window.dataLayer = [];</script>'
    elif platform == "JSEcoin":
        body += f'<script src="https://load.jsecoin.com/load/{jse_user}/{domain}/0/0/"></script>'
    else:
        src, call = _TEMPLATES[platform]
        head += src
        body += "<script>" + call.format(key=key or "", throttle=throttle) + "</script>"
    return head + "</head>" + body + "</body></html>"


def synthetic_corpus(seed: int = 0, keyless_fraction: float = 0.02):
    """``[(domain, html)]`` for 5,703 sites matching the published TLD and platform marginals."""
    rng = random.Random(seed)
    tlds = _tld_pool()
    platforms = [p for p, c in PLATFORM_COUNTS.items() for _ in range(c)]
    assert len(tlds) == len(platforms)
    rng.shuffle(platforms)
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
    out = []
    for i, (tld, platform) in enumerate(zip(tlds, platforms)):
        domain = f"site{i:04d}.{tld}"
        p = None if platform == NO_CJ else platform
        key = "".join(rng.choice(alphabet) for _ in range(32))
        if p and rng.random() < keyless_fraction:
            key = None
        throttle = rng.choice((0.1, 0.2, 0.3, 0.5, 0.7, 0.9))
        out.append((domain, render_page(p, key, throttle, domain, jse_user=rng.randrange(10 ** 5, 10 ** 6))))
    return out


def write_corpus(directory: str | Path, seed: int = 0) -> int:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    pages = synthetic_corpus(seed)
    for domain, html in pages:
        (d / f"{domain}.html").write_text(html, encoding="utf-8")
    return len(pages)
