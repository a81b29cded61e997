#!/usr/bin/env python3
"""Regenerates the bundled fixtures under fixtures/. Deterministic."""

import argparse
import json
import random
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

NEWS_TEMPLATES = [
    ("{name} rallies as volume climbs", 0.6),
    ("{name} slips on profit taking", -0.4),
    ("Analysts split on {name} outlook", 0.0),
    ("{name} extends gains after upbeat guidance", 0.7),
    ("Regulators question {name} disclosures", -0.6),
]

DOC_TOPICS = [
    ("earnings preview", "revenue guidance margin outlook for the coming quarter"),
    ("sector rotation", "funds moving between growth and value as rates shift"),
    ("liquidity report", "order book depth and spreads across major venues"),
    ("macro calendar", "inflation print and central bank meeting this week"),
]


def iso(ts):
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def walk(rng, times, start_price, vol, decimals, gapless):
    """OHLC bars along `times`; gapless bars open at the previous close."""
    bars = []
    prev = start_price
    for ts in times:
        o = prev if gapless else prev * (1 + rng.gauss(0, vol / 4))
        o = round(o, decimals)
        c = round(o * (1 + rng.gauss(0.0005, vol)), decimals)
        hi = round(max(o, c) * (1 + abs(rng.gauss(0, vol / 3))), decimals)
        lo = round(min(o, c) * (1 - abs(rng.gauss(0, vol / 3))), decimals)
        hi = max(hi, o, c)
        lo = max(min(lo, o, c), 10 ** -decimals)
        vol_units = round(rng.uniform(1e4, 1e6), 2)
        bars.append((ts, o, hi, lo, c, vol_units))
        prev = c
    return bars


def write_bars(path, series, decimals):
    rows = []
    for symbol, bars in series.items():
        for ts, o, h, l, c, v in bars:
            rows.append((iso(ts), symbol, o, h, l, c, v))
    rows.sort()
    fmt = f"{{:.{decimals}f}}"
    with open(path, "w") as f:
        f.write("symbol,ts,open,high,low,close,volume\n")
        for ts, sym, o, h, l, c, v in rows:
            f.write(",".join([sym, ts, fmt.format(o), fmt.format(h), fmt.format(l), fmt.format(c), f"{v:.2f}"]) + "\n")


def write_news_docs(out, rng, symbols, times, names):
    news = []
    for i, ts in enumerate(times):
        for _ in range(rng.randint(0, 2)):
            sym = rng.choice(symbols)
            tmpl, sentiment = rng.choice(NEWS_TEMPLATES)
            news.append({
                "id": f"n{len(news) + 1:04d}",
                "published_at": iso(ts + timedelta(minutes=rng.randint(1, 600))),
                "symbols": [sym],
                "summary": tmpl.format(name=names.get(sym, sym)),
                "sentiment": sentiment,
            })
    docs = []
    for i, ts in enumerate(times[::3]):
        title, body = DOC_TOPICS[i % len(DOC_TOPICS)]
        sym = symbols[i % len(symbols)]
        docs.append({
            "id": f"d{i + 1:04d}",
            "ts": iso(ts + timedelta(minutes=rng.randint(1, 900))),
            "title": f"{names.get(sym, sym)} {title}",
            "body": f"{body}; mentions {sym}",
            "source": "desk",
        })
    with open(out / "news.jsonl", "w") as f:
        for n in news:
            f.write(json.dumps(n, sort_keys=True) + "\n")
    with open(out / "docs.jsonl", "w") as f:
        for d in docs:
            f.write(json.dumps(d, sort_keys=True) + "\n")


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def crypto30(root):
    out = root / "crypto30"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(30)
    pairs = ["BTCUSDT", "ETHUSDT", "SOLUSDT", "BNBUSDT", "XRPUSDT",
             "ADAUSDT", "DOGEUSDT", "AVAXUSDT", "LINKUSDT", "DOTUSDT"]
    starts = [68000, 2500, 160, 580, 0.55, 0.38, 0.12, 27, 11, 4.3]
    # one seed bar before the window, then 30 daily decisions
    times = [datetime(2025, 11, 1, tzinfo=timezone.utc) + timedelta(days=i) for i in range(31)]
    series = {p: walk(rng, times, s, 0.03, 6, gapless=True) for p, s in zip(pairs, starts)}
    write_bars(out / "bars.csv", series, 6)
    write_news_docs(out, rng, pairs, times, {p: p[:-4] for p in pairs})
    (out / "universe.txt").write_text("# USDT pairs\n" + "\n".join(pairs) + "\n")
    (out / "calendar.txt").write_text("continuous = true\n")
    write_json(out / "run.json", {
        "market": "crypto",
        "universe_file": "universe.txt",
        "calendar_file": "calendar.txt",
        "bars_path": "bars.csv",
        "news_path": "news.jsonl",
        "docs_path": "docs.jsonl",
        "window": {"start": "2025-11-02T00:00:00Z", "end": "2025-12-01T00:00:00Z"},
        "initial_cash": 50000,
        "baseline_symbol": "BTCUSDT",
        "policy": {"kind": "buy_and_hold", "params": {}},
        "run_id": "crypto30",
    })


def us_hourly(root):
    out = root / "us_hourly"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(1638)
    tickers = ["QQQ", "AAPL", "MSFT", "NVDA", "AMZN", "GOOGL", "META", "TSLA"]
    starts = [600, 255, 515, 185, 220, 245, 760, 440]
    est = timezone(timedelta(hours=-5))
    times = []
    day = date(2025, 10, 1)
    while day <= date(2025, 10, 8):
        if day.weekday() < 5:
            for k in range(7):
                times.append(datetime(day.year, day.month, day.day, 9, 30, tzinfo=est) + timedelta(hours=k))
        day += timedelta(days=1)
    series = {t: walk(rng, times, s, 0.006, 2, gapless=False) for t, s in zip(tickers, starts)}
    # TSLA misses one mid-session bar so observe reports a gap
    series["TSLA"] = [b for b in series["TSLA"] if b[0] != times[10]]
    write_bars(out / "bars.csv", series, 2)
    write_news_docs(out, rng, tickers, times, {})
    (out / "universe.txt").write_text("\n".join(tickers) + "\n")
    (out / "calendar.txt").write_text("session = MON-FRI 09:30-16:00 UTC-5\n")
    write_json(out / "run.json", {
        "market": "us",
        "universe_file": "universe.txt",
        "calendar_file": "calendar.txt",
        "bars_path": "bars.csv",
        "news_path": "news.jsonl",
        "docs_path": "docs.jsonl",
        "window": {"start": "2025-10-02T14:30:00Z", "end": "2025-10-07T20:30:00Z"},
        "frequency": "hourly",
        "initial_cash": 10000,
        "policy": {"kind": "momentum", "params": {"lookback": 3, "top_k": 2}},
        "run_id": "us_hourly",
    })


def ashare(root):
    out = root / "ashare"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(50)
    codes = ["600000", "600028", "600030", "600031", "600036", "600048", "600050", "600104", "600111",
             "600276", "600309", "600406", "600436", "600519", "600690", "600745", "600809", "600887",
             "600900", "600905", "601012", "601088", "601166", "601225", "601288", "601318", "601328",
             "601390", "601398", "601601", "601628", "601633", "601668", "601669", "601728", "601857",
             "601888", "601899", "601919", "601988", "603259", "603288", "603501", "603986", "688008",
             "688012", "688041", "688111", "688256", "688981"]
    symbols = [c + ".SH" for c in codes]
    holidays = [date(2025, 10, d) for d in (1, 2, 3, 6, 7, 8)]
    cst = timezone(timedelta(hours=8))
    times = []
    day = date(2025, 9, 26)
    while day <= date(2025, 10, 17):
        if day.weekday() < 5 and day not in holidays:
            times.append(datetime(day.year, day.month, day.day, 9, 30, tzinfo=cst))
        day += timedelta(days=1)
    series = {s: walk(rng, times, rng.uniform(4, 60), 0.015, 2, gapless=False) for s in symbols}
    series["000016.SH"] = walk(rng, times, 2950.0, 0.01, 2, gapless=False)
    write_bars(out / "bars.csv", series, 2)
    write_news_docs(out, rng, symbols, times, {})
    (out / "universe.txt").write_text("# SSE 50 constituents plus the index\n" + "\n".join(symbols + ["000016.SH"]) + "\n")
    cal = ["session = MON-FRI 09:30-11:30 UTC+8", "session = MON-FRI 13:00-15:00 UTC+8"]
    cal += [f"holiday = {d.isoformat()}" for d in holidays]
    (out / "calendar.txt").write_text("# national day closure\n" + "\n".join(cal) + "\n")
    write_json(out / "run.json", {
        "market": "ashare",
        "universe_file": "universe.txt",
        "calendar_file": "calendar.txt",
        "bars_path": "bars.csv",
        "news_path": "news.jsonl",
        "docs_path": "docs.jsonl",
        "window": {"start": "2025-09-29T00:00:00Z", "end": "2025-10-17T23:59:59Z"},
        "initial_cash": 1000000,
        "policy": {"kind": "equal_weight", "params": {"rebalance_every": 5}},
        "run_id": "ashare",
    })


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = ap.parse_args()
    root = Path(args.out)
    crypto30(root)
    us_hourly(root)
    ashare(root)


if __name__ == "__main__":
    main()
