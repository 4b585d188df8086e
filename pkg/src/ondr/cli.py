"""Command line entry point: ``ondr <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (bad trace, unknown EPC,
failed navigation) and 2 on usage errors (bad flags, missing or invalid
input files).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .antenna import format_summary, parse_touchstone, summarize
from .errors import InvalidScenario, OndrError
from .harness import build_panel, emit_report, load_scenario, run_scenario
from .model import PanelLayout, parse_epc
from .store import Store, load_store, resolve_store_path, save_store


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ondr", description="RFID fiber patch-panel simulator and store tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sim", help="run a Monte-Carlo scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--out", help="write per-trial CSV here")

    a = sub.add_parser("antenna", help="summarize a one-port .s1p trace")
    a.add_argument("--s1p", required=True)
    a.add_argument("--threshold", type=float, default=-10.0)

    sv = sub.add_parser("serve", help="serve the store over newline-delimited JSON/TCP")
    sv.add_argument("--store")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=7878)

    v = sub.add_parser("verify", help="verify every patched pair in a store")
    v.add_argument("--store")
    v.add_argument("--baseline", action="store_true", help="scan both tags of each pair instead of using SPI")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--distance", type=float, default=30.0, help="reader to panel distance, cm")
    v.add_argument("--csv", action="store_true", help="print per-pair CSV")

    n = sub.add_parser("navigate", help="light the LED of the port a fiber belongs in")
    n.add_argument("--store")
    n.add_argument("--fiber", required=True)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--distance", type=float, default=30.0)
    n.add_argument("--scan-distance", type=float, default=10.0)

    d = sub.add_parser("demo-store", help="write a correctly patched demo panel to a store")
    d.add_argument("--store")
    d.add_argument("--pairs", type=int, default=30)
    d.add_argument("--width", type=float, default=4.2)
    d.add_argument("--height", type=float, default=2.8)
    d.add_argument("--cols", type=int, default=10)
    d.add_argument("--rows", type=int, default=6)
    return p


def _sim(args, out):
    cfg = load_scenario(args.scenario)
    changes = {k: getattr(args, k) for k in ("seed", "trials") if getattr(args, k) is not None}
    if changes:
        cfg = cfg.replace(**changes)
    report = run_scenario(cfg)
    if args.out:
        Path(args.out).write_text(emit_report(report, "csv"), encoding="utf-8")
    out.write(emit_report(report))
    return 0


def _antenna(args, out):
    text = Path(args.s1p).read_text(encoding="utf-8")
    out.write(format_summary(summarize(parse_touchstone(text), args.threshold)))
    return 0


def _serve(args, out):
    from .service import serve
    serve(Store.open(resolve_store_path(args.store)), args.host, args.port)
    return 0


def _verify(args, out):
    from .link import LinkParams
    from .inventory import ProtocolConfig
    from .pairing import report_to_csv, verify_all, verify_all_baseline
    from .service import population

    store = load_store(resolve_store_path(args.store))
    pop = population(store, args.distance)
    fn = verify_all_baseline if args.baseline else verify_all
    report = fn(store.db, pop, LinkParams(), ProtocolConfig(rng_seed=args.seed))
    if args.csv:
        out.write(report_to_csv(report))
    s = report.summary()
    out.write(f"mode: {'baseline' if args.baseline else 'spi'}\n")
    for k, v in s.items():
        out.write(f"{k}: {v}\n")
    for o in report.problems():
        out.write(f"problem: fiber {o.fiber} {o.verdict.value} expected={o.expected_connector} "
                  f"observed={o.observed_connector}\n")
    return 0


def _navigate(args, out):
    from .service import handle_request

    store = load_store(resolve_store_path(args.store))
    parse_epc(args.fiber)
    resp = handle_request(store, {"verb": "NAVIGATE", "fiber": args.fiber, "seed": args.seed,
                                  "distance": args.distance, "scan_distance": args.scan_distance})
    if resp["status"] != "OK":
        print(f"ondr: navigate failed: {resp['code']}: {resp.get('message', '')}", file=sys.stderr)
        return 1
    out.write(f"LED on: connector {resp['connector']} at x={resp['x']:.3f} in, y={resp['y']:.3f} in\n")
    return 0


def _demo_store(args, out):
    path = resolve_store_path(args.store)
    layout = PanelLayout.grid(args.width, args.height, args.cols, args.rows, count=2 * args.pairs)
    panel = build_panel(args.pairs, layout, 30.0)
    store = Store(path, registry=panel.registry, db=panel.db)
    if path.exists():
        store.generation = load_store(path).generation
    gen = save_store(store)
    out.write(f"wrote {args.pairs} pairs to {path} (generation {gen})\n")
    return 0


_COMMANDS = {"sim": _sim, "antenna": _antenna, "serve": _serve, "verify": _verify,
             "navigate": _navigate, "demo-store": _demo_store}


def cli_main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args, out)
    except FileNotFoundError as err:
        print(f"ondr: file not found: {err.filename or err}", file=sys.stderr)
        return 2
    except InvalidScenario as err:
        print("ondr: invalid scenario:", file=sys.stderr)
        for problem in err.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    except OndrError as err:
        print(f"ondr: {err.code}: {err}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
