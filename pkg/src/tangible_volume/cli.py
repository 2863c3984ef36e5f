"""Command-line entry point: run/serve/record/replay sessions, score task
scripts, and print replay hashes."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import session as sess
from .scene import load_scene_file
from .session import Session, SessionConfig, state_hash


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="run a session (live, headless, record, or replay)")
    p.add_argument("--scene", help="scene document path (required unless --replay)")
    p.add_argument("--serve", metavar="ADDR:PORT", help="serve the viewer protocol")
    p.add_argument("--record", metavar="PATH", help="write the raw-input recording here")
    p.add_argument("--replay", metavar="PATH", help="re-run a recording")
    p.add_argument("--headless", action="store_true", help="no cameras, no serving")
    p.add_argument("--wide-fov", action="store_true", help="start in the wide FoV condition")
    p.add_argument("--theta-on", type=float, default=None)
    p.add_argument("--theta-off", type=float, default=None)
    p.add_argument("--dt", type=float, default=None, help="fixed timestep in seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=60.0, help="run length in seconds")
    return p


def _config_from_args(args) -> SessionConfig:
    cfg = SessionConfig(
        fov_condition="wide" if args.wide_fov else "narrow",
        headless=bool(args.headless or not args.serve),
        seed=args.seed,
    )
    if args.theta_on is not None:
        cfg = replace(cfg, theta_on=args.theta_on)
    if args.theta_off is not None:
        cfg = replace(cfg, theta_off=args.theta_off)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    return cfg


def _cmd_simulate(args) -> int:
    if args.record and args.replay:
        print("error: --record and --replay are mutually exclusive", file=sys.stderr)
        return 2

    if args.replay:
        scene, config, timeline, events, ticks = sess.load_recording(args.replay)
        config = replace(config, headless=not args.serve)
        if args.serve:
            return _serve_replay(args, scene, config, timeline, events, ticks)
        session = Session(scene, config, timeline=timeline)
        for ev in events:
            session.submit(ev)
        last_hash = None
        for _ in range(ticks):
            last_hash = state_hash(session.tick())
        print(f"replayed {ticks} ticks, final hash {last_hash:016x}")
        return 0

    if not args.scene:
        print("error: --scene is required unless --replay is given", file=sys.stderr)
        return 2
    scene = load_scene_file(args.scene)
    config = _config_from_args(args)

    if args.serve:
        host, port = _parse_endpoint(args.serve)
        from .service import SessionService

        session = Session(scene, replace(config, headless=False))
        service = SessionService(session, host=host, port=port, pace=True,
                                 duration=args.duration)
        print(f"serving on ws://{host}:{port} for {args.duration}s")
        service.run()
        if args.record:
            sess.write_recording(
                args.record, scene, config, session._recorded, session.tick_index
            )
            print(f"recorded {len(session._recorded)} input events to {args.record}")
        print(f"final hash {service.hashes[-1]:016x}" if service.hashes else "no ticks ran")
        return 0

    session = Session(scene, config)
    ticks = int(round(args.duration / config.dt))
    last_hash = None
    for _ in range(ticks):
        last_hash = state_hash(session.tick())
    if args.record:
        sess.write_recording(args.record, scene, config, session._recorded, ticks)
    print(f"ran {ticks} ticks, final hash {last_hash:016x}")
    return 0


def _serve_replay(args, scene, config, timeline, events, ticks) -> int:
    from .service import SessionService

    host, port = _parse_endpoint(args.serve)
    session = Session(scene, replace(config, headless=False), timeline=timeline)
    for ev in events:
        session.submit(ev)
    service = SessionService(session, host=host, port=port, pace=True, max_ticks=ticks)
    print(f"serving replay on ws://{host}:{port}")
    service.run(linger=2.0)
    print(f"final hash {service.hashes[-1]:016x}" if service.hashes else "no ticks ran")
    return 0


def _parse_endpoint(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def _cmd_score(args) -> int:
    from .report import write_report
    from .study import TaskScript, run_scenario

    script = TaskScript.load(args.script)
    metrics = run_scenario(script)
    print(json.dumps(metrics.to_dict(), indent=2))
    if args.out_dir:
        paths = write_report(metrics, args.out_dir, name=args.name)
        for kind, path in paths.items():
            print(f"wrote {kind}: {path}", file=sys.stderr)
    return 0


def _cmd_hash(args) -> int:
    hashes = sess.replay(args.replay)
    if not hashes:
        print("recording contains no ticks", file=sys.stderr)
        return 1
    print(f"{hashes[-1]:016x}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tanvol",
        description="Tangible-volume display simulator: sessions, scoring, replay hashing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_simulate(sub)

    p_score = sub.add_parser("score", help="run a task script and print its metrics")
    p_score.add_argument("--script", required=True, help="task script path")
    p_score.add_argument("--out-dir", help="write CSV/JSON/figure report here")
    p_score.add_argument("--name", default="run", help="report artifact basename")

    p_hash = sub.add_parser("hash", help="print the final state hash of a recording")
    p_hash.add_argument("--replay", required=True, help="recording path")

    args = parser.parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "score":
        return _cmd_score(args)
    return _cmd_hash(args)


if __name__ == "__main__":
    raise SystemExit(main())
