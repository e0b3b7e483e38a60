"""Command-line entry point wiring the pipeline end to end.

    latentseq ingest --dir loops/ --bpm 120 --out corpus.jsonl
    latentseq train  --dataset corpus.jsonl --arch model1 --out model.json
    latentseq atlas  --model model.json --dataset corpus.jsonl --out atlas.json
    latentseq render --model model.json --x 1.0 --y 2.0 --out take.mid
    latentseq play   --model model.json --x 1.0 --y 2.0 --steps 32
    latentseq serve  --config live.conf

Exit codes: 0 success, 1 usage, 2 input/format, 3 runtime.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import signal
import sys
import threading
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import build_atlas, compute_range, export_atlas, load_atlas
from .audio import Dataset, ingest_corpus
from .config import Config, load_config
from .engine import Engine, EngineServer
from .errors import CorpusError, FormatError, InputError
from .generate import GenerationRequest, generate
from .nn import ARCHITECTURES, init_model, load_model, save_model, split, train
from .patterns import TimeBase
from .sequencer import (
    CaptureSink,
    ConsoleSink,
    LiveRunner,
    RawPortSink,
    SequencerState,
    StepSequencer,
    render_offline,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latentseq",
                     description="Trainable latent-space rhythm sequencer.")
    parser.add_argument("--version", action="version", version=f"latentseq {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="encode a folder of WAV loops into a dataset")
    p.add_argument("--dir", required=True, help="directory of PCM WAV loops")
    p.add_argument("--bpm", type=float, default=120.0)
    p.add_argument("--out", required=True, help="output dataset (JSON lines)")

    p = sub.add_parser("train", help="train an autoencoder on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--arch", required=True, choices=sorted(ARCHITECTURES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=2e-2)
    p.add_argument("--out", required=True, help="output model file (JSON)")
    p.add_argument("--history", help="optional loss history CSV")

    p = sub.add_parser("atlas", help="map a dataset through a trained encoder")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="output atlas (JSON)")

    p = sub.add_parser("render", help="generate a pattern and write a MIDI file")
    p.add_argument("--model", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=32)
    p.add_argument("--bpm", type=float, default=120.0)
    p.add_argument("--pitch", type=int, default=60)
    p.add_argument("--out", required=True, help="output .mid file")

    p = sub.add_parser("play", help="play a generated pattern on the live clock")
    p.add_argument("--model", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=32, help="steps to play before exit")
    p.add_argument("--bpm", type=float, default=120.0)
    p.add_argument("--pitch", type=int, default=60)
    p.add_argument("--midi-port", default="", help="rawmidi device/FIFO; default: console")

    p = sub.add_parser("serve", help="run the OSC + WebSocket engine")
    p.add_argument("--config", required=True)
    # flag overrides win over the config file; port -1 disables a transport
    p.add_argument("--osc-in-port", type=int)
    p.add_argument("--osc-out-port", type=int)
    p.add_argument("--osc-out-host")
    p.add_argument("--ws-port", type=int)
    p.add_argument("--midi-port")
    p.add_argument("--bpm", type=float)

    return parser


def cmd_ingest(args) -> int:
    tb = TimeBase(bpm=args.bpm)
    try:
        dataset = ingest_corpus(args.dir, tb)
    except CorpusError:
        print("no loops ingested", file=sys.stderr)
        return EXIT_INPUT
    dataset.save_jsonl(args.out)
    print(f"ingested {len(dataset)} loops -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = Dataset.load_jsonl(args.dataset)
    model = init_model(args.arch, seed=args.seed)
    trained, history = train(model, dataset, epochs=args.epochs,
                             batch_size=args.batch_size, lr=args.lr, seed=args.seed)
    save_model(trained, args.out)
    if args.history:
        history.save_csv(args.history)
    print(f"trained {args.arch} for {args.epochs} epochs, "
          f"final BCE {history.final_bce():.4f} -> {args.out}")
    return EXIT_OK


def cmd_atlas(args) -> int:
    model = load_model(args.model)
    dataset = Dataset.load_jsonl(args.dataset)
    encoder, _ = split(model)
    points = build_atlas(encoder, dataset)
    lrange = compute_range(points)
    # serve identifies models by file stem, so the atlas must match it
    export_atlas(points, lrange, args.out, model_id=Path(args.model).stem)
    print(f"atlas of {len(points)} points, suggested UI range "
          f"[{lrange.suggested_ui_min:g}, {lrange.suggested_ui_max:g}] -> {args.out}")
    return EXIT_OK


def _generated_state(args):
    model = load_model(args.model)
    _, decoder = split(model)
    result = generate(decoder, GenerationRequest(args.x, args.y, threshold=args.threshold))
    state = SequencerState(bpm=args.bpm)
    state.pattern = result.pattern.copy()
    state.velocities = result.velocities.copy()
    state.pitch_lane = np.full(8, args.pitch, dtype=int)
    return state


def cmd_render(args) -> int:
    if args.steps < 1:
        print("--steps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    state = _generated_state(args)
    data = render_offline(state, args.steps, TimeBase(bpm=args.bpm))
    Path(args.out).write_bytes(data)
    print(f"rendered {args.steps} steps ({int(state.pattern.sum())} active slots) -> {args.out}")
    return EXIT_OK


def cmd_play(args) -> int:
    if args.steps < 1:
        print("--steps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    state = _generated_state(args)
    sink = RawPortSink(args.midi_port) if args.midi_port else ConsoleSink()
    seq = StepSequencer(sink=sink, state=state)
    played = threading.Event()
    count = [0]

    def on_step(step):
        count[0] += 1
        if count[0] >= args.steps:
            played.set()

    runner = LiveRunner(seq, on_step=on_step)
    runner.start()
    try:
        played.wait()
    finally:
        runner.stop()
        if isinstance(sink, RawPortSink):
            sink.close()
    return EXIT_OK


def _load_engine(config: Config) -> Engine:
    if not config.models:
        raise InputError("config: serve needs at least one model path")
    decoders = {}
    for path in config.models:
        model = load_model(path)
        model_id = Path(path).stem
        if model_id in decoders:
            raise InputError(f"config: duplicate model id {model_id!r} "
                             f"(model files must have distinct names)")
        decoders[model_id] = split(model)[1]
    atlases = {}
    for path in config.atlases:
        atlas_model_id, points, lrange = load_atlas(path)
        key = atlas_model_id or Path(path).stem
        if key not in decoders:
            logger.warning("atlas %s names model %r, which is not loaded", path, key)
        atlases[key] = (points, lrange)
    sink = RawPortSink(config.midi_port) if config.midi_port else CaptureSink()
    state = SequencerState(bpm=config.bpm)
    return Engine(decoders, sequencer=StepSequencer(sink=sink, state=state),
                  atlases=atlases)


def _serve_static(directory: str, port: int):
    import functools
    from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer

    handler = functools.partial(SimpleHTTPRequestHandler, directory=directory)
    httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    logger.info("serving UI from %s at http://127.0.0.1:%d", directory, port)
    return httpd


def cmd_serve(args) -> int:
    config = load_config(args.config)
    for flag in ("osc_in_port", "osc_out_port", "osc_out_host", "ws_port",
                 "midi_port", "bpm"):
        value = getattr(args, flag)
        if value is not None:
            setattr(config, flag, value)
    config.validate()
    engine = _load_engine(config)  # models load before any port binds
    httpd = _serve_static(config.ui_dir, config.http_port) if config.ui_dir else None

    async def run():
        server = EngineServer(
            engine,
            osc_in_port=config.osc_in_port, osc_out_port=config.osc_out_port,
            osc_out_host=config.osc_out_host, ws_port=config.ws_port,
        )
        stop_event = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop_event.set)
        await server.start()
        print(f"listening: osc-in udp/{server.osc_in_port} "
              f"osc-out {server.osc_out_host}:{server.osc_out_port} "
              f"websocket tcp/{server.ws_port}", flush=True)
        await stop_event.wait()
        await server.stop()

    try:
        asyncio.run(run())
    finally:
        if httpd is not None:
            httpd.shutdown()
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "atlas": cmd_atlas,
    "render": cmd_render,
    "play": cmd_play,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (InputError, FormatError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
