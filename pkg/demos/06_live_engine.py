#!/usr/bin/env python3
"""Driving the live engine over its two wire protocols.

The engine speaks OSC over UDP (the dataflow-environment side: Pure
Data, Max, SuperCollider) and JSON over WebSocket (the browser side).
This script starts a server in-process, steers it through raw OSC
datagrams exactly as a Pure Data patch would, and watches the pattern
broadcasts come back on both transports.

Run:  python3 demos/06_live_engine.py
"""

import asyncio
import json
import socket

from latentseq.engine import Engine, EngineServer
from latentseq.nn import init_model, split
from latentseq.osc import OscMessage, decode_message, encode_message


def show(steps) -> str:
    return "".join("X" if v else "." for v in steps)


async def main() -> None:
    decoders = {f"model{i}": split(init_model("model1", seed=i))[1] for i in range(3)}
    engine = Engine(decoders)
    server = EngineServer(engine, osc_in_port=0, osc_out_port=0, ws_port=0)
    await server.start()

    # a UDP socket standing in for Pure Data
    pd_out = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    pd_in = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    pd_in.bind(("127.0.0.1", 0))
    pd_in.setblocking(False)
    server.osc_out_port = pd_in.getsockname()[1]

    from websockets.asyncio.client import connect
    loop = asyncio.get_running_loop()

    async with connect(f"ws://127.0.0.1:{server.ws_port}") as browser:
        snapshot = json.loads(await browser.recv())
        print(f"browser got snapshot: models {snapshot['models']}, "
              f"threshold {snapshot['threshold']}\n")

        def send_osc(address, *args):
            pd_out.sendto(encode_message(OscMessage(address, args)),
                          ("127.0.0.1", server.osc_in_port))

        async def last_ws_pattern():
            steps = None
            while True:
                try:
                    raw = json.loads(await asyncio.wait_for(browser.recv(), 0.3))
                except asyncio.TimeoutError:
                    return steps
                if raw["type"] == "pattern" and raw["active"]:
                    steps = raw["steps"]

        async def last_osc_pattern():
            args = None
            while True:
                try:
                    datagram = await asyncio.wait_for(loop.sock_recv(pd_in, 65536), 0.3)
                except asyncio.TimeoutError:
                    return args
                msg = decode_message(datagram)
                if msg.address == "/seq/pattern":
                    args = msg.args

        print("PD-side sends /seq/latent sweeps; both transports hear the result:")
        for x in (0.0, 1.0, 2.5, 5.0):
            send_osc("/seq/latent", float(x), 1.0)
            ws_steps = await last_ws_pattern()
            osc_steps = await last_osc_pattern()
            match = tuple(ws_steps) == osc_steps
            print(f"  x={x:4.1f}  ws {show(ws_steps)}  osc match={match}")

        print("\nswitching the active model over the websocket instead:")
        await browser.send(json.dumps({"type": "model", "id": "model2"}))
        await browser.send(json.dumps({"type": "latent", "x": 2.5, "y": 1.0}))
        while True:
            raw = json.loads(await asyncio.wait_for(browser.recv(), 5))
            if raw["type"] == "pattern" and raw["active"]:
                print(f"  model2  {show(raw['steps'])}")
                break

    pd_out.close()
    pd_in.close()
    await server.stop()
    print("\nserver closed, all notes off.")


if __name__ == "__main__":
    asyncio.run(main())
