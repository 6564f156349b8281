"""Measure serve throughput (classifications/second) for a bundle.

    python scripts/bench_serve.py --bundle mlp.usft --urls urls.csv [--n 50000 --connections 4]

Without --bundle, trains a default-architecture MLP on the fixture corpus first.
"""

import argparse
import socket
import sys
import threading
import time
from pathlib import Path

import numpy as np

from urlsift.config import RunConfig, TrainConfig
from urlsift.dataset import load_csv
from urlsift.pipeline import train_bundle
from urlsift.serve import BackgroundServer
from urlsift.store import load_bundle

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture_urls.csv"


def client(port, payload, n, out, i):
    with socket.create_connection(("127.0.0.1", port)) as s:
        s.sendall(payload)
        s.shutdown(socket.SHUT_WR)
        got = b"".join(iter(lambda: s.recv(1 << 16), b""))
    out[i] = got.count(b"\n") == n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bundle")
    ap.add_argument("--urls", default=str(FIXTURE), help="CSV with a url column")
    ap.add_argument("--n", type=int, default=50000, help="requests per connection")
    ap.add_argument("--connections", type=int, default=4)
    args = ap.parse_args()

    dataset = load_csv(args.urls)
    if args.bundle:
        bundle = load_bundle(args.bundle)
    else:
        cfg = RunConfig(model="mlp", mlp=TrainConfig(epochs=3))
        bundle = train_bundle(dataset, cfg).bundle
    rng = np.random.default_rng(0)
    urls = [dataset.urls[i] for i in rng.integers(0, len(dataset), args.n)]
    payload = ("\n".join(urls) + "\n").encode()

    ok = [False] * args.connections
    with BackgroundServer(bundle) as srv:
        t0 = time.perf_counter()
        threads = [threading.Thread(target=client, args=(srv.port, payload, args.n, ok, i))
                   for i in range(args.connections)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        elapsed = time.perf_counter() - t0
    total = args.n * args.connections
    print(f"{bundle.kind} bundle, V={bundle.featurizer.dim}: {total} classifications in {elapsed:.2f}s "
          f"= {total / elapsed:,.0f}/s ({args.connections} connections, all complete: {all(ok)})")
    return 0 if all(ok) else 1


if __name__ == "__main__":
    sys.exit(main())
