# Run the inference service in-process and talk to it over HTTP, exactly the
# way the browser explorer does.

import json
import http.client
import tempfile
from pathlib import Path

from curvegan import networks as nn
from curvegan import service as sv
from curvegan import training as tr

# A fresh (untrained) checkpoint is enough to demonstrate the protocol.
with tempfile.TemporaryDirectory() as tmp:
    ck = Path(tmp) / "demo.npz"
    gen = nn.build_generator(nn.GeneratorConfig(latent_dim=2, noise_dim=10, degree=15), seed=0)
    disc = nn.build_discriminator(nn.DiscriminatorConfig(latent_dim=2), seed=1)
    tr.save_checkpoint(ck, gen, disc, step=0)

    svc = sv.InferenceService(host="127.0.0.1", port=0)
    svc.load_checkpoint(ck)
    svc.start()
    host, port = svc.address[:2]
    print(f"service listening on {host}:{port}")

    def call(method, path, body=None):
        conn = http.client.HTTPConnection(host, port, timeout=10)
        payload = json.dumps(body).encode() if body is not None else None
        conn.request(method, path, body=payload,
                     headers={"Content-Type": "application/json"} if payload else {})
        resp = conn.getresponse()
        data = json.loads(resp.read())
        conn.close()
        return resp.status, data

    print("GET /model ->", call("GET", "/model")[1])

    status, out = call("POST", "/generate",
                       {"latent": [0.3, 0.7], "noise-seed": 4})
    print(f"POST /generate -> {status}, {len(out['points'])} points, "
          f"{len(out['control-points'])} control points")

    # Out-of-range latent values are clamped, not rejected; the response says so.
    status, out = call("POST", "/generate", {"latent": [1.4, -0.2]})
    print(f"clamped request -> {status}, clamped={out['clamped']}")

    # Identical requests return byte-identical responses.
    a = call("POST", "/generate", {"latent": [0.5, 0.5], "noise-seed": 1})
    b = call("POST", "/generate", {"latent": [0.5, 0.5], "noise-seed": 1})
    print("deterministic responses:", a == b)

    svc.stop()
