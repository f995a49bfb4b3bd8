"""HTTP inference service for a trained generator checkpoint.

Endpoints:
  GET  /health    -> {"status": "ok"}
  GET  /model     -> latent/noise dims, degree, symmetry, constraint
  POST /generate  -> curve points for a latent code plus seeded or explicit noise

Responses are canonical JSON (sorted keys, fixed separators), so identical
requests against the same checkpoint yield byte-identical bodies.  The loaded
model lives in an immutable snapshot swapped atomically on (re)load; requests
never mutate state.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import networks as nn
from . import training as tr


def noise_from_seed(seed: int, dim: int) -> np.ndarray:
    """Deterministic expansion of a seed into a Gaussian noise vector; shared
    by the CLI and the service so both produce identical curves."""
    return np.random.default_rng(int(seed)).standard_normal(dim)


def format_curve_dat(curve: np.ndarray) -> str:
    """Canonical .dat serialization: 'x y' per line, 6 decimal places."""
    return "".join(f"{x:.6f} {y:.6f}\n" for x, y in np.asarray(curve))


@dataclass
class GenerateRequest:
    latent: np.ndarray
    noise: np.ndarray
    clamped: bool
    include_control_points: bool


class RequestError(Exception):
    def __init__(self, message: str, status: int = 400):
        self.status = status
        super().__init__(message)


def parse_generate_request(body: dict, latent_dim: int, noise_dim: int) -> GenerateRequest:
    if not isinstance(body, dict):
        raise RequestError("request body must be a JSON object")
    latent = body.get("latent")
    if not isinstance(latent, list) or not all(isinstance(v, (int, float)) for v in latent):
        raise RequestError("'latent' must be a list of numbers")
    if len(latent) != latent_dim:
        raise RequestError(f"latent code must have {latent_dim} dimensions, got {len(latent)}")
    raw = np.asarray(latent, dtype=np.float64)
    clamped_arr = np.clip(raw, 0.0, 1.0)
    clamped = bool(np.any(clamped_arr != raw))

    if "noise" in body and body["noise"] is not None:
        noise = body["noise"]
        if not isinstance(noise, list) or len(noise) != noise_dim:
            raise RequestError(f"explicit noise must have {noise_dim} dimensions")
        z = np.asarray(noise, dtype=np.float64)
    else:
        seed = body.get("noise-seed", 0)
        if not isinstance(seed, int):
            raise RequestError("'noise-seed' must be an integer")
        z = noise_from_seed(seed, noise_dim)
    include = bool(body.get("include-control-points", True))
    return GenerateRequest(latent=clamped_arr, noise=z, clamped=clamped,
                           include_control_points=include)


def canonical_json(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass
class ModelSnapshot:
    generator: nn.GeneratorModel
    step: int

    def describe(self) -> dict:
        cfg = self.generator.config
        return {
            "latent-dim": cfg.latent_dim,
            "noise-dim": cfg.noise_dim,
            "degree": cfg.degree,
            "symmetry": cfg.symmetry_mode,
            "symmetry-parts": cfg.symmetry_parts,
            "constraint": cfg.constraint,
            "total-points": cfg.total_points,
            "family": cfg.family,
            "step": self.step,
        }

    def generate(self, req: GenerateRequest) -> dict:
        out = nn.generator_forward(self.generator, req.latent, req.noise)
        payload = {
            "points": [[float(x), float(y)] for x, y in out.curve],
            "dat": format_curve_dat(out.curve),
            "clamped": req.clamped,
        }
        if req.include_control_points and out.params is not None:
            payload["control-points"] = [[float(x), float(y)] for x, y in out.params.P]
            payload["weights"] = [float(w) for w in out.params.w]
        return payload


class InferenceService:
    """Owns the HTTP server and the current model snapshot."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._snapshot: ModelSnapshot | None = None
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):  # quiet by default
                pass

            def _reply(self, status: int, payload):
                body = canonical_json(payload)
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.end_headers()
                self.wfile.write(body)

            def do_OPTIONS(self):
                self._reply(204, {})

            def do_GET(self):
                if self.path == "/health":
                    self._reply(200, {"status": "ok"})
                    return
                if self.path == "/model":
                    snap = service._snapshot
                    if snap is None:
                        self._reply(503, {"error": "no checkpoint loaded"})
                        return
                    self._reply(200, snap.describe())
                    return
                self._reply(404, {"error": f"unknown path {self.path}"})

            def do_POST(self):
                if self.path != "/generate":
                    self._reply(404, {"error": f"unknown path {self.path}"})
                    return
                snap = service._snapshot
                if snap is None:
                    self._reply(503, {"error": "no checkpoint loaded"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", 0))
                    body = json.loads(self.rfile.read(length).decode("utf-8") or "{}")
                except (ValueError, UnicodeDecodeError):
                    self._reply(400, {"error": "malformed JSON body"})
                    return
                cfg = snap.generator.config
                try:
                    req = parse_generate_request(body, cfg.latent_dim, cfg.noise_dim)
                except RequestError as exc:
                    self._reply(exc.status, {"error": str(exc)})
                    return
                self._reply(200, snap.generate(req))

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self):
        return self._server.server_address

    def load_checkpoint(self, path) -> None:
        ck = tr.load_checkpoint(path)
        self._snapshot = ModelSnapshot(generator=ck.generator, step=ck.step)

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(checkpoint, host: str = "127.0.0.1", port: int = 8321) -> None:
    """Load a checkpoint and serve until interrupted."""
    service = InferenceService(host=host, port=port)
    service.load_checkpoint(checkpoint)
    host_out, port_out = service.address[:2]
    print(f"serving on http://{host_out}:{port_out} (checkpoint step {service._snapshot.step})")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.stop()
