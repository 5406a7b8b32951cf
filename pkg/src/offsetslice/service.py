"""Slice-on-demand HTTP service feeding the browser viewer.

GET /info                         mesh statistics and defaults
GET /slice?z=&offset=[&chord=]    one freshly computed slice as JSON
GET /ui/*                         static viewer assets

Every /slice request recomputes from scratch (no caching) so the response
time reflects the true cost of previewing a single slice. Requests may be
served concurrently; the loaded mesh is immutable shared state.
"""
from __future__ import annotations

import json
import mimetypes
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .cli import _fmt9, contour_record
from .engine import EngineConfig, OffsetSpec, slice_single
from .mesh import IndexedMesh, mesh_bounds


class SliceService:
    def __init__(
        self,
        mesh: IndexedMesh,
        cfg: EngineConfig = EngineConfig(),
        ui_dir: Path | None = None,
    ):
        if mesh.n_triangles == 0:
            raise ValueError("refusing to serve an empty mesh")
        self.mesh = mesh
        self.cfg = cfg
        self.ui_dir = Path(ui_dir).resolve() if ui_dir is not None else None
        lo, hi = mesh_bounds(mesh)
        self.bbox = ([float(v) for v in lo], [float(v) for v in hi])

    # -- payloads ----------------------------------------------------------

    def info_payload(self) -> bytes:
        doc = {
            "triangles": self.mesh.n_triangles,
            "vertices": self.mesh.n_vertices,
            "edges": self.mesh.n_edges,
            "bbox": list(self.bbox),
            "defaults": {"chord": self.cfg.chord_eps, "offset": 0.0},
        }
        return (json.dumps(doc) + "\n").encode("ascii")

    def slice_payload(self, z: float, offset: float, chord: float | None) -> bytes:
        cfg = self.cfg
        if chord is not None:
            if chord <= 0:
                raise ValueError("chord must be positive")
            cfg = EngineConfig(
                workers=cfg.workers,
                chord_eps=chord,
                strategy=cfg.strategy,
                batch_k=cfg.batch_k,
                leaf_size=cfg.leaf_size,
                convex_fast=cfg.convex_fast,
            )
        spec = OffsetSpec.erode(-offset) if offset < 0 else OffsetSpec.dilate(offset)
        t0 = time.perf_counter()
        res = slice_single(self.mesh, spec, z, cfg)
        ms = (time.perf_counter() - t0) * 1e3
        if res.error is not None:
            raise RuntimeError(res.error)
        records = ",".join(contour_record(c, res.z) for c in res.contours)
        body = (
            f'{{"z":{_fmt9(z)},"offset":{_fmt9(offset)},"ms":{ms:.3f},'
            f'"contours":[{records}]}}\n'
        )
        return body.encode("ascii")


def _make_handler(service: SliceService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # keep test output quiet
            pass

        def _send(self, code: int, body: bytes, ctype: str = "application/json"):
            self.send_response(code)
            self.send_header("Content-Type", f"{ctype}; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _error(self, code: int, message: str):
            self._send(code, (json.dumps({"error": message}) + "\n").encode())

        def do_GET(self):
            url = urlparse(self.path)
            if url.path == "/info":
                self._send(200, service.info_payload())
            elif url.path == "/slice":
                self._slice(url)
            elif url.path == "/ui" or url.path.startswith("/ui/"):
                self._static(url.path[len("/ui"):] or "/")
            else:
                self._error(404, f"no route for {url.path}")

        def _slice(self, url):
            query = parse_qs(url.query)

            def param(name, required=False):
                if name not in query:
                    if required:
                        raise ValueError(f"missing parameter {name!r}")
                    return None
                try:
                    return float(query[name][0])
                except ValueError:
                    raise ValueError(f"malformed parameter {name!r}") from None

            try:
                z = param("z", required=True)
                offset = param("offset") or 0.0
                chord = param("chord")
            except ValueError as exc:
                self._error(400, str(exc))
                return
            try:
                self._send(200, service.slice_payload(z, offset, chord))
            except ValueError as exc:
                self._error(400, str(exc))
            except Exception as exc:  # slicing failure: surface the diagnostic
                self._error(500, f"slicing failed: {exc}")

        def _static(self, rel: str):
            if service.ui_dir is None:
                self._error(404, "no viewer assets configured")
                return
            rel = rel.lstrip("/") or "index.html"
            target = (service.ui_dir / rel).resolve()
            if not str(target).startswith(str(service.ui_dir)) or not target.is_file():
                self._error(404, "not found")
                return
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self._send(200, target.read_bytes(), ctype=ctype)

    return Handler


def make_server(
    mesh: IndexedMesh,
    cfg: EngineConfig = EngineConfig(),
    host: str = "127.0.0.1",
    port: int = 8077,
    ui_dir: Path | None = None,
) -> ThreadingHTTPServer:
    service = SliceService(mesh, cfg, ui_dir)
    return ThreadingHTTPServer((host, port), _make_handler(service))


def serve(mesh, cfg=EngineConfig(), host="127.0.0.1", port=8077, ui_dir=None):
    server = make_server(mesh, cfg, host, port, ui_dir)
    print(f"serving on http://{host}:{server.server_address[1]}/  (Ctrl-C stops)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
