"""Command-line front end: offset slicing to SVG / JSONL / PNG, or serving.

All emitted numbers use fixed formatting so re-running an identical
configuration reproduces byte-identical slice files.
"""
from __future__ import annotations

import argparse
import json
import math
import struct
import sys
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contour import Bitmap, BitmapSpec, ContourSet, rasterize_winding
from .engine import (
    EngineConfig,
    OffsetSpec,
    SlabConfig,
    SlicePlan,
    SliceResult,
    slice_offset,
)
from .mesh import IndexedMesh, MeshError, load_stl, mesh_bounds

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BAD_STL = 2
EXIT_CHAIN = 3


@dataclass
class RunConfig:
    input_path: Path
    offset: float = 0.0
    mode: str | None = None            # dilate | erode; None derives from sign
    radius_file: Path | None = None
    thickness: float | None = None
    heights_file: Path | None = None
    chord: float = 0.01
    threads: int = 1
    slab: int | None = None
    out_dir: Path = Path("slices")
    formats: tuple = ("jsonl",)
    pitch: float = 0.1
    strategy: str = "direct"
    serve: bool = False
    port: int = 8077
    ui_dir: Path | None = None


def _fmt9(v: float) -> str:
    if v == 0.0:
        v = 0.0
    return f"{v:.9g}"


def _fmt6(v: float) -> str:
    if v == 0.0:
        v = 0.0
    return f"{v:.6f}"


def contour_record(c, z: float) -> str:
    """One JSONL record; shared with the service for byte-equal payloads."""
    pts = ",".join(f"[{_fmt9(x)},{_fmt9(y)}]" for x, y in c.points)
    return (
        f'{{"z":{_fmt9(z)},"source":"final","points":[{pts}],'
        f'"area":{_fmt9(c.area)}}}'
    )


def write_jsonl(result: SliceResult) -> bytes:
    lines = [contour_record(c, result.z) for c in result.contours]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("ascii")


def write_svg(result: SliceResult) -> bytes:
    contours = result.contours
    if contours:
        allpts = np.vstack([c.points for c in contours])
        lo = allpts.min(axis=0) - 1.0
        hi = allpts.max(axis=0) + 1.0
    else:
        lo, hi = np.zeros(2), np.ones(2)
    w, h = hi - lo
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt6(lo[0])} '
        f'{_fmt6(lo[1])} {_fmt6(w)} {_fmt6(h)}" width="{_fmt6(w)}mm" '
        f'height="{_fmt6(h)}mm">',
    ]
    # paint larger rings first so nested holes stay visible
    order = sorted(
        range(len(contours)), key=lambda i: (-abs(contours[i].area), i)
    )
    for i in order:
        c = contours[i]
        coords = " L ".join(f"{_fmt6(x)} {_fmt6(y)}" for x, y in c.points)
        fill = "#9ecae1" if c.area > 0 else "#ffffff"
        out.append(
            f'<path fill-rule="nonzero" fill="{fill}" stroke="#333333" '
            f'stroke-width="0.05" d="M {coords} Z"/>'
        )
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("ascii")


def write_png(bitmap: Bitmap) -> bytes:
    """Minimal deterministic 1-bit grayscale PNG encoder."""
    pixels = bitmap.pixels[::-1]  # image rows go top-down, y axis goes up
    height, width = pixels.shape
    raw = bytearray()
    for row in pixels:
        raw.append(0)  # filter: none
        raw.extend(np.packbits(row).tobytes())
    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload))
        )
    ihdr = struct.pack(">IIBBBBB", width, height, 1, 0, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(bytes(raw), 9))
        + chunk(b"IEND", b"")
    )


def _load_radii(path: Path, mesh: IndexedMesh) -> np.ndarray:
    values = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line:
            values.append(float(line))
    if len(values) != mesh.n_vertices:
        raise ValueError(
            f"radius file has {len(values)} values, mesh has "
            f"{mesh.n_vertices} welded vertices"
        )
    return np.array(values, dtype=np.float64)


def _load_heights(path: Path) -> SlicePlan:
    values = [float(s) for s in path.read_text().split()]
    return SlicePlan.explicit(values)


def _build_plan(cfg: RunConfig, mesh: IndexedMesh, spec: OffsetSpec) -> SlicePlan:
    if cfg.heights_file is not None:
        return _load_heights(cfg.heights_file)
    lo, hi = mesh_bounds(mesh)
    reach = spec.max_reach() if spec.mode in ("dilate", "variable") else 0.0
    z_lo = float(lo[2]) - reach
    z_hi = float(hi[2]) + reach
    count = int(math.floor((z_hi - z_lo) / cfg.thickness + 1e-9)) + 1
    return SlicePlan.uniform(z_lo, cfg.thickness, count)


def _build_spec(cfg: RunConfig, mesh: IndexedMesh) -> OffsetSpec:
    if cfg.radius_file is not None:
        if cfg.offset:
            raise ValueError("--offset and --radius-file are mutually exclusive")
        return OffsetSpec.variable(_load_radii(cfg.radius_file, mesh))
    mode = cfg.mode
    if mode is None:
        # positive offset dilates, negative erodes (Fig.-caption convention
        # in some sources is reversed; --mode overrides explicitly)
        mode = "erode" if cfg.offset < 0 else "dilate"
    return OffsetSpec(mode, r=abs(cfg.offset))


def _raster_spec(mesh: IndexedMesh, spec: OffsetSpec, pitch: float) -> BitmapSpec:
    lo, hi = mesh_bounds(mesh)
    reach = spec.max_reach() + 2 * pitch
    x0, y0 = float(lo[0]) - reach, float(lo[1]) - reach
    x1, y1 = float(hi[0]) + reach, float(hi[1]) + reach
    width = max(1, int(math.ceil((x1 - x0) / pitch)))
    height = max(1, int(math.ceil((y1 - y0) / pitch)))
    return BitmapSpec(width, height, x0, y0, pitch)


def run(cfg: RunConfig) -> int:
    """Execute a slicing run; returns the process exit code."""
    try:
        data = cfg.input_path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read {cfg.input_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        mesh = load_stl(data)
    except MeshError as exc:
        print(f"error: bad STL: {exc}", file=sys.stderr)
        return EXIT_BAD_STL
    t_load = time.perf_counter() - t0

    try:
        spec = _build_spec(cfg, mesh)
        spec.validate(mesh)
        engine_cfg = EngineConfig(
            workers=cfg.threads, chord_eps=cfg.chord, strategy=cfg.strategy
        )
        if cfg.serve:
            from .service import serve

            serve(mesh, engine_cfg, host="127.0.0.1", port=cfg.port, ui_dir=cfg.ui_dir)
            return EXIT_OK
        plan = _build_plan(cfg, mesh, spec)
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    results = slice_offset(mesh, spec, plan, engine_cfg, SlabConfig(cfg.slab))
    t_slice = time.perf_counter() - t0

    t0 = time.perf_counter()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    raster = _raster_spec(mesh, spec, cfg.pitch) if "png" in cfg.formats else None
    failures = []
    for j, res in enumerate(results):
        if res.error is not None:
            failures.append((j, res.error))
        if "jsonl" in cfg.formats:
            (cfg.out_dir / f"slice_{j:05d}.jsonl").write_bytes(write_jsonl(res))
        if "svg" in cfg.formats:
            (cfg.out_dir / f"slice_{j:05d}.svg").write_bytes(write_svg(res))
        if "png" in cfg.formats:
            res.bitmap = rasterize_winding(ContourSet(res.z, res.contours), raster)
            (cfg.out_dir / f"slice_{j:05d}.png").write_bytes(write_png(res.bitmap))
    t_write = time.perf_counter() - t0

    lo, hi = mesh_bounds(mesh)
    manifest = {
        "input": str(cfg.input_path),
        "mode": spec.mode,
        "offset": spec.r if spec.mode != "variable" else None,
        "chord": cfg.chord,
        "threads": cfg.threads,
        "slab": cfg.slab,
        "strategy": cfg.strategy,
        "formats": list(cfg.formats),
        "heights": [float(h) for h in plan.heights],
        "mesh": {
            "triangles": mesh.n_triangles,
            "vertices": mesh.n_vertices,
            "edges": mesh.n_edges,
            "bbox": [[float(v) for v in lo], [float(v) for v in hi]],
        },
        "slices": len(results),
        "failed_slices": [{"slice": j, "message": m} for j, m in failures],
        "timings_ms": {
            "load": round(t_load * 1e3, 3),
            "slice": round(t_slice * 1e3, 3),
            "write": round(t_write * 1e3, 3),
        },
    }
    (cfg.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    if failures:
        for j, msg in failures:
            print(f"slice {j}: {msg}", file=sys.stderr)
        print(
            f"error: {len(failures)} slice(s) failed to chain; "
            f"partial outputs kept in {cfg.out_dir}",
            file=sys.stderr,
        )
        return EXIT_CHAIN
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="offsetslice",
        description="Slice the dilation or erosion of an STL volume directly.",
    )
    p.add_argument("--input", required=True, type=Path, help="input STL file")
    p.add_argument(
        "--offset",
        type=float,
        default=0.0,
        help="offset radius in mm; positive dilates, negative erodes, 0 slices as-is",
    )
    p.add_argument(
        "--mode",
        choices=("dilate", "erode"),
        default=None,
        help="override the sign convention of --offset",
    )
    p.add_argument(
        "--radius-file",
        type=Path,
        default=None,
        help="variable offset: one radius per welded vertex, table order",
    )
    g = p.add_mutually_exclusive_group()
    g.add_argument("--thickness", type=float, default=None, help="uniform layer height, mm")
    g.add_argument(
        "--heights", type=Path, default=None, help="file of ascending slice heights"
    )
    p.add_argument("--chord", type=float, default=0.01, help="chord tolerance, mm")
    p.add_argument("--threads", type=int, default=1, help="worker count")
    p.add_argument("--slab", type=int, default=None, help="slices per slab pass")
    p.add_argument(
        "--strategy",
        choices=("direct", "progressive", "divide"),
        default="direct",
        help="contour accumulation strategy",
    )
    p.add_argument("--out", type=Path, default=Path("slices"), help="output directory")
    p.add_argument(
        "--formats",
        default="jsonl",
        help="comma-separated subset of svg,jsonl,png",
    )
    p.add_argument("--pitch", type=float, default=0.1, help="raster pixel pitch, mm")
    p.add_argument("--serve", action="store_true", help="start the slice service")
    p.add_argument("--port", type=int, default=8077, help="service port")
    p.add_argument("--ui-dir", type=Path, default=None, help="static viewer directory")
    return p


def config_from_args(args) -> RunConfig:
    formats = tuple(s.strip() for s in args.formats.split(",") if s.strip())
    bad = [f for f in formats if f not in ("svg", "jsonl", "png")]
    if bad:
        raise ValueError(f"unknown formats: {', '.join(bad)}")
    if args.thickness is None and args.heights is None and not args.serve:
        raise ValueError("one of --thickness or --heights is required")
    if args.thickness is not None and args.thickness <= 0:
        raise ValueError("--thickness must be positive")
    if args.chord <= 0:
        raise ValueError("--chord must be positive")
    return RunConfig(
        input_path=args.input,
        offset=args.offset,
        mode=args.mode,
        radius_file=args.radius_file,
        thickness=args.thickness,
        heights_file=args.heights,
        chord=args.chord,
        threads=args.threads,
        slab=args.slab,
        out_dir=args.out,
        formats=formats,
        pitch=args.pitch,
        strategy=args.strategy,
        serve=args.serve,
        port=args.port,
        ui_dir=args.ui_dir,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
