// Canvas 2D drawing of slice payloads. Vertex lists are used verbatim;
// only the view transform maps them to pixels.

import type { ContourRecord } from "./api.js";
import type { Viewport } from "./viewport.js";

export function contourPath(
    contours: ContourRecord[],
    view: Viewport,
): Path2D {
    const path = new Path2D();
    for (const c of contours) {
        c.points.forEach(([x, y], i) => {
            const [sx, sy] = view.toScreen(x, y);
            if (i === 0) path.moveTo(sx, sy);
            else path.lineTo(sx, sy);
        });
        path.closePath();
    }
    return path;
}

export interface DrawOptions {
    showOriginal: boolean;
}

export function drawSlice(
    ctx: CanvasRenderingContext2D,
    view: Viewport,
    contours: ContourRecord[],
    original: ContourRecord[] | null,
    opts: DrawOptions,
): void {
    ctx.clearRect(0, 0, view.width, view.height);
    if (contours.length > 0) {
        const path = contourPath(contours, view);
        ctx.fillStyle = "rgba(49, 130, 189, 0.55)";
        // contours are normalized (CCW outers, CW holes): nonzero == positive
        ctx.fill(path, "nonzero");
        ctx.strokeStyle = "#1a5490";
        ctx.lineWidth = 1.5;
        ctx.stroke(path);
    }
    if (opts.showOriginal && original !== null && original.length > 0) {
        const path = contourPath(original, view);
        ctx.strokeStyle = "#000000";
        ctx.lineWidth = 1.0;
        ctx.stroke(path);
    }
}

export function contoursBBox(
    contours: ContourRecord[],
): [[number, number], [number, number]] | null {
    let lo: [number, number] | null = null;
    let hi: [number, number] | null = null;
    for (const c of contours) {
        for (const [x, y] of c.points) {
            if (lo === null || hi === null) {
                lo = [x, y];
                hi = [x, y];
            } else {
                lo = [Math.min(lo[0], x), Math.min(lo[1], y)];
                hi = [Math.max(hi[0], x), Math.max(hi[1], y)];
            }
        }
    }
    return lo === null || hi === null ? null : [lo, hi];
}
