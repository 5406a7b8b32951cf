// Millimeter-to-pixel view transform with pan and wheel zoom.
export class Viewport {
    width;
    height;
    scale = 1; // px per mm
    ox = 0; // screen x of world origin
    oy = 0; // screen y of world origin
    constructor(width, height) {
        this.width = width;
        this.height = height;
    }
    /** Fit a world-space bbox into the canvas with a relative margin. */
    fitTo(lo, hi, margin = 0.08) {
        const w = Math.max(hi[0] - lo[0], 1e-9);
        const h = Math.max(hi[1] - lo[1], 1e-9);
        this.scale = Math.min((this.width * (1 - 2 * margin)) / w, (this.height * (1 - 2 * margin)) / h);
        const cx = 0.5 * (lo[0] + hi[0]);
        const cy = 0.5 * (lo[1] + hi[1]);
        this.ox = this.width / 2 - cx * this.scale;
        this.oy = this.height / 2 + cy * this.scale;
    }
    /** World mm to screen px; the y axis points up in world space. */
    toScreen(x, y) {
        return [this.ox + x * this.scale, this.oy - y * this.scale];
    }
    toWorld(sx, sy) {
        return [(sx - this.ox) / this.scale, (this.oy - sy) / this.scale];
    }
    pan(dxPx, dyPx) {
        this.ox += dxPx;
        this.oy += dyPx;
    }
    /** Zoom by a factor keeping the world point under (sx, sy) fixed. */
    zoomAt(sx, sy, factor) {
        const [wx, wy] = this.toWorld(sx, sy);
        this.scale *= factor;
        this.ox = sx - wx * this.scale;
        this.oy = sy + wy * this.scale;
    }
}
