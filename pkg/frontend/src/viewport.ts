// Millimeter-to-pixel view transform with pan and wheel zoom.

export class Viewport {
    scale = 1; // px per mm
    ox = 0;    // screen x of world origin
    oy = 0;    // screen y of world origin

    constructor(public width: number, public height: number) {}

    /** Fit a world-space bbox into the canvas with a relative margin. */
    fitTo(lo: [number, number], hi: [number, number], margin = 0.08): void {
        const w = Math.max(hi[0] - lo[0], 1e-9);
        const h = Math.max(hi[1] - lo[1], 1e-9);
        this.scale = Math.min(
            (this.width * (1 - 2 * margin)) / w,
            (this.height * (1 - 2 * margin)) / h,
        );
        const cx = 0.5 * (lo[0] + hi[0]);
        const cy = 0.5 * (lo[1] + hi[1]);
        this.ox = this.width / 2 - cx * this.scale;
        this.oy = this.height / 2 + cy * this.scale;
    }

    /** World mm to screen px; the y axis points up in world space. */
    toScreen(x: number, y: number): [number, number] {
        return [this.ox + x * this.scale, this.oy - y * this.scale];
    }

    toWorld(sx: number, sy: number): [number, number] {
        return [(sx - this.ox) / this.scale, (this.oy - sy) / this.scale];
    }

    pan(dxPx: number, dyPx: number): void {
        this.ox += dxPx;
        this.oy += dyPx;
    }

    /** Zoom by a factor keeping the world point under (sx, sy) fixed. */
    zoomAt(sx: number, sy: number, factor: number): void {
        const [wx, wy] = this.toWorld(sx, sy);
        this.scale *= factor;
        this.ox = sx - wx * this.scale;
        this.oy = sy + wy * this.scale;
    }
}
