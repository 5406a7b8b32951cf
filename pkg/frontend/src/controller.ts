// Slider-driven slice fetching with debounce and latest-wins semantics.

import type { SliceFetcher, SlicePayload } from "./api.js";

export interface RenderedState {
    /** payload for the current (z, offset, chord) controls */
    slice: SlicePayload;
    /** offset-0 payload at the same z, for the original-vs-offset overlay */
    original: SlicePayload | null;
}

export interface ControllerOptions {
    debounceMs?: number;
    /** fetch the offset-0 overlay alongside each slice (default true) */
    overlay?: boolean;
}

interface Controls {
    z: number;
    offset: number;
    chord?: number;
}

export class SliceController {
    private seq = 0;
    private timer: ReturnType<typeof setTimeout> | null = null;
    private pending: Controls | null = null;
    private inflight = 0;
    private aborter: AbortController | null = null;
    readonly debounceMs: number;
    private overlay: boolean;
    last: RenderedState | null = null;
    lastError: string | null = null;

    constructor(
        private fetcher: SliceFetcher,
        private onRender: (state: RenderedState) => void,
        private onError: (message: string) => void = () => {},
        opts: ControllerOptions = {},
    ) {
        this.debounceMs = opts.debounceMs ?? 100;
        this.overlay = opts.overlay ?? true;
    }

    /** True while a request is in flight or controls are waiting to settle. */
    get busy(): boolean {
        return this.timer !== null || this.inflight > 0;
    }

    setControls(z: number, offset: number, chord?: number): void {
        this.pending = { z, offset, chord };
        if (this.timer !== null) clearTimeout(this.timer);
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.issue();
        }, this.debounceMs);
    }

    /** Issue immediately, bypassing the debounce (used for initial load). */
    async refresh(z: number, offset: number, chord?: number): Promise<void> {
        this.pending = { z, offset, chord };
        await this.issue();
    }

    private async issue(): Promise<void> {
        if (this.pending === null) return;
        const controls = this.pending;
        const id = ++this.seq;
        this.aborter?.abort(); // at most one request in flight: latest wins
        const aborter = (this.aborter = new AbortController());
        this.inflight += 1;
        try {
            const wantOverlay = this.overlay && controls.offset !== 0;
            const [slice, original] = await Promise.all([
                this.fetcher(controls.z, controls.offset, controls.chord, aborter.signal),
                wantOverlay
                    ? this.fetcher(controls.z, 0, controls.chord, aborter.signal)
                    : Promise.resolve(null),
            ]);
            if (id !== this.seq) return; // stale: a newer request superseded us
            this.last = { slice, original: original ?? (wantOverlay ? null : slice) };
            this.lastError = null;
            this.onRender(this.last);
        } catch (err) {
            if (id !== this.seq || aborter.signal.aborted) return;
            this.lastError = err instanceof Error ? err.message : String(err);
            this.onError(this.lastError); // last good frame stays on screen
        } finally {
            this.inflight -= 1;
        }
    }
}

/** Slider range for z: the mesh extent grown by the largest |offset|. */
export function zSliderRange(
    bbox: [[number, number, number], [number, number, number]],
    offsetMax: number,
): { min: number; max: number; mid: number } {
    const lo = bbox[0][2] - Math.abs(offsetMax);
    const hi = bbox[1][2] + Math.abs(offsetMax);
    return { min: lo, max: hi, mid: 0.5 * (bbox[0][2] + bbox[1][2]) };
}

export function clampZ(
    z: number,
    bbox: [[number, number, number], [number, number, number]],
    offset: number,
): number {
    const lo = bbox[0][2] - Math.abs(offset);
    const hi = bbox[1][2] + Math.abs(offset);
    return Math.min(hi, Math.max(lo, z));
}
