// Slider-driven slice fetching with debounce and latest-wins semantics.
export class SliceController {
    fetcher;
    onRender;
    onError;
    seq = 0;
    timer = null;
    pending = null;
    inflight = 0;
    aborter = null;
    debounceMs;
    overlay;
    last = null;
    lastError = null;
    constructor(fetcher, onRender, onError = () => { }, opts = {}) {
        this.fetcher = fetcher;
        this.onRender = onRender;
        this.onError = onError;
        this.debounceMs = opts.debounceMs ?? 100;
        this.overlay = opts.overlay ?? true;
    }
    /** True while a request is in flight or controls are waiting to settle. */
    get busy() {
        return this.timer !== null || this.inflight > 0;
    }
    setControls(z, offset, chord) {
        this.pending = { z, offset, chord };
        if (this.timer !== null)
            clearTimeout(this.timer);
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.issue();
        }, this.debounceMs);
    }
    /** Issue immediately, bypassing the debounce (used for initial load). */
    async refresh(z, offset, chord) {
        this.pending = { z, offset, chord };
        await this.issue();
    }
    async issue() {
        if (this.pending === null)
            return;
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
            if (id !== this.seq)
                return; // stale: a newer request superseded us
            this.last = { slice, original: original ?? (wantOverlay ? null : slice) };
            this.lastError = null;
            this.onRender(this.last);
        }
        catch (err) {
            if (id !== this.seq || aborter.signal.aborted)
                return;
            this.lastError = err instanceof Error ? err.message : String(err);
            this.onError(this.lastError); // last good frame stays on screen
        }
        finally {
            this.inflight -= 1;
        }
    }
}
/** Slider range for z: the mesh extent grown by the largest |offset|. */
export function zSliderRange(bbox, offsetMax) {
    const lo = bbox[0][2] - Math.abs(offsetMax);
    const hi = bbox[1][2] + Math.abs(offsetMax);
    return { min: lo, max: hi, mid: 0.5 * (bbox[0][2] + bbox[1][2]) };
}
export function clampZ(z, bbox, offset) {
    const lo = bbox[0][2] - Math.abs(offset);
    const hi = bbox[1][2] + Math.abs(offset);
    return Math.min(hi, Math.max(lo, z));
}
