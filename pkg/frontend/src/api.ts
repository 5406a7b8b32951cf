// Typed client for the slice service HTTP API.

export interface InfoPayload {
    triangles: number;
    vertices: number;
    edges: number;
    bbox: [[number, number, number], [number, number, number]];
    defaults: { chord: number; offset: number };
}

export interface ContourRecord {
    z: number;
    source: string;
    points: [number, number][];
    area: number;
}

export interface SlicePayload {
    z: number;
    offset: number;
    ms: number;
    contours: ContourRecord[];
}

export type SliceFetcher = (
    z: number,
    offset: number,
    chord?: number,
    signal?: AbortSignal,
) => Promise<SlicePayload>;

export async function fetchInfo(base: string): Promise<InfoPayload> {
    const resp = await fetch(`${base}/info`);
    if (!resp.ok) throw new Error(`/info failed: ${resp.status}`);
    return (await resp.json()) as InfoPayload;
}

export function makeSliceFetcher(base: string): SliceFetcher {
    return async (z, offset, chord, signal) => {
        const params = new URLSearchParams({ z: String(z), offset: String(offset) });
        if (chord !== undefined) params.set("chord", String(chord));
        const resp = await fetch(`${base}/slice?${params}`, { signal });
        if (!resp.ok) {
            const body = await resp.text();
            throw new Error(`/slice failed: ${resp.status} ${body.slice(0, 200)}`);
        }
        return (await resp.json()) as SlicePayload;
    };
}
