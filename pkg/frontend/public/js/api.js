// Typed client for the slice service HTTP API.
export async function fetchInfo(base) {
    const resp = await fetch(`${base}/info`);
    if (!resp.ok)
        throw new Error(`/info failed: ${resp.status}`);
    return (await resp.json());
}
export function makeSliceFetcher(base) {
    return async (z, offset, chord, signal) => {
        const params = new URLSearchParams({ z: String(z), offset: String(offset) });
        if (chord !== undefined)
            params.set("chord", String(chord));
        const resp = await fetch(`${base}/slice?${params}`, { signal });
        if (!resp.ok) {
            const body = await resp.text();
            throw new Error(`/slice failed: ${resp.status} ${body.slice(0, 200)}`);
        }
        return (await resp.json());
    };
}
