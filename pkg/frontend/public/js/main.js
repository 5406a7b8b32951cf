// Wires the DOM: sliders -> controller -> canvas.
import { fetchInfo, makeSliceFetcher } from "./api.js";
import { SliceController, zSliderRange, clampZ } from "./controller.js";
import { Viewport } from "./viewport.js";
import { drawSlice } from "./render.js";
const $ = (id) => document.getElementById(id);
async function start() {
    const canvas = $("view");
    const ctx = canvas.getContext("2d");
    const zSlider = $("z");
    const zLabel = $("z-value");
    const offsetSlider = $("offset");
    const offsetLabel = $("offset-value");
    const chordInput = $("chord");
    const overlayToggle = $("overlay");
    const banner = $("banner");
    const status = $("status");
    const controls = [zSlider, offsetSlider, chordInput, overlayToggle];
    const fail = (message) => {
        banner.textContent = message;
        banner.style.display = "block";
    };
    const base = "";
    let info;
    try {
        info = await fetchInfo(base);
    }
    catch (err) {
        fail(`slice service unreachable: ${err}`);
        controls.forEach((c) => (c.disabled = true));
        return;
    }
    const offsetMax = Math.max(0.25 * (info.bbox[1][2] - info.bbox[0][2]), info.defaults.offset);
    offsetSlider.min = String(-offsetMax);
    offsetSlider.max = String(offsetMax);
    offsetSlider.step = String(offsetMax / 100);
    offsetSlider.value = "0";
    const range = zSliderRange(info.bbox, offsetMax);
    zSlider.min = String(range.min);
    zSlider.max = String(range.max);
    zSlider.step = String((range.max - range.min) / 500);
    zSlider.value = String(range.mid);
    chordInput.value = String(info.defaults.chord);
    const view = new Viewport(canvas.width, canvas.height);
    view.fitTo([info.bbox[0][0] - offsetMax, info.bbox[0][1] - offsetMax], [info.bbox[1][0] + offsetMax, info.bbox[1][1] + offsetMax]);
    const controller = new SliceController(makeSliceFetcher(base), (state) => {
        banner.style.display = "none";
        drawSlice(ctx, view, state.slice.contours, state.original?.contours ?? null, {
            showOriginal: overlayToggle.checked,
        });
        status.textContent =
            state.slice.contours.length === 0
                ? "empty slice"
                : `${state.slice.contours.length} contour(s), ${state.slice.ms.toFixed(1)} ms`;
    }, fail, { debounceMs: 100 });
    const current = () => {
        const offset = parseFloat(offsetSlider.value);
        const z = clampZ(parseFloat(zSlider.value), info.bbox, offset);
        const chord = parseFloat(chordInput.value) || undefined;
        zLabel.textContent = `${z.toFixed(3)} mm`;
        offsetLabel.textContent = `${offset.toFixed(3)} mm`;
        return { z, offset, chord };
    };
    const onInput = () => {
        const { z, offset, chord } = current();
        controller.setControls(z, offset, chord);
    };
    zSlider.addEventListener("input", onInput);
    offsetSlider.addEventListener("input", onInput);
    chordInput.addEventListener("change", onInput);
    overlayToggle.addEventListener("change", () => {
        if (controller.last) {
            drawSlice(ctx, view, controller.last.slice.contours, controller.last.original?.contours ?? null, { showOriginal: overlayToggle.checked });
        }
    });
    // pan and zoom
    let dragging = false;
    let lastPos = [0, 0];
    const redraw = () => {
        if (controller.last) {
            drawSlice(ctx, view, controller.last.slice.contours, controller.last.original?.contours ?? null, { showOriginal: overlayToggle.checked });
        }
    };
    canvas.addEventListener("pointerdown", (e) => {
        dragging = true;
        lastPos = [e.offsetX, e.offsetY];
        canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
        if (!dragging)
            return;
        view.pan(e.offsetX - lastPos[0], e.offsetY - lastPos[1]);
        lastPos = [e.offsetX, e.offsetY];
        redraw();
    });
    canvas.addEventListener("pointerup", () => (dragging = false));
    canvas.addEventListener("wheel", (e) => {
        e.preventDefault();
        view.zoomAt(e.offsetX, e.offsetY, e.deltaY < 0 ? 1.15 : 1 / 1.15);
        redraw();
    });
    const { z, offset, chord } = current();
    await controller.refresh(z, offset, chord);
}
void start();
