/* tslint:disable */
/* eslint-disable */

/**
 * A synthetic plate with its lookup table.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Grid rectangle in mm as JSON.
     */
    extent(): string;
    /**
     * Two-part flow from one point to another: plan plus a waveform preview.
     */
    flow(from_x: number, from_y: number, to_x: number, to_y: number, drive_v: number): string;
    /**
     * Replay a synthetic menu selection on the electrostatic knob.
     */
    knob(condition: string, sectors: number, distance_deg: number, speed_dps: number, overshoot_deg: number): string;
    constructor(seed: number);
    /**
     * Sensation level in dB on an `nx` x `ny` raster over the grid, row-major,
     * for one actuator case driven at `drive_v` and `freq_hz`.
     */
    sensation_field(actuator: string, freq_hz: number, drive_v: number, nx: number, ny: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_extent: (a: number) => [number, number];
    readonly demo_flow: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly demo_knob: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly demo_new: (a: number) => number;
    readonly demo_sensation_field: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
