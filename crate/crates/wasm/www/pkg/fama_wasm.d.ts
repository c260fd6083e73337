/* tslint:disable */
/* eslint-disable */

export function correlationHeatmap(n1: number, n2: number, w1: number, w2: number, cylindrical: boolean): Float64Array;

export function expectedMax(n1: number, n2: number, w1: number, w2: number, trials: number, seed: number): Float64Array;

export function outageCurve(n1: number, n2: number, w1: number, w2: number, snr_start_db: number, snr_stop_db: number, points: number, inr_offset_db: number, rate_bits: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly correlationHeatmap: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly expectedMax: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly outageCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
