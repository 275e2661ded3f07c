/* tslint:disable */
/* eslint-disable */

export function dipole_image(width: number, height: number, xi_max: number, dissipative: boolean, clamp: boolean): Float64Array;

/**
 * Flat rows of `[g, Γ+, Γ-, ω+, ω-]`.
 */
export function polariton_curves(mu: number, kappa: number, gamma: number, g_max: number, count: number): Float64Array;

/**
 * Cavity transmission `T_c` on `count` laser frequencies.
 */
export function transmission(g: number, mu: number, kappa: number, gamma: number, eta: number, omega_min: number, omega_max: number, count: number, polariton: boolean): Float64Array;

export function version(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dipole_image: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly polariton_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly transmission: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly version: () => [number, number];
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
