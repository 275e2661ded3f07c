/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const dipole_image: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const polariton_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const transmission: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
export const version: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
