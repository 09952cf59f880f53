/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const hard_stream: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const hint_curve: (a: number) => [number, number, number, number];
export const tree_labels: (a: number, b: number, c: number) => [number, number, number, number];
export const xor_curve: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
