/* tslint:disable */
/* eslint-disable */

/**
 * The polynomial window that hides best from the energy test.
 */
export function bad_signal_demo(n: number, degree: number): string;

/**
 * Observe `ρ·s + u + ξ` with a random 4-frequency signal `s` (`‖s‖_∞ = 1`)
 * and a nuisance `u` from the ε-set of four random frequencies, then run
 * both tests against that nuisance set (the energy test against its
 * subspace core).
 */
export function detect_demo(n: number, rho: number, eps: number, seed: number): string;

/**
 * Rejection rates of both tests against the zero nuisance on `ρ ∈ [0, 3]`.
 */
export function power_curve(n: number, trials: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bad_signal_demo: (a: number, b: number) => [number, number, number, number];
    readonly detect_demo: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly power_curve: (a: number, b: number, c: number) => [number, number, number, number];
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
