/* tslint:disable */
/* eslint-disable */

/**
 * A trained tree held on the Rust side between calls.
 */
export class Model {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Loads a model file.
     */
    static fromText(text: string): Model;
    /**
     * Trains on dataset CSV text; throws with a readable message on bad input.
     */
    constructor(csv: string, min_leaf: number, confidence_factor: number, pruning: boolean);
    predict(subject_failed: number, dismissal_punish: number, rewards: number): string;
    /**
     * Training summary as JSON (see `TrainReport`).
     */
    report(): string;
    text(): string;
}

/**
 * The fourteen activity rows with one flag per role, as JSON.
 */
export function permissionGrid(): string;

/**
 * The five-row sample dataset in export format.
 */
export function sampleDataset(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_model_free: (a: number, b: number) => void;
    readonly model_fromText: (a: number, b: number) => [number, number, number];
    readonly model_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly model_predict: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly model_report: (a: number) => [number, number];
    readonly model_text: (a: number) => [number, number];
    readonly permissionGrid: () => [number, number];
    readonly sampleDataset: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
