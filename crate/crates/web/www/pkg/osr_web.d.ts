/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    calibratedThreshold(): number;
    grid(resolution: number, x_lo: number, x_hi: number, y_lo: number, y_hi: number): Float64Array;
    /**
     * Generates a task from `seed` and trains in `mode`
     * (`baseline`, `dummy_only`, `mixup_only` or `full`).
     */
    constructor(seed: number, mode: string, gamma: number);
    numKnown(): number;
    points(): Float64Array;
    /**
     * Test-set report at the current threshold, as JSON.
     */
    reportJson(): string;
    setThreshold(value: number): void;
    thresholdMax(): number;
    thresholdMin(): number;
    threshold(): number;
}

/**
 * Openness in percent for `train` known classes out of `test` test classes.
 */
export function opennessPercent(train: number, test: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_calibratedThreshold: (a: number) => number;
    readonly demo_grid: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly demo_numKnown: (a: number) => number;
    readonly demo_points: (a: number) => [number, number];
    readonly demo_reportJson: (a: number) => [number, number, number, number];
    readonly demo_setThreshold: (a: number, b: number) => void;
    readonly demo_threshold: (a: number) => number;
    readonly demo_thresholdMax: (a: number) => number;
    readonly demo_thresholdMin: (a: number) => number;
    readonly opennessPercent: (a: number, b: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
