/* tslint:disable */
/* eslint-disable */

/**
 * The cost table of a trace export at another exchange rate.
 */
export function cost_table(trace: string, usd_per_ether: string): string;

/**
 * Whether a comma-separated attribute list satisfies a policy (one term
 * per line).
 */
export function evaluate_policy(policy: string, attributes: string): boolean;

/**
 * Runs a scenario config given as JSON. Shared data must be inline
 * (`text` or `hex`); there is no filesystem. Returns
 * `{granted, outcome, ledger_tip, text, costs, trace}`.
 */
export function run_scenario_json(config: string): string;

/**
 * A bundled scenario config by name (`alice` or `bob`).
 */
export function sample_config(name: string): string | undefined;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cost_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly evaluate_policy: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly run_scenario_json: (a: number, b: number) => [number, number, number, number];
    readonly sample_config: (a: number, b: number) => [number, number];
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
