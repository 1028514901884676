/**
 * Node bindings for the wfpp corpus-pruning toolkit.
 *
 * Pure delegation: every call shells out to the `wfpp` CLI and exchanges
 * data through its documented file formats (manifests, frequency tables,
 * score sidecars, selection JSON). No formula is reimplemented here, so
 * results are bit-identical to the CLI's.
 */

import { execFileSync } from "node:child_process";
import { randomBytes } from "node:crypto";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";

/** Mirrors the primary package version. */
export const VERSION = "0.1.0";

export type ManifestFormat = "jsonl" | "tsv";

export interface PruneOptions {
  strategy?: "wfpp" | "wfpp_second_half" | "random" | "length" | "metadata";
  fraction?: number;
  seed?: number;
  t?: number;
  normalize?: boolean;
  format?: ManifestFormat;
  entries?: string[];
  cap?: number;
}

export class EmptyCaptionError extends Error {}
export class ClosedTableError extends Error {}

function wfppBin(): string {
  return process.env.WFPP_BIN ?? "wfpp";
}

function runCli(args: string[]): string {
  try {
    return execFileSync(wfppBin(), args, { encoding: "utf-8" });
  } catch (err) {
    const stderr = (err as { stderr?: string }).stderr;
    throw new Error(`wfpp ${args[0]} failed: ${stderr ?? String(err)}`);
  }
}

function tempDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "wfpp-bindings-"));
}

function writeManifest(dir: string, captions: string[]): string {
  const manifest = path.join(dir, `${randomBytes(6).toString("hex")}.jsonl`);
  const lines = captions.map((text) => JSON.stringify({ image: "", text }));
  fs.writeFileSync(manifest, lines.join("\n") + (lines.length ? "\n" : ""), "utf-8");
  return manifest;
}

/** Parse a score sidecar into per-line entries (null score = empty caption). */
function parseSidecar(sidecarPath: string): Array<{ index: number; n: number; score: number | null }> {
  const lines = fs.readFileSync(sidecarPath, "utf-8").split("\n");
  const entries: Array<{ index: number; n: number; score: number | null }> = [];
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const [index, n, raw] = line.split("\t");
    entries.push({
      index: Number(index),
      n: Number(n),
      score: raw === "empty" ? null : Number(raw),
    });
  }
  return entries;
}

/**
 * Opaque handle to an immutable frequency table on disk. Tables created by
 * {@link count} own a temp directory; close() releases it and invalidates
 * the handle.
 */
export class BoundTable {
  #closed = false;

  private constructor(
    readonly path: string,
    private readonly ownedDir: string | null,
  ) {}

  static fromFile(tablePath: string): BoundTable {
    if (!fs.existsSync(tablePath)) {
      throw new Error(`frequency table not found: ${tablePath}`);
    }
    return new BoundTable(tablePath, null);
  }

  /** @internal */
  static owned(tablePath: string, dir: string): BoundTable {
    return new BoundTable(tablePath, dir);
  }

  get closed(): boolean {
    return this.#closed;
  }

  ensureOpen(): void {
    if (this.#closed) {
      throw new ClosedTableError("frequency table handle is closed");
    }
  }

  close(): void {
    if (this.#closed) return;
    this.#closed = true;
    if (this.ownedDir) {
      fs.rmSync(this.ownedDir, { recursive: true, force: true });
    }
  }
}

/** Build a frequency table from a manifest; returns a handle to it. */
export function count(manifestPath: string, format: ManifestFormat = "jsonl"): BoundTable {
  const dir = tempDir();
  const table = path.join(dir, "freq.tsv");
  runCli(["count", "--input", manifestPath, "--format", format, "--output", table]);
  return BoundTable.owned(table, dir);
}

/** Score a batch of captions; empty captions come back as null. */
export function scoreBatch(
  captions: string[],
  table: BoundTable,
  t = 1e-7,
  normalize = true,
): Array<number | null> {
  table.ensureOpen();
  const dir = tempDir();
  try {
    const manifest = writeManifest(dir, captions);
    const sidecar = path.join(dir, "scores.tsv");
    const args = ["score", "--input", manifest, "--freq", table.path,
                  "--t", String(t), "--output", sidecar];
    if (!normalize) args.push("--no-length-norm");
    runCli(args);
    return parseSidecar(sidecar).map((e) => e.score);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

/** Joint discard score of one caption. Throws on empty captions. */
export function score(
  caption: string,
  table: BoundTable,
  t = 1e-7,
  normalize = true,
): number {
  const [result] = scoreBatch([caption], table, t, normalize);
  if (result === null) {
    throw new EmptyCaptionError(`caption tokenized to zero tokens: ${JSON.stringify(caption)}`);
  }
  return result;
}

/** Run a pruning strategy over a manifest; returns the kept record indices. */
export function prune(manifestPath: string, options: PruneOptions = {}): number[] {
  const {
    strategy = "wfpp",
    fraction = 0.5,
    seed = 0,
    t = 1e-7,
    normalize = true,
    format = "jsonl",
    entries,
    cap,
  } = options;
  if (!(fraction > 0 && fraction <= 1)) {
    throw new RangeError(`fraction must be in (0, 1], got ${fraction}`);
  }

  const dir = tempDir();
  try {
    const pruned = path.join(dir, `pruned.${format}`);
    const selection = path.join(dir, "selection.json");
    const args = ["prune", "--input", manifestPath, "--format", format,
                  "--strategy", strategy, "--fraction", String(fraction),
                  "--seed", String(seed), "--output", pruned,
                  "--emit-selection", selection];
    if (strategy === "metadata") {
      if (!entries?.length || !cap) {
        throw new RangeError("metadata strategy requires entries and cap");
      }
      const entriesFile = path.join(dir, "entries.txt");
      fs.writeFileSync(entriesFile, entries.join("\n") + "\n", "utf-8");
      args.push("--entries", entriesFile, "--cap", String(cap));
    } else {
      const table = path.join(dir, "freq.tsv");
      const sidecar = path.join(dir, "scores.tsv");
      runCli(["count", "--input", manifestPath, "--format", format, "--output", table]);
      const scoreArgs = ["score", "--input", manifestPath, "--format", format,
                         "--freq", table, "--t", String(t), "--output", sidecar];
      if (!normalize) scoreArgs.push("--no-length-norm");
      runCli(scoreArgs);
      args.push("--scores", sidecar);
    }
    runCli(args);
    const parsed = JSON.parse(fs.readFileSync(selection, "utf-8"));
    return parsed.kept_indices as number[];
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}
