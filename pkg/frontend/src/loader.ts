/**
 * Validating reader for generated task datasets.
 *
 * Mirrors the generator's own loader check for check so a dataset is accepted
 * or rejected identically on both sides; never rewrites or reinterprets any
 * field. Stripped datasets (queries + separate key file) open in query-only
 * mode where answer access throws.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import {
  DatasetManifest,
  DatasetRecord,
  DEFAULT_TEMPLATES,
  LABELS,
  NO,
  NO_APPEARANCE,
  NONDECREASING_KINDS,
  NOT_SURE,
  OPTION_CARDINALITY,
  RecordOption,
  SHUFFLED_KINDS,
  SPEED_DISPLAY,
  STRICT_KINDS,
  YES,
} from "./schema.js";
import { seededPermutation } from "./shuffle.js";

export const DATA_FILE = "data.jsonl";
export const QUERY_FILE = "queries.jsonl";
export const KEY_FILE = "keys.jsonl";
export const MANIFEST_FILE = "manifest.json";

export class DatasetValidationError extends Error {
  constructor(message: string, readonly recordId?: string) {
    super(message);
    this.name = "DatasetValidationError";
  }
}

function fail(rid: string, field: string, problem: string): never {
  throw new DatasetValidationError(`record ${rid}: ${field}: ${problem}`, rid);
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

function readJsonl(file: string): unknown[] {
  if (!fs.existsSync(file)) {
    throw new DatasetValidationError(`missing dataset file ${file}`);
  }
  const rows: unknown[] = [];
  const lines = fs.readFileSync(file, "utf-8").split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  lines.forEach((line, i) => {
    if (line.trim() === "") {
      throw new DatasetValidationError(`${file}:${i + 1}: blank line`);
    }
    try {
      rows.push(JSON.parse(line));
    } catch (err) {
      throw new DatasetValidationError(`${file}:${i + 1}: invalid JSON: ${err}`);
    }
  });
  return rows;
}

function checkOptions(rid: string, rec: DatasetRecord): void {
  const want = OPTION_CARDINALITY[rec.kind];
  if (!Array.isArray(rec.options)) fail(rid, "options", "must be a list");
  if (rec.options.length !== want) {
    fail(rid, "options", `${rec.kind} needs ${want} options, got ${rec.options.length}`);
  }
  const labels = rec.options.map((o) => o.label);
  const texts = rec.options.map((o) => o.text);
  for (const opt of rec.options) {
    const keys = Object.keys(opt).sort().join(",");
    if (keys !== "label,text") fail(rid, "options", `malformed option ${JSON.stringify(opt)}`);
  }
  if (labels.join("") !== LABELS.slice(0, labels.length)) {
    fail(rid, "options", `labels must be ${LABELS.slice(0, labels.length)} in order, got ${labels}`);
  }
  if (new Set(texts).size !== texts.length) fail(rid, "options", `duplicate option texts ${texts}`);
  if (texts.some((t) => typeof t !== "string" || t === "")) {
    fail(rid, "options", "option texts must be nonempty strings");
  }
}

function parsePermutationText(rid: string, text: string, m: number): number[] {
  const values = text.split(",").map((part) => Number.parseInt(part.trim(), 10) - 1);
  if (values.some((v) => Number.isNaN(v))) {
    fail(rid, "answer", `key text ${JSON.stringify(text)} is not a position list`);
  }
  const sorted = [...values].sort((a, b) => a - b);
  if (!sorted.every((v, i) => v === i) || values.length !== m) {
    fail(rid, "answer", `key text ${JSON.stringify(text)} is not a permutation of 1..${m}`);
  }
  return values;
}

function checkSemantics(rid: string, rec: DatasetRecord): void {
  const presented = rec.presented_indices;
  const byLabel = new Map(rec.options.map((o) => [o.label, o.text]));
  const keyText = byLabel.get(rec.answer as string) as string;
  const texts = new Set(rec.options.map((o) => o.text));
  const yesNo = new Set([YES, NO, NOT_SURE]);
  if (rec.kind === "counting") {
    if (keyText !== String(presented.length)) {
      fail(rid, "answer", `counting key ${keyText} != frame count ${presented.length}`);
    }
  } else if (rec.kind === "consistency") {
    if (texts.size !== 3 || ![...texts].every((t) => yesNo.has(t))) {
      fail(rid, "options", "consistency options must be Yes/No/Not sure");
    }
    const expected = presented[0] === presented[1] ? YES : NO;
    if (keyText !== expected) {
      fail(rid, "answer", `consistency key ${keyText} inconsistent with pair ${presented}`);
    }
  } else if (rec.kind === "adjust_or_not") {
    if (texts.size !== 3 || ![...texts].every((t) => yesNo.has(t))) {
      fail(rid, "options", "order-check options must be Yes/No/Not sure");
    }
    const sorted = [...presented].sort((a, b) => a - b);
    const expected = presented.some((v, i) => v !== sorted[i]) ? YES : NO;
    if (keyText !== expected) {
      fail(rid, "answer", `order-check key ${keyText} inconsistent with ${presented}`);
    }
  } else if (rec.kind === "rearrangement") {
    const mapping = parsePermutationText(rid, keyText, presented.length);
    const restored = mapping.map((j) => presented[j]);
    const sorted = [...presented].sort((a, b) => a - b);
    if (restored.some((v, i) => v !== sorted[i])) {
      fail(rid, "answer", `key permutation ${keyText} does not restore ${presented}`);
    }
  } else if (rec.kind === "speed") {
    const displays = new Set(Object.values(SPEED_DISPLAY));
    if (texts.size !== displays.size || ![...texts].every((t) => displays.has(t))) {
      fail(rid, "options", "speed options must be the four speeds");
    }
    const label = rec.meta["speed_label"];
    if (typeof label === "string" && SPEED_DISPLAY[label] !== keyText) {
      fail(rid, "answer", `speed key ${keyText} != label ${label}`);
    }
  } else {
    const m = rec.meta["m"] as number;
    if (keyText === NO_APPEARANCE) {
      fail(rid, "answer", "localization key can never be the absence filler");
    }
    const parts =
      rec.kind === "localization_exist"
        ? keyText.split(",").map((p) => p.trim())
        : [keyText.endsWith(" frame") ? keyText.slice(0, -" frame".length) : ""];
    if (parts[0] === "") fail(rid, "answer", `localization key ${keyText} not an ordinal frame`);
    for (const part of parts) {
      const digits = part.replace(/\D/g, "");
      const value = Number.parseInt(digits, 10);
      if (!digits || !(value >= 1 && value <= m)) {
        fail(rid, "answer", `ordinal ${part} outside 1..${m}`);
      }
    }
  }
}

function checkPermutationMeta(rid: string, rec: DatasetRecord): void {
  const mapping = rec.meta["permutation"];
  if (mapping === undefined || mapping === null) return;
  const presented = rec.presented_indices;
  if (
    !Array.isArray(mapping) ||
    mapping.length !== presented.length ||
    [...mapping].sort((a, b) => a - b).some((v, i) => v !== i)
  ) {
    fail(rid, "meta.permutation", `${JSON.stringify(mapping)} is not a permutation`);
  }
  const chronological = [...presented].sort((a, b) => a - b);
  const applied = (mapping as number[]).map((j) => chronological[j]);
  if (applied.some((v, i) => v !== presented[i])) {
    fail(rid, "meta.permutation", `${JSON.stringify(mapping)} does not reproduce presentation order`);
  }
}

export function validateRecord(
  rec: DatasetRecord,
  datasetSeed: number | null,
  stripped: boolean,
  templates: Record<string, string[]> = DEFAULT_TEMPLATES,
): void {
  if (typeof rec !== "object" || rec === null) {
    throw new DatasetValidationError(`record is not an object: ${JSON.stringify(rec)}`);
  }
  const rid = rec.id;
  if (typeof rid !== "string" || rid === "") {
    throw new DatasetValidationError(`record ${JSON.stringify(rec)}: id: missing or empty`);
  }
  const required = [
    "kind", "video_id", "frame_refs", "presented_indices",
    "question", "options", "meta", "generator_version", "dataset_seed",
  ];
  if (!stripped) required.push("answer");
  for (const field of required) {
    if (!(field in rec)) fail(rid, field, "missing");
  }
  if (!(rec.kind in OPTION_CARDINALITY)) fail(rid, "kind", `unknown kind ${rec.kind}`);
  if (typeof rec.video_id !== "string" || rec.video_id === "") {
    fail(rid, "video_id", "must be a nonempty string");
  }
  const presented = rec.presented_indices;
  if (!Array.isArray(presented) || presented.length === 0 ||
      presented.some((v) => !isInt(v) || v < 0)) {
    fail(rid, "presented_indices", "must be a nonempty list of indices >= 0");
  }
  const refs = rec.frame_refs;
  if (!Array.isArray(refs) || refs.some((r) => typeof r !== "string" || r === "")) {
    fail(rid, "frame_refs", "must be a list of nonempty paths");
  }
  if (refs.length !== presented.length) {
    fail(rid, "frame_refs", `${refs.length} refs for ${presented.length} presented frames`);
  }
  if (!(templates[rec.kind] ?? []).includes(rec.question)) {
    fail(rid, "question", `not in the ${rec.kind} template bank: ${JSON.stringify(rec.question)}`);
  }
  checkOptions(rid, rec);
  if (typeof rec.meta !== "object" || rec.meta === null || Array.isArray(rec.meta)) {
    fail(rid, "meta", "must be an object");
  }
  if (rec.kind !== "speed") {
    const m = rec.meta["m"];
    if (!isInt(m) || m < 2 || m > 8) {
      fail(rid, "meta.m", `fragment size must be an int in [2, 8], got ${JSON.stringify(m)}`);
    }
    const expected = rec.kind === "consistency" ? 2 : (m as number);
    if (presented.length !== expected) {
      fail(rid, "presented_indices", `${rec.kind} expects ${expected} frames, got ${presented.length}`);
    }
  }
  if (STRICT_KINDS.has(rec.kind)) {
    if (presented.some((v, i) => i > 0 && v <= presented[i - 1])) {
      fail(rid, "presented_indices", `${rec.kind} must be strictly chronological: ${presented}`);
    }
  } else if (NONDECREASING_KINDS.has(rec.kind)) {
    if (presented.some((v, i) => i > 0 && v < presented[i - 1])) {
      fail(rid, "presented_indices", `${rec.kind} must be nondecreasing: ${presented}`);
    }
  } else if (SHUFFLED_KINDS.has(rec.kind)) {
    if (new Set(presented).size !== presented.length) {
      fail(rid, "presented_indices", `${rec.kind} indices must be distinct: ${presented}`);
    }
  }
  if (typeof rec.generator_version !== "string" || rec.generator_version === "") {
    fail(rid, "generator_version", "must be a nonempty string");
  }
  if (!isInt(rec.dataset_seed)) fail(rid, "dataset_seed", "must be an integer");
  if (datasetSeed !== null && rec.dataset_seed !== datasetSeed) {
    fail(rid, "dataset_seed", `${rec.dataset_seed} != manifest seed ${datasetSeed}`);
  }
  if (!stripped) {
    const labels = new Set(rec.options.map((o) => o.label));
    if (typeof rec.answer !== "string" || !labels.has(rec.answer)) {
      fail(rid, "answer", `label ${JSON.stringify(rec.answer)} not among options`);
    }
    checkSemantics(rid, rec);
    checkPermutationMeta(rid, rec);
  }
}

export interface DatasetHandle {
  root: string;
  records: DatasetRecord[];
  manifest: DatasetManifest;
  stripped: boolean;
  length: number;
}

function loadManifest(root: string): DatasetManifest {
  const file = path.join(root, MANIFEST_FILE);
  if (!fs.existsSync(file)) {
    throw new DatasetValidationError(`missing manifest ${file}`);
  }
  let manifest: DatasetManifest;
  try {
    manifest = JSON.parse(fs.readFileSync(file, "utf-8"));
  } catch (err) {
    throw new DatasetValidationError(`${file}: invalid JSON: ${err}`);
  }
  for (const field of ["version", "dataset_seed", "counts", "videos", "skips"]) {
    if (!(field in manifest)) {
      throw new DatasetValidationError(`manifest: ${field}: missing`);
    }
  }
  return manifest;
}

export function openDataset(root: string, checkRefs = true): DatasetHandle {
  const manifest = loadManifest(root);
  const stripped = Boolean(manifest.stripped);
  const rows = readJsonl(path.join(root, stripped ? QUERY_FILE : DATA_FILE));
  const records = rows as DatasetRecord[];
  const seen = new Set<string>();
  const counts: Record<string, number> = {};
  for (const rec of records) {
    validateRecord(rec, manifest.dataset_seed, stripped);
    if (seen.has(rec.id)) {
      throw new DatasetValidationError(`record ${rec.id}: id: duplicate`, rec.id);
    }
    seen.add(rec.id);
    counts[rec.kind] = (counts[rec.kind] ?? 0) + 1;
    if (checkRefs) {
      for (const ref of rec.frame_refs) {
        if (!fs.existsSync(path.join(root, ref))) {
          fail(rec.id, "frame_refs", `unresolvable path ${JSON.stringify(ref)}`);
        }
      }
    }
  }
  const declared = Object.entries(manifest.counts).filter(([, v]) => v !== 0);
  const observed = Object.entries(counts);
  const sameCounts =
    declared.length === observed.length &&
    declared.every(([kind, count]) => counts[kind] === count);
  if (!sameCounts) {
    throw new DatasetValidationError(
      `manifest counts ${JSON.stringify(manifest.counts)} != observed ${JSON.stringify(counts)}`,
    );
  }
  const total = Object.values(manifest.counts).reduce((a, b) => a + b, 0);
  if (total !== records.length) {
    throw new DatasetValidationError("manifest counts do not sum to the record count");
  }
  if (stripped) {
    const keyIds = new Set<string>();
    for (const entry of readJsonl(path.join(root, KEY_FILE))) {
      const keys = Object.keys(entry as object).sort().join(",");
      if (keys !== "answer,id") {
        throw new DatasetValidationError(`key file entry malformed: ${JSON.stringify(entry)}`);
      }
      keyIds.add((entry as { id: string }).id);
    }
    if (keyIds.size !== seen.size || [...keyIds].some((id) => !seen.has(id))) {
      throw new DatasetValidationError("key file ids do not match the query file");
    }
  }
  return { root, records, manifest, stripped, length: records.length };
}

export class LoadedExample {
  constructor(
    private readonly record: DatasetRecord,
    private readonly root: string,
    private readonly stripped: boolean,
  ) {}

  get id(): string {
    return this.record.id;
  }

  get kind(): string {
    return this.record.kind;
  }

  get question(): string {
    return this.record.question;
  }

  get options(): RecordOption[] {
    return this.record.options.map((o) => ({ ...o }));
  }

  /** Absolute frame paths in presentation order; throws if a file vanished. */
  get framePaths(): string[] {
    return this.record.frame_refs.map((ref) => {
      const resolved = path.resolve(this.root, ref);
      if (!fs.existsSync(resolved)) {
        throw new Error(`frame file missing: ${resolved}`);
      }
      return resolved;
    });
  }

  get answer(): string {
    if (this.stripped || this.record.answer === undefined) {
      throw new Error(`record ${this.record.id}: answers are stripped from this dataset`);
    }
    return this.record.answer;
  }

  get raw(): DatasetRecord {
    return this.record;
  }
}

export function* iterate(
  handle: DatasetHandle,
  shuffleSeed?: number,
): Generator<LoadedExample> {
  const order =
    shuffleSeed === undefined
      ? Array.from({ length: handle.records.length }, (_, i) => i)
      : seededPermutation(handle.records.length, shuffleSeed);
  for (const index of order) {
    yield new LoadedExample(handle.records[index], handle.root, handle.stripped);
  }
}

/** Canonical JSON (sorted keys, compact separators) matching the generator's emitter. */
export function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}
