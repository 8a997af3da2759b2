export {
  DATA_FILE,
  DatasetValidationError,
  KEY_FILE,
  LoadedExample,
  MANIFEST_FILE,
  QUERY_FILE,
  canonicalJson,
  iterate,
  openDataset,
  validateRecord,
} from "./loader.js";
export type { DatasetHandle } from "./loader.js";
export type { DatasetManifest, DatasetRecord, RecordOption } from "./schema.js";
export { seededPermutation, splitmix32 } from "./shuffle.js";
