/**
 * Dataset schema constants mirrored from the generator: task kinds, option
 * cardinalities, the verbatim question-template bank, and speed displays.
 * The loader never reinterprets semantics; these tables let it re-check every
 * record invariant the generator's own loader enforces.
 */

export const OPTION_CARDINALITY: Record<string, number> = {
  counting: 4,
  consistency: 3,
  localization_first: 4,
  localization_last: 4,
  localization_exist: 4,
  adjust_or_not: 3,
  rearrangement: 4,
  speed: 4,
};

export const LABELS = "ABCD";
export const YES = "Yes";
export const NO = "No";
export const NOT_SURE = "Not sure";
export const NO_APPEARANCE = "It does not appear";

export const SPEED_DISPLAY: Record<string, string> = {
  fast: "fast",
  slow: "slow",
  normal: "normal",
  no_speed: "no speed",
};

export const DEFAULT_TEMPLATES: Record<string, string[]> = {
  counting: ["Could you please tell me how many frames I have inputted?"],
  consistency: ["Are the two frames I provided exactly the same?"],
  localization_first: [
    "In the sequence of frames provided, on which frame does the object first appear?",
  ],
  localization_last: [
    "In the sequence of frames provided, on which frame does the object last appear?",
  ],
  localization_exist: [
    "In the sequence of frames provided, in which frames does the object exist?",
  ],
  adjust_or_not: [
    "These frames are all from the same video and capture the dynamic process of an action. " +
      "The order of these frames may have been mixed up. Do we need to rearrange them to match " +
      "the normal execution sequence of the action?",
  ],
  rearrangement: [
    "These frames are all from the same video and depict the dynamic process of an action. " +
      "The order of these frames may have been mixed up. Based on the connections between the " +
      "image frames, which of the following options represents the most appropriate sequence?",
  ],
  speed: ["What is the rate of movement in the video?"],
};

export const STRICT_KINDS = new Set([
  "counting",
  "localization_first",
  "localization_last",
  "localization_exist",
]);
export const NONDECREASING_KINDS = new Set(["consistency", "speed"]);
export const SHUFFLED_KINDS = new Set(["adjust_or_not", "rearrangement"]);

export interface RecordOption {
  label: string;
  text: string;
}

export interface DatasetRecord {
  id: string;
  kind: string;
  video_id: string;
  frame_refs: string[];
  presented_indices: number[];
  question: string;
  options: RecordOption[];
  answer?: string;
  meta: Record<string, unknown>;
  generator_version: string;
  dataset_seed: number;
}

export interface DatasetManifest {
  version: number;
  dataset_seed: number;
  counts: Record<string, number>;
  videos: string[];
  skips: [string, string][];
  stripped?: boolean;
}
