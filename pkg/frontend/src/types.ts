// Wire types for the pixelbench HTTP API. The client renders these
// payloads verbatim: every number on screen comes from one of these
// fields, never from client-side recomputation.

export interface ImagePayload {
  width: number;
  height: number;
  channels: number;
  channel_order: "grayscale" | "interleaved-rgb";
  value_range: [number, number];
  pixels: number[];
  label?: number;
  index?: number;
}

export interface DatasetSummary {
  dataset_id: string;
  name: string;
  source_format: string;
  checksum: string;
  class_names: string[];
  image_shape: [number, number, number];
  train_count: number;
  test_count: number;
  per_class_train: number[];
  per_class_test: number[];
  thumbnails: ImagePayload[];
  models: ModelSummary[];
  campaigns: string[];
}

export interface TreeNodePayload {
  index: number;
  leaf: boolean;
  feature: number | null;
  threshold: number | null;
  left: number | null;
  right: number | null;
  counts: number[];
}

export interface TreePayload {
  root: number;
  depth: number;
  nodes: TreeNodePayload[];
}

export interface ModelSummary {
  model_id: string;
  name: string;
  params: {
    max_depth: number | null;
    min_samples_split: number;
    max_features: number | null;
    seed: number;
  };
  accuracy: number | null;
  feature_count: number;
  class_count: number;
}

export interface ModelPayload extends ModelSummary {
  tree: TreePayload;
  feature_importance: number[];
  feature_usage: number[];
}

export interface PerturbedPixel {
  x: number;
  y: number;
  values: number[];
}

export interface TraceStep {
  iteration: number;
  pixels: PerturbedPixel[];
  fitness: number;
  predicted_class: number;
  success: boolean;
}

export interface TracePayload {
  run_index: number;
  target_ordinal: number;
  object_id: number;
  succeeded: boolean;
  success_iteration: number | null;
  final_image: ImagePayload;
  final_perturbation: PerturbedPixel[];
  path: TraceStep[];
}

export interface OutcomeRecordPayload {
  object_id: number;
  true_class: number;
  pred_original: number;
  pred_attacked: number;
  attack_run_index: number;
}

export interface EvolvingPayload {
  iterations: number[];
  cumulative_successes: number[];
  breach_rate: number[];
  adversarial_impact_rate: number[];
  per_class_breaches: number[][];
}

export interface CampaignDetail {
  campaign_id: string;
  status: string;
  model_id?: string;
  targets?: {
    object_id: number;
    true_class: number;
    pred_original: number;
    image: ImagePayload;
  }[];
  traces?: TracePayload[];
  records?: OutcomeRecordPayload[];
  report?: MeasureReport | null;
  evolving?: EvolvingPayload;
}

export type MeasureValues = Record<string, number | null>;

export interface MeasureReport {
  context: string;
  context_label: string;
  n_objects: number;
  k_attacks: number | null;
  original: StandardStats;
  attacking: StandardStats;
  measures: { general: MeasureValues; per_class: MeasureValues[] };
  display: string[];
}

export interface StandardStats {
  accuracy: number | null;
  per_class: { precision: number | null; recall: number | null; f1: number | null }[];
  macro: { precision: number | null; recall: number | null; f1: number | null };
}

export interface SimpleStats {
  accuracy: number | null;
  per_class: { precision: number | null; recall: number | null; f1: number | null }[];
  macro: { precision: number | null; recall: number | null; f1: number | null };
  confusion: number[][];
}

export interface FlowEdge {
  parent: number;
  child: number;
  counts: Record<string, number>;
}

export interface FeatureRow {
  id: string;
  kind: "original" | "attacked";
  label: number;
  predicted: number;
  features: number[];
}

export interface RunPayload {
  selection: { originals: number; attacked: number };
  original: SimpleStats | null;
  attacking: SimpleStats | null;
  measures: {
    context: string;
    context_label: string;
    n_objects: number;
    k_attacks: number | null;
    values: { general: MeasureValues; per_class: MeasureValues[] };
    display: string[];
    original_stats: StandardStats;
    attacking_stats: StandardStats;
  } | null;
  flows: FlowEdge[];
  tree: TreePayload;
  feature_rows: FeatureRow[];
  feature_count: number;
}

export interface AttackEvent {
  type: "iteration" | "done" | "cancelled" | "error";
  target?: number;
  run?: number;
  iteration?: number;
  fitness?: number;
  success?: boolean;
  campaign_id?: string;
  records?: OutcomeRecordPayload[];
  message?: string;
}
