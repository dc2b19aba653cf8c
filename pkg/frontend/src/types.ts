/** Payload shapes of the fdexplain HTTP API. */

export interface PairPayload {
  var: string;
  value: number;
}

export interface QuestionPayload {
  node_id: number;
  var: string;
  value: number;
  sentence: string;
}

export interface TreeNodePayload {
  node_id: number;
  var: string;
  value: number;
  operator_id: number | null;
  constraint_label: string;
  children: number[];
  status: string;
  pruned: boolean;
  in_candidate: boolean;
}

export interface TreePayload {
  root_id: number;
  candidate_root_id: number;
  nodes: TreeNodePayload[];
}

export interface RulePayload {
  head: PairPayload;
  body: PairPayload[];
  text: string;
}

export interface FindingPayload {
  pair: PairPayload;
  rule: RulePayload;
  operator_id: number | null;
  operator: string | null;
  constraint: string;
}

export interface DiagnosisPayload {
  definite: boolean;
  candidates: FindingPayload[];
  minimal_symptom?: PairPayload;
  rule?: RulePayload;
  operator?: string | null;
  operator_id?: number | null;
  constraint?: string;
}

export interface TranscriptEntry {
  var: string;
  value: number;
  answer: string;
}

export interface SessionPayload {
  session_id: string;
  model_id: string;
  state: "question_pending" | "done";
  strategy: string;
  created_at?: number;
  question: QuestionPayload | null;
  transcript: TranscriptEntry[];
  tree: TreePayload;
  result: DiagnosisPayload | null;
}

export interface VariablePayload {
  name: string;
  values: number[];
}

export interface ModelPayload {
  model_id: string;
  model_hash: string;
  variables: VariablePayload[];
  closure: Record<string, number[]>;
  removed: number;
}

export type AnswerWord = "yes" | "no" | "unknown";

export function pairText(p: PairPayload): string {
  return `(${p.var},${p.value})`;
}
