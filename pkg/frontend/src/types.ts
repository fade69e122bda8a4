// Shapes mirrored from the engine's JSON payloads. The UI never invents
// fields: everything rendered comes from these objects verbatim.

export type TriggerKind = "sustained_attention" | "content_revisit";
export type QuestionIntent = "explore" | "clarify";
export type CardStatus = "pending" | "accepted" | "dismissed";
export type FeedbackStatus = "accepted" | "dismissed";

export interface TriggerInfo {
  kind: TriggerKind;
  fired_at: number;
  anchor_at: number;
  similarity: number;
  threshold_used: number | null;
}

export interface CardResult {
  doc_id: string;
  score: number;
  rank: number;
  title: string | null;
  authors: string[];
  year: number | null;
  url: string | null;
}

export interface CardQuestion {
  text: string;
  intent: QuestionIntent;
  rank: number;
  results: CardResult[];
}

export interface Card {
  card_id: string;
  created_at: number;
  status: CardStatus;
  trigger: TriggerInfo;
  questions: CardQuestion[];
}

export interface MemoryEntry {
  id: string;
  layer: string;
  t: number;
  text: string;
  sources: string[];
}

export interface StateSnapshot {
  frame_count: number;
  buffer_chars: number;
  profile: MemoryEntry | null;
  session: MemoryEntry[];
  local: MemoryEntry[];
  card_count: number;
}

export type EngineEvent =
  | { type: "card"; card: Card }
  | { type: "feedback"; card_id: string; status: FeedbackStatus }
  | { type: "warning"; t: number; message: string };
