/** Wire types for the three bot service endpoints. */

export interface SessionOut {
  session_id: string;
  greeting: string;
}

export interface MessageOut {
  reply: string;
  session_id: string;
  turn: number;
  finished_tasks: string[];
  active_task: string | null;
}

export interface SnapshotNode {
  id: number;
  kind: string;
  label: string;
  success: boolean;
  exhausted: boolean;
  current: boolean;
  /** Target task name when kind is "Ref", otherwise null. */
  ref: string | null;
  children: number[];
}

export interface SnapshotCursor {
  task: string;
  leaf: number | null;
  entity: string | null;
}

export interface TreeSnapshot {
  nodes: SnapshotNode[];
  cursor: SnapshotCursor | null;
  stack: string[];
}

/** One line of the client-side transcript. */
export interface TranscriptEntry {
  speaker: "user" | "bot";
  text: string;
  turn: number;
  timestamp: number;
}
