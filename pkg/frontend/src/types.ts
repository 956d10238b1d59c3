// Wire types mirroring the planning service's JSON payloads.

export interface EventEnvelope {
  session_id: string;
  seq: number;
  kind: "status" | "planner_output" | "feedback" | "verdict" | "question" | "answer";
  body: Record<string, unknown>;
}

export interface SessionRecord {
  session_id: string;
  created_at: number;
  status: string;
  instruction: string;
  events: number | null;
  from_disk?: boolean;
}

export interface SceneObject {
  id: string;
  label: string;
  center: [number, number, number];
  half_extents: [number, number, number];
}

export interface SceneDoc {
  objects: SceneObject[];
  viewpoint_id: number;
}

export interface WorkspaceDoc {
  min: [number, number, number];
  max: [number, number, number];
}

export type PlanStep =
  | { action: "grasp"; object: string }
  | { action: "move"; target: [number, number, number] }
  | { action: "home" };

export type Role = "planner" | "analyzer" | "simulator" | "perception" | "human" | "system";

export interface TimelineItem {
  seq: number;
  role: Role;
  text: string;
  plan?: PlanStep[];
  verdict?: {
    result: string;
    kind?: string;
    step_index?: number;
    detail?: string;
    suggestion?: string;
  };
}
