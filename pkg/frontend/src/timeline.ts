// Pure reconstruction of a session's visible state from its event stream.
// Everything the console shows derives from this module, so replaying a
// finished session renders identically to having watched it live.

import type {
  EventEnvelope,
  PlanStep,
  Role,
  SceneDoc,
  TimelineItem,
  WorkspaceDoc,
} from "./types.js";

const TERMINAL = new Set([
  "converged",
  "exhausted",
  "agent_error",
  "awaiting_human_timeout",
]);

export function toTimelineItem(env: EventEnvelope): TimelineItem | null {
  const body = env.body as Record<string, any>;
  switch (env.kind) {
    case "status": {
      let text = `status: ${body.status}`;
      if (body.iterations_used !== undefined) {
        text += ` after ${body.iterations_used} iteration(s)`;
      }
      if (body.error) text += ` — ${body.error}`;
      return { seq: env.seq, role: "system", text };
    }
    case "planner_output": {
      if (body.variant === "instructions") {
        const plan = (body.plan ?? []) as PlanStep[];
        return {
          seq: env.seq,
          role: "planner",
          text: `proposed a plan with ${plan.length} step(s)`,
          plan,
        };
      }
      if (body.variant === "question human") {
        return {
          seq: env.seq,
          role: "planner",
          text: `asks: ${(body.questions ?? []).join(" | ")}`,
        };
      }
      return {
        seq: env.seq,
        role: "planner",
        text: `requests a re-scan: ${body.reason ?? ""}`,
      };
    }
    case "feedback": {
      const role = (body.source ?? "system") as Role;
      return { seq: env.seq, role, text: String(body.text ?? "") };
    }
    case "verdict": {
      if (body.result === "success") {
        return { seq: env.seq, role: "simulator", text: "success", verdict: { result: "success" } };
      }
      if (body.result === "skipped") {
        return {
          seq: env.seq,
          role: "simulator",
          text: "skipped (ablation)",
          verdict: { result: "skipped" },
        };
      }
      return {
        seq: env.seq,
        role: "simulator",
        text: `${body.kind}: ${body.detail ?? ""}`,
        verdict: {
          result: "failure",
          kind: body.kind,
          step_index: body.step_index,
          detail: body.detail,
          suggestion: body.suggestion,
        },
      };
    }
    case "question":
      return {
        seq: env.seq,
        role: "planner",
        text: `waiting for an answer: ${(body.questions ?? []).join(" | ")}`,
      };
    case "answer":
      return { seq: env.seq, role: "human", text: (body.answers ?? []).join(" | ") };
    default:
      return null;
  }
}

export class SessionView {
  items: TimelineItem[] = [];
  status = "running";
  instruction = "";
  scene: SceneDoc | null = null;
  workspace: WorkspaceDoc | null = null;
  pendingQuestions: string[] | null = null;
  moveTargets: [number, number, number][] = [];
  private lastSeq = -1;

  /** Apply one envelope; duplicates and reordered events are ignored. */
  apply(env: EventEnvelope): boolean {
    if (env.seq <= this.lastSeq) return false;
    if (env.seq !== this.lastSeq + 1) {
      // a gap means the stream skipped events; surface loudly
      throw new Error(`event gap: expected seq ${this.lastSeq + 1}, got ${env.seq}`);
    }
    this.lastSeq = env.seq;
    const body = env.body as Record<string, any>;

    if (env.kind === "status") {
      this.status = String(body.status ?? this.status);
      if (body.instruction) this.instruction = String(body.instruction);
      if (body.scene) this.scene = body.scene as SceneDoc;
      if (body.workspace) this.workspace = body.workspace as WorkspaceDoc;
      if (this.status !== "awaiting_human") this.pendingQuestions = null;
    } else if (env.kind === "question") {
      this.pendingQuestions = (body.questions ?? []) as string[];
    } else if (env.kind === "answer") {
      this.pendingQuestions = null;
    } else if (env.kind === "feedback" && body.scene) {
      this.scene = body.scene as SceneDoc;
    } else if (env.kind === "planner_output" && body.variant === "instructions") {
      const steps = (body.plan ?? []) as PlanStep[];
      this.moveTargets = steps
        .filter((s): s is Extract<PlanStep, { action: "move" }> => s.action === "move")
        .map((s) => s.target);
    }

    const item = toTimelineItem(env);
    if (item !== null) this.items.push(item);
    return true;
  }

  get terminal(): boolean {
    return TERMINAL.has(this.status);
  }

  get nextSeq(): number {
    return this.lastSeq + 1;
  }
}
