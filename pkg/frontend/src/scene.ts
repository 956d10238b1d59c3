// Top-down 2D scene projection. Geometry is computed as plain shape records
// (testable without a DOM); the canvas painter is a thin consumer.

import type { SceneDoc, WorkspaceDoc } from "./types.js";

export interface RectShape {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  label?: string;
  style: "workspace" | "object" | "target";
  outOfBounds?: boolean;
}

export interface MarkerShape {
  kind: "marker";
  x: number;
  y: number;
  label: string;
  style: "target";
  outOfBounds?: boolean;
}

export type Shape = RectShape | MarkerShape;

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

// World: x forward, y left, origin at the robot base. Canvas: x right, y down.
// The table is drawn with world +x up and world +y left.
export function projector(workspace: WorkspaceDoc, vp: Viewport) {
  const [xLo, yLo] = [workspace.min[0], workspace.min[1]];
  const [xHi, yHi] = [workspace.max[0], workspace.max[1]];
  const usableW = vp.width - 2 * vp.margin;
  const usableH = vp.height - 2 * vp.margin;
  const scale = Math.min(usableW / (yHi - yLo), usableH / (xHi - xLo));
  return (wx: number, wy: number): [number, number] => [
    vp.margin + (yHi - wy) * scale,
    vp.margin + (xHi - wx) * scale,
  ];
}

export function sceneShapes(
  scene: SceneDoc | null,
  workspace: WorkspaceDoc | null,
  moveTargets: [number, number, number][],
  vp: Viewport,
): Shape[] {
  if (workspace === null) return [];
  const project = projector(workspace, vp);
  const shapes: Shape[] = [];

  const [wx0, wy0] = project(workspace.max[0], workspace.max[1]);
  const [wx1, wy1] = project(workspace.min[0], workspace.min[1]);
  shapes.push({
    kind: "rect",
    x: Math.min(wx0, wx1),
    y: Math.min(wy0, wy1),
    w: Math.abs(wx1 - wx0),
    h: Math.abs(wy1 - wy0),
    style: "workspace",
  });

  if (scene !== null) {
    for (const obj of scene.objects) {
      const [cx, cy] = project(obj.center[0], obj.center[1]);
      const scale = Math.abs(project(1, 0)[1] - project(0, 0)[1]);
      const w = 2 * obj.half_extents[1] * scale;
      const h = 2 * obj.half_extents[0] * scale;
      shapes.push({
        kind: "rect",
        x: cx - w / 2,
        y: cy - h / 2,
        w,
        h,
        label: obj.id,
        style: "object",
      });
    }
  }

  for (const target of moveTargets) {
    const inBounds =
      target[0] >= workspace.min[0] &&
      target[0] <= workspace.max[0] &&
      target[1] >= workspace.min[1] &&
      target[1] <= workspace.max[1];
    const [mx, my] = project(target[0], target[1]);
    shapes.push({
      kind: "marker",
      x: mx,
      y: my,
      label: `[${target[0].toFixed(2)}, ${target[1].toFixed(2)}]`,
      style: "target",
      outOfBounds: !inBounds,
    });
  }
  return shapes;
}

const COLORS: Record<string, string> = {
  workspace: "#888",
  object: "#4d7ea8",
  target: "#c0392b",
};

export function paint(ctx: CanvasRenderingContext2D, shapes: Shape[], vp: Viewport) {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.font = "10px system-ui, sans-serif";
  for (const shape of shapes) {
    if (shape.kind === "rect") {
      if (shape.style === "workspace") {
        ctx.strokeStyle = COLORS.workspace;
        ctx.setLineDash([4, 3]);
        ctx.strokeRect(shape.x, shape.y, shape.w, shape.h);
        ctx.setLineDash([]);
      } else {
        ctx.fillStyle = COLORS.object + "55";
        ctx.strokeStyle = COLORS.object;
        ctx.fillRect(shape.x, shape.y, shape.w, shape.h);
        ctx.strokeRect(shape.x, shape.y, shape.w, shape.h);
        if (shape.label) {
          ctx.fillStyle = "#223";
          ctx.fillText(shape.label, shape.x, shape.y - 3);
        }
      }
    } else {
      ctx.strokeStyle = shape.outOfBounds ? "#e67e22" : COLORS.target;
      ctx.beginPath();
      ctx.arc(shape.x, shape.y, 5, 0, Math.PI * 2);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(shape.x - 8, shape.y);
      ctx.lineTo(shape.x + 8, shape.y);
      ctx.moveTo(shape.x, shape.y - 8);
      ctx.lineTo(shape.x, shape.y + 8);
      ctx.stroke();
      if (shape.outOfBounds) {
        ctx.fillStyle = "#e67e22";
        ctx.fillText("out of bounds", shape.x + 10, shape.y + 3);
      }
    }
  }
}
