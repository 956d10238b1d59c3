import { describe, expect, it } from "vitest";

import { parseSseBuffer } from "../src/sse.js";

describe("parseSseBuffer", () => {
  it("parses a complete frame", () => {
    const { frames, rest } = parseSseBuffer(
      'id: 3\nevent: feedback\ndata: {"seq": 3}\n\n',
    );
    expect(frames).toEqual([{ id: "3", event: "feedback", data: '{"seq": 3}' }]);
    expect(rest).toBe("");
  });

  it("keeps incomplete frames in the buffer", () => {
    const { frames, rest } = parseSseBuffer("id: 0\ndata: {");
    expect(frames).toEqual([]);
    expect(rest).toBe("id: 0\ndata: {");
  });

  it("parses several frames and leaves the tail", () => {
    const text = "data: a\n\ndata: b\n\nid: 9\ndata:";
    const { frames, rest } = parseSseBuffer(text);
    expect(frames.map((f) => f.data)).toEqual(["a", "b"]);
    expect(rest).toBe("id: 9\ndata:");
  });

  it("joins multi-line data fields", () => {
    const { frames } = parseSseBuffer("data: line1\ndata: line2\n\n");
    expect(frames[0].data).toBe("line1\nline2");
  });

  it("ignores comment-only frames", () => {
    const { frames } = parseSseBuffer(": keepalive\n\ndata: x\n\n");
    expect(frames).toHaveLength(1);
    expect(frames[0].data).toBe("x");
  });
});
