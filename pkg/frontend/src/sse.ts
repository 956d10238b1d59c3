// Minimal server-sent-events client over fetch streaming, usable from both
// browsers and node. The frame parser is a pure function so it can be tested
// without a network.

export interface SseFrame {
  id?: string;
  event?: string;
  data: string;
}

/** Consume as many complete frames as `buffer` holds; return the leftover. */
export function parseSseBuffer(buffer: string): { frames: SseFrame[]; rest: string } {
  const frames: SseFrame[] = [];
  let rest = buffer;
  for (;;) {
    const cut = rest.indexOf("\n\n");
    if (cut === -1) break;
    const raw = rest.slice(0, cut);
    rest = rest.slice(cut + 2);
    const frame: SseFrame = { data: "" };
    const dataLines: string[] = [];
    for (const line of raw.split("\n")) {
      if (line.startsWith("data:")) dataLines.push(line.slice(5).trimStart());
      else if (line.startsWith("id:")) frame.id = line.slice(3).trim();
      else if (line.startsWith("event:")) frame.event = line.slice(6).trim();
    }
    frame.data = dataLines.join("\n");
    if (frame.data.length > 0 || frame.event !== undefined) frames.push(frame);
  }
  return { frames, rest };
}

export async function* streamFrames(
  url: string,
  signal?: AbortSignal,
): AsyncGenerator<SseFrame> {
  const resp = await fetch(url, {
    signal,
    headers: { accept: "text/event-stream" },
  });
  if (!resp.ok || resp.body === null) {
    throw new Error(`event stream failed: HTTP ${resp.status}`);
  }
  const reader = resp.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { frames, rest } = parseSseBuffer(buffer);
      buffer = rest;
      for (const frame of frames) yield frame;
    }
  } finally {
    reader.releaseLock();
  }
}
