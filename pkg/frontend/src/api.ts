// Thin client for the annotation HTTP API (/api/v1). All server
// communication goes through this module; nothing else touches fetch.

export interface ServerSpan {
  span_id: string;
  token_start: number;
  token_end: number;
  category: number;
  annotator: string;
}

export interface ServerSentence {
  sentence_id: number;
  text: string;
  spans: ServerSpan[];
}

export interface SentencePage {
  offset: number;
  total: number;
  sentences: ServerSentence[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function check(res: Response): Promise<Response> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body.detail) detail = String(body.detail);
    } catch {
      // non-JSON error body; keep statusText
    }
    throw new ApiError(res.status, detail);
  }
  return res;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  async categories(): Promise<{ code: number; label: string }[]> {
    const res = await check(await fetch(this.url("/categories")));
    return res.json();
  }

  async createSession(sentences: string[], annotator: string): Promise<string> {
    const res = await check(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ sentences, annotator }),
      })
    );
    return (await res.json()).session_id;
  }

  async sentences(sid: string, offset = 0, limit = 50): Promise<SentencePage> {
    const res = await check(
      await fetch(this.url(`/sessions/${sid}/sentences?offset=${offset}&limit=${limit}`))
    );
    return res.json();
  }

  async addSpan(
    sid: string,
    span: { sentence_id: number; token_start: number; token_end: number; category: number; annotator: string }
  ): Promise<string> {
    const res = await check(
      await fetch(this.url(`/sessions/${sid}/spans`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(span),
      })
    );
    return (await res.json()).span_id;
  }

  async deleteSpan(sid: string, spanId: string): Promise<void> {
    await check(
      await fetch(this.url(`/sessions/${sid}/spans/${spanId}`), { method: "DELETE" })
    );
  }

  async exportTsv(sid: string): Promise<string> {
    const res = await check(await fetch(this.url(`/sessions/${sid}/export`)));
    return res.text();
  }
}
