import { TurnPayload } from "../src/api";

export function makeTurn(overrides: Partial<TurnPayload> = {}): TurnPayload {
  return {
    turn_index: 0,
    user: "i am looking for a cheap hotel .",
    belief: [{ domain: "hotel", slots: { price: "cheap" } }],
    raw_belief_text: "[hotel] price cheap",
    db_token: "db_2",
    matches: [{ name: "alpha lodge", price: "cheap", phone: "01223000111" }],
    act: { domain: "hotel", type: "request", slots: ["area"] },
    raw_act_text: "[hotel] [request] area",
    response_text: "do you have a specific area you want to stay in ?",
    lexicalized_text: "do you have a specific area you want to stay in ?",
    mode: "task",
    repairs: [],
    unresolved_placeholders: [],
    ...overrides,
  };
}

export class MemoryStorage {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.has(key) ? this.data.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}

type Handler = (method: string, path: string, body: unknown) => {
  status: number;
  json: unknown;
};

export function stubFetch(handler: Handler): () => void {
  const original = globalThis.fetch;
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input.toString();
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const { status, json } = handler(method, url, body);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => json,
    } as Response;
  }) as typeof fetch;
  return () => {
    globalThis.fetch = original;
  };
}
