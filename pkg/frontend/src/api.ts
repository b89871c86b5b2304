// Typed client for the chat service HTTP API.

export interface BeliefEntry {
  domain: string;
  slots: Record<string, string>;
}

export interface ActPayload {
  domain: string;
  type: string;
  slots: string[];
}

export interface TurnPayload {
  turn_index: number;
  user: string;
  belief: BeliefEntry[];
  raw_belief_text: string;
  db_token: string;
  matches: Record<string, string>[];
  act: ActPayload;
  raw_act_text: string;
  response_text: string;
  lexicalized_text: string;
  mode: "chit" | "task";
  repairs: string[];
  unresolved_placeholders: string[];
}

export interface SessionPayload {
  api_version: number;
  session_id: string;
}

export interface StatePayload extends SessionPayload {
  turns: TurnPayload[];
}

export type MessagePayload = TurnPayload & SessionPayload;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ChatApi {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.base + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    const data = (await resp.json().catch(() => ({}))) as Record<string, unknown>;
    if (!resp.ok) {
      const message = typeof data.error === "string" ? data.error : resp.statusText;
      throw new ApiError(resp.status, message);
    }
    return data as T;
  }

  createSession(): Promise<SessionPayload> {
    return this.request<SessionPayload>("POST", "/api/session");
  }

  sendMessage(sessionId: string, text: string): Promise<MessagePayload> {
    return this.request<MessagePayload>(
      "POST", `/api/session/${sessionId}/message`, { text },
    );
  }

  getState(sessionId: string): Promise<StatePayload> {
    return this.request<StatePayload>("GET", `/api/session/${sessionId}/state`);
  }

  reset(sessionId: string): Promise<StatePayload> {
    return this.request<StatePayload>("POST", `/api/session/${sessionId}/reset`);
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("GET", "/healthz");
  }
}
