// Chat thread plus inspector panel. The thread is a pure function of the
// server's state payload: boot() and reloads rebuild the identical DOM from
// get_state, and every rendered string is shown verbatim.

import { ApiError, ChatApi, TurnPayload } from "./api";

const SESSION_KEY = "chitask.session";

export class ChatApp {
  private sessionId: string | null = null;
  private inFlight = false;

  private readonly thread: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;
  private readonly sessionChip: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ChatApi,
    private readonly storage: Pick<Storage, "getItem" | "setItem" | "removeItem">,
  ) {
    root.innerHTML = `
      <header class="bar">
        <span class="title">chitask webchat</span>
        <span class="session-chip" data-role="session"></span>
        <button type="button" data-role="reset">reset</button>
      </header>
      <main class="thread" data-role="thread"></main>
      <form class="composer" data-role="composer">
        <input type="text" data-role="input" placeholder="say something..."
               autocomplete="off" />
        <button type="submit" data-role="send">send</button>
      </form>`;
    this.thread = this.query("thread");
    this.input = this.query<HTMLInputElement>("input");
    this.sendButton = this.query<HTMLButtonElement>("send");
    this.sessionChip = this.query("session");
    this.query<HTMLFormElement>("composer").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.send(this.input.value);
    });
    this.query<HTMLButtonElement>("reset").addEventListener("click", () => {
      void this.resetSession();
    });
  }

  private query<T extends HTMLElement = HTMLElement>(role: string): T {
    const el = this.root.querySelector(`[data-role="${role}"]`);
    if (!el) throw new Error(`missing element: ${role}`);
    return el as T;
  }

  get session(): string | null {
    return this.sessionId;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  async boot(): Promise<void> {
    const stored = this.storage.getItem(SESSION_KEY);
    if (stored) {
      try {
        const state = await this.api.getState(stored);
        this.adoptSession(stored);
        this.renderThread(state.turns);
        return;
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) throw err;
        this.storage.removeItem(SESSION_KEY);
      }
    }
    const created = await this.api.createSession();
    this.adoptSession(created.session_id);
    this.renderThread([]);
  }

  private adoptSession(id: string): void {
    this.sessionId = id;
    this.storage.setItem(SESSION_KEY, id);
    this.sessionChip.textContent = `session ${id.slice(0, 8)}`;
  }

  renderThread(turns: TurnPayload[]): void {
    this.thread.textContent = "";
    for (const turn of turns) {
      this.thread.appendChild(this.userBubble(turn.user));
      this.thread.appendChild(this.botBlock(turn));
    }
  }

  async send(raw: string): Promise<void> {
    const text = raw.trim();
    if (!text || this.inFlight || !this.sessionId) return;
    this.setBusy(true);
    const pending = this.userBubble(text);
    this.thread.appendChild(pending);
    this.input.value = "";
    try {
      const turn = await this.api.sendMessage(this.sessionId, text);
      this.thread.appendChild(this.botBlock(turn));
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // expired session: recreate and ask the user to resend
        const created = await this.api.createSession();
        this.adoptSession(created.session_id);
        this.renderThread([]);
        this.thread.appendChild(this.errorBubble(
          "session expired; a new one was created - please resend"));
        this.input.value = text;
      } else if (err instanceof ApiError && err.status === 409) {
        pending.remove();
        this.thread.appendChild(this.errorBubble("wait for the current reply"));
      } else {
        const message = err instanceof Error ? err.message : String(err);
        this.thread.appendChild(this.errorBubble(message));
      }
    } finally {
      this.setBusy(false);
    }
  }

  async resetSession(): Promise<void> {
    if (!this.sessionId || this.inFlight) return;
    await this.api.reset(this.sessionId);
    this.renderThread([]);
  }

  private setBusy(busy: boolean): void {
    this.inFlight = busy;
    this.input.disabled = busy;
    this.sendButton.disabled = busy;
  }

  private userBubble(text: string): HTMLElement {
    const el = document.createElement("div");
    el.className = "bubble user";
    el.textContent = text;
    return el;
  }

  private errorBubble(text: string): HTMLElement {
    const el = document.createElement("div");
    el.className = "bubble error";
    el.textContent = text;
    return el;
  }

  private botBlock(turn: TurnPayload): HTMLElement {
    const block = document.createElement("div");
    block.className = "bot-block";
    block.dataset.turnIndex = String(turn.turn_index);

    const row = document.createElement("div");
    row.className = "bubble bot";
    const badge = document.createElement("span");
    badge.className = `badge mode-${turn.mode}`;
    badge.dataset.role = "mode-badge";
    badge.textContent = turn.mode;
    const text = document.createElement("span");
    text.className = "bot-text";
    text.textContent = turn.lexicalized_text;
    row.append(badge, text);
    block.appendChild(row);
    block.appendChild(this.inspector(turn));
    return block;
  }

  private inspector(turn: TurnPayload): HTMLElement {
    const panel = document.createElement("details");
    panel.className = "inspector";
    const summary = document.createElement("summary");
    const db = document.createElement("span");
    db.className = "chip db-chip";
    db.dataset.role = "db-token";
    db.textContent = turn.db_token;
    const act = document.createElement("span");
    act.className = "chip act-chip";
    act.dataset.role = "act";
    act.textContent = [`[${turn.act.domain}]`, `[${turn.act.type}]`, ...turn.act.slots]
      .join(" ");
    summary.append("turn internals ", db, " ", act);
    if (turn.repairs.length > 0) {
      const warn = document.createElement("span");
      warn.className = "chip repair-chip";
      warn.dataset.role = "repairs";
      warn.title = turn.repairs.join(", ");
      warn.textContent = `⚠ ${turn.repairs.join(", ")}`;
      summary.append(" ", warn);
    }
    panel.appendChild(summary);

    const body = document.createElement("div");
    body.className = "inspector-body";
    const belief = document.createElement("div");
    belief.dataset.role = "belief";
    if (turn.belief.length === 0) {
      belief.textContent = "belief: (empty)";
    } else {
      belief.textContent = "belief: " + turn.belief.map((entry) => {
        const slots = Object.entries(entry.slots)
          .map(([k, v]) => (v ? `${k}=${v}` : k)).join(" ");
        return `[${entry.domain}]${slots ? " " + slots : ""}`;
      }).join("  ");
    }
    const raw = document.createElement("div");
    raw.dataset.role = "raw-response";
    raw.textContent = `delexicalized: ${turn.response_text}`;
    body.append(belief, raw);
    panel.appendChild(body);
    return panel;
  }
}
