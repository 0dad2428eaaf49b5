/** Chat pane + tree inspector wiring.
 *
 * All dialogue state lives server-side; the client only accumulates the
 * displayed transcript. One request is in flight at a time: the composer
 * locks while a turn is being processed and unlocks when the tree pane
 * has caught up.
 */

import { ApiError, BotClient } from "./api.js";
import { renderTree } from "./treeview.js";
import type { TranscriptEntry, TreeSnapshot } from "./types.js";

const SKELETON = `
  <header class="topbar">
    <span class="bot-name">Assistant</span>
  </header>
  <div class="banner hidden">
    <span class="banner-message"></span>
    <button type="button" class="banner-action"></button>
  </div>
  <main class="panes">
    <section class="chat">
      <ul class="transcript"></ul>
      <form class="composer">
        <input class="composer-input" type="text" autocomplete="off" placeholder="Say something" />
        <button class="composer-send" type="submit">Send</button>
      </form>
    </section>
    <aside class="tree-pane">
      <div class="stack-ribbon hidden"></div>
      <div class="tree-body"></div>
    </aside>
  </main>
`;

function botNameFrom(greeting: string): string {
  const match = /digital assistant for (.+?)\./.exec(greeting);
  return match ? match[1] : "Assistant";
}

export class ChatApp {
  readonly entries: TranscriptEntry[] = [];

  private sessionId: string | null = null;
  private busy = false;

  private readonly transcriptEl: HTMLUListElement;
  private readonly inputEl: HTMLInputElement;
  private readonly sendEl: HTMLButtonElement;
  private readonly bannerEl: HTMLElement;
  private readonly bannerMessageEl: HTMLElement;
  private readonly bannerActionEl: HTMLButtonElement;
  private readonly botNameEl: HTMLElement;
  private readonly stackEl: HTMLElement;
  private readonly treeBodyEl: HTMLElement;

  constructor(private readonly root: HTMLElement, private readonly client: BotClient) {
    root.innerHTML = SKELETON;
    this.transcriptEl = root.querySelector(".transcript") as HTMLUListElement;
    this.inputEl = root.querySelector(".composer-input") as HTMLInputElement;
    this.sendEl = root.querySelector(".composer-send") as HTMLButtonElement;
    this.bannerEl = root.querySelector(".banner") as HTMLElement;
    this.bannerMessageEl = root.querySelector(".banner-message") as HTMLElement;
    this.bannerActionEl = root.querySelector(".banner-action") as HTMLButtonElement;
    this.botNameEl = root.querySelector(".bot-name") as HTMLElement;
    this.stackEl = root.querySelector(".stack-ribbon") as HTMLElement;
    this.treeBodyEl = root.querySelector(".tree-body") as HTMLElement;

    const form = root.querySelector(".composer") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
  }

  async start(): Promise<void> {
    this.hideBanner();
    try {
      const session = await this.client.createSession();
      this.sessionId = session.session_id;
      this.botNameEl.textContent = botNameFrom(session.greeting);
      this.append({ speaker: "bot", text: session.greeting, turn: 0, timestamp: Date.now() });
      await this.refreshTree();
    } catch (err) {
      this.showBanner(`Cannot reach the server: ${describe(err)}`, "Retry", () => void this.start());
    }
  }

  /** Submit the composer text (or the given text); no-op when locked or empty. */
  async submit(text?: string): Promise<void> {
    const message = (text ?? this.inputEl.value).trim();
    if (this.busy || message === "" || this.sessionId === null) return;
    this.lock(true);
    try {
      const result = await this.client.sendMessage(this.sessionId, message);
      this.append({ speaker: "user", text: message, turn: result.turn, timestamp: Date.now() });
      this.append({ speaker: "bot", text: result.reply, turn: result.turn, timestamp: Date.now() });
      this.inputEl.value = "";
      this.hideBanner();
      await this.refreshTree();
    } catch (err) {
      this.inputEl.value = message; // keep the text for a retry
      if (err instanceof ApiError && err.status === 404) {
        this.showBanner("This session is gone.", "New session", () => void this.reset());
      } else {
        this.showBanner(`Message not delivered: ${describe(err)}`, "Retry", () => void this.submit(message));
      }
    } finally {
      this.lock(false);
    }
  }

  private async reset(): Promise<void> {
    this.sessionId = null;
    this.entries.length = 0;
    this.transcriptEl.innerHTML = "";
    this.treeBodyEl.innerHTML = "";
    await this.start();
  }

  private async refreshTree(): Promise<void> {
    if (this.sessionId === null) return;
    try {
      const snapshot = await this.client.fetchTree(this.sessionId);
      this.renderTreePane(snapshot);
    } catch {
      this.renderTreePane(null);
    }
  }

  private renderTreePane(snapshot: TreeSnapshot | null): void {
    const model = snapshot === null ? null : renderTree(snapshot);
    if (model === null) {
      this.stackEl.classList.add("hidden");
      this.treeBodyEl.innerHTML = '<div class="tree-unavailable">tree unavailable</div>';
      return;
    }
    if (model.stack.length > 0) {
      this.stackEl.textContent = `Paused: ${model.stack.join(" ▸ ")}`;
      this.stackEl.classList.remove("hidden");
    } else {
      this.stackEl.textContent = "";
      this.stackEl.classList.add("hidden");
    }
    const list = document.createElement("ul");
    list.className = "tree-list";
    for (const node of model.nodes) {
      const item = document.createElement("li");
      item.className = "tree-node";
      item.dataset.id = String(node.id);
      item.dataset.kind = node.kind;
      item.style.paddingLeft = `${node.depth}em`;
      if (node.current) item.classList.add("current");
      if (node.badge) item.classList.add(`badge-${node.badge}`);
      const glyph = document.createElement("span");
      glyph.className = "glyph";
      glyph.textContent = node.glyph;
      const label = document.createElement("span");
      label.className = "node-label";
      label.textContent = node.label;
      item.append(glyph, label);
      if (node.refTarget) {
        const marker = document.createElement("span");
        marker.className = "ref-marker";
        marker.textContent = `⇢ ${node.refTarget}`;
        item.append(marker);
      }
      list.append(item);
    }
    this.treeBodyEl.innerHTML = "";
    this.treeBodyEl.append(list);
  }

  private append(entry: TranscriptEntry): void {
    const last = this.entries[this.entries.length - 1];
    if (last && entry.turn < last.turn) return; // turn indices never go backwards
    this.entries.push(entry);
    const item = document.createElement("li");
    item.className = `bubble ${entry.speaker}`;
    item.dataset.turn = String(entry.turn);
    item.textContent = entry.text;
    this.transcriptEl.append(item);
  }

  private lock(on: boolean): void {
    this.busy = on;
    this.inputEl.disabled = on;
    this.sendEl.disabled = on;
  }

  private showBanner(message: string, action: string, onAction: () => void): void {
    this.bannerMessageEl.textContent = message;
    this.bannerActionEl.textContent = action;
    this.bannerActionEl.onclick = () => {
      this.hideBanner();
      onAction();
    };
    this.bannerEl.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.bannerEl.classList.add("hidden");
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.status > 0 ? `${err.message} (${err.status})` : err.message;
  return err instanceof Error ? err.message : String(err);
}

export function mountApp(root: HTMLElement, client: BotClient): ChatApp {
  return new ChatApp(root, client);
}
