/**
 * Browser consultation client for the kbshell session service.
 *
 * A thin wizard over the HTTP API: every question, option, and advice
 * string shown on screen comes from a server response, never from the
 * client. Only the session id and the latest view live in memory, so
 * refreshing the page starts a fresh consultation.
 */

export interface KbInfo {
  name: string;
  title: string;
}

export interface QuestionView {
  param: string;
  prompt: string;
  ptype: 'boolean' | 'text' | 'number' | 'category';
  values: string[];
}

export interface SessionStateView {
  id: string;
  status: 'awaiting_answer' | 'finished';
  question: QuestionView | null;
  advice: string[];
  finished_reason: string | null;
}

/** The subset of the fetch Response surface the client relies on. */
export interface WireResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (path: string, init?: RequestInit) => Promise<WireResponse>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly allowed: string[] = [],
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function errorFromResponse(response: WireResponse): Promise<ApiError> {
  let message = `request failed with status ${response.status}`;
  let allowed: string[] = [];
  try {
    const data = (await response.json()) as { detail?: unknown };
    const detail = data?.detail;
    if (typeof detail === 'string' && detail) {
      message = detail;
    } else if (detail && typeof detail === 'object') {
      const shaped = detail as { message?: unknown; allowed?: unknown };
      if (typeof shaped.message === 'string') message = shaped.message;
      if (Array.isArray(shaped.allowed)) allowed = shaped.allowed.map(String);
    }
  } catch {
    // body was not JSON; keep the status-based fallback
  }
  return new ApiError(message, response.status, allowed);
}

export class ApiClient {
  private readonly doFetch: FetchLike;

  constructor(doFetch?: FetchLike) {
    this.doFetch = doFetch ?? ((path, init) => fetch(path, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'Content-Type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.doFetch(path, init);
    if (!response.ok) {
      throw await errorFromResponse(response);
    }
    return (await response.json()) as T;
  }

  listKbs(): Promise<KbInfo[]> {
    return this.request('GET', '/api/kbs');
  }

  createSession(kb: string): Promise<SessionStateView> {
    return this.request('POST', '/api/sessions', { kb });
  }

  answer(sessionId: string, value: string): Promise<SessionStateView> {
    const id = encodeURIComponent(sessionId);
    return this.request('POST', `/api/sessions/${id}/answer`, { value });
  }
}

interface Banner {
  kind: 'validation' | 'gone' | 'network';
  text: string;
  allowed: string[];
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ConsultApp {
  private kbs: KbInfo[] = [];
  private view: SessionStateView | null = null;
  private banner: Banner | null = null;
  private busy = false;
  private retryWork: (() => void) | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async start(): Promise<void> {
    await this.run(async () => {
      this.kbs = await this.api.listKbs();
      this.banner = null;
    });
  }

  async beginSession(kb: string): Promise<void> {
    await this.run(async () => {
      this.view = await this.api.createSession(kb);
      this.banner = null;
    });
  }

  async submitAnswer(value: string): Promise<void> {
    await this.run(async () => {
      const view = this.view;
      if (!view || view.status !== 'awaiting_answer') return;
      try {
        this.view = await this.api.answer(view.id, value);
        this.banner = null;
      } catch (err) {
        if (err instanceof ApiError && err.status === 422) {
          // Invalid value: keep the question on screen, explain the rejection.
          this.banner = { kind: 'validation', text: err.message, allowed: err.allowed };
          return;
        }
        if (err instanceof ApiError && (err.status === 404 || err.status === 409)) {
          // Session expired or already finished: offer a fresh start.
          this.banner = { kind: 'gone', text: err.message, allowed: [] };
          return;
        }
        throw err;
      }
    });
  }

  restart(): void {
    this.view = null;
    this.banner = null;
    this.retryWork = null;
    this.render();
  }

  /**
   * Run one server interaction with the controls disabled. At most one
   * request is in flight at a time; extra clicks while busy are dropped.
   * A thrown error (network down, unexpected status) becomes a retryable
   * banner and leaves the consultation state untouched.
   */
  private async run(work: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.render();
    try {
      await work();
      this.retryWork = null;
    } catch (err) {
      const why = err instanceof Error && err.message ? err.message : 'could not reach the server';
      this.banner = { kind: 'network', text: `Request failed: ${why}`, allowed: [] };
      this.retryWork = () => {
        void this.run(work);
      };
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private render(): void {
    const children: HTMLElement[] = [];
    if (this.banner) children.push(this.renderBanner(this.banner));
    const view = this.view;
    if (!view) {
      children.push(this.renderPicker());
    } else {
      if (view.advice.length > 0) children.push(this.renderAdvice(view.advice));
      if (view.status === 'finished') {
        children.push(this.renderFinished(view));
      } else if (view.question) {
        children.push(this.renderQuestion(view.question));
      }
    }
    if (this.busy) children.push(el('p', 'status', 'Contacting the server...'));
    this.root.replaceChildren(...children);
  }

  private button(label: string, onClick: () => void): HTMLButtonElement {
    const btn = document.createElement('button');
    btn.type = 'button';
    btn.textContent = label;
    btn.disabled = this.busy;
    btn.addEventListener('click', onClick);
    return btn;
  }

  private renderBanner(banner: Banner): HTMLElement {
    const box = el('div', `banner ${banner.kind}`);
    box.setAttribute('role', 'alert');
    box.append(el('p', 'banner-text', banner.text));
    if (banner.allowed.length > 0) {
      box.append(el('p', 'banner-allowed', `Allowed answers: ${banner.allowed.join(', ')}`));
    }
    if (banner.kind === 'gone') {
      const btn = this.button('Start over', () => this.restart());
      btn.classList.add('restart');
      box.append(btn);
    }
    if (banner.kind === 'network' && this.retryWork) {
      const retry = this.retryWork;
      const btn = this.button('Retry', () => retry());
      btn.classList.add('retry');
      box.append(btn);
    }
    return box;
  }

  private renderPicker(): HTMLElement {
    const section = el('section', 'kb-picker');
    section.append(el('h2', '', 'Choose a knowledge base'));
    const options = el('div', 'options');
    for (const kb of this.kbs) {
      const btn = this.button(kb.title, () => {
        void this.beginSession(kb.name);
      });
      btn.dataset.kb = kb.name;
      options.append(btn);
    }
    section.append(options);
    return section;
  }

  private renderAdvice(advice: string[]): HTMLElement {
    const section = el('section', 'advice');
    section.append(el('h2', '', 'Advice'));
    for (const text of advice) {
      section.append(el('div', 'advice-item', text));
    }
    return section;
  }

  private renderQuestion(question: QuestionView): HTMLElement {
    const section = el('section', 'question');
    section.append(el('p', 'prompt', question.prompt));
    const options = el('div', 'options');
    if (question.ptype === 'category') {
      for (const value of question.values) {
        options.append(this.answerButton(value));
      }
    } else if (question.ptype === 'boolean') {
      options.append(this.answerButton('yes'), this.answerButton('no'));
    } else {
      options.append(this.answerForm(question.ptype));
    }
    section.append(options);
    return section;
  }

  private answerButton(value: string): HTMLButtonElement {
    const btn = this.button(value, () => {
      void this.submitAnswer(value);
    });
    btn.dataset.value = value;
    return btn;
  }

  private answerForm(ptype: 'number' | 'text'): HTMLFormElement {
    const form = document.createElement('form');
    form.className = 'answer-form';
    const input = document.createElement('input');
    input.className = 'answer-input';
    input.name = 'answer';
    input.type = ptype === 'number' ? 'number' : 'text';
    if (ptype === 'number') input.step = 'any';
    input.disabled = this.busy;
    const submit = document.createElement('button');
    submit.type = 'submit';
    submit.textContent = 'Answer';
    submit.disabled = this.busy;
    form.append(input, submit);
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submitAnswer(input.value);
    });
    return form;
  }

  private renderFinished(view: SessionStateView): HTMLElement {
    const section = el('section', 'finished');
    const reason = view.finished_reason ?? 'done';
    section.append(el('p', 'finished-reason', `Consultation finished (${reason}).`));
    const btn = this.button('Start another consultation', () => this.restart());
    btn.classList.add('restart');
    section.append(btn);
    return section;
  }
}

export function mountConsultApp(root: HTMLElement, api?: ApiClient): ConsultApp {
  const app = new ConsultApp(root, api ?? new ApiClient());
  void app.start();
  return app;
}

const autoRoot = typeof document === 'undefined' ? null : document.getElementById('app');
if (autoRoot instanceof HTMLElement) {
  mountConsultApp(autoRoot);
}
