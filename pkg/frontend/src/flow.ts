import { ApiClient } from "./api.js";
import { ApiError, ItemView, Method } from "./types.js";

export type Screen =
  | "login"
  | "dc-step1"
  | "dc-step2"
  | "qa"
  | "done";

/**
 * Client-side mirror of the server session. The UI never computes a sense:
 * everything the annotator sees is either item text, their own input, or a
 * server-provided connective/prefix string rendered verbatim. State only
 * transitions on successful server responses.
 */
export interface UiSessionState {
  screen: Screen;
  token: string | null;
  method: Method | null;
  item: ItemView | null;
  /** DC step-2 options, byte-for-byte as the server sent them. */
  options: string[];
  /** QA prefix inventory for the dropdown. */
  prefixes: string[];
  questionSource: "s1" | "s2" | null;
  prefix: string | null;
  questionText: string;
  /** Single submission per item, enforced client-side too. */
  submitted: boolean;
  busy: boolean;
  error: string | null;
}

function initialState(): UiSessionState {
  return {
    screen: "login",
    token: null,
    method: null,
    item: null,
    options: [],
    prefixes: [],
    questionSource: null,
    prefix: null,
    questionText: "",
    submitted: false,
    busy: false,
    error: null,
  };
}

export class AnnotationFlow {
  state: UiSessionState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (s: UiSessionState) => void = () => {},
  ) {}

  /** The QA answer is always the sentence not being asked about. */
  answerText(): string {
    const { item, questionSource } = this.state;
    if (!item || !questionSource) return "";
    return questionSource === "s1" ? item.s2 : item.s1;
  }

  async start(workerId: string, method: Method): Promise<void> {
    await this.guarded(async () => {
      const session = await this.api.createSession(workerId, method);
      this.state.token = session.token;
      this.state.method = session.method;
      if (method === "qa") {
        this.state.prefixes = (await this.api.prefixes()).prefixes;
      }
      await this.fetchItem();
    });
  }

  async submitConnective(text: string): Promise<void> {
    if (this.state.screen !== "dc-step1") return;
    await this.guarded(async () => {
      const resp = await this.api.dcStep1(this.token(), text);
      this.state.options = resp.options;
      this.state.screen = "dc-step2";
    });
  }

  async chooseOption(option: string): Promise<void> {
    if (this.state.screen !== "dc-step2" || this.state.submitted) return;
    await this.guarded(async () => {
      this.state.submitted = true;
      try {
        await this.api.dcStep2(this.token(), option);
      } catch (err) {
        this.state.submitted = false;
        throw err;
      }
      await this.fetchItem();
    });
  }

  selectSentence(source: "s1" | "s2"): void {
    this.state.questionSource = source;
    this.notify();
  }

  selectPrefix(prefix: string): void {
    const previous = this.state.prefix;
    this.state.prefix = prefix;
    // seed the editable question text, but never clobber manual edits
    const untouched =
      this.state.questionText === "" ||
      (previous !== null && this.state.questionText === `${previous} `);
    if (untouched) {
      this.state.questionText = `${prefix} `;
    }
    this.notify();
  }

  setQuestionText(text: string): void {
    this.state.questionText = text;
    this.notify();
  }

  qaReady(): boolean {
    return (
      this.state.screen === "qa" &&
      !this.state.submitted &&
      this.state.questionSource !== null &&
      this.state.prefix !== null
    );
  }

  async submitQuestion(): Promise<void> {
    if (!this.qaReady()) return;
    await this.guarded(async () => {
      this.state.submitted = true;
      try {
        await this.api.submitQa(
          this.token(),
          this.state.questionSource!,
          this.state.prefix!,
          this.state.questionText,
          this.answerText(),
        );
      } catch (err) {
        this.state.submitted = false;
        throw err;
      }
      await this.fetchItem();
    });
  }

  private async fetchItem(): Promise<void> {
    try {
      const item = await this.api.nextItem(this.token());
      this.state.item = item;
      this.state.screen = this.state.method === "dc" ? "dc-step1" : "qa";
      this.state.options = [];
      this.state.questionSource = null;
      this.state.prefix = null;
      this.state.questionText = "";
      this.state.submitted = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        // batch complete: show the completion screen, drop the token
        this.state.screen = "done";
        this.state.token = null;
        this.state.item = null;
        return;
      }
      throw err;
    }
  }

  private token(): string {
    if (this.state.token === null) {
      throw new Error("no active session");
    }
    return this.state.token;
  }

  private async guarded(fn: () => Promise<void>): Promise<void> {
    if (this.state.busy) return;
    this.state.busy = true;
    this.state.error = null;
    this.notify();
    try {
      await fn();
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  private notify(): void {
    this.onChange(this.state);
  }
}
