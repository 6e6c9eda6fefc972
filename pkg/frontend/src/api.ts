import {
  ApiError,
  ItemView,
  Method,
  PrefixList,
  RequestInFlightError,
  SessionInfo,
  Step1Response,
  SubmitResponse,
} from "./types.js";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the annotation service. Enforces the one-active-
 * request rule: overlapping calls throw RequestInFlightError instead of
 * racing the server. Every response body is also recorded verbatim in
 * `transcript` so tests can audit exactly what an annotator could see.
 */
export class ApiClient {
  readonly transcript: string[] = [];
  private inFlight = false;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  async createSession(workerId: string, method: Method): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      worker_id: workerId,
      method,
    });
  }

  async nextItem(token: string): Promise<ItemView> {
    return this.request("GET", `/sessions/${token}/next`);
  }

  async dcStep1(token: string, connective: string): Promise<Step1Response> {
    return this.request("POST", `/sessions/${token}/dc/step1`, { connective });
  }

  async dcStep2(token: string, choice: string): Promise<SubmitResponse> {
    return this.request("POST", `/sessions/${token}/dc/step2`, { choice });
  }

  async submitQa(
    token: string,
    questionSource: "s1" | "s2",
    prefix: string,
    questionText: string,
    answerText: string,
  ): Promise<SubmitResponse> {
    return this.request("POST", `/sessions/${token}/qa`, {
      question_source: questionSource,
      prefix,
      question_text: questionText,
      answer_text: answerText,
    });
  }

  async prefixes(): Promise<PrefixList> {
    return this.request("GET", "/prefixes");
  }

  private async request<T>(
    httpMethod: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    if (this.inFlight) {
      throw new RequestInFlightError();
    }
    this.inFlight = true;
    try {
      const resp = await this.fetchImpl(this.baseUrl + path, {
        method: httpMethod,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
      const text = await resp.text();
      this.transcript.push(text);
      if (!resp.ok) {
        let code = "HttpError";
        let message = text;
        try {
          const parsed = JSON.parse(text);
          code = parsed.code ?? code;
          message = parsed.message ?? message;
        } catch {
          // non-JSON error body: keep the raw text
        }
        throw new ApiError(resp.status, code, message);
      }
      return JSON.parse(text) as T;
    } finally {
      this.inFlight = false;
    }
  }
}
