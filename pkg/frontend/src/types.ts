// Shapes of the annotation-service JSON API.

export type Method = "dc" | "qa";

export interface SessionInfo {
  token: string;
  method: Method;
  batch_size: number;
}

export interface ItemView {
  item_id: string;
  genre: string;
  s1: string;
  s2: string;
  context: string | null;
  position: number;
  total: number;
}

export interface Step1Response {
  options: string[];
}

export interface SubmitResponse {
  status: string;
  item_id: string;
}

export interface PrefixList {
  prefixes: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class RequestInFlightError extends Error {
  constructor() {
    super("a request is already in flight");
  }
}
