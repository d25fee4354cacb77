// Typed client for the labeling-session HTTP API.

export interface ItemPayload {
  text?: string;
  image?: string;
}

export interface TaskDto {
  pair: [number, number];
  left: ItemPayload;
  right: ItemPayload;
}

export interface ProgressDto {
  answered: number;
  total: number;
  iteration: number;
  k: number;
  queried_pairs: number;
}

export interface TasksDto extends ProgressDto {
  tasks: TaskDto[];
}

export interface StateDto {
  id: string;
  n: number;
  iteration: number;
  k: number;
  labels: number[];
  queried_pairs: number;
  batch: { answered: number; total: number };
  ari: number | null;
}

export interface SessionConfig {
  acquisition?: string;
  batch?: number;
  seed?: number;
  truth_labels?: number[];
  initial_similarities?: [number, number, number][];
}

/** The session endpoints the UI consumes; implemented by ApiClient over HTTP
 * and by the in-memory mock in tests. */
export interface Api {
  getTasks(sid: string, count: number): Promise<TasksDto>;
  submitAnswer(sid: string, pair: [number, number],
               value: number): Promise<ProgressDto>;
  getState(sid: string): Promise<StateDto>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class NetworkError extends Error {}

async function request<T>(fetchFn: typeof fetch, url: string,
                          init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetchFn(url, init);
  } catch (err) {
    throw new NetworkError(String(err));
  }
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient implements Api {
  constructor(private baseUrl: string = "",
              private fetchFn: typeof fetch = fetch) {}

  createSession(items: ItemPayload[], config: SessionConfig = {},
                id?: string): Promise<{ id: string; n: number; batch_size: number }> {
    return request(this.fetchFn, `${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, items, config }),
    });
  }

  getTasks(sid: string, count: number): Promise<TasksDto> {
    return request(this.fetchFn,
                   `${this.baseUrl}/sessions/${sid}/tasks?count=${count}`);
  }

  submitAnswer(sid: string, pair: [number, number],
               value: number): Promise<ProgressDto> {
    return request(this.fetchFn, `${this.baseUrl}/sessions/${sid}/answers`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pair, value }),
    });
  }

  getState(sid: string): Promise<StateDto> {
    return request(this.fetchFn, `${this.baseUrl}/sessions/${sid}/state`);
  }
}
