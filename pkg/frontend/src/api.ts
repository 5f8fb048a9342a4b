// Thin client for the session service. All game state comes from here.

import {
    ActionResponse,
    CreateSessionResponse,
    PuzzleListing,
    ServiceErrorBody,
    StateSnapshot,
} from "./types.js";

export class ServiceError extends Error {
    code: string;
    legal: number[];

    constructor(code: string, message: string, legal: number[] = []) {
        super(message);
        this.code = code;
        this.legal = legal;
    }
}

async function parseError(response: Response): Promise<ServiceError> {
    try {
        const body = (await response.json()) as ServiceErrorBody;
        return new ServiceError(body.error.code, body.error.message, body.error.legal ?? []);
    } catch {
        return new ServiceError("http_error", `service returned ${response.status}`);
    }
}

export class ServiceClient {
    constructor(
        private baseUrl: string = "",
        private fetchFn: typeof fetch = fetch.bind(globalThis),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchFn(this.baseUrl + path, init);
        if (!response.ok) {
            throw await parseError(response);
        }
        return (await response.json()) as T;
    }

    listPuzzles(): Promise<PuzzleListing[]> {
        return this.request<PuzzleListing[]>("/puzzles");
    }

    createSession(body: {
        puzzle_id?: string;
        difficulty_level?: number;
        mode: string;
        owner?: string;
    }): Promise<CreateSessionResponse> {
        return this.request<CreateSessionResponse>("/sessions", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ owner: "human", ...body }),
        });
    }

    applyAction(sessionId: string, action: number): Promise<ActionResponse> {
        return this.request<ActionResponse>(`/sessions/${sessionId}/actions`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ action }),
        });
    }

    getSnapshot(sessionId: string): Promise<{ state_snapshot: StateSnapshot }> {
        return this.request<{ state_snapshot: StateSnapshot }>(`/sessions/${sessionId}`);
    }

    /** Subscribe to the server-push snapshot stream; returns a closer. */
    subscribe(sessionId: string, onEvent: (event: ActionResponse) => void): () => void {
        if (typeof EventSource === "undefined") {
            return () => undefined; // tests and old browsers: no push channel
        }
        const source = new EventSource(`${this.baseUrl}/sessions/${sessionId}/events`);
        source.onmessage = (message) => {
            onEvent(JSON.parse(message.data) as ActionResponse);
        };
        return () => source.close();
    }
}
