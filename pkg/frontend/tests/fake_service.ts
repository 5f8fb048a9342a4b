// Fetch stub backed by snapshots recorded from the real Python service
// (see scripts/record_fixtures.py). The UI under test talks only to the
// wire shapes; this keeps it blind to engine internals while the
// fixture keeps the wire truthful.

import fixture from "./fixtures/golden_session.json";

type Fixture = typeof fixture;

export interface FakeService {
    fetchFn: typeof fetch;
    calls: { url: string; method: string; body: unknown }[];
    actionCalls(): number;
}

export function fakeServiceFrom(data: Fixture, session: "golden" | "failing" = "golden"): FakeService {
    const created = session === "golden" ? data.create : data.create_failing;
    const script = session === "golden" ? data.actions : data.failed_actions;
    let cursor = 0;
    const calls: { url: string; method: string; body: unknown }[] = [];

    const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
        const url = String(input);
        const method = init?.method ?? "GET";
        const body = init?.body ? JSON.parse(String(init.body)) : null;
        calls.push({ url, method, body });

        const json = (payload: unknown, status = 200) =>
            new Response(JSON.stringify(payload), {
                status,
                headers: { "Content-Type": "application/json" },
            });

        if (url.endsWith("/puzzles") && method === "GET") {
            return json(data.puzzles);
        }
        if (url.endsWith("/sessions") && method === "POST") {
            cursor = 0;
            return json(created);
        }
        if (url.includes("/actions") && method === "POST") {
            if (cursor >= script.length) {
                return json(data.episode_over.body, data.episode_over.status_code);
            }
            const expected = script[cursor];
            if (expected.action !== (body as { action: number }).action) {
                throw new Error(
                    `fixture expected action ${expected.action}, UI sent ${(body as { action: number }).action}`);
            }
            cursor += 1;
            return json(expected.response);
        }
        throw new Error(`fake service has no route for ${method} ${url}`);
    }) as typeof fetch;

    return {
        fetchFn,
        calls,
        actionCalls: () => calls.filter((c) => c.url.includes("/actions")).length,
    };
}

export { fixture };
