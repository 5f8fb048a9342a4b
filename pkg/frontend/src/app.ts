// Session orchestration: keyboard play against the service with local
// legal-set gating, live snapshots over the push channel, and a
// terminal verdict dialog. Human-baseline timing comes from the
// service's episode log; the on-screen clock is cosmetic.

import { ServiceClient, ServiceError } from "./api.js";
import { renderBoard, viewModelFrom } from "./board.js";
import {
    ACTION_DOWN,
    ACTION_LEFT,
    ACTION_RIGHT,
    ACTION_UP,
    ActionResponse,
    StateSnapshot,
    Verdict,
} from "./types.js";

const KEY_TO_ACTION: Record<string, number> = {
    ArrowRight: ACTION_RIGHT,
    ArrowUp: ACTION_UP,
    ArrowLeft: ACTION_LEFT,
    ArrowDown: ACTION_DOWN,
};

export interface AppElements {
    board: HTMLElement;
    status: HTMLElement;
    dialog: HTMLElement;
    toast: HTMLElement;
}

export class PlayApp {
    private snapshot: StateSnapshot | null = null;
    private verdict: Verdict | null = null;
    private sessionId = "";
    private inFlight = false;
    private startedAt = 0;
    private unsubscribe: () => void = () => undefined;

    constructor(
        private client: ServiceClient,
        private elements: AppElements,
    ) {}

    get currentSnapshot(): StateSnapshot | null {
        return this.snapshot;
    }

    async start(selection: { puzzle_id?: string; difficulty_level?: number },
                mode: "no_backtrack" | "backtrack"): Promise<void> {
        this.unsubscribe();
        const created = await this.client.createSession({ ...selection, mode });
        this.sessionId = created.session_id;
        this.verdict = null;
        this.startedAt = Date.now();
        this.applySnapshot(created.state_snapshot, null, false);
        this.unsubscribe = this.client.subscribe(this.sessionId, (event) => {
            this.applySnapshot(event.state_snapshot, event.verdict, event.terminated);
        });
    }

    /** Keyboard entry point; returns false when the key was ignored. */
    async handleKey(key: string): Promise<boolean> {
        const action = KEY_TO_ACTION[key];
        if (action === undefined || !this.snapshot) {
            return false;
        }
        return this.submit(action);
    }

    /** Direction tap/click entry point. */
    async submit(action: number): Promise<boolean> {
        if (!this.snapshot || this.snapshot.status !== "running" || this.inFlight) {
            return false;
        }
        if (!this.snapshot.legal.includes(action)) {
            this.flashToast("that direction is not legal here");
            return false; // gated locally, no service round-trip
        }
        this.inFlight = true;
        try {
            const response: ActionResponse = await this.client.applyAction(this.sessionId, action);
            this.applySnapshot(response.state_snapshot, response.verdict, response.terminated);
            return true;
        } catch (error) {
            if (error instanceof ServiceError) {
                this.flashToast(`${error.code}: ${error.message}`);
                return false;
            }
            throw error;
        } finally {
            this.inFlight = false;
        }
    }

    private applySnapshot(snapshot: StateSnapshot, verdict: Verdict | null,
                          terminated: boolean): void {
        // push events can race the action response; never go backwards
        if (this.snapshot && snapshot.step_count < this.snapshot.step_count) {
            return;
        }
        this.snapshot = snapshot;
        if (verdict) {
            this.verdict = verdict;
        }
        renderBoard(this.elements.board, viewModelFrom(snapshot, this.verdict));
        this.renderStatus();
        if (terminated || snapshot.status !== "running") {
            this.renderDialog();
        }
    }

    private renderStatus(): void {
        if (!this.snapshot) return;
        const seconds = Math.round((Date.now() - this.startedAt) / 1000);
        const undo = this.snapshot.mode === "backtrack" ? " (arrows back along the line undo)" : "";
        this.elements.status.textContent =
            `${this.snapshot.puzzle_id} | step ${this.snapshot.step_count} | ` +
            `${this.snapshot.status} | ${seconds}s${undo}`;
    }

    private renderDialog(): void {
        if (!this.snapshot) return;
        const dialog = this.elements.dialog;
        dialog.textContent = "";
        dialog.classList.add("open");
        const title = document.createElement("h2");
        const body = document.createElement("div");
        body.className = "dialog-body";
        if (this.snapshot.status === "solved") {
            dialog.classList.add("dialog-solved");
            title.textContent = "Solved!";
            body.textContent = `outcome reward +1 in ${this.snapshot.step_count} steps`;
        } else if (this.snapshot.status === "failed_rules" && this.verdict) {
            dialog.classList.add("dialog-failed");
            title.textContent = "End reached, rules violated";
            const list = document.createElement("ul");
            for (const violation of this.verdict.violations) {
                const item = document.createElement("li");
                item.className = `violation violation-${violation.rule.toLowerCase()}`;
                item.textContent = `${violation.rule}: ${violation.detail}`;
                list.appendChild(item);
            }
            body.appendChild(list);
        } else {
            dialog.classList.add("dialog-failed");
            title.textContent = this.snapshot.status === "deadlock"
                ? "Deadlocked, no moves remain" : "Out of steps";
            body.textContent = "outcome reward -1";
        }
        dialog.appendChild(title);
        dialog.appendChild(body);
    }

    private flashToast(message: string): void {
        this.elements.toast.textContent = message;
        this.elements.toast.classList.add("visible");
        setTimeout(() => this.elements.toast.classList.remove("visible"), 1500);
    }
}

export function bindKeyboard(app: PlayApp, target: EventTarget = window): void {
    target.addEventListener("keydown", (event) => {
        const key = (event as KeyboardEvent).key;
        if (key in KEY_TO_ACTION) {
            (event as KeyboardEvent).preventDefault();
            void app.handleKey(key);
        }
    });
}
