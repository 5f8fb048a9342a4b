// Wire shapes of the session service. The UI derives everything from
// these snapshots and never evaluates puzzle rules locally.

export interface StateSnapshot {
    session_id: string;
    puzzle_id: string;
    mode: "no_backtrack" | "backtrack";
    status: "running" | "solved" | "failed_rules" | "deadlock" | "step_limit";
    step: number;
    step_count: number;
    position: [number, number];
    legal: number[];
    grid: string[][];
    path: string;
    observation_text: string;
}

export interface Verdict {
    satisfied: boolean;
    violations: {
        rule: string;
        location: { position?: [number, number]; cell?: [number, number] };
        detail: string;
    }[];
}

export interface RewardBreakdown {
    outcome: number;
    process: number;
    total: number;
}

export interface CreateSessionResponse {
    session_id: string;
    state_snapshot: StateSnapshot;
    observation_text: string;
}

export interface ActionResponse {
    state_snapshot: StateSnapshot;
    reward: RewardBreakdown;
    terminated: boolean;
    verdict: Verdict | null;
}

export interface PuzzleListing {
    puzzle_id: string;
    cell_cols: number;
    cell_rows: number;
    difficulty_score: number | null;
    level: number | null;
}

export interface ServiceErrorBody {
    error: { code: string; message: string; legal?: number[] };
}

// digit encoding fixed by the engine: 0=RIGHT 1=UP 2=LEFT 3=DOWN
export const ACTION_RIGHT = 0;
export const ACTION_UP = 1;
export const ACTION_LEFT = 2;
export const ACTION_DOWN = 3;

export const ACTION_DELTAS: Record<number, [number, number]> = {
    [ACTION_RIGHT]: [1, 0],
    [ACTION_UP]: [0, -1],
    [ACTION_LEFT]: [-1, 0],
    [ACTION_DOWN]: [0, 1],
};

export const ACTION_NAMES: Record<number, string> = {
    [ACTION_RIGHT]: "right",
    [ACTION_UP]: "up",
    [ACTION_LEFT]: "left",
    [ACTION_DOWN]: "down",
};
