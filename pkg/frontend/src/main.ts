// Browser entry: wires the puzzle picker and keyboard to the app.

import { ServiceClient } from "./api.js";
import { PlayApp, bindKeyboard } from "./app.js";

async function boot(): Promise<void> {
    const client = new ServiceClient("");
    const app = new PlayApp(client, {
        board: document.getElementById("board")!,
        status: document.getElementById("status")!,
        dialog: document.getElementById("dialog")!,
        toast: document.getElementById("toast")!,
    });
    bindKeyboard(app);

    const picker = document.getElementById("puzzle-picker") as HTMLSelectElement;
    const modeBox = document.getElementById("mode-backtrack") as HTMLInputElement;
    const startButton = document.getElementById("start") as HTMLButtonElement;

    const puzzles = await client.listPuzzles();
    for (const puzzle of puzzles) {
        const option = document.createElement("option");
        option.value = puzzle.puzzle_id;
        option.textContent = puzzle.level !== null
            ? `${puzzle.puzzle_id} (level ${puzzle.level})`
            : puzzle.puzzle_id;
        picker.appendChild(option);
    }

    startButton.addEventListener("click", () => {
        const mode = modeBox.checked ? "backtrack" : "no_backtrack";
        void app.start({ puzzle_id: picker.value }, mode);
    });
}

void boot();
