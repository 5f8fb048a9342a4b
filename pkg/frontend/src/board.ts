// SVG board renderer. Visual scheme mirrors what human participants
// see: dark teal board, white path line, filled start disc, end nub,
// rule glyphs inside cells, hexagonal dots and broken gap segments on
// the line network.

import { ACTION_DELTAS, StateSnapshot, Verdict } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const COLOR_CSS: Record<string, string> = {
    R: "#e63946",
    B: "#3a86ff",
    G: "#2dc653",
    Y: "#ffd60a",
    W: "#f1faee",
    O: "#fb8500",
    P: "#9d4edd",
    K: "#212529",
};

const UNIT = 36; // px per half-step
const PAD = 28;

export interface BoardViewModel {
    grid: string[][];
    path: [number, number][];
    head: [number, number] | null;
    legal: number[];
    stepCount: number;
    mode: string;
    status: string;
    verdict: Verdict | null;
}

export function viewModelFrom(snapshot: StateSnapshot, verdict: Verdict | null): BoardViewModel {
    const path = snapshot.path
        .split("->")
        .filter((part) => part.length > 0)
        .map((part) => {
            const [x, y] = part.replace("(", "").replace(")", "").split(",");
            return [Number(x), Number(y)] as [number, number];
        });
    return {
        grid: snapshot.grid,
        path,
        head: path.length ? path[path.length - 1] : null,
        legal: snapshot.legal,
        stepCount: snapshot.step_count,
        mode: snapshot.mode,
        status: snapshot.status,
        verdict,
    };
}

function px(coord: number): number {
    return PAD + coord * UNIT;
}

function el(name: string, attrs: Record<string, string | number>): SVGElement {
    const node = document.createElementNS(SVG_NS, name);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, String(value));
    }
    return node;
}

function starPoints(cx: number, cy: number, outer: number, inner: number): string {
    const points: string[] = [];
    for (let k = 0; k < 16; k++) {
        const radius = k % 2 === 0 ? outer : inner;
        const angle = (Math.PI * k) / 8;
        points.push(`${cx + radius * Math.cos(angle)},${cy + radius * Math.sin(angle)}`);
    }
    return points.join(" ");
}

function hexPoints(cx: number, cy: number, r: number): string {
    const points: string[] = [];
    for (let k = 0; k < 6; k++) {
        const angle = (Math.PI * (2 * k + 1)) / 6;
        points.push(`${cx + r * Math.cos(angle)},${cy + r * Math.sin(angle)}`);
    }
    return points.join(" ");
}

function glyphFor(token: string, cx: number, cy: number): SVGElement[] {
    const kind = token[0];
    const parts = token.split("-");
    const color = COLOR_CSS[parts[1] ?? "W"] ?? "#ccc";
    if (kind === "o") {
        return [el("rect", {
            x: cx - 10, y: cy - 10, width: 20, height: 20, rx: 6,
            fill: color, class: "glyph glyph-square",
        })];
    }
    if (kind === "*") {
        return [el("polygon", {
            points: starPoints(cx, cy, 13, 5.5),
            fill: color, class: "glyph glyph-star",
        })];
    }
    if ("ABCD".includes(kind) && parts.length === 2) {
        const count = "ABCD".indexOf(kind) + 1;
        const nodes: SVGElement[] = [];
        const spread = 11;
        for (let k = 0; k < count; k++) {
            const off = (k - (count - 1) / 2) * spread;
            nodes.push(el("polygon", {
                points: `${cx + off},${cy - 6} ${cx + off - 6},${cy + 5} ${cx + off + 6},${cy + 5}`,
                fill: color, class: "glyph glyph-triangle",
            }));
        }
        return nodes;
    }
    if (kind === "P" || kind === "Y") {
        // filled blocks for polys, hollow outlines for ylops
        const block = 7;
        const cells = [[0, 0], [1, 0], [0, 1]];
        return cells.map(([i, j]) => el("rect", {
            x: cx - block + i * block, y: cy - block + j * block,
            width: block - 1, height: block - 1,
            fill: kind === "P" ? color : "none",
            stroke: color, "stroke-width": 1.5,
            class: kind === "P" ? "glyph glyph-poly" : "glyph glyph-ylop",
        }));
    }
    return [];
}

export function renderBoard(container: HTMLElement, vm: BoardViewModel): void {
    container.textContent = "";
    if (!vm.grid.length || !vm.grid[0].length) {
        const banner = document.createElement("div");
        banner.className = "board-error";
        banner.textContent = "malformed board snapshot";
        container.appendChild(banner);
        return;
    }
    const height = vm.grid.length;
    const width = vm.grid[0].length;
    const svg = el("svg", {
        width: 2 * PAD + (width - 1) * UNIT,
        height: 2 * PAD + (height - 1) * UNIT,
        class: "board-svg",
        role: "img",
    });

    svg.appendChild(el("rect", {
        x: 0, y: 0,
        width: 2 * PAD + (width - 1) * UNIT, height: 2 * PAD + (height - 1) * UNIT,
        rx: 14, fill: "#0f4c4c", class: "board-bg",
    }));

    // line network between adjacent path positions; gap tokens break it
    for (let y = 0; y < height; y++) {
        for (let x = 0; x < width; x++) {
            if (x % 2 === 1 && y % 2 === 1) continue;
            for (const [dx, dy] of [[1, 0], [0, 1]]) {
                const nx = x + dx, ny = y + dy;
                if (nx >= width || ny >= height) continue;
                if (nx % 2 === 1 && ny % 2 === 1) continue;
                const broken = vm.grid[y][x] === "G" || vm.grid[ny][nx] === "G";
                svg.appendChild(el("line", {
                    x1: px(x), y1: px(y), x2: px(nx), y2: px(ny),
                    stroke: "#1d3535", "stroke-width": broken ? 3 : 9,
                    "stroke-dasharray": broken ? "4 8" : "none",
                    class: broken ? "lattice gap-segment" : "lattice",
                }));
            }
        }
    }

    // glyphs and markers from the token matrix
    for (let y = 0; y < height; y++) {
        for (let x = 0; x < width; x++) {
            const token = vm.grid[y][x];
            const cx = px(x), cy = px(y);
            if (x % 2 === 1 && y % 2 === 1) {
                if (token !== "N") {
                    for (const glyph of glyphFor(token, cx, cy)) {
                        glyph.setAttribute("data-x", String(x));
                        glyph.setAttribute("data-y", String(y));
                        svg.appendChild(glyph);
                    }
                }
                continue;
            }
            if (token === ".") {
                svg.appendChild(el("polygon", {
                    points: hexPoints(cx, cy, 6), fill: "#111",
                    class: "glyph glyph-dot", "data-x": x, "data-y": y,
                }));
            } else if (token === "S") {
                svg.appendChild(el("circle", {
                    cx, cy, r: 13, fill: "#8dd9cc", class: "start-node",
                }));
            } else if (token === "E") {
                svg.appendChild(el("circle", {
                    cx, cy, r: 6, fill: "#8dd9cc", class: "end-node",
                }));
            }
        }
    }

    // the start disc sits under the line; the S token itself is always
    // covered by the path overlay (the path begins there)
    if (vm.path.length) {
        svg.appendChild(el("circle", {
            cx: px(vm.path[0][0]), cy: px(vm.path[0][1]), r: 13,
            fill: "#ffffff", class: "start-node",
        }));
    }

    // the walked path, a single white line ending at the head
    if (vm.path.length > 1) {
        svg.appendChild(el("polyline", {
            points: vm.path.map(([x, y]) => `${px(x)},${px(y)}`).join(" "),
            fill: "none", stroke: "#ffffff", "stroke-width": 9,
            "stroke-linecap": "round", "stroke-linejoin": "round",
            class: "path-line",
        }));
    }
    if (vm.head) {
        svg.appendChild(el("circle", {
            cx: px(vm.head[0]), cy: px(vm.head[1]), r: 7,
            fill: "#ffffff", class: "path-head",
        }));
    }

    // directional hints for the current legal set; the backtracking pop
    // is labeled as undo
    if (vm.head && vm.status === "running") {
        const prev = vm.path.length > 1 ? vm.path[vm.path.length - 2] : null;
        for (const action of vm.legal) {
            const [dx, dy] = ACTION_DELTAS[action];
            const tx = vm.head[0] + dx, ty = vm.head[1] + dy;
            const isUndo = prev !== null && tx === prev[0] && ty === prev[1];
            const hint = el("circle", {
                cx: px(vm.head[0]) + dx * UNIT * 0.6,
                cy: px(vm.head[1]) + dy * UNIT * 0.6,
                r: 5, fill: isUndo ? "#ffb703" : "#73e2a7", opacity: 0.9,
                class: isUndo ? "legal-hint undo-hint" : "legal-hint",
                "data-action": action,
            });
            svg.appendChild(hint);
        }
    }

    container.appendChild(svg);
}
