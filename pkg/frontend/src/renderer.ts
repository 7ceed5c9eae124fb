/**
 * Painter's-order renderer against a minimal 2D-context interface, so the
 * same code drives a browser canvas and a recording context in tests.
 */

import { DrawCommand } from './scene.js';

export interface Context2DLike {
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    lineCap: CanvasLineCap;
    fillRect(x: number, y: number, w: number, h: number): void;
    beginPath(): void;
    arc(x: number, y: number, r: number, a0: number, a1: number): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    closePath(): void;
    fill(): void;
    stroke(): void;
}

export const BACKGROUND = 'rgb(38,40,46)';

export function renderDrawList(
    ctx: Context2DLike, commands: DrawCommand[], width: number,
    height: number): void {
    ctx.fillStyle = BACKGROUND;
    ctx.fillRect(0, 0, width, height);
    for (const command of commands) {
        switch (command.kind) {
            case 'circle':
                ctx.fillStyle = command.color;
                ctx.beginPath();
                ctx.arc(command.x, command.y, Math.max(command.radiusPx, 0.5),
                        0, 2 * Math.PI);
                ctx.fill();
                break;
            case 'stroke':
                ctx.strokeStyle = command.color;
                ctx.lineWidth = Math.max(command.widthPx, 1);
                ctx.lineCap = command.roundCap ? 'round' : 'butt';
                ctx.beginPath();
                ctx.moveTo(command.x0, command.y0);
                ctx.lineTo(command.x1, command.y1);
                ctx.stroke();
                break;
            case 'polygon': {
                if (command.points.length < 3) {
                    break;
                }
                ctx.fillStyle = command.color;
                ctx.beginPath();
                ctx.moveTo(command.points[0][0], command.points[0][1]);
                for (const [x, y] of command.points.slice(1)) {
                    ctx.lineTo(x, y);
                }
                ctx.closePath();
                ctx.fill();
                if (command.outline) {
                    ctx.strokeStyle = 'rgba(0,0,0,0.35)';
                    ctx.lineWidth = 1;
                    ctx.stroke();
                }
                break;
            }
        }
    }
}
