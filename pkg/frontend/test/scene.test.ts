import { describe, expect, it } from 'vitest';

import { OrbitCamera } from '../src/camera.js';
import { quatToMat, rotate } from '../src/math3d.js';
import { GeomInfo } from '../src/protocol.js';
import { Context2DLike, renderDrawList } from '../src/renderer.js';
import {
    boundingSphere, buildDrawList, convexHull, cssColor,
} from '../src/scene.js';

describe('math3d', () => {
    it('identity quaternion gives the identity matrix', () => {
        const mat = quatToMat([1, 0, 0, 0]);
        expect(mat).toEqual([1, 0, 0, 0, 1, 0, 0, 0, 1]);
    });

    it('matches the reference half-half quaternion', () => {
        const mat = quatToMat([0.5, 0.5, 0.5, 0.5]);
        const expected = [0, 0, 1, 1, 0, 0, 0, 1, 0];
        mat.forEach((value, i) =>
            expect(value).toBeCloseTo(expected[i], 12));
    });

    it('rotates vectors', () => {
        const mat = quatToMat([Math.SQRT1_2, 0, 0, Math.SQRT1_2]);
        const v = rotate(mat, [1, 0, 0]);
        expect(v[0]).toBeCloseTo(0, 12);
        expect(v[1]).toBeCloseTo(1, 12);
    });
});

describe('OrbitCamera', () => {
    it('projects the look-at point to the canvas centre', () => {
        const camera = new OrbitCamera();
        camera.frame([0.5, -0.2, 1.0], 1.0);
        const projected = camera.project([0.5, -0.2, 1.0], 640, 480)!;
        expect(projected.x).toBeCloseTo(320, 6);
        expect(projected.y).toBeCloseTo(240, 6);
        expect(projected.depth).toBeCloseTo(camera.distance, 9);
    });

    it('culls points behind the camera', () => {
        const camera = new OrbitCamera();
        camera.frame([0, 0, 0], 1.0);
        const behind = camera.eye().map(
            (v, i) => v - camera.forward()[i]) as [number, number, number];
        expect(camera.project(behind, 640, 480)).toBeNull();
    });

    it('orbit changes the viewpoint but not the target', () => {
        const camera = new OrbitCamera();
        camera.frame([0, 0, 0], 1.0);
        const before = camera.eye();
        camera.orbit(30, 10);
        expect(camera.eye()).not.toEqual(before);
        const projected = camera.project([0, 0, 0], 640, 480)!;
        expect(projected.x).toBeCloseTo(320, 6);
        expect(projected.y).toBeCloseTo(240, 6);
    });

    it('drag vectors live in the camera plane', () => {
        const camera = new OrbitCamera();
        camera.frame([0, 0, 0], 1.0);
        const world = camera.dragToWorld(120, 0, camera.distance, 480);
        expect(Math.abs(world[0] * camera.forward()[0]
            + world[1] * camera.forward()[1]
            + world[2] * camera.forward()[2])).toBeLessThan(1e-9);
    });
});

const GEOMS: GeomInfo[] = [
    { id: 0, name: 'ball', kind: 'sphere', size: [0.1, 0, 0],
      rgba: [0.2, 0.4, 0.9, 1], body: 1 },
    { id: 1, name: 'rod', kind: 'capsule', size: [0.02, 0.2, 0],
      rgba: [0.8, 0.3, 0.2, 1], body: 2 },
    { id: 2, name: 'crate', kind: 'box', size: [0.1, 0.1, 0.1],
      rgba: [0.5, 0.5, 0.5, 1], body: 3 },
    { id: 3, name: 'floor', kind: 'plane', size: [2, 2, 0.1],
      rgba: [0.3, 0.3, 0.3, 1], body: 0 },
];

const POSES = [
    [0, 0, 0.5, 1, 0, 0, 0],
    [0.4, 0, 0.5, 1, 0, 0, 0],
    [-0.4, 0, 0.5, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0],
];

function makeScene() {
    const camera = new OrbitCamera();
    const sphere = boundingSphere(GEOMS, POSES);
    camera.frame(sphere.center, sphere.radius);
    return { camera };
}

describe('buildDrawList', () => {
    it('produces one primitive per visible geom, far to near', () => {
        const { camera } = makeScene();
        const colors = GEOMS.map((g) => g.rgba);
        const commands = buildDrawList(GEOMS, POSES, colors, camera, 640,
                                       480);
        expect(commands.length).toBe(4);
        const kinds = commands.map((c) => c.kind).sort();
        expect(kinds).toEqual(['circle', 'polygon', 'polygon', 'stroke']);
        for (let i = 1; i < commands.length; i++) {
            expect(commands[i].depth).toBeLessThanOrEqual(
                commands[i - 1].depth);
        }
        // the plane is pushed behind everything
        expect(commands[0].kind).toBe('polygon');
    });

    it('skips fully transparent geoms', () => {
        const { camera } = makeScene();
        const colors = GEOMS.map((g, i) =>
            i === 0 ? [1, 0, 0, 0] : g.rgba);
        const commands = buildDrawList(GEOMS, POSES, colors, camera, 640,
                                       480);
        expect(commands.length).toBe(3);
        expect(commands.every((c) => c.geomId !== 0)).toBe(true);
    });

    it('reward-modulated colors brighten the target command', () => {
        const { camera } = makeScene();
        const dim = GEOMS.map((g, i) =>
            i === 0 ? [0.27, 0.06, 0.06, 1] : g.rgba);
        const bright = GEOMS.map((g, i) =>
            i === 0 ? [0.9, 0.2, 0.2, 1] : g.rgba);
        const dimCommand = buildDrawList(GEOMS, POSES, dim, camera, 640,
                                         480).find((c) => c.geomId === 0)!;
        const brightCommand = buildDrawList(GEOMS, POSES, bright, camera,
                                            640, 480)
            .find((c) => c.geomId === 0)!;
        expect(dimCommand.color).not.toBe(brightCommand.color);
        expect(cssColor([0.9, 0.2, 0.2, 1]))
            .toBe('rgba(230,51,51,1.000)');
    });
});

describe('convexHull', () => {
    it('hulls a square with an interior point', () => {
        const hull = convexHull([[0, 0], [2, 0], [2, 2], [0, 2], [1, 1]]);
        expect(hull.length).toBe(4);
        expect(hull).toContainEqual([0, 0]);
        expect(hull.some(([x, y]) => x === 1 && y === 1)).toBe(false);
    });
});

class RecordingContext implements Context2DLike {
    fillStyle: any = '';
    strokeStyle: any = '';
    lineWidth = 0;
    lineCap: CanvasLineCap = 'butt';
    calls: string[] = [];

    fillRect(x: number, y: number, w: number, h: number): void {
        this.calls.push(`fillRect(${x},${y},${w},${h}):${this.fillStyle}`);
    }
    beginPath(): void { this.calls.push('beginPath'); }
    arc(x: number, y: number, r: number): void {
        this.calls.push(
            `arc(${x.toFixed(2)},${y.toFixed(2)},${r.toFixed(2)})`);
    }
    moveTo(x: number, y: number): void {
        this.calls.push(`moveTo(${x.toFixed(2)},${y.toFixed(2)})`);
    }
    lineTo(x: number, y: number): void {
        this.calls.push(`lineTo(${x.toFixed(2)},${y.toFixed(2)})`);
    }
    closePath(): void { this.calls.push('closePath'); }
    fill(): void { this.calls.push(`fill:${this.fillStyle}`); }
    stroke(): void {
        this.calls.push(`stroke:${this.strokeStyle}:${this.lineWidth}`);
    }
}

describe('renderDrawList', () => {
    it('identical frames render identical command streams', () => {
        const { camera } = makeScene();
        const colors = GEOMS.map((g) => g.rgba);
        const commands = buildDrawList(GEOMS, POSES, colors, camera, 640,
                                       480);
        const a = new RecordingContext();
        const b = new RecordingContext();
        renderDrawList(a, commands, 640, 480);
        renderDrawList(b, commands, 640, 480);
        expect(a.calls).toEqual(b.calls);
        expect(a.calls[0]).toContain('fillRect(0,0,640,480)');
    });
});
