/**
 * Turns geom descriptions plus frame poses into 2D draw commands:
 * projected primitives, depth-sorted for painter's rendering.
 */

import { OrbitCamera } from './camera.js';
import { GeomInfo } from './protocol.js';
import { Vec3, add, matColumn, quatToMat, rotate, scale } from './math3d.js';

export interface CircleCommand {
    kind: 'circle';
    geomId: number;
    x: number;
    y: number;
    radiusPx: number;
    depth: number;
    color: string;
}

export interface StrokeCommand {
    kind: 'stroke';                      // capsules and cylinders
    geomId: number;
    x0: number;
    y0: number;
    x1: number;
    y1: number;
    widthPx: number;
    roundCap: boolean;
    depth: number;
    color: string;
}

export interface PolygonCommand {
    kind: 'polygon';                     // boxes, ellipsoids, planes
    geomId: number;
    points: Array<[number, number]>;
    depth: number;
    color: string;
    outline: boolean;
}

export type DrawCommand = CircleCommand | StrokeCommand | PolygonCommand;

export function cssColor(rgba: number[], brightness = 1): string {
    const channel = (v: number) =>
        Math.round(255 * Math.min(1, Math.max(0, v * brightness)));
    const alpha = Math.min(1, Math.max(0, rgba[3]));
    return `rgba(${channel(rgba[0])},${channel(rgba[1])},`
        + `${channel(rgba[2])},${alpha.toFixed(3)})`;
}

/** World-space bounding sphere of posed geoms, for camera auto-framing. */
export function boundingSphere(
    geoms: GeomInfo[], poses: number[][]): { center: Vec3; radius: number } {
    let min: Vec3 = [Infinity, Infinity, Infinity];
    let max: Vec3 = [-Infinity, -Infinity, -Infinity];
    let any = false;
    geoms.forEach((geom, i) => {
        if (geom.kind === 'plane') {
            return;    // planes would dominate the framing
        }
        any = true;
        for (let axis = 0; axis < 3; axis++) {
            min[axis] = Math.min(min[axis], poses[i][axis]);
            max[axis] = Math.max(max[axis], poses[i][axis]);
        }
    });
    if (!any) {
        return { center: [0, 0, 0], radius: 1 };
    }
    const center: Vec3 = [
        (min[0] + max[0]) / 2, (min[1] + max[1]) / 2, (min[2] + max[2]) / 2,
    ];
    const spread = Math.hypot(max[0] - min[0], max[1] - min[1],
                              max[2] - min[2]) / 2;
    return { center, radius: Math.max(spread + 0.2, 0.3) };
}

export function buildDrawList(
    geoms: GeomInfo[], poses: number[][], colors: number[][],
    camera: OrbitCamera, width: number, height: number): DrawCommand[] {
    const commands: DrawCommand[] = [];
    geoms.forEach((geom, i) => {
        const pose = poses[i];
        const rgba = colors[i] ?? geom.rgba;
        if (rgba[3] <= 0) {
            return;
        }
        const pos: Vec3 = [pose[0], pose[1], pose[2]];
        const mat = quatToMat(pose.slice(3));
        const command = projectGeom(geom, pos, mat, rgba, camera, width,
                                    height);
        if (command) {
            commands.push(command);
        }
    });
    commands.sort((a, b) => b.depth - a.depth);   // far to near
    return commands;
}

function projectGeom(
    geom: GeomInfo, pos: Vec3, mat: number[], rgba: number[],
    camera: OrbitCamera, width: number,
    height: number): DrawCommand | null {
    const center = camera.project(pos, width, height);
    if (!center) {
        return null;
    }
    const color = cssColor(rgba);
    switch (geom.kind) {
        case 'sphere':
            return {
                kind: 'circle', geomId: geom.id, x: center.x, y: center.y,
                radiusPx: geom.size[0] * center.pxPerMetre,
                depth: center.depth, color,
            };
        case 'ellipsoid': {
            const radius = Math.max(geom.size[0], geom.size[1],
                                    geom.size[2]);
            return {
                kind: 'circle', geomId: geom.id, x: center.x, y: center.y,
                radiusPx: radius * center.pxPerMetre,
                depth: center.depth, color,
            };
        }
        case 'capsule':
        case 'cylinder': {
            const axis = matColumn(mat, 2);      // local z in world frame
            const half = geom.size[1];
            const a = camera.project(add(pos, scale(axis, half)), width,
                                     height);
            const b = camera.project(add(pos, scale(axis, -half)), width,
                                     height);
            if (!a || !b) {
                return null;
            }
            return {
                kind: 'stroke', geomId: geom.id,
                x0: a.x, y0: a.y, x1: b.x, y1: b.y,
                widthPx: 2 * geom.size[0] * center.pxPerMetre,
                roundCap: geom.kind === 'capsule',
                depth: center.depth, color,
            };
        }
        case 'box': {
            const points = projectCorners(geom.size, pos, mat, camera,
                                          width, height);
            if (!points) {
                return null;
            }
            return {
                kind: 'polygon', geomId: geom.id,
                points: convexHull(points), depth: center.depth, color,
                outline: true,
            };
        }
        case 'plane': {
            const hx = geom.size[0] > 0 ? geom.size[0] : 5;
            const hy = geom.size[1] > 0 ? geom.size[1] : 5;
            const points = projectCorners([hx, hy, 0], pos, mat, camera,
                                          width, height);
            if (!points) {
                return null;
            }
            return {
                kind: 'polygon', geomId: geom.id,
                points: convexHull(points),
                depth: center.depth + 1e3,   // always behind bodies
                color, outline: false,
            };
        }
    }
}

function projectCorners(
    half: number[], pos: Vec3, mat: number[], camera: OrbitCamera,
    width: number, height: number): Array<[number, number]> | null {
    const points: Array<[number, number]> = [];
    for (const sx of [-1, 1]) {
        for (const sy of [-1, 1]) {
            for (const sz of half[2] === 0 ? [0] : [-1, 1]) {
                const local: Vec3 = [sx * half[0], sy * half[1],
                                     sz * (half[2] || 0)];
                const world = add(pos, rotate(mat, local));
                const projected = camera.project(world, width, height);
                if (!projected) {
                    return null;
                }
                points.push([projected.x, projected.y]);
            }
        }
    }
    return points;
}

/** Monotone-chain convex hull in screen space. */
export function convexHull(
    points: Array<[number, number]>): Array<[number, number]> {
    const sorted = [...points].sort(
        (a, b) => a[0] - b[0] || a[1] - b[1]);
    if (sorted.length <= 2) {
        return sorted;
    }
    const cross2 = (o: number[], a: number[], b: number[]) =>
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    const lower: Array<[number, number]> = [];
    for (const p of sorted) {
        while (lower.length >= 2
               && cross2(lower[lower.length - 2], lower[lower.length - 1],
                         p) <= 0) {
            lower.pop();
        }
        lower.push(p);
    }
    const upper: Array<[number, number]> = [];
    for (const p of [...sorted].reverse()) {
        while (upper.length >= 2
               && cross2(upper[upper.length - 2], upper[upper.length - 1],
                         p) <= 0) {
            upper.pop();
        }
        upper.push(p);
    }
    return lower.slice(0, -1).concat(upper.slice(0, -1));
}
