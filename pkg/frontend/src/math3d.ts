/** Minimal vector/quaternion helpers for the viewer. */

export type Vec3 = [number, number, number];

export function add(a: Vec3, b: Vec3): Vec3 {
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
    return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
}

export function norm(a: Vec3): number {
    return Math.hypot(a[0], a[1], a[2]);
}

export function normalize(a: Vec3): Vec3 {
    const n = norm(a);
    return n > 0 ? scale(a, 1 / n) : [0, 0, 0];
}

/** Row-major 3x3 rotation matrix of a (w, x, y, z) quaternion. */
export function quatToMat(q: number[]): number[] {
    const n = Math.hypot(q[0], q[1], q[2], q[3]);
    const w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    return [
        1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y),
    ];
}

export function matColumn(m: number[], col: number): Vec3 {
    return [m[col], m[3 + col], m[6 + col]];
}

export function rotate(m: number[], v: Vec3): Vec3 {
    return [
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
        m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
        m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
    ];
}
