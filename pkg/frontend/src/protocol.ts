/**
 * Wire protocol shared with the simulation backend.
 *
 * Messages are versioned JSON over a websocket. The server sends one
 * `hello` describing the model, then a stream of `frame` messages; the
 * client sends transport commands and perturbation requests.
 */

export const PROTOCOL_VERSION = 1;

export type GeomKind =
    'plane' | 'sphere' | 'capsule' | 'cylinder' | 'box' | 'ellipsoid';

export interface GeomInfo {
    id: number;
    name: string;
    kind: GeomKind;
    size: number[];
    rgba: number[];
    body: number;
}

export interface HelloMessage {
    v: number;
    type: 'hello';
    model: string;
    nq: number;
    nv: number;
    geoms: GeomInfo[];
    bodies: string[];
    body_mass: number[];
    camera: { azimuth: number; elevation: number; distance: number | null };
}

/** Per-geom pose rows: [x, y, z, qw, qx, qy, qz]. */
export interface FrameMessage {
    v: number;
    type: 'frame';
    time: number;
    step: number;
    reward: number | null;
    paused: boolean;
    geoms: number[][];
    rgba: number[][];
}

export interface ErrorMessage {
    v: number;
    type: 'error';
    error: string;
}

export type ServerMessage = HelloMessage | FrameMessage | ErrorMessage;

export class ProtocolError extends Error {}

export function parseServerMessage(raw: string): ServerMessage {
    let data: any;
    try {
        data = JSON.parse(raw);
    } catch {
        throw new ProtocolError('message is not valid JSON');
    }
    if (data.v !== PROTOCOL_VERSION) {
        throw new ProtocolError(`unsupported protocol version ${data.v}`);
    }
    if (data.type === 'hello') {
        if (!Array.isArray(data.geoms) || !Array.isArray(data.bodies)) {
            throw new ProtocolError('malformed hello message');
        }
        return data as HelloMessage;
    }
    if (data.type === 'frame') {
        if (!Array.isArray(data.geoms) || typeof data.time !== 'number') {
            throw new ProtocolError('malformed frame message');
        }
        for (const pose of data.geoms as number[][]) {
            if (pose.length !== 7 || pose.some((x) => !Number.isFinite(x))) {
                throw new ProtocolError('frame pose is not a finite 7-vector');
            }
            const n = Math.hypot(pose[3], pose[4], pose[5], pose[6]);
            if (Math.abs(n - 1) > 1e-3) {
                throw new ProtocolError(`non-unit quaternion (|q| = ${n})`);
            }
        }
        return data as FrameMessage;
    }
    if (data.type === 'error') {
        return data as ErrorMessage;
    }
    throw new ProtocolError(`unknown message type '${data.type}'`);
}

function command(type: string, extra: object = {}): string {
    return JSON.stringify({ v: PROTOCOL_VERSION, type, ...extra });
}

export const pauseMessage = () => command('pause');
export const resumeMessage = () => command('resume');
export const stepMessage = () => command('step');
export const resetMessage = () => command('reset');

export function perturbMessage(
    body: number, force: number[], point: number[] | null,
    duration: number): string {
    if (!Number.isInteger(body) || body < 0) {
        throw new ProtocolError(`invalid body id ${body}`);
    }
    if (force.length !== 3 || force.some((x) => !Number.isFinite(x))) {
        throw new ProtocolError('force must be a finite 3-vector');
    }
    if (point !== null
        && (point.length !== 3 || point.some((x) => !Number.isFinite(x)))) {
        throw new ProtocolError('point must be a finite 3-vector');
    }
    if (!Number.isInteger(duration) || duration < 1) {
        throw new ProtocolError(`invalid duration ${duration}`);
    }
    return command('perturb', { body, force, point, duration });
}

/**
 * Builds a perturbation from a mouse drag. Returns null for an empty
 * drag. Force magnitude scales as drag length (metres) x body mass x
 * 10 / s^2, so light bodies are not launched into orbit.
 */
export function perturbFromDrag(
    body: number, bodyMass: number, dragWorld: number[],
    point: number[] | null, durationSubsteps = 20): string | null {
    const length = Math.hypot(dragWorld[0], dragWorld[1], dragWorld[2]);
    if (length === 0) {
        return null;
    }
    const scale = bodyMass * 10.0;
    const force = dragWorld.map((x) => x * scale);
    return perturbMessage(body, force, point, durationSubsteps);
}
