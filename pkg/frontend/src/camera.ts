/**
 * Orbit camera: azimuth/elevation/distance about a look-at point, with
 * perspective projection into canvas pixels. Pure math, no DOM.
 */

import { Vec3, add, cross, scale, sub, dot } from './math3d.js';

export interface Projected {
    x: number;
    y: number;
    depth: number;     // distance along the view axis, metres
    pxPerMetre: number;  // screen scale at this depth
}

export class OrbitCamera {
    azimuthDeg = 90;
    elevationDeg = -30;
    distance = 3;
    lookat: Vec3 = [0, 0, 0];
    fovyDeg = 45;

    orbit(dAzimuthDeg: number, dElevationDeg: number): void {
        this.azimuthDeg += dAzimuthDeg;
        this.elevationDeg = Math.max(-89, Math.min(89,
            this.elevationDeg + dElevationDeg));
    }

    zoom(factor: number): void {
        this.distance = Math.max(0.05, this.distance * factor);
    }

    /** Forward unit vector from the eye toward the look-at point. */
    forward(): Vec3 {
        const az = (this.azimuthDeg * Math.PI) / 180;
        const el = (this.elevationDeg * Math.PI) / 180;
        return [
            Math.cos(el) * Math.cos(az),
            Math.cos(el) * Math.sin(az),
            Math.sin(el),
        ];
    }

    eye(): Vec3 {
        return sub(this.lookat, scale(this.forward(), this.distance));
    }

    /** Camera basis: right, up, backward (z). */
    basis(): [Vec3, Vec3, Vec3] {
        const back = scale(this.forward(), -1);
        let right = cross([0, 0, 1], back);
        const n = Math.hypot(right[0], right[1], right[2]);
        right = n > 1e-9 ? scale(right, 1 / n) : [1, 0, 0];
        const up = cross(back, right);
        return [right, up, back];
    }

    /** Frames the camera so a bounding sphere fills the view. */
    frame(center: Vec3, radius: number): void {
        this.lookat = center;
        const fovy = (this.fovyDeg * Math.PI) / 180;
        this.distance = (2.4 * Math.max(radius, 0.05)) / Math.tan(fovy / 2);
    }

    project(point: Vec3, width: number, height: number): Projected | null {
        const [right, up, back] = this.basis();
        const rel = sub(point, this.eye());
        const cam: Vec3 = [dot(rel, right), dot(rel, up), dot(rel, back)];
        if (cam[2] > -1e-3) {
            return null;      // behind the camera
        }
        const fovy = (this.fovyDeg * Math.PI) / 180;
        const focal = (0.5 * height) / Math.tan(fovy / 2);
        const invZ = -1 / cam[2];
        return {
            x: width / 2 + focal * cam[0] * invZ,
            y: height / 2 - focal * cam[1] * invZ,
            depth: -cam[2],
            pxPerMetre: focal * invZ,
        };
    }

    /**
     * Converts a screen-space drag (pixels) into a world-space vector in
     * the camera plane at the given depth.
     */
    dragToWorld(dxPx: number, dyPx: number, depth: number,
                height: number): Vec3 {
        const fovy = (this.fovyDeg * Math.PI) / 180;
        const focal = (0.5 * height) / Math.tan(fovy / 2);
        const metresPerPx = depth / focal;
        const [right, up] = this.basis();
        return add(scale(right, dxPx * metresPerPx),
                   scale(up, -dyPx * metresPerPx));
    }
}
