/**
 * Browser application: canvas rendering loop, orbit/zoom mouse controls,
 * drag-to-perturb, and the transport bar (pause / resume / step / reset).
 *
 * The render loop always draws the latest received frame; a lagging tab
 * drops frames and never stalls the simulation.
 */

import { OrbitCamera } from './camera.js';
import { ViewerClient } from './client.js';
import { FrameMessage, perturbFromDrag } from './protocol.js';
import { renderDrawList } from './renderer.js';
import { boundingSphere, buildDrawList } from './scene.js';
import { Vec3 } from './math3d.js';

export function startApp(root: Document = document): ViewerClient {
    const canvas = root.getElementById('scene') as HTMLCanvasElement;
    const ctx = canvas.getContext('2d')!;
    const status = root.getElementById('status')!;
    const camera = new OrbitCamera();
    let framed = false;
    let paused = false;

    const params = new URLSearchParams(window.location.search);
    const url = params.get('ws') ?? 'ws://localhost:8765';

    const client = new ViewerClient(url, {
        onHello: (hello) => {
            status.textContent = `connected: ${hello.model} `
                + `(${hello.geoms.length} geoms)`;
            camera.azimuthDeg = hello.camera.azimuth;
            camera.elevationDeg = hello.camera.elevation;
            framed = false;
        },
        onFrame: (frame) => {
            paused = frame.paused;
        },
        onServerError: (error) => {
            status.textContent = `server error: ${error.error}`;
        },
        onProtocolError: (error) => {
            status.textContent = `protocol error: ${error.message}`;
        },
        onClose: () => {
            status.textContent = 'disconnected';
        },
    });

    function draw(): void {
        const frame = client.latestFrame;
        if (frame && client.hello) {
            if (!framed) {
                const sphere = boundingSphere(client.hello.geoms,
                                              frame.geoms);
                camera.frame(sphere.center, sphere.radius);
                framed = true;
            }
            const commands = buildDrawList(
                client.hello.geoms, frame.geoms, frame.rgba, camera,
                canvas.width, canvas.height);
            renderDrawList(ctx, commands, canvas.width, canvas.height);
            const reward = frame.reward === null
                ? '-' : frame.reward.toFixed(3);
            status.textContent =
                `t=${frame.time.toFixed(2)}s step=${frame.step} `
                + `reward=${reward}${frame.paused ? '  [paused]' : ''}`;
        }
        requestAnimationFrame(draw);
    }
    requestAnimationFrame(draw);

    // -- transport bar -------------------------------------------------------
    root.getElementById('pause')!.addEventListener('click', () => {
        if (paused) {
            client.resume();
        } else {
            client.pause();
        }
    });
    root.getElementById('step')!.addEventListener('click',
                                                  () => client.stepOnce());
    root.getElementById('reset')!.addEventListener('click',
                                                   () => client.reset());

    // -- mouse: orbit (left drag), zoom (wheel), perturb (shift drag) --------
    let dragging: 'orbit' | 'perturb' | null = null;
    let dragStart = { x: 0, y: 0 };
    let perturbTarget: { body: number; depth: number; point: Vec3 } | null =
        null;

    canvas.addEventListener('mousedown', (event) => {
        dragStart = { x: event.offsetX, y: event.offsetY };
        if ((event.shiftKey || event.button === 2) && client.hello
            && client.latestFrame) {
            const picked = pickGeom(event.offsetX, event.offsetY,
                                    client.latestFrame);
            if (picked !== null) {
                const geom = client.hello.geoms[picked];
                const pose = client.latestFrame.geoms[picked];
                const projected = camera.project(
                    [pose[0], pose[1], pose[2]], canvas.width,
                    canvas.height);
                perturbTarget = {
                    body: geom.body,
                    depth: projected ? projected.depth : camera.distance,
                    point: [pose[0], pose[1], pose[2]],
                };
                dragging = 'perturb';
                return;
            }
        }
        dragging = 'orbit';
    });

    canvas.addEventListener('mousemove', (event) => {
        if (dragging === 'orbit' && (event.buttons & 1)) {
            camera.orbit(-0.4 * event.movementX, -0.4 * event.movementY);
        }
    });

    const endDrag = (event: MouseEvent) => {
        if (dragging === 'perturb' && perturbTarget && client.hello) {
            const dx = event.offsetX - dragStart.x;
            const dy = event.offsetY - dragStart.y;
            const world = camera.dragToWorld(dx, dy, perturbTarget.depth,
                                             canvas.height);
            const mass = client.hello.body_mass[perturbTarget.body] || 1;
            const message = perturbFromDrag(
                perturbTarget.body, mass, world,
                perturbTarget.point as number[], 20);
            if (message) {
                client.sendRaw(message);
            }
        }
        dragging = null;
        perturbTarget = null;
    };
    canvas.addEventListener('mouseup', endDrag);
    canvas.addEventListener('mouseleave', () => { dragging = null; });
    canvas.addEventListener('contextmenu', (e) => e.preventDefault());
    canvas.addEventListener('wheel', (event) => {
        event.preventDefault();
        camera.zoom(event.deltaY > 0 ? 1.1 : 1 / 1.1);
    });

    function pickGeom(x: number, y: number,
                      frame: FrameMessage): number | null {
        let best: number | null = null;
        let bestDist = 40;      // pixel pick radius
        frame.geoms.forEach((pose, i) => {
            const projected = camera.project(
                [pose[0], pose[1], pose[2]], canvas.width, canvas.height);
            if (!projected) {
                return;
            }
            const dist = Math.hypot(projected.x - x, projected.y - y);
            if (dist < bestDist
                && client.hello!.geoms[i].kind !== 'plane'
                && client.hello!.geoms[i].body > 0) {
                best = i;
                bestDist = dist;
            }
        });
        return best;
    }

    return client;
}

if (typeof document !== 'undefined'
    && document.getElementById('scene')) {
    startApp();
}
