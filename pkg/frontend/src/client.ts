/**
 * Protocol client: connects to the simulation backend, tracks the latest
 * frame (stale frames are dropped, never queued), and sends transport and
 * perturbation commands. Works with a browser WebSocket or any
 * socket-like object with the same surface (node `ws` in tests).
 */

import {
    ErrorMessage, FrameMessage, HelloMessage, PROTOCOL_VERSION,
    ProtocolError, ServerMessage, parseServerMessage, pauseMessage,
    perturbMessage, resetMessage, resumeMessage, stepMessage,
} from './protocol.js';

export interface WebSocketLike {
    send(data: string): void;
    close(): void;
    addEventListener(type: 'open' | 'message' | 'close' | 'error',
                     listener: (event: any) => void): void;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface ClientEvents {
    onHello?: (hello: HelloMessage) => void;
    onFrame?: (frame: FrameMessage) => void;
    onServerError?: (error: ErrorMessage) => void;
    onProtocolError?: (error: ProtocolError) => void;
    onClose?: () => void;
}

export class ViewerClient {
    hello: HelloMessage | null = null;
    latestFrame: FrameMessage | null = null;
    frameCount = 0;

    private socket: WebSocketLike;
    private events: ClientEvents;

    constructor(url: string, events: ClientEvents = {},
                socketFactory?: SocketFactory) {
        this.events = events;
        const factory = socketFactory
            ?? ((u: string) => new (globalThis as any).WebSocket(u));
        this.socket = factory(url);
        this.socket.addEventListener('message', (event: any) => {
            this.handleRaw(typeof event.data === 'string'
                ? event.data : String(event.data));
        });
        this.socket.addEventListener('close',
                                     () => this.events.onClose?.());
    }

    handleRaw(raw: string): void {
        let message: ServerMessage;
        try {
            message = parseServerMessage(raw);
        } catch (error) {
            if (error instanceof ProtocolError) {
                this.events.onProtocolError?.(error);
                return;
            }
            throw error;
        }
        if (message.type === 'hello') {
            this.hello = message;
            this.events.onHello?.(message);
            return;
        }
        if (message.type === 'error') {
            this.events.onServerError?.(message);
            return;
        }
        if (this.hello
            && message.geoms.length !== this.hello.geoms.length) {
            this.events.onProtocolError?.(new ProtocolError(
                `frame has ${message.geoms.length} poses for `
                + `${this.hello.geoms.length} geoms`));
            return;
        }
        // Latest-wins: the previous frame is simply replaced.
        this.latestFrame = message;
        this.frameCount += 1;
        this.events.onFrame?.(message);
    }

    pause(): void {
        this.socket.send(pauseMessage());
    }

    resume(): void {
        this.socket.send(resumeMessage());
    }

    stepOnce(): void {
        this.socket.send(stepMessage());
    }

    reset(): void {
        this.socket.send(resetMessage());
    }

    perturb(body: number, force: number[], point: number[] | null,
            durationSubsteps: number): void {
        this.socket.send(perturbMessage(body, force, point,
                                        durationSubsteps));
    }

    sendRaw(payload: string): void {
        this.socket.send(payload);
    }

    close(): void {
        this.socket.close();
    }
}

export { PROTOCOL_VERSION };
