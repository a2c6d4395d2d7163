// HTTP client for the collection service. One instance per capability
// token; the request trace doubles as an audit log of which endpoints a
// pane actually touched.

import {
    AgentMessageAck,
    AgentView,
    agentMessageAckSchema,
    agentViewSchema,
    CallOutcome,
    callAckSchema,
    ChecklistItem,
    checklistAckSchema,
    ChecklistView,
    checklistViewSchema,
    FinalizeAck,
    finalizeAckSchema,
    Manual,
    manualSchema,
    MessageAck,
    messageAckSchema,
    reopenAckSchema,
    SearchHit,
    searchHitSchema,
    SelectAck,
    selectAckSchema,
    ServiceError,
    SessionHandle,
    sessionHandleSchema,
    UserView,
    userViewSchema,
} from './wire.js';
import { z } from 'zod';

export interface TraceEntry {
    method: string;
    path: string;
}

// narrow fetch surface so tests can swap in a recorder or a stub server
export type FetchLike = (
    url: string,
    init: { method: string; headers: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; text(): Promise<string> }>;

interface Parser<T> {
    parse(value: unknown): T;
}

export class CollectClient {
    readonly trace: TraceEntry[] = [];
    private readonly fetchImpl: FetchLike;

    constructor(
        readonly baseUrl: string,
        private readonly token = '',
        fetchImpl?: FetchLike,
    ) {
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }

    withToken(token: string): CollectClient {
        return new CollectClient(this.baseUrl, token, this.fetchImpl);
    }

    private async request(
        method: string,
        path: string,
        body?: Record<string, unknown>,
    ): Promise<string> {
        this.trace.push({ method, path });
        const headers: Record<string, string> = {};
        if (this.token) {
            headers['x-collect-token'] = this.token;
        }
        let encoded: string | undefined;
        if (body !== undefined) {
            headers['content-type'] = 'application/json';
            encoded = JSON.stringify({ v: 1, ...body });
        }
        const resp = await this.fetchImpl(this.baseUrl + path, {
            method,
            headers,
            body: encoded,
        });
        const text = await resp.text();
        if (!resp.ok) {
            let kind = 'ServiceError';
            let message = text;
            try {
                const doc = JSON.parse(text);
                kind = doc?.error?.type ?? kind;
                message = doc?.error?.message ?? message;
            } catch {
                // non-JSON error body, keep the raw text
            }
            throw new ServiceError(kind, message, resp.status);
        }
        return text;
    }

    private async json<T>(
        parser: Parser<T>,
        method: string,
        path: string,
        body?: Record<string, unknown>,
    ): Promise<T> {
        return parser.parse(JSON.parse(await this.request(method, path, body)));
    }

    createSession(opts: {
        goalChecklist?: string;
        manualId?: string;
        seed?: number;
    } = {}): Promise<SessionHandle> {
        const body: Record<string, unknown> = {};
        if (opts.goalChecklist !== undefined) body.goal_checklist = opts.goalChecklist;
        if (opts.manualId !== undefined) body.manual_id = opts.manualId;
        if (opts.seed !== undefined) body.seed = opts.seed;
        return this.json(sessionHandleSchema, 'POST', '/v1/sessions', body);
    }

    userView(sessionId: string): Promise<UserView> {
        return this.json(userViewSchema, 'GET', `/v1/sessions/${sessionId}/user`);
    }

    checklistView(sessionId: string): Promise<ChecklistView> {
        return this.json(checklistViewSchema, 'GET', `/v1/sessions/${sessionId}/checklist`);
    }

    async updateChecklist(
        sessionId: string,
        item: number,
        done: boolean,
    ): Promise<ChecklistItem[]> {
        const ack = await this.json(checklistAckSchema, 'POST',
            `/v1/sessions/${sessionId}/checklist`, { item, done });
        return ack.checklist;
    }

    sendUserMessage(sessionId: string, text: string): Promise<MessageAck> {
        return this.json(messageAckSchema, 'POST',
            `/v1/sessions/${sessionId}/user/messages`, { text });
    }

    agentView(sessionId: string): Promise<AgentView> {
        return this.json(agentViewSchema, 'GET', `/v1/sessions/${sessionId}/agent`);
    }

    async manualView(sessionId: string): Promise<Manual> {
        const doc = await this.json(z.object({ manual: manualSchema }), 'GET',
            `/v1/sessions/${sessionId}/manual`);
        return doc.manual;
    }

    async search(sessionId: string, query: string, limit = 5): Promise<SearchHit[]> {
        const qs = `q=${encodeURIComponent(query)}&limit=${limit}`;
        const doc = await this.json(z.object({ hits: z.array(searchHitSchema) }),
            'GET', `/v1/sessions/${sessionId}/search?${qs}`);
        return doc.hits;
    }

    submitSelection(sessionId: string, instructionIds: string[]): Promise<SelectAck> {
        return this.json(selectAckSchema, 'POST',
            `/v1/sessions/${sessionId}/selections`, { instruction_ids: instructionIds });
    }

    async submitCall(
        sessionId: string,
        instructionId: string,
        args: Record<string, string>,
    ): Promise<CallOutcome> {
        const ack = await this.json(callAckSchema, 'POST',
            `/v1/sessions/${sessionId}/calls`, { instruction_id: instructionId, args });
        return ack.result;
    }

    sendAgentMessage(sessionId: string, text: string): Promise<AgentMessageAck> {
        return this.json(agentMessageAckSchema, 'POST',
            `/v1/sessions/${sessionId}/agent/messages`, { text });
    }

    finalize(sessionId: string): Promise<FinalizeAck> {
        return this.json(finalizeAckSchema, 'POST', `/v1/sessions/${sessionId}/finalize`, {});
    }

    async reopen(sessionId: string): Promise<string> {
        const ack = await this.json(reopenAckSchema, 'POST',
            `/v1/sessions/${sessionId}/reopen`, {});
        return ack.status;
    }

    downloadCorpus(): Promise<string> {
        return this.request('GET', '/v1/corpus');
    }
}
