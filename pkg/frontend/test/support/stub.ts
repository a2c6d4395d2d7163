// In-memory fake of the collection service, just honest enough for the
// hermetic tests: token wall, phase flips, transcript assembly. It
// deliberately does NOT mirror the selection cap, so any cap observed in
// a test is proven to live in the client.

import { FetchLike } from '../../src/client.js';

export const STUB_MANUAL = {
    id: 'stub-manual',
    paraphrase_set: 0,
    instructions: [
        {
            id: 'hotel-search-area',
            family: 'search-area',
            domain: 'hotel',
            condition: 'If the user names an area for the hotel, search by it.',
            solution: 'Run hotel_search on the area and offer a result.',
            api: {
                name: 'hotel_search',
                domain: 'hotel',
                operation: 'find',
                inputs: [{ attr: 'area', required: true }],
                outputs: ['choice', 'name'],
            },
            api_description: 'hotel_search filters hotels; give it the area.',
        },
        {
            id: 'hotel-book',
            family: 'book',
            domain: 'hotel',
            condition: 'If the user wants the hotel reserved, collect the details and book.',
            solution: 'Call hotel_book and read the reference back.',
            api: {
                name: 'hotel_book',
                domain: 'hotel',
                operation: 'add',
                inputs: [
                    { attr: 'name', required: true },
                    { attr: 'day', required: true },
                    { attr: 'people', required: true },
                    { attr: 'stay', required: false },
                ],
                outputs: ['reference num.'],
            },
            api_description:
                'hotel_book reserves a room. It needs the name and the day; '
                + 'people says how many guests; stay is the number of nights.',
        },
        {
            id: 'hotel-goodbye',
            family: 'goodbye',
            domain: 'hotel',
            condition: 'If the user is done, wish them well.',
            solution: 'Say goodbye.',
            api: null,
            api_description: null,
        },
    ],
};

const USER_TOKEN = 'user-token-0001';
const AGENT_TOKEN = 'agent-token-0001';

interface StubTurn {
    index: number;
    user_utterance: string;
    agent_response: string;
    selected_instructions: string[];
    api_calls: unknown[];
    api_results: unknown[];
}

export class StubService {
    readonly requests: { method: string; path: string; body: unknown }[] = [];
    status = 'open';
    phase: 'user' | 'agent' = 'user';
    pendingMessage: string | null = null;
    pendingSelected: string[] = [];
    turns: StubTurn[] = [];
    checklist = [
        { text: '[constraint] hotel | area = north', done: false },
        { text: '[request] hotel | phone', done: false },
    ];
    // tests flip this to make the next mutation fail
    failNext = false;

    readonly fetch: FetchLike = async (url, init) => {
        const target = new URL(url, 'http://stub.local');
        const path = target.pathname + target.search;
        const body = init.body === undefined ? undefined : JSON.parse(init.body);
        this.requests.push({ method: init.method, path, body });
        try {
            const out = this.route(init.method, target, body, init.headers);
            const text = typeof out === 'string' ? out : JSON.stringify(out);
            return { ok: true, status: 200, text: async () => text };
        } catch (err) {
            const fail = err as StubError;
            const doc = { error: { type: fail.kind, message: fail.message } };
            return {
                ok: false,
                status: fail.status,
                text: async () => JSON.stringify(doc),
            };
        }
    };

    private route(
        method: string,
        target: URL,
        body: Record<string, unknown> | undefined,
        headers: Record<string, string>,
    ): unknown {
        const token = headers['x-collect-token'] ?? '';
        const path = target.pathname;
        if (this.failNext && method === 'POST') {
            this.failNext = false;
            throw new StubError('SequencingError', 'injected failure', 409);
        }
        if (method === 'POST' && path === '/v1/sessions') {
            return {
                session_id: 'stub-session',
                user_token: USER_TOKEN,
                agent_token: AGENT_TOKEN,
                manual_id: STUB_MANUAL.id,
                checklist: this.checklist,
            };
        }
        if (path === '/v1/corpus') {
            return '';
        }
        const tail = path.replace(/^\/v1\/sessions\/[^/]+\//, '');
        const asUser = () => this.requireToken(token, USER_TOKEN);
        const asAgent = () => this.requireToken(token, AGENT_TOKEN);
        if (method === 'GET' && tail === 'user') {
            asUser();
            return {
                session_id: 'stub-session',
                status: this.status,
                phase: this.phase,
                turn_count: this.turns.length,
                transcript: this.turns.map((t) => ({
                    turn: t.index, user: t.user_utterance, agent: t.agent_response,
                })),
                pending_user_message: this.pendingMessage,
                problems: [],
            };
        }
        if (method === 'GET' && tail === 'checklist') {
            asUser();
            return {
                session_id: 'stub-session',
                description: 'You need a hotel up north; find out the phone.',
                checklist: this.checklist,
            };
        }
        if (method === 'POST' && tail === 'checklist') {
            asUser();
            const item = Number(body?.item);
            this.checklist[item].done = Boolean(body?.done);
            return { checklist: this.checklist };
        }
        if (method === 'POST' && tail === 'user/messages') {
            asUser();
            if (this.phase !== 'user') {
                throw new StubError('SequencingError', 'agent has not answered', 409);
            }
            this.pendingMessage = String(body?.text ?? '');
            this.phase = 'agent';
            return { turn: this.turns.length, phase: this.phase };
        }
        if (method === 'POST' && tail === 'finalize') {
            asUser();
            this.status = 'finalized';
            return { status: this.status, problems: [] };
        }
        if (method === 'POST' && tail === 'reopen') {
            asUser();
            this.status = 'open';
            return { status: this.status };
        }
        if (method === 'GET' && tail === 'agent') {
            asAgent();
            return {
                session_id: 'stub-session',
                status: this.status,
                phase: this.phase,
                manual_id: STUB_MANUAL.id,
                turn_count: this.turns.length,
                transcript: this.turns,
                pending: {
                    user_message: this.pendingMessage,
                    selected: this.pendingSelected,
                    calls: [],
                    results: [],
                },
            };
        }
        if (method === 'GET' && tail === 'manual') {
            asAgent();
            return { manual: STUB_MANUAL };
        }
        if (method === 'GET' && tail.startsWith('search')) {
            asAgent();
            const query = target.searchParams.get('q') ?? '';
            const hits = STUB_MANUAL.instructions
                .filter((ins) => ins.condition.includes(query) || query === '')
                .map((ins) => ({
                    id: ins.id,
                    score: 0.5,
                    condition: ins.condition,
                    solution: ins.solution,
                    api_description: ins.api_description,
                    inputs: ins.api ? ins.api.inputs.map((i) => i.attr) : [],
                }));
            return { hits };
        }
        if (method === 'POST' && tail === 'selections') {
            asAgent();
            this.pendingSelected = (body?.instruction_ids ?? []) as string[];
            return { selected: this.pendingSelected, flagged_for_review: false };
        }
        if (method === 'POST' && tail === 'calls') {
            asAgent();
            return {
                result: {
                    operation: 'find',
                    count: 2,
                    entity_names: ['quiet lagoon hotel', 'tidy nook house'],
                    reference: '',
                    ok: true,
                    attributes: { name: 'quiet lagoon hotel', phone: '555-0101' },
                    extras: {},
                },
            };
        }
        if (method === 'POST' && tail === 'agent/messages') {
            asAgent();
            if (this.phase !== 'agent') {
                throw new StubError('SequencingError', 'no user message', 409);
            }
            this.turns.push({
                index: this.turns.length,
                user_utterance: this.pendingMessage ?? '',
                agent_response: String(body?.text ?? ''),
                selected_instructions: this.pendingSelected,
                api_calls: [],
                api_results: [],
            });
            this.pendingMessage = null;
            this.pendingSelected = [];
            this.phase = 'user';
            return { turn: this.turns.length - 1, needs_review: false, phase: this.phase };
        }
        throw new StubError('NotFoundError', `no route for ${method} ${path}`, 404);
    }

    private requireToken(got: string, want: string): void {
        if (got !== want) {
            throw new StubError('AuthError', 'wrong token for this view', 403);
        }
    }
}

class StubError extends Error {
    constructor(
        readonly kind: string,
        message: string,
        readonly status: number,
    ) {
        super(message);
    }
}
