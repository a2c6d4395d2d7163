// Live suite: boots the real backend in a child process and drives a
// complete self-play session through the console, exactly as a worker
// would. The exported dialogue is then checked by the reference
// validator running in a separate python process.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { CollectClient } from '../src/client.js';
import { buildApiForm } from '../src/form.js';
import { SessionConsole } from '../src/panes.js';
import { Backend, startBackend, validateExport } from './support/backend.js';

const GOAL = [
    '[constraint] hotel | area = north',
    '[request] hotel | phone',
    '[booking] hotel',
    '[constraint] restaurant | food = italian',
    '[request] restaurant | address',
].join('\n');

let backend: Backend;
let base: CollectClient;
let console_: SessionConsole;

beforeAll(async () => {
    backend = await startBackend();
    base = new CollectClient(backend.baseUrl);
    const handle = await base.createSession({ goalChecklist: GOAL, manualId: 'm00' });
    console_ = new SessionConsole(base, handle);
});

afterAll(() => {
    backend?.stop();
});

// one user turn followed by the matching agent turn
async function exchange(
    userText: string,
    instructionId: string | null,
    args: Record<string, string> | null,
    agentText: (value: string) => string,
    pick?: (outcome: { entity_names: string[]; reference: string;
        attributes: Record<string, string> }) => string,
): Promise<string> {
    await console_.sendUser(userText);
    console_.switchRole();

    let value = '';
    if (instructionId !== null) {
        console_.agent.toggleCandidate(instructionId);
        const logged = await console_.agent.commitSelection();
        expect(logged).toContain(instructionId);
        if (args !== null) {
            const form = await console_.agent.openForm(instructionId);
            expect(Object.keys(args).every(
                (attr) => form.fields.some((f) => f.attr === attr))).toBe(true);
            for (const [attr, val] of Object.entries(args)) {
                console_.agent.setField(attr, val);
            }
            const outcome = await console_.agent.submitForm();
            expect(outcome.ok).toBe(true);
            if (pick) {
                value = pick(outcome);
            }
        }
    } else {
        await console_.agent.commitSelection();
    }

    await console_.sendAgent(agentText(value));
    console_.switchRole();
    return value;
}

describe('live session', () => {
    it('drives a full self-play session to a finalized, valid export', async () => {
        // a worker would find candidates through the search box first
        const hits = await console_.agent.search('search hotels by area', 8);
        expect(hits.length).toBeGreaterThan(0);
        const manual = await console_.agent.manual();
        const known = new Set(manual.instructions.map((ins) => ins.id));
        for (const hit of hits) {
            expect(known.has(hit.id)).toBe(true);
        }

        const hotel = await exchange(
            'I am looking for a hotel in the north, please.',
            'hotel-search-area',
            { area: 'north' },
            (v) => `How about ${v}? It is a nice place in the north.`,
            (out) => out.entity_names[0],
        );
        expect(hotel).not.toBe('');

        const phone = await exchange(
            `What is the phone number of ${hotel}?`,
            'hotel-answer-phone',
            { name: hotel },
            (v) => `The phone number is ${v}.`,
            (out) => out.attributes.phone,
        );
        expect(phone).toMatch(/\d/);

        const reference = await exchange(
            `Please book ${hotel} for 2 people on friday, staying 3 nights.`,
            'hotel-book',
            { name: hotel, day: 'friday', people: '2 people', stay: '3 nights' },
            (v) => `Booked. Your reference number is ${v}.`,
            (out) => out.reference,
        );
        expect(reference).not.toBe('');

        const restaurant = await exchange(
            'I also need an italian restaurant.',
            'restaurant-search-food',
            { food: 'italian' },
            (v) => `How about ${v}? It serves italian food.`,
            (out) => out.entity_names[0],
        );
        expect(restaurant).not.toBe('');

        await exchange(
            `What is the address of ${restaurant}?`,
            'restaurant-answer-address',
            { name: restaurant },
            (v) => `The address is ${v}.`,
            (out) => out.attributes.address,
        );

        await exchange(
            'Perfect, that is everything. Thank you!',
            null,
            null,
            () => 'You are welcome. Goodbye!',
        );

        for (let item = 0; item < 5; item++) {
            await console_.user.setItem(item, true);
        }
        const ack = await console_.user.finalize();
        expect(ack.problems).toEqual([]);
        expect(ack.status).toBe('finalized');

        const corpus = await base.downloadCorpus();
        const lines = corpus.trim().split('\n');
        expect(lines.length).toBe(1);
        expect(JSON.parse(lines[0]).kind).toBe('dialogue');

        const verdict = await validateExport(corpus);
        expect(verdict.dialogues).toBe(1);
        expect(verdict.problems).toEqual([]);
    });

    it('kept each pane on its own side of the wall', () => {
        const userPaths = console_.user.trace.map((t) => t.path);
        const agentPaths = console_.agent.trace.map((t) => t.path);
        expect(userPaths.length).toBeGreaterThan(5);
        expect(agentPaths.length).toBeGreaterThan(5);

        expect(userPaths.filter((p) => p.includes('/manual'))).toEqual([]);
        expect(userPaths.filter((p) => p.includes('/search'))).toEqual([]);
        expect(agentPaths.filter((p) => p.includes('/checklist'))).toEqual([]);
    });

    it('builds forms whose field count matches the arity of every real instruction', async () => {
        const manual = await console_.agent.manual();
        expect(manual.instructions.length).toBeGreaterThan(10);
        for (const instruction of manual.instructions) {
            const form = buildApiForm(instruction);
            if (instruction.api === null) {
                expect(form).toBeNull();
            } else {
                expect(form!.fields.length).toBe(instruction.api.inputs.length);
            }
        }
    });

    it('keeps the eleventh pick local against the real backend', async () => {
        const manual = await console_.agent.manual();
        const ids = manual.instructions.slice(0, 11).map((ins) => ins.id);
        console_.agent.selection.clear();
        for (const id of ids.slice(0, 10)) {
            expect(console_.agent.toggleCandidate(id)).toBe(true);
        }
        const before = console_.agent.trace.length;
        expect(console_.agent.toggleCandidate(ids[10])).toBe(false);
        expect(console_.agent.trace.length).toBe(before);
        console_.agent.selection.clear();
    });

    it('reconciles the optimistic transcript against the server log', async () => {
        await console_.reconcile();
        const confirmed = console_.chat.filter((l) => l.confirmed);
        expect(confirmed.length).toBe(console_.chat.length);
        expect(console_.chat.length).toBe(12);
        expect(console_.chat[0].text).toBe('I am looking for a hotel in the north, please.');
        expect(console_.chat[11].text).toBe('You are welcome. Goodbye!');
    });
});
