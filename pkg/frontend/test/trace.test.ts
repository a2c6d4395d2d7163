// Network-trace checks: each pane is exercised end to end against the
// stub backend and its recorded request paths are audited afterwards.
// The user side must never touch the manual (or its search index); the
// agent side must never touch the checklist.

import { beforeEach, describe, expect, it } from 'vitest';

import { CollectClient } from '../src/client.js';
import { AgentPane, UserPane } from '../src/panes.js';
import { StubService } from './support/stub.js';

const SID = 'stub-session';

let stub: StubService;
let userPane: UserPane;
let agentPane: AgentPane;

beforeEach(async () => {
    stub = new StubService();
    const base = new CollectClient('', '', stub.fetch);
    const handle = await base.createSession({});
    userPane = new UserPane(base.withToken(handle.user_token), SID);
    agentPane = new AgentPane(base.withToken(handle.agent_token), SID);
});

describe('user pane traffic', () => {
    it('never requests manual or search endpoints', async () => {
        await userPane.view();
        await userPane.checklist();
        await userPane.setItem(0, true);
        await userPane.say('I need a hotel in the north.');
        await agentPane.respond('How about the quiet lagoon hotel?');
        await userPane.view();
        await userPane.finalize();
        await userPane.reopen();

        const paths = userPane.trace.map((t) => t.path);
        expect(paths.length).toBeGreaterThan(5);
        expect(paths.filter((p) => p.includes('/manual'))).toEqual([]);
        expect(paths.filter((p) => p.includes('/search'))).toEqual([]);
    });
});

describe('agent pane traffic', () => {
    it('never requests checklist endpoints', async () => {
        await userPane.say('I need a hotel in the north.');

        await agentPane.manual();
        await agentPane.search('area');
        await agentPane.view();
        agentPane.toggleCandidate('hotel-search-area');
        await agentPane.commitSelection();
        await agentPane.openForm('hotel-search-area');
        agentPane.setField('area', 'north');
        await agentPane.submitForm();
        await agentPane.respond('How about the quiet lagoon hotel?');

        const paths = agentPane.trace.map((t) => t.path);
        expect(paths.length).toBeGreaterThan(5);
        expect(paths.filter((p) => p.includes('/checklist'))).toEqual([]);
    });

    it('sends nothing when the eleventh pick is refused', async () => {
        for (let i = 0; i < 10; i++) {
            expect(agentPane.toggleCandidate(`ins-${i}`)).toBe(true);
        }
        const before = agentPane.trace.length;
        expect(agentPane.toggleCandidate('ins-10')).toBe(false);
        expect(agentPane.trace.length).toBe(before);
        expect(agentPane.selection.size).toBe(10);
    });
});

describe('token wall', () => {
    it('is enforced server side as well: wrong token is rejected', async () => {
        const base = new CollectClient('', '', stub.fetch);
        const impostor = new UserPane(base.withToken('agent-token-0001'), SID);
        await expect(impostor.checklist()).rejects.toMatchObject({ status: 403 });
    });
});
