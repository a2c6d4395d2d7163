// Browser entry point. The URL fragment carries everything needed to
// rejoin a session (#api=...&sid=...&user=...&agent=...&role=user), so
// a reload or a shared link lands in the same place. Nothing below the
// fragment is persisted client side; the server is the only truth.

import { CollectClient } from './client.js';
import { SessionConsole } from './panes.js';
import {
    renderCandidates, renderChat, renderChecklist, renderForm, renderOutcome,
} from './render.js';
import { SearchHit, SessionHandle } from './wire.js';

interface FragmentState {
    api: string;
    sid: string;
    user: string;
    agent: string;
    role: 'user' | 'agent';
}

function readFragment(): Partial<FragmentState> {
    const params = new URLSearchParams(window.location.hash.slice(1));
    const out: Partial<FragmentState> = {};
    const api = params.get('api');
    const sid = params.get('sid');
    const user = params.get('user');
    const agent = params.get('agent');
    const role = params.get('role');
    if (api) out.api = api;
    if (sid) out.sid = sid;
    if (user) out.user = user;
    if (agent) out.agent = agent;
    if (role === 'user' || role === 'agent') out.role = role;
    return out;
}

function writeFragment(state: FragmentState): void {
    const params = new URLSearchParams();
    params.set('api', state.api);
    params.set('sid', state.sid);
    params.set('user', state.user);
    params.set('agent', state.agent);
    params.set('role', state.role);
    window.location.hash = params.toString();
}

function el(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing #${id}`);
    }
    return node;
}

async function ensureSession(base: CollectClient): Promise<SessionHandle> {
    const frag = readFragment();
    if (frag.sid && frag.user && frag.agent) {
        return {
            session_id: frag.sid,
            user_token: frag.user,
            agent_token: frag.agent,
            manual_id: '',
            checklist: [],
        };
    }
    return base.createSession({});
}

class ConsoleApp {
    private candidates: SearchHit[] = [];
    private status = '';

    constructor(
        private readonly console: SessionConsole,
        private readonly apiBase: string,
        private readonly handle: SessionHandle,
    ) {}

    private note(text: string): void {
        this.status = text;
        el('status').textContent = text;
    }

    private syncFragment(): void {
        writeFragment({
            api: this.apiBase,
            sid: this.handle.session_id,
            user: this.handle.user_token,
            agent: this.handle.agent_token,
            role: this.console.role,
        });
    }

    async refresh(): Promise<void> {
        await this.console.reconcile();
        el('chat-box').innerHTML = renderChat(this.console.chat);
        el('user-pane').hidden = this.console.role !== 'user';
        el('agent-pane').hidden = this.console.role !== 'agent';
        el('role-label').textContent = `${this.console.role} side`;
        (el('send') as HTMLButtonElement).disabled = !this.console.canSend();
        if (this.console.role === 'user') {
            const checklist = await this.console.user.checklist();
            el('goal').textContent = checklist.description;
            el('checklist-box').innerHTML = renderChecklist(checklist.checklist);
        } else {
            el('candidate-box').innerHTML =
                renderCandidates(this.candidates, this.console.agent.selection.list());
            el('form-box').innerHTML =
                this.console.agent.form ? renderForm(this.console.agent.form) : '';
        }
        this.syncFragment();
    }

    wire(): void {
        el('switch-role').addEventListener('click', () => {
            try {
                this.console.switchRole();
                this.note('');
            } catch (err) {
                this.note(String(err));
            }
            void this.refresh();
        });

        el('send').addEventListener('click', () => {
            const input = el('message') as HTMLInputElement;
            const text = input.value.trim();
            if (!text) {
                return;
            }
            const send = this.console.role === 'user'
                ? this.console.sendUser(text)
                : this.console.sendAgent(text);
            send.then(() => {
                input.value = '';
                this.note('');
            }).catch((err) => this.note(String(err)))
                .finally(() => void this.refresh());
        });

        el('checklist-box').addEventListener('change', (event) => {
            const target = event.target as HTMLInputElement;
            const item = target.dataset.item;
            if (item === undefined) {
                return;
            }
            this.console.user.setItem(Number(item), target.checked)
                .catch((err) => this.note(String(err)));
        });

        el('search').addEventListener('click', () => {
            const query = (el('query') as HTMLInputElement).value.trim();
            if (!query) {
                return;
            }
            this.console.agent.search(query).then((hits) => {
                this.candidates = hits;
                return this.refresh();
            }).catch((err) => this.note(String(err)));
        });

        el('candidate-box').addEventListener('change', (event) => {
            const target = event.target as HTMLInputElement;
            const id = target.dataset.id;
            if (!id) {
                return;
            }
            if (!this.console.agent.toggleCandidate(id)) {
                target.checked = false;
                this.note('selection is full: drop one before adding another');
            }
            void this.refresh();
        });

        el('commit-selection').addEventListener('click', () => {
            this.console.agent.commitSelection()
                .then((ids) => this.note(`logged ${ids.length} instruction(s)`))
                .catch((err) => this.note(String(err)));
        });

        el('open-form').addEventListener('click', () => {
            const picked = this.console.agent.selection.list();
            if (picked.length === 0) {
                this.note('select an instruction first');
                return;
            }
            this.console.agent.openForm(picked[picked.length - 1])
                .then(() => this.refresh())
                .catch((err) => this.note(String(err)));
        });

        el('form-box').addEventListener('input', (event) => {
            const target = event.target as HTMLInputElement;
            if (target.dataset.attr) {
                this.console.agent.setField(target.dataset.attr, target.value);
            }
        });

        el('form-box').addEventListener('submit', (event) => {
            event.preventDefault();
            this.console.agent.submitForm().then((outcome) => {
                el('result-box').innerHTML = renderOutcome(outcome);
                return this.refresh();
            }).catch((err) => this.note(String(err)));
        });

        el('finalize').addEventListener('click', () => {
            this.console.user.finalize().then((ack) => {
                this.note(ack.status === 'finalized'
                    ? 'session finalized'
                    : `not finalized: ${ack.problems.join('; ')}`);
            }).catch((err) => this.note(String(err)));
        });
    }
}

async function boot(): Promise<void> {
    const frag = readFragment();
    const apiBase = frag.api ?? '';
    const base = new CollectClient(apiBase);
    const handle = await ensureSession(base);
    const app = new ConsoleApp(new SessionConsole(base, handle), apiBase, handle);
    app.wire();
    await app.refresh();
}

if (typeof document !== 'undefined' && document.getElementById('chat-box')) {
    boot().catch((err) => {
        const status = document.getElementById('status');
        if (status) {
            status.textContent = String(err);
        }
    });
}
