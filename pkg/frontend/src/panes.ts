// The two halves of the console. Each pane owns a client holding only
// its own capability token, so the wall between the user side and the
// agent side is enforced by construction: the user pane has no method
// that could reach the manual, and the agent pane none that could reach
// the checklist.

import { CollectClient } from './client.js';
import { ApiForm, buildApiForm, formArgs, isDirty, missingRequired } from './form.js';
import { SelectionSet } from './selection.js';
import {
    AgentMessageAck,
    AgentView,
    CallOutcome,
    ChecklistItem,
    ChecklistView,
    FinalizeAck,
    Instruction,
    Manual,
    MessageAck,
    Phase,
    SearchHit,
    SessionHandle,
    UserView,
} from './wire.js';

export class UserPane {
    constructor(
        private readonly api: CollectClient,
        readonly sessionId: string,
    ) {}

    get trace() {
        return this.api.trace;
    }

    view(): Promise<UserView> {
        return this.api.userView(this.sessionId);
    }

    checklist(): Promise<ChecklistView> {
        return this.api.checklistView(this.sessionId);
    }

    say(text: string): Promise<MessageAck> {
        return this.api.sendUserMessage(this.sessionId, text);
    }

    setItem(item: number, done: boolean): Promise<ChecklistItem[]> {
        return this.api.updateChecklist(this.sessionId, item, done);
    }

    finalize(): Promise<FinalizeAck> {
        return this.api.finalize(this.sessionId);
    }

    reopen(): Promise<string> {
        return this.api.reopen(this.sessionId);
    }
}

export class AgentPane {
    readonly selection = new SelectionSet();
    form: ApiForm | null = null;
    private manualCache: Manual | null = null;

    constructor(
        private readonly api: CollectClient,
        readonly sessionId: string,
    ) {}

    get trace() {
        return this.api.trace;
    }

    async manual(): Promise<Manual> {
        if (!this.manualCache) {
            this.manualCache = await this.api.manualView(this.sessionId);
        }
        return this.manualCache;
    }

    search(query: string, limit = 5): Promise<SearchHit[]> {
        return this.api.search(this.sessionId, query, limit);
    }

    view(): Promise<AgentView> {
        return this.api.agentView(this.sessionId);
    }

    async instruction(id: string): Promise<Instruction> {
        const manual = await this.manual();
        const found = manual.instructions.find((ins) => ins.id === id);
        if (!found) {
            throw new Error(`unknown instruction ${id}`);
        }
        return found;
    }

    /** Local toggle only; returns false when a new pick would exceed the cap. */
    toggleCandidate(id: string): boolean {
        return this.selection.toggle(id);
    }

    async commitSelection(): Promise<string[]> {
        const ack = await this.api.submitSelection(this.sessionId, this.selection.list());
        return ack.selected;
    }

    async openForm(instructionId: string): Promise<ApiForm> {
        const form = buildApiForm(await this.instruction(instructionId));
        if (!form) {
            throw new Error(`${instructionId} has no api to call`);
        }
        this.form = form;
        return form;
    }

    setField(attr: string, value: string): void {
        if (!this.form) {
            throw new Error('no form open');
        }
        const field = this.form.fields.find((f) => f.attr === attr);
        if (!field) {
            throw new Error(`no form field ${attr}`);
        }
        field.value = value;
    }

    hasUnsavedInput(): boolean {
        return this.form !== null && isDirty(this.form);
    }

    async submitForm(): Promise<CallOutcome> {
        if (!this.form) {
            throw new Error('no form open');
        }
        const missing = missingRequired(this.form);
        if (missing.length > 0) {
            throw new Error(`required fields empty: ${missing.join(', ')}`);
        }
        const outcome = await this.api.submitCall(
            this.sessionId, this.form.instructionId, formArgs(this.form));
        this.form = null;
        return outcome;
    }

    discardForm(): void {
        this.form = null;
    }

    async respond(text: string): Promise<AgentMessageAck> {
        const ack = await this.api.sendAgentMessage(this.sessionId, text);
        this.selection.clear();
        return ack;
    }
}

export type Role = 'user' | 'agent';

export interface ChatLine {
    role: Role;
    text: string;
    confirmed: boolean;
    turn: number | null;
}

// One worker playing both sides. Keeps an optimistic local transcript
// and reconciles it against whichever view the active role may read.
export class SessionConsole {
    readonly user: UserPane;
    readonly agent: AgentPane;
    readonly chat: ChatLine[] = [];
    role: Role = 'user';
    phase: Phase = 'user';

    constructor(base: CollectClient, handle: SessionHandle) {
        this.user = new UserPane(base.withToken(handle.user_token), handle.session_id);
        this.agent = new AgentPane(base.withToken(handle.agent_token), handle.session_id);
    }

    canSend(): boolean {
        return this.role === this.phase;
    }

    switchRole(): Role {
        if (this.role === 'agent' && this.agent.hasUnsavedInput()) {
            throw new Error('finish or discard the api form first');
        }
        this.role = this.role === 'user' ? 'agent' : 'user';
        return this.role;
    }

    async sendUser(text: string): Promise<void> {
        if (this.role !== 'user') {
            throw new Error('user pane is not active');
        }
        if (this.phase !== 'user') {
            throw new Error('wait for the agent to reply');
        }
        const line: ChatLine = { role: 'user', text, confirmed: false, turn: null };
        this.chat.push(line);
        try {
            const ack = await this.user.say(text);
            line.confirmed = true;
            line.turn = ack.turn;
            this.phase = ack.phase;
        } catch (err) {
            this.chat.splice(this.chat.indexOf(line), 1);
            throw err;
        }
    }

    async sendAgent(text: string): Promise<void> {
        if (this.role !== 'agent') {
            throw new Error('agent pane is not active');
        }
        if (this.phase !== 'agent') {
            throw new Error('no user message to answer');
        }
        const line: ChatLine = { role: 'agent', text, confirmed: false, turn: null };
        this.chat.push(line);
        try {
            const ack = await this.agent.respond(text);
            line.confirmed = true;
            line.turn = ack.turn;
            this.phase = ack.phase;
        } catch (err) {
            this.chat.splice(this.chat.indexOf(line), 1);
            throw err;
        }
    }

    /** Replace the optimistic transcript with what the server actually logged. */
    async reconcile(): Promise<void> {
        const lines: ChatLine[] = [];
        if (this.role === 'user') {
            const view = await this.user.view();
            for (const turn of view.transcript) {
                lines.push({ role: 'user', text: turn.user, confirmed: true, turn: turn.turn });
                lines.push({ role: 'agent', text: turn.agent, confirmed: true, turn: turn.turn });
            }
            // the server reports no pending message as '' on this view
            if (view.pending_user_message) {
                lines.push({
                    role: 'user',
                    text: view.pending_user_message,
                    confirmed: true,
                    turn: view.turn_count,
                });
            }
            this.phase = view.phase;
        } else {
            const view = await this.agent.view();
            for (const turn of view.transcript) {
                lines.push({
                    role: 'user', text: turn.user_utterance, confirmed: true, turn: turn.index,
                });
                lines.push({
                    role: 'agent', text: turn.agent_response, confirmed: true, turn: turn.index,
                });
            }
            if (view.pending.user_message) {
                lines.push({
                    role: 'user',
                    text: view.pending.user_message,
                    confirmed: true,
                    turn: view.turn_count,
                });
            }
            this.phase = view.phase;
        }
        this.chat.splice(0, this.chat.length, ...lines);
    }
}
