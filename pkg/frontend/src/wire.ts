// Wire types for the collection service. Every inbound payload goes
// through zod so a drifting server fails loudly instead of rendering
// half a view.

import { z } from 'zod';

export const apiInputSchema = z.object({
    attr: z.string(),
    required: z.boolean(),
});

export const apiShapeSchema = z.object({
    name: z.string(),
    domain: z.string(),
    operation: z.string(),
    inputs: z.array(apiInputSchema),
    outputs: z.array(z.string()),
});

export const instructionSchema = z
    .object({
        id: z.string(),
        family: z.string(),
        domain: z.string(),
        condition: z.string(),
        solution: z.string(),
        api: apiShapeSchema.nullable(),
        api_description: z.string().nullable(),
    })
    .passthrough();

export const manualSchema = z
    .object({
        id: z.string(),
        instructions: z.array(instructionSchema),
    })
    .passthrough();

export const checklistItemSchema = z.object({
    text: z.string(),
    done: z.boolean(),
});

export const sessionHandleSchema = z.object({
    session_id: z.string(),
    user_token: z.string(),
    agent_token: z.string(),
    manual_id: z.string(),
    checklist: z.array(checklistItemSchema),
});

const phaseSchema = z.enum(['user', 'agent']);

export const userTurnSchema = z.object({
    turn: z.number(),
    user: z.string(),
    agent: z.string(),
});

export const userViewSchema = z.object({
    session_id: z.string(),
    status: z.string(),
    phase: phaseSchema,
    turn_count: z.number(),
    transcript: z.array(userTurnSchema),
    pending_user_message: z.string().nullable(),
    problems: z.array(z.string()),
});

export const checklistViewSchema = z.object({
    session_id: z.string(),
    description: z.string(),
    checklist: z.array(checklistItemSchema),
});

export const callOutcomeSchema = z.object({
    operation: z.string(),
    count: z.number(),
    entity_names: z.array(z.string()),
    reference: z.string(),
    ok: z.boolean(),
    attributes: z.record(z.string(), z.string()),
    extras: z.record(z.string(), z.unknown()),
});

export const wireArgSchema = z.object({
    attr: z.string(),
    value: z.string(),
});

export const wireCallSchema = z.object({
    instruction_id: z.string(),
    api: apiShapeSchema,
    args: z.array(wireArgSchema),
});

export const agentTurnSchema = z.object({
    index: z.number(),
    user_utterance: z.string(),
    agent_response: z.string(),
    selected_instructions: z.array(z.string()),
    api_calls: z.array(wireCallSchema),
    api_results: z.array(callOutcomeSchema),
});

export const agentViewSchema = z.object({
    session_id: z.string(),
    status: z.string(),
    phase: phaseSchema,
    manual_id: z.string(),
    turn_count: z.number(),
    transcript: z.array(agentTurnSchema),
    pending: z.object({
        user_message: z.string().nullable(),
        selected: z.array(z.string()),
        calls: z.array(wireCallSchema),
        results: z.array(callOutcomeSchema),
    }),
});

export const searchHitSchema = z.object({
    id: z.string(),
    score: z.number(),
    condition: z.string(),
    solution: z.string(),
    api_description: z.string().nullable(),
    inputs: z.array(z.string()),
});

// acks returned by the mutation endpoints

export const messageAckSchema = z.object({
    turn: z.number(),
    phase: phaseSchema,
});

export const selectAckSchema = z.object({
    selected: z.array(z.string()),
    flagged_for_review: z.boolean(),
});

export const callAckSchema = z.object({
    result: callOutcomeSchema,
});

export const agentMessageAckSchema = z.object({
    turn: z.number(),
    needs_review: z.boolean(),
    phase: phaseSchema,
});

export const checklistAckSchema = z.object({
    checklist: z.array(checklistItemSchema),
});

export const finalizeAckSchema = z.object({
    status: z.string(),
    problems: z.array(z.string()),
});

export const reopenAckSchema = z.object({
    status: z.string(),
});

export type ApiInput = z.infer<typeof apiInputSchema>;
export type ApiShape = z.infer<typeof apiShapeSchema>;
export type Instruction = z.infer<typeof instructionSchema>;
export type Manual = z.infer<typeof manualSchema>;
export type ChecklistItem = z.infer<typeof checklistItemSchema>;
export type SessionHandle = z.infer<typeof sessionHandleSchema>;
export type Phase = z.infer<typeof phaseSchema>;
export type UserView = z.infer<typeof userViewSchema>;
export type ChecklistView = z.infer<typeof checklistViewSchema>;
export type CallOutcome = z.infer<typeof callOutcomeSchema>;
export type AgentTurn = z.infer<typeof agentTurnSchema>;
export type AgentView = z.infer<typeof agentViewSchema>;
export type SearchHit = z.infer<typeof searchHitSchema>;
export type MessageAck = z.infer<typeof messageAckSchema>;
export type SelectAck = z.infer<typeof selectAckSchema>;
export type AgentMessageAck = z.infer<typeof agentMessageAckSchema>;
export type FinalizeAck = z.infer<typeof finalizeAckSchema>;

export class ServiceError extends Error {
    constructor(
        readonly kind: string,
        message: string,
        readonly status: number,
    ) {
        super(message);
        this.name = 'ServiceError';
    }
}
