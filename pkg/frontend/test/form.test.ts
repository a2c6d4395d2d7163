import { describe, expect, it } from 'vitest';

import { buildApiForm, formArgs, isDirty, missingRequired } from '../src/form.js';
import { Instruction } from '../src/wire.js';
import { STUB_MANUAL } from './support/stub.js';

function fakeInstruction(arity: number): Instruction {
    return {
        id: `fake-${arity}`,
        family: 'fake',
        domain: 'hotel',
        condition: 'If asked, do the thing.',
        solution: 'Do the thing.',
        api: {
            name: 'fake_api',
            domain: 'hotel',
            operation: 'find',
            inputs: Array.from({ length: arity }, (_, i) => ({
                attr: `field${i}`,
                required: i % 2 === 0,
            })),
            outputs: [],
        },
        api_description: null,
    };
}

describe('buildApiForm', () => {
    it('emits exactly one field per declared input', () => {
        for (const instruction of STUB_MANUAL.instructions) {
            const form = buildApiForm(instruction as Instruction);
            if (instruction.api === null) {
                expect(form).toBeNull();
            } else {
                expect(form).not.toBeNull();
                expect(form!.fields.length).toBe(instruction.api.inputs.length);
                expect(form!.fields.map((f) => f.attr))
                    .toEqual(instruction.api.inputs.map((i) => i.attr));
            }
        }
    });

    it('holds field count equal to arity for any arity', () => {
        for (let arity = 0; arity <= 7; arity++) {
            const form = buildApiForm(fakeInstruction(arity));
            expect(form!.fields.length).toBe(arity);
        }
    });

    it('marks optional inputs in the label', () => {
        const form = buildApiForm(STUB_MANUAL.instructions[1] as Instruction)!;
        const stay = form.fields.find((f) => f.attr === 'stay')!;
        const name = form.fields.find((f) => f.attr === 'name')!;
        expect(stay.required).toBe(false);
        expect(stay.label).toBe('stay (optional)');
        expect(name.label).toBe('name');
    });

    it('pulls the hint sentence that mentions the attribute', () => {
        const form = buildApiForm(STUB_MANUAL.instructions[1] as Instruction)!;
        const people = form.fields.find((f) => f.attr === 'people')!;
        expect(people.hint).toContain('guests');
        const day = form.fields.find((f) => f.attr === 'day')!;
        expect(day.hint).toContain('needs the name and the day');
    });
});

describe('form state helpers', () => {
    it('reports empty required fields and drops blank optionals from args', () => {
        const form = buildApiForm(STUB_MANUAL.instructions[1] as Instruction)!;
        expect(missingRequired(form)).toEqual(['name', 'day', 'people']);
        expect(isDirty(form)).toBe(false);

        for (const field of form.fields) {
            if (field.required) {
                field.value = ` some ${field.attr} `;
            }
        }
        expect(missingRequired(form)).toEqual([]);
        expect(isDirty(form)).toBe(true);
        const args = formArgs(form);
        expect(Object.keys(args).sort()).toEqual(['day', 'name', 'people']);
        expect(args.name).toBe('some name');
    });
});
