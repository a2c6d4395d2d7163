// API form model. The form is derived entirely from the instruction the
// agent picked: one text field per declared input, nothing invented on
// the client.

import { Instruction } from './wire.js';

export interface FormField {
    attr: string;
    required: boolean;
    label: string;
    // sentence of the api description that mentions the attribute, if any
    hint: string;
    value: string;
}

export interface ApiForm {
    instructionId: string;
    apiName: string;
    operation: string;
    fields: FormField[];
}

export function buildApiForm(instruction: Instruction): ApiForm | null {
    const api = instruction.api;
    if (!api) {
        return null;
    }
    return {
        instructionId: instruction.id,
        apiName: api.name,
        operation: api.operation,
        fields: api.inputs.map((input) => ({
            attr: input.attr,
            required: input.required,
            label: input.required ? input.attr : `${input.attr} (optional)`,
            hint: hintFor(input.attr, instruction.api_description),
            value: '',
        })),
    };
}

function hintFor(attr: string, description: string | null): string {
    if (!description) {
        return '';
    }
    const sentences = description.split(/(?<=[.;])\s+/);
    return sentences.find((s) => s.toLowerCase().includes(attr.toLowerCase())) ?? '';
}

export function missingRequired(form: ApiForm): string[] {
    return form.fields
        .filter((f) => f.required && f.value.trim() === '')
        .map((f) => f.attr);
}

// blank optional fields stay off the wire
export function formArgs(form: ApiForm): Record<string, string> {
    const args: Record<string, string> = {};
    for (const field of form.fields) {
        const value = field.value.trim();
        if (value !== '') {
            args[field.attr] = value;
        }
    }
    return args;
}

export function isDirty(form: ApiForm): boolean {
    return form.fields.some((f) => f.value.trim() !== '');
}
