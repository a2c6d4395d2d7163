// HTML fragments for both panes. Pure string builders: no DOM access,
// no state, so they render the same under tests and in the page.

import { ApiForm } from './form.js';
import { ChatLine } from './panes.js';
import { CallOutcome, ChecklistItem, SearchHit } from './wire.js';

export function escapeHtml(text: string): string {
    return text
        .replaceAll('&', '&amp;')
        .replaceAll('<', '&lt;')
        .replaceAll('>', '&gt;')
        .replaceAll('"', '&quot;');
}

export function renderChat(lines: ChatLine[]): string {
    const bubbles = lines.map((line) => {
        const cls = line.confirmed ? `msg ${line.role}` : `msg ${line.role} pending`;
        return `<div class="${cls}">${escapeHtml(line.text)}</div>`;
    });
    return `<div class="chat">${bubbles.join('')}</div>`;
}

export function renderChecklist(items: ChecklistItem[]): string {
    const rows = items.map((item, i) => {
        const checked = item.done ? ' checked' : '';
        return (
            `<li><label><input type="checkbox" data-item="${i}"${checked}> ` +
            `${escapeHtml(item.text)}</label></li>`
        );
    });
    return `<ul class="checklist">${rows.join('')}</ul>`;
}

export function renderCandidates(hits: SearchHit[], selected: string[]): string {
    const rows = hits.map((hit) => {
        const checked = selected.includes(hit.id) ? ' checked' : '';
        return (
            `<li><label><input type="checkbox" data-id="${escapeHtml(hit.id)}"${checked}> ` +
            `<b>${escapeHtml(hit.id)}</b> ${escapeHtml(hit.condition)}</label></li>`
        );
    });
    return `<ul class="candidates">${rows.join('')}</ul>`;
}

export function renderForm(form: ApiForm): string {
    const rows = form.fields.map((field) => {
        const hint = field.hint ? `<small>${escapeHtml(field.hint)}</small>` : '';
        return (
            `<label>${escapeHtml(field.label)}` +
            `<input type="text" data-attr="${escapeHtml(field.attr)}"` +
            ` value="${escapeHtml(field.value)}">${hint}</label>`
        );
    });
    return (
        `<form class="api-form" data-instruction="${escapeHtml(form.instructionId)}">` +
        `<h3>${escapeHtml(form.apiName)} (${escapeHtml(form.operation)})</h3>` +
        `${rows.join('')}<button type="submit">call</button></form>`
    );
}

export function renderOutcome(outcome: CallOutcome): string {
    const names = outcome.entity_names.map((n) => `<li>${escapeHtml(n)}</li>`).join('');
    const attrs = Object.entries(outcome.attributes)
        .map(([k, v]) => `<tr><td>${escapeHtml(k)}</td><td>${escapeHtml(v)}</td></tr>`)
        .join('');
    const reference = outcome.reference
        ? `<p>reference: <code>${escapeHtml(outcome.reference)}</code></p>`
        : '';
    return (
        `<div class="outcome ${outcome.ok ? 'ok' : 'failed'}">` +
        `<p>${escapeHtml(outcome.operation)}: ${outcome.count} match(es)</p>` +
        `<ul>${names}</ul>${reference}<table>${attrs}</table></div>`
    );
}
