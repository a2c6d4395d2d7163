import { describe, expect, it } from 'vitest';

import { MAX_SELECTED, SelectionSet } from '../src/selection.js';

describe('SelectionSet', () => {
    it('accepts ten picks and refuses the eleventh', () => {
        const set = new SelectionSet();
        for (let i = 0; i < MAX_SELECTED; i++) {
            expect(set.add(`ins-${i}`)).toBe(true);
        }
        expect(set.size).toBe(10);
        expect(set.add('ins-10')).toBe(false);
        expect(set.size).toBe(10);
        expect(set.has('ins-10')).toBe(false);
    });

    it('frees a slot when a pick is toggled off', () => {
        const set = new SelectionSet();
        for (let i = 0; i < MAX_SELECTED; i++) {
            set.add(`ins-${i}`);
        }
        expect(set.toggle('ins-3')).toBe(true);
        expect(set.has('ins-3')).toBe(false);
        expect(set.add('ins-10')).toBe(true);
        expect(set.add('ins-11')).toBe(false);
    });

    it('treats re-adding an existing pick as a no-op', () => {
        const set = new SelectionSet();
        set.add('a');
        expect(set.add('a')).toBe(true);
        expect(set.size).toBe(1);
        expect(set.list()).toEqual(['a']);
    });

    it('clears back to empty', () => {
        const set = new SelectionSet();
        set.add('a');
        set.add('b');
        set.clear();
        expect(set.size).toBe(0);
        expect(set.list()).toEqual([]);
    });
});
