// Candidate multi-select. The service caps a turn at MAX_SELECTED
// instructions; the same cap is applied here so the 11th pick is refused
// before any request leaves the client.

export const MAX_SELECTED = 10;

export class SelectionSet {
    private readonly ids: string[] = [];

    get size(): number {
        return this.ids.length;
    }

    list(): string[] {
        return [...this.ids];
    }

    has(id: string): boolean {
        return this.ids.includes(id);
    }

    /** Returns false when the set is full and the id was not added. */
    add(id: string): boolean {
        if (this.has(id)) {
            return true;
        }
        if (this.ids.length >= MAX_SELECTED) {
            return false;
        }
        this.ids.push(id);
        return true;
    }

    toggle(id: string): boolean {
        if (this.has(id)) {
            this.remove(id);
            return true;
        }
        return this.add(id);
    }

    remove(id: string): void {
        const at = this.ids.indexOf(id);
        if (at >= 0) {
            this.ids.splice(at, 1);
        }
    }

    clear(): void {
        this.ids.length = 0;
    }
}
