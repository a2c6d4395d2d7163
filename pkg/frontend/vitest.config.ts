import { defineConfig } from 'vitest/config';

export default defineConfig({
    test: {
        include: ['test/**/*.test.ts'],
        // the live suite boots a real backend process, give it room
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
});
