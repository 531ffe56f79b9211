import { defineConfig } from 'vitest/config';

// Built assets are served by the API service under /ui.
export default defineConfig({
  base: '/ui/',
  build: { outDir: 'dist', target: 'es2020' },
  server: {
    // Same-origin paths in dev proxy to a locally running service.
    proxy: Object.fromEntries(
      ['papers', 'similar', 'projection', 'meta', 'chat', 'saved', 'templates', 'health'].map(
        (p) => [`/${p}`, 'http://127.0.0.1:8000'],
      ),
    ),
  },
  test: {
    environment: 'jsdom',
    include: ['test/**/*.test.ts'],
  },
});
